#include "carma_hawkes/likelihood.hpp"

#include "carma_hawkes/ks.hpp"
#include "carma_hawkes/state_space.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <type_traits>

namespace carma_hawkes::likelihood {

using model::DenseSystem;
using model::Mark;
using model::SpecError;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Neumaier compensated sum.
struct LogSum {
    double sum{0.0};
    double carry{0.0};
    void add(double v) {
        const double t = sum + v;
        carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    [[nodiscard]] double value() const { return sum + carry; }
};

void structural_check(const model::ValidationReport& r) {
    for (const auto& c : r.checks) {
        if (c.passed) continue;
        if (c.name == "structure" || c.name == "finite" || c.name == "baseline_positive" ||
            c.name == "ma_padding") {
            throw SpecError("invalid spec: " + r.failures());
        }
    }
}

template <typename Spec>
void screen(const Spec& spec, const LikelihoodOptions& options) {
    const auto report = model::validate(spec);
    if (options.require_valid_spec) {
        if (!report.valid()) throw SpecError("invalid spec: " + report.failures());
    } else {
        structural_check(report);
    }
}

// Reference evaluation of the closed form with e^{Abar dt} per event.
template <typename ColumnOf>
double loglik_dense(const DenseSystem& sys, const std::vector<double>& times, ColumnOf column,
                    double window_end) {
    const int m = sys.outputs();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.state_dim());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(m);
    double last = 0.0;
    LogSum log_sum;
    for (std::size_t i = 0; i < times.size(); ++i) {
        x = model::matrix_exponential(sys.abar, times[i] - last) * x;
        const int c = column(i);
        const double lam = sys.mu(c) + sys.loading.row(c).dot(x);
        if (!(lam > 0.0) || !std::isfinite(lam)) return kNegInf;
        log_sum.add(std::log(lam));
        x += sys.ebar.col(c);
        counts(c) += 1.0;
        last = times[i];
    }
    // x now holds s(n).
    if (window_end > last) x = model::matrix_exponential(sys.abar, window_end - last) * x;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.abar);
    const Eigen::RowVectorXd w = Eigen::RowVectorXd::Ones(m) * sys.loading;  // 1'B
    const Eigen::VectorXd ainv_s = lu.solve(x);
    const Eigen::VectorXd ainv_en = lu.solve(sys.ebar * counts);
    return -sys.mu.sum() * window_end + w.dot(ainv_en) - w.dot(ainv_s) + log_sum.value();
}

template <typename T>
struct ModalCoefficients {
    std::vector<T> eig;
    std::vector<T> jump;
    std::vector<T> load;   // outputs x modes
    std::vector<T> total;  // column sums of load divided by eig
};

template <typename T>
T narrow(const spectral::Complex& z) {
    if constexpr (std::is_same_v<T, double>) return z.real();
    else return z;
}

template <typename T>
double modal_impl(const spectral::ModalSystem& sys, std::span<const double> times,
                  std::span<const Mark> marks, double window_end) {
    const int d = sys.modes();
    const int m = sys.outputs;
    ModalCoefficients<T> c;
    for (int k = 0; k < d; ++k) {
        c.eig.push_back(narrow<T>(sys.eigenvalues[k]));
        c.jump.push_back(narrow<T>(sys.jump[k]));
    }
    for (int i = 0; i < m; ++i) {
        for (int k = 0; k < d; ++k) c.load.push_back(narrow<T>(sys.load(i, k)));
    }
    for (int k = 0; k < d; ++k) {
        T s{};
        for (int i = 0; i < m; ++i) s += c.load[static_cast<std::size_t>(i * d + k)];
        c.total.push_back(s / c.eig[static_cast<std::size_t>(k)]);
    }

    std::vector<T> z(static_cast<std::size_t>(d), T{});
    std::array<double, 2> counts{0.0, 0.0};
    double last = 0.0;
    LogSum log_sum;
    const bool marked = !marks.empty();
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double dt = times[i] - last;
        const int src = marked ? model::component_of(marks[i]) : 0;
        double lam = sys.mu[static_cast<std::size_t>(src)];
        const T* row = c.load.data() + static_cast<std::size_t>(src * d);
        for (int k = 0; k < d; ++k) {
            z[k] *= std::exp(c.eig[k] * dt);
            lam += std::real(row[k] * z[k]);
        }
        if (!(lam > 0.0) || !std::isfinite(lam)) return kNegInf;
        log_sum.add(std::log(lam));
        for (int k = 0; k < d; ++k) {
            if (sys.source[k] == src) z[k] += c.jump[k];
        }
        counts[static_cast<std::size_t>(src)] += 1.0;
        last = times[i];
    }
    const double tail = window_end - last;
    double comp = (sys.mu[0] + (m == 2 ? sys.mu[1] : 0.0)) * window_end;
    for (int k = 0; k < d; ++k) {
        const T zk = tail > 0.0 ? z[k] * std::exp(c.eig[k] * tail) : z[k];
        comp += std::real(c.total[k] * (zk - c.jump[k] * counts[static_cast<std::size_t>(sys.source[k])]));
    }
    return -comp + log_sum.value();
}

double window_for(const LikelihoodOptions& o, double last, double horizon) {
    return o.window == WindowEnd::LastEvent ? last : horizon;
}

// Per-output compensator at each requested time (sorted) via
// Lambda(t) = mu t + B Abar^{-1} (X_t - Ebar N_t), events <= t included.
template <typename ColumnOf>
std::vector<Eigen::VectorXd> compensator_path(const DenseSystem& sys, const std::vector<double>& times,
                                              ColumnOf column, std::span<const double> at) {
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.abar);
    const Eigen::MatrixXd b_ainv = sys.loading * lu.inverse();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.state_dim());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(sys.outputs());
    double last = 0.0;
    std::size_t k = 0;
    std::vector<Eigen::VectorXd> out;
    out.reserve(at.size());
    for (double t : at) {
        while (k < times.size() && times[k] <= t) {
            x = model::matrix_exponential(sys.abar, times[k] - last) * x + sys.ebar.col(column(k));
            counts(column(k)) += 1.0;
            last = times[k];
            ++k;
        }
        const Eigen::VectorXd xt = model::matrix_exponential(sys.abar, t - last) * x;
        out.push_back(sys.mu * t + b_ainv * (xt - sys.ebar * counts));
    }
    return out;
}

ResidualReport residual_report(std::vector<double> tau) {
    ResidualReport r;
    r.u.reserve(tau.size());
    double prev = 0.0;
    for (double t : tau) {
        // Lambda is non-decreasing; clamp rounding noise at the last ulp.
        r.u.push_back(std::max(0.0, t - prev));
        prev = t;
    }
    r.tau = std::move(tau);
    if (!r.u.empty()) {
        const auto ks = pipeline::ks_test_exp1(r.u);
        r.ks_statistic = ks.statistic;
        r.p_value = ks.p_value;
    }
    return r;
}

}  // namespace

double loglik_modal(const spectral::ModalSystem& sys, std::span<const double> times,
                    std::span<const Mark> marks, double window_end) {
    if (sys.real) return modal_impl<double>(sys, times, marks, window_end);
    return modal_impl<std::complex<double>>(sys, times, marks, window_end);
}

double loglik_univariate(const model::UnivariateSpec& spec, const model::EventSeries& events,
                         const LikelihoodOptions& options) {
    screen(spec, options);
    if (events.empty()) return -spec.mu * events.horizon();
    const double end = window_for(options, events.last_time(), events.horizon());
    if (options.method == Method::Modal) {
        return loglik_modal(spectral::modal_system(spec), events.times(), {}, end);
    }
    return loglik_dense(model::dense_system(spec), events.times(), [](std::size_t) { return 0; }, end);
}

double loglik_bivariate(const model::BivariateSpec& spec, const model::MarkedEventSeries& events,
                        const LikelihoodOptions& options) {
    screen(spec, options);
    if (events.empty()) return -spec.mu.sum() * events.horizon();
    const double end = window_for(options, events.last_time(), events.horizon());
    if (options.method == Method::Modal) {
        return loglik_modal(spectral::modal_system(spec), events.times(), events.marks(), end);
    }
    const auto& marks = events.marks();
    return loglik_dense(model::dense_system(spec), events.times(),
                        [&](std::size_t i) { return model::component_of(marks[i]); }, end);
}

RecursionState initial_state(const model::UnivariateSpec& spec) {
    return {Eigen::VectorXd::Zero(spec.order.p), 0.0, 0};
}

RecursionState initial_state(const model::BivariateSpec& spec) {
    return {Eigen::VectorXd::Zero(spec.order.p1 + spec.order.p2), 0.0, 0};
}

namespace {

RecursionState step(const DenseSystem& sys, const RecursionState& state, double t, int column) {
    if (!std::isfinite(t) || !(t > state.last_time)) {
        throw SpecError("recursion update needs a strictly later event time");
    }
    if (state.s.size() != sys.state_dim()) throw SpecError("recursion state has the wrong dimension");
    RecursionState next;
    next.s = sys.ebar.col(column) + model::matrix_exponential(sys.abar, t - state.last_time) * state.s;
    next.last_time = t;
    next.count = state.count + 1;
    return next;
}

}  // namespace

RecursionState update_recursion(const model::UnivariateSpec& spec, const RecursionState& state,
                                double next_time) {
    return step(model::dense_system(spec), state, next_time, 0);
}

RecursionState update_recursion(const model::BivariateSpec& spec, const RecursionState& state,
                                double next_time, Mark mark) {
    return step(model::dense_system(spec), state, next_time, model::component_of(mark));
}

double compensator(const model::UnivariateSpec& spec, const model::EventSeries& events, double t) {
    if (!(t >= 0.0) || t > events.horizon()) throw SpecError("compensator time outside [0, horizon]");
    const double at[] = {t};
    return compensator_path(model::dense_system(spec), events.times(), [](std::size_t) { return 0; },
                            at)
        .front()(0);
}

std::array<double, 2> compensator(const model::BivariateSpec& spec,
                                  const model::MarkedEventSeries& events, double t) {
    if (!(t >= 0.0) || t > events.horizon()) throw SpecError("compensator time outside [0, horizon]");
    const double at[] = {t};
    const auto& marks = events.marks();
    const auto v = compensator_path(model::dense_system(spec), events.times(),
                                    [&](std::size_t i) { return model::component_of(marks[i]); }, at)
                       .front();
    return {v(0), v(1)};
}

ResidualReport residual_times(const model::UnivariateSpec& spec, const model::EventSeries& events) {
    model::require_valid(spec);
    const auto path = compensator_path(model::dense_system(spec), events.times(),
                                       [](std::size_t) { return 0; }, events.times());
    std::vector<double> tau;
    tau.reserve(path.size());
    for (const auto& v : path) tau.push_back(v(0));
    return residual_report(std::move(tau));
}

std::array<ResidualReport, 2> residual_times(const model::BivariateSpec& spec,
                                             const model::MarkedEventSeries& events) {
    model::require_valid(spec);
    const auto& marks = events.marks();
    const auto path = compensator_path(model::dense_system(spec), events.times(),
                                       [&](std::size_t i) { return model::component_of(marks[i]); },
                                       events.times());
    std::array<std::vector<double>, 2> tau;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const int c = model::component_of(marks[i]);
        tau[static_cast<std::size_t>(c)].push_back(path[i](c));
    }
    return {residual_report(std::move(tau[0])), residual_report(std::move(tau[1]))};
}

}  // namespace carma_hawkes::likelihood
