#include "carma_hawkes/estimate.hpp"

#include "carma_hawkes/nelder_mead.hpp"
#include "carma_hawkes/rng.hpp"
#include "carma_hawkes/spectral.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

namespace carma_hawkes::estimate {

using model::BivariateOrder;
using model::BivariateSpec;
using model::UnivariateOrder;
using model::UnivariateSpec;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Polynomials are stored highest power first and monic: c[0] = 1 and
// z^p + a_1 z^{p-1} + ... + a_p has c[i] = a_i.
std::vector<double> poly_mul(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> out(x.size() + y.size() - 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < y.size(); ++j) out[i + j] += x[i] * y[j];
    }
    return out;
}

Eigen::VectorXd ar_from_poly(const std::vector<double>& c) {
    Eigen::VectorXd a(static_cast<Eigen::Index>(c.size() - 1));
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = c[static_cast<std::size_t>(i) + 1];
    return a;
}

// The autoregressive polynomial is a product of a linear factor z + e^{t}
// (odd p) and quadratics z^2 + e^{t1} z + e^{t2}, so every proposal is stable.
Eigen::VectorXd ar_from_theta(const double* theta, int p) {
    std::vector<double> c{1.0};
    int k = 0;
    if (p % 2 == 1) c = poly_mul(c, {1.0, std::exp(theta[k++])});
    while (k < p) {
        c = poly_mul(c, {1.0, std::exp(theta[k]), std::exp(theta[k + 1])});
        k += 2;
    }
    return ar_from_poly(c);
}

std::vector<double> theta_from_ar(const Eigen::VectorXd& a) {
    const auto eig = spectral::companion_eigenvalues(a);
    double scale = 0.0;
    for (const auto& z : eig) scale = std::max(scale, std::abs(z));
    const double tiny = 1e-10 * std::max(scale, 1.0);
    std::vector<double> reals;
    std::vector<spectral::Complex> upper;
    for (const auto& z : eig) {
        if (!(z.real() < 0.0)) throw FitError("autoregressive roots must have negative real parts");
        if (std::abs(z.imag()) <= tiny) reals.push_back(z.real());
        else if (z.imag() > 0.0) upper.push_back(z);
    }
    if (reals.size() + 2 * upper.size() != eig.size()) throw FitError("unpaired complex roots");
    std::sort(reals.begin(), reals.end());
    std::vector<double> theta;
    std::size_t r = 0;
    if (a.size() % 2 == 1) theta.push_back(std::log(-reals[r++]));
    for (; r + 1 < reals.size(); r += 2) {
        theta.push_back(std::log(-(reals[r] + reals[r + 1])));
        theta.push_back(std::log(reals[r] * reals[r + 1]));
    }
    for (const auto& z : upper) {
        theta.push_back(std::log(-2.0 * z.real()));
        theta.push_back(std::log(std::norm(z)));
    }
    return theta;
}

double spectral_radius(const Eigen::VectorXd& a) {
    double rho = 0.0;
    for (const auto& z : spectral::companion_eigenvalues(a)) rho = std::max(rho, std::abs(z));
    return rho;
}

// Simplex edge for each MA coefficient: b_i couples to z^i, so its natural
// scale is b_0 / rho^i.
void push_ma_steps(std::vector<double>& step, const Eigen::VectorXd& b, int q, double rho,
                   double fallback_b0) {
    const double b0 = std::abs(b(0)) > 0.0 ? std::abs(b(0)) : fallback_b0;
    for (int i = 0; i <= q; ++i) {
        step.push_back(0.1 * std::max(std::abs(b(i)), b0 / std::pow(std::max(rho, 1e-12), i)));
    }
}

struct Problem {
    int dim{0};
    std::function<double(const Eigen::VectorXd&)> objective;  // minus log-likelihood
};

struct StartPoint {
    Eigen::VectorXd x;
    Eigen::VectorXd step;
    bool from_init{false};
};

struct StartRun {
    StartSummary summary;
    Eigen::VectorXd x;
};

std::vector<StartRun> run_starts(const Problem& problem, const std::vector<StartPoint>& starts,
                                 const FitOptions& options) {
    std::vector<StartRun> runs(starts.size());
    NelderMeadOptions nm;
    nm.tolerance = options.tolerance;
    nm.max_evaluations = options.max_evaluations;

    auto work = [&](std::size_t i) {
        StartRun& run = runs[i];
        run.summary.index = static_cast<int>(i);
        run.summary.from_init = starts[i].from_init;
        const double f0 = problem.objective(starts[i].x);
        run.summary.initial_loglik = -f0;
        if (!std::isfinite(f0)) {
            run.summary.evaluations = 1;
            run.summary.final_loglik = -kInf;
            return;
        }
        const auto res = nelder_mead(problem.objective, starts[i].x, starts[i].step, nm);
        run.summary.valid = true;
        run.summary.final_loglik = -res.value;
        run.summary.evaluations = res.evaluations + 1;
        run.summary.converged = res.converged;
        run.x = res.x;
    };

    unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                            : options.threads;
    threads = std::min<unsigned>(threads, static_cast<unsigned>(starts.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < starts.size(); ++i) work(i);
        return runs;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < starts.size(); i = next++) work(i);
        });
    }
    for (auto& th : pool) th.join();
    return runs;
}

template <typename Spec, typename Decode>
FitResult finish(const std::vector<StartRun>& runs, Decode decode, int n_params) {
    OptimizerTrace trace;
    std::size_t total = 0;
    int best = -1;
    for (const auto& r : runs) {
        trace.starts.push_back(r.summary);
        total += r.summary.evaluations;
        if (!r.summary.valid) continue;
        if (best < 0 || r.summary.final_loglik > runs[static_cast<std::size_t>(best)].summary.final_loglik) {
            best = r.summary.index;
        }
    }
    if (best < 0) throw FitError("no valid starting point for the fit");
    trace.best_start = best;
    const auto& win = runs[static_cast<std::size_t>(best)];
    FitResult fit;
    fit.spec = Spec(decode(win.x));
    fit.loglik = win.summary.final_loglik;
    fit.n_params = n_params;
    fit.aic = aic(fit.loglik, n_params);
    fit.converged = win.summary.converged;
    fit.n_evaluations = total;
    fit.optimizer_trace = std::move(trace);
    return fit;
}

double jitter(Rng& rng, double width) { return 1.0 + width * (rng.uniform() - 0.5); }

// Distinct real roots -s, -1.6 s, ... give a non-negative kernel for b = b_0 e_1.
Eigen::VectorXd default_ar(int p, double s) {
    std::vector<double> c{1.0};
    double r = s;
    for (int k = 0; k < p; ++k, r *= 1.6) c = poly_mul(c, {1.0, r});
    return ar_from_poly(c);
}

double root_scale(int j, int n_starts, Rng& rng) {
    const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(n_starts);
    return 0.5 * std::pow(8.0, u) * jitter(rng, 0.1);
}

void check_options(const FitOptions& o) {
    if (o.n_starts < 1) throw std::invalid_argument("n_starts must be >= 1");
    if (!(o.tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
    if (o.max_evaluations < 10) throw std::invalid_argument("max_evaluations must be >= 10");
    if (!(o.start_branching > 0.0 && o.start_branching < 1.0)) {
        throw std::invalid_argument("start_branching must be in (0, 1)");
    }
}

// ---- univariate -----------------------------------------------------------

UnivariateSpec decode_uni(const UnivariateOrder& order, const Eigen::VectorXd& x) {
    UnivariateSpec s;
    s.order = order;
    s.mu = std::exp(x(0));
    s.a = ar_from_theta(x.data() + 1, order.p);
    s.b = Eigen::VectorXd::Zero(order.p);
    for (int i = 0; i <= order.q; ++i) s.b(i) = x(1 + order.p + i);
    return s;
}

Eigen::VectorXd encode_uni(const UnivariateSpec& s) {
    const auto theta = theta_from_ar(s.a);
    Eigen::VectorXd x(model::parameter_count(s.order));
    x(0) = std::log(s.mu);
    for (int i = 0; i < s.order.p; ++i) x(1 + i) = theta[static_cast<std::size_t>(i)];
    for (int i = 0; i <= s.order.q; ++i) x(1 + s.order.p + i) = s.b(i);
    return x;
}

Eigen::VectorXd steps_uni(const UnivariateSpec& s, double fallback_b0) {
    std::vector<double> step(static_cast<std::size_t>(1 + s.order.p), 0.3);
    push_ma_steps(step, s.b, s.order.q, spectral_radius(s.a), fallback_b0);
    return Eigen::Map<Eigen::VectorXd>(step.data(), static_cast<Eigen::Index>(step.size()));
}

// ---- bivariate ------------------------------------------------------------

struct BiLayout {
    int a1, a2, b11, b12, b21, b22, size;
    explicit BiLayout(const BivariateOrder& o)
        : a1(2),
          a2(a1 + o.p1),
          b11(a2 + o.p2),
          b12(b11 + o.q1 + 1),
          b21(b12 + o.q12 + 1),
          b22(b21 + o.q21 + 1),
          size(b22 + o.q2 + 1) {}
};

Eigen::VectorXd read_ma(const Eigen::VectorXd& x, int offset, int q, int p) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    for (int i = 0; i <= q; ++i) b(i) = x(offset + i);
    return b;
}

BivariateSpec decode_bi(const BivariateOrder& o, const Eigen::VectorXd& x) {
    const BiLayout l(o);
    BivariateSpec s;
    s.order = o;
    s.mu = Eigen::Vector2d(std::exp(x(0)), std::exp(x(1)));
    s.a1 = ar_from_theta(x.data() + l.a1, o.p1);
    s.a2 = ar_from_theta(x.data() + l.a2, o.p2);
    s.b11 = read_ma(x, l.b11, o.q1, o.p1);
    s.b12 = read_ma(x, l.b12, o.q12, o.p2);
    s.b21 = read_ma(x, l.b21, o.q21, o.p1);
    s.b22 = read_ma(x, l.b22, o.q2, o.p2);
    return s;
}

Eigen::VectorXd encode_bi(const BivariateSpec& s) {
    const auto& o = s.order;
    const BiLayout l(o);
    Eigen::VectorXd x(l.size);
    x(0) = std::log(s.mu(0));
    x(1) = std::log(s.mu(1));
    const auto t1 = theta_from_ar(s.a1);
    const auto t2 = theta_from_ar(s.a2);
    for (int i = 0; i < o.p1; ++i) x(l.a1 + i) = t1[static_cast<std::size_t>(i)];
    for (int i = 0; i < o.p2; ++i) x(l.a2 + i) = t2[static_cast<std::size_t>(i)];
    for (int i = 0; i <= o.q1; ++i) x(l.b11 + i) = s.b11(i);
    for (int i = 0; i <= o.q12; ++i) x(l.b12 + i) = s.b12(i);
    for (int i = 0; i <= o.q21; ++i) x(l.b21 + i) = s.b21(i);
    for (int i = 0; i <= o.q2; ++i) x(l.b22 + i) = s.b22(i);
    return x;
}

Eigen::VectorXd steps_bi(const BivariateSpec& s, double fallback_b0) {
    const auto& o = s.order;
    std::vector<double> step(static_cast<std::size_t>(2 + o.p1 + o.p2), 0.3);
    const double r1 = spectral_radius(s.a1);
    const double r2 = spectral_radius(s.a2);
    push_ma_steps(step, s.b11, o.q1, r1, fallback_b0);
    push_ma_steps(step, s.b12, o.q12, r2, fallback_b0);
    push_ma_steps(step, s.b21, o.q21, r1, fallback_b0);
    push_ma_steps(step, s.b22, o.q2, r2, fallback_b0);
    return Eigen::Map<Eigen::VectorXd>(step.data(), static_cast<Eigen::Index>(step.size()));
}

bool admissible(const model::ValidationReport& r, bool kernel_nonnegative) {
    for (const auto& c : r.checks) {
        if (!c.passed && (kernel_nonnegative || c.name != "kernel_nonnegative")) return false;
    }
    return true;
}

template <typename Spec, typename Decode, typename Loglik>
Problem make_problem(int dim, Decode decode, Loglik loglik, bool kernel_nonnegative) {
    Problem pr;
    pr.dim = dim;
    pr.objective = [decode, loglik, kernel_nonnegative](const Eigen::VectorXd& x) {
        if (!x.allFinite()) return kInf;
        const Spec spec = decode(x);
        if (!admissible(model::validate(spec), kernel_nonnegative)) return kInf;
        double ll = -kInf;
        try {
            ll = loglik(spec);
        } catch (const model::SpecError&) {
            return kInf;
        }
        return std::isfinite(ll) ? -ll : kInf;
    };
    return pr;
}

// ---- embedding ------------------------------------------------------------

// Appends k roots to the AR polynomial and compensates each MA polynomial
// given with its room for growth. MA polynomials are lowest power first.
void embed_block(Eigen::VectorXd& a, int k, std::vector<std::pair<Eigen::VectorXd*, int>> ma, int new_p) {
    if (k == 0) {
        for (auto& [b, room] : ma) {
            (void)room;
            Eigen::VectorXd nb = Eigen::VectorXd::Zero(new_p);
            nb.head(b->size()) = *b;
            *b = nb;
        }
        return;
    }
    double rho = spectral_radius(a);
    const double r0 = 10.0 * rho + 1.0;
    std::vector<double> c{1.0};
    for (Eigen::Index i = 0; i < a.size(); ++i) c.push_back(a(i));
    for (auto& [b, room] : ma) {
        std::vector<double> poly(b->data(), b->data() + b->size());
        for (int j = 0; j < k; ++j) {
            const double r = r0 * (1.0 + 0.25 * j);
            if (room > 0) {
                // b(z) (z + r), lowest power first.
                std::vector<double> grown(poly.size() + 1, 0.0);
                for (std::size_t i = 0; i < poly.size(); ++i) {
                    grown[i] += r * poly[i];
                    grown[i + 1] += poly[i];
                }
                poly = std::move(grown);
                --room;
            } else {
                for (double& v : poly) v *= r;
            }
        }
        Eigen::VectorXd nb = Eigen::VectorXd::Zero(new_p);
        for (std::size_t i = 0; i < poly.size() && static_cast<int>(i) < new_p; ++i) {
            nb(static_cast<Eigen::Index>(i)) = poly[i];
        }
        *b = nb;
    }
    for (int j = 0; j < k; ++j) c = poly_mul(c, {1.0, r0 * (1.0 + 0.25 * j)});
    a = ar_from_poly(c);
}

int effective_degree(const Eigen::VectorXd& b, int q) {
    int d = q;
    while (d > 0 && b(d) == 0.0) --d;
    return d;
}

// ---- standard errors --------------------------------------------------------

std::optional<std::vector<double>> hessian_errors(const std::function<double(const std::vector<double>&)>& ll,
                                                  const std::vector<double>& v0) {
    const std::size_t n = v0.size();
    const double f0 = ll(v0);
    if (!std::isfinite(f0)) return std::nullopt;
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = 1e-4 * std::max(std::abs(v0[i]), 1e-2);
    auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
        auto v = v0;
        v[i] += di;
        v[j] += dj;
        return ll(v);
    };
    Eigen::MatrixXd info(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double fp = at(i, h[i], i, 0.0);
        const double fm = at(i, -h[i], i, 0.0);
        info(i, i) = -(fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for (std::size_t j = 0; j < i; ++j) {
            const double v = (at(i, h[i], j, h[j]) - at(i, h[i], j, -h[j]) - at(i, -h[i], j, h[j]) +
                              at(i, -h[i], j, -h[j])) /
                             (4.0 * h[i] * h[j]);
            info(i, j) = info(j, i) = -v;
        }
    }
    if (!info.allFinite()) return std::nullopt;
    const Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
    std::vector<double> se(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(cov(i, i) > 0.0)) return std::nullopt;
        se[i] = std::sqrt(cov(i, i));
    }
    return se;
}

double structural_loglik(const spectral::ModalSystem& sys, const std::vector<double>& times,
                         std::span<const model::Mark> marks) {
    return likelihood::loglik_modal(sys, times, marks, times.back());
}

}  // namespace

FitResult fit_univariate(const model::EventSeries& events, const UnivariateOrder& order,
                         const FitOptions& options, const std::optional<UnivariateSpec>& init) {
    order.check();
    check_options(options);
    if (events.size() < kMinimumEvents) {
        throw FitError("fit needs at least " + std::to_string(kMinimumEvents) + " events, got " +
                       std::to_string(events.size()));
    }
    const double end = options.window == likelihood::WindowEnd::LastEvent ? events.last_time()
                                                                          : events.horizon();
    const auto& times = events.times();
    auto decode = [order](const Eigen::VectorXd& x) { return decode_uni(order, x); };
    auto loglik = [&times, end](const UnivariateSpec& s) {
        return likelihood::loglik_modal(spectral::modal_system(s), times, {}, end);
    };
    const Problem problem = make_problem<UnivariateSpec>(model::parameter_count(order), decode, loglik,
                                                         options.kernel_nonnegative);

    const double rate = static_cast<double>(events.size()) / events.last_time();
    std::vector<StartPoint> starts;
    if (init) {
        try {
            if (!(init->order == order)) throw FitError("init order mismatch");
            model::require_valid(*init);
            starts.push_back({encode_uni(*init), steps_uni(*init, 0.3 * rate), true});
        } catch (const std::exception&) {
            // An unusable init only loses its start.
        }
    }
    for (int j = 0; j < options.n_starts; ++j) {
        Rng rng(options.seed, static_cast<std::uint64_t>(j));
        UnivariateSpec s;
        s.order = order;
        s.a = default_ar(order.p, root_scale(j, options.n_starts, rng));
        s.mu = 0.5 * rate * jitter(rng, 0.1);
        s.b = Eigen::VectorXd::Zero(order.p);
        s.b(0) = options.start_branching * s.a(order.p - 1) * jitter(rng, 0.1);
        starts.push_back({encode_uni(s), steps_uni(s, s.b(0)), false});
    }
    return finish<UnivariateSpec>(run_starts(problem, starts, options), decode,
                                  model::parameter_count(order));
}

FitResult fit_bivariate(const model::MarkedEventSeries& events, const BivariateOrder& order,
                        const FitOptions& options, const std::optional<BivariateSpec>& init) {
    order.check();
    check_options(options);
    if (events.size() < kMinimumEvents) {
        throw FitError("fit needs at least " + std::to_string(kMinimumEvents) + " events, got " +
                       std::to_string(events.size()));
    }
    const double end = options.window == likelihood::WindowEnd::LastEvent ? events.last_time()
                                                                          : events.horizon();
    const auto& times = events.times();
    const auto& marks = events.marks();
    auto decode = [order](const Eigen::VectorXd& x) { return decode_bi(order, x); };
    auto loglik = [&times, &marks, end](const BivariateSpec& s) {
        return likelihood::loglik_modal(spectral::modal_system(s), times, marks, end);
    };
    const Problem problem = make_problem<BivariateSpec>(model::parameter_count(order), decode, loglik,
                                                        options.kernel_nonnegative);

    const auto counts = events.counts();
    const double t_n = events.last_time();
    const double rate = static_cast<double>(events.size()) / t_n;
    std::vector<StartPoint> starts;
    if (init) {
        try {
            if (!(init->order == order)) throw FitError("init order mismatch");
            model::require_valid(*init);
            starts.push_back({encode_bi(*init), steps_bi(*init, 0.15 * rate), true});
        } catch (const std::exception&) {
        }
    }
    const double kb = 0.5 * options.start_branching;
    for (int j = 0; j < options.n_starts; ++j) {
        Rng rng(options.seed, static_cast<std::uint64_t>(j));
        const double scale = root_scale(j, options.n_starts, rng);
        BivariateSpec s;
        s.order = order;
        s.a1 = default_ar(order.p1, scale);
        s.a2 = default_ar(order.p2, scale * jitter(rng, 0.1));
        for (int c = 0; c < 2; ++c) {
            const double n_c = std::max<double>(1.0, static_cast<double>(counts[static_cast<std::size_t>(c)]));
            s.mu(c) = 0.5 * n_c / t_n * jitter(rng, 0.1);
        }
        s.b11 = Eigen::VectorXd::Zero(order.p1);
        s.b21 = Eigen::VectorXd::Zero(order.p1);
        s.b12 = Eigen::VectorXd::Zero(order.p2);
        s.b22 = Eigen::VectorXd::Zero(order.p2);
        s.b11(0) = kb * s.a1(order.p1 - 1) * jitter(rng, 0.1);
        s.b21(0) = kb * s.a1(order.p1 - 1) * jitter(rng, 0.1);
        s.b12(0) = kb * s.a2(order.p2 - 1) * jitter(rng, 0.1);
        s.b22(0) = kb * s.a2(order.p2 - 1) * jitter(rng, 0.1);
        starts.push_back({encode_bi(s), steps_bi(s, s.b11(0)), false});
    }
    return finish<BivariateSpec>(run_starts(problem, starts, options), decode,
                                 model::parameter_count(order));
}

double chi_square_survival(double x, int df) {
    if (df < 1) throw std::invalid_argument("chi-square df must be >= 1");
    if (!(x > 0.0)) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

LrOutcome lr_test(double loglik_unrestricted, double loglik_restricted, int df) {
    if (df < 1) throw std::invalid_argument("LR test df must be >= 1");
    LrOutcome out;
    out.df = df;
    const double raw = 2.0 * (loglik_unrestricted - loglik_restricted);
    out.clamped = raw < 0.0;
    out.statistic = std::max(0.0, raw);
    out.p_value = chi_square_survival(out.statistic, df);
    return out;
}

double aic(double loglik, int n_params) { return 2.0 * n_params - 2.0 * loglik; }

bool is_nested(const UnivariateOrder& c, const UnivariateOrder& a) { return c.p <= a.p && c.q <= a.q; }

bool is_nested(const BivariateOrder& c, const BivariateOrder& a) {
    return c.p1 <= a.p1 && c.p2 <= a.p2 && c.q1 <= a.q1 && c.q12 <= a.q12 && c.q21 <= a.q21 &&
           c.q2 <= a.q2;
}

UnivariateSpec embed_spec(const UnivariateSpec& spec, const UnivariateOrder& order) {
    order.check();
    if (!is_nested(spec.order, order)) throw model::SpecError("embed_spec: target order does not nest the spec");
    UnivariateSpec out = spec;
    out.order = order;
    const int room = order.q - effective_degree(spec.b, spec.order.q);
    embed_block(out.a, order.p - spec.order.p, {{&out.b, room}}, order.p);
    return out;
}

BivariateSpec embed_spec(const BivariateSpec& spec, const BivariateOrder& order) {
    order.check();
    if (!is_nested(spec.order, order)) throw model::SpecError("embed_spec: target order does not nest the spec");
    const auto& o = spec.order;
    BivariateSpec out = spec;
    out.order = order;
    embed_block(out.a1, order.p1 - o.p1,
                {{&out.b11, order.q1 - effective_degree(spec.b11, o.q1)},
                 {&out.b21, order.q21 - effective_degree(spec.b21, o.q21)}},
                order.p1);
    embed_block(out.a2, order.p2 - o.p2,
                {{&out.b12, order.q12 - effective_degree(spec.b12, o.q12)},
                 {&out.b22, order.q2 - effective_degree(spec.b22, o.q2)}},
                order.p2);
    return out;
}

std::vector<double> natural_parameters(const UnivariateSpec& s) {
    std::vector<double> v{s.mu};
    for (Eigen::Index i = 0; i < s.a.size(); ++i) v.push_back(s.a(i));
    for (int i = 0; i <= s.order.q; ++i) v.push_back(s.b(i));
    return v;
}

std::vector<double> natural_parameters(const BivariateSpec& s) {
    std::vector<double> v{s.mu(0), s.mu(1)};
    for (Eigen::Index i = 0; i < s.a1.size(); ++i) v.push_back(s.a1(i));
    for (Eigen::Index i = 0; i < s.a2.size(); ++i) v.push_back(s.a2(i));
    for (int i = 0; i <= s.order.q1; ++i) v.push_back(s.b11(i));
    for (int i = 0; i <= s.order.q12; ++i) v.push_back(s.b12(i));
    for (int i = 0; i <= s.order.q21; ++i) v.push_back(s.b21(i));
    for (int i = 0; i <= s.order.q2; ++i) v.push_back(s.b22(i));
    return v;
}

std::optional<std::vector<double>> standard_errors(const UnivariateSpec& spec,
                                                   const model::EventSeries& events) {
    if (events.empty()) return std::nullopt;
    const auto& o = spec.order;
    auto ll = [&](const std::vector<double>& v) {
        UnivariateSpec s = spec;
        s.mu = v[0];
        for (int i = 0; i < o.p; ++i) s.a(i) = v[static_cast<std::size_t>(1 + i)];
        for (int i = 0; i <= o.q; ++i) s.b(i) = v[static_cast<std::size_t>(1 + o.p + i)];
        if (!(s.mu > 0.0)) return -kInf;
        try {
            return structural_loglik(spectral::modal_system(s), events.times(), {});
        } catch (const model::SpecError&) {
            return -kInf;
        }
    };
    return hessian_errors(ll, natural_parameters(spec));
}

std::optional<std::vector<double>> standard_errors(const BivariateSpec& spec,
                                                   const model::MarkedEventSeries& events) {
    if (events.empty()) return std::nullopt;
    const auto& o = spec.order;
    auto ll = [&](const std::vector<double>& v) {
        BivariateSpec s = spec;
        std::size_t k = 0;
        s.mu(0) = v[k++];
        s.mu(1) = v[k++];
        for (int i = 0; i < o.p1; ++i) s.a1(i) = v[k++];
        for (int i = 0; i < o.p2; ++i) s.a2(i) = v[k++];
        for (int i = 0; i <= o.q1; ++i) s.b11(i) = v[k++];
        for (int i = 0; i <= o.q12; ++i) s.b12(i) = v[k++];
        for (int i = 0; i <= o.q21; ++i) s.b21(i) = v[k++];
        for (int i = 0; i <= o.q2; ++i) s.b22(i) = v[k++];
        if (!(s.mu(0) > 0.0 && s.mu(1) > 0.0)) return -kInf;
        try {
            return structural_loglik(spectral::modal_system(s), events.times(), events.marks());
        } catch (const model::SpecError&) {
            return -kInf;
        }
    };
    return hessian_errors(ll, natural_parameters(spec));
}

}  // namespace carma_hawkes::estimate
