#include "carma_hawkes/model.hpp"

#include "carma_hawkes/spectral.hpp"
#include "carma_hawkes/state_space.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace carma_hawkes::model {

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd padded_ma(std::vector<double> b, int p, int q, const char* name) {
    const auto n = static_cast<int>(b.size());
    if (n != q + 1 && n != p) {
        std::ostringstream os;
        os << name << " must have " << q + 1 << " or " << p << " entries, got " << n;
        throw SpecError(os.str());
    }
    for (int i = q + 1; i < n; ++i) {
        if (b[static_cast<std::size_t>(i)] != 0.0) {
            std::ostringstream os;
            os << name << "[" << i << "] must be zero for MA order " << q;
            throw SpecError(os.str());
        }
    }
    b.resize(static_cast<std::size_t>(p), 0.0);
    return to_vector(b);
}

Eigen::VectorXd checked_ar(const std::vector<double>& a, int p, const char* name) {
    if (static_cast<int>(a.size()) != p) {
        std::ostringstream os;
        os << name << " must have " << p << " entries, got " << a.size();
        throw SpecError(os.str());
    }
    return to_vector(a);
}

bool padding_ok(const Eigen::VectorXd& b, int p, int q) {
    if (b.size() != p) return false;
    for (int i = q + 1; i < p; ++i) {
        if (b(i) != 0.0) return false;
    }
    return true;
}

// Geometric grid on [1e-6 t_max, t_max] plus t = 0, where t_max spans ten
// time constants of the slowest mode.
std::vector<double> kernel_grid(const spectral::ModalSystem& sys) {
    const double t_max = 10.0 / spectral::slowest_decay(sys);
    std::vector<double> grid;
    grid.reserve(kKernelGridPoints + 1);
    grid.push_back(0.0);
    const double lo = std::log(t_max * 1e-6);
    const double hi = std::log(t_max);
    for (int i = 0; i < kKernelGridPoints; ++i) {
        grid.push_back(std::exp(lo + (hi - lo) * i / (kKernelGridPoints - 1)));
    }
    return grid;
}

// Minimum of the kernel (target <- source) over the screening grid.
double kernel_grid_min(const spectral::ModalSystem& sys, int target, int source,
                       const std::vector<double>& grid) {
    double lowest = std::numeric_limits<double>::infinity();
    for (double t : grid) lowest = std::min(lowest, spectral::modal_kernel(sys, target, source, t));
    return lowest;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

void add(ValidationReport& r, std::string name, bool ok, std::string detail = {}) {
    r.checks.push_back({std::move(name), ok, std::move(detail)});
}

void check_grid(std::span<const double> grid, double horizon) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || grid[i] < 0.0 || grid[i] > horizon) {
            throw SpecError("grid time outside [0, horizon]");
        }
        if (i > 0 && grid[i] < grid[i - 1]) throw SpecError("grid must be sorted");
    }
}

}  // namespace

void UnivariateOrder::check() const {
    if (p < 1 || q < 0 || q >= p) {
        throw SpecError("invalid univariate order " + to_string(*this) + ": need p >= 1 and 0 <= q < p");
    }
}

void BivariateOrder::check() const {
    const bool ok = p1 >= 1 && p2 >= 1 && q1 >= 0 && q12 >= 0 && q21 >= 0 && q2 >= 0 &&
                    q1 < p1 && q21 < p1 && q12 < p2 && q2 < p2;
    if (!ok) throw SpecError("invalid bivariate order " + to_string(*this));
}

std::string to_string(const UnivariateOrder& o) {
    return "(" + std::to_string(o.p) + "," + std::to_string(o.q) + ")";
}

std::string to_string(const BivariateOrder& o) {
    std::ostringstream os;
    os << "p=[" << o.p1 << "," << o.p2 << "] q=[" << o.q1 << "," << o.q12 << "," << o.q21 << ","
       << o.q2 << "]";
    return os.str();
}

int parameter_count(const UnivariateOrder& o) { return 1 + o.p + o.q + 1; }

int parameter_count(const BivariateOrder& o) {
    return 2 + o.p1 + o.p2 + (o.q1 + 1) + (o.q12 + 1) + (o.q21 + 1) + (o.q2 + 1);
}

UnivariateSpec make_univariate(UnivariateOrder order, double mu, std::vector<double> a,
                               std::vector<double> b) {
    order.check();
    if (!std::isfinite(mu) || mu <= 0.0) throw SpecError("baseline intensity mu must be > 0");
    UnivariateSpec s{order, mu, checked_ar(a, order.p, "a"), padded_ma(std::move(b), order.p, order.q, "b")};
    if (!all_finite(s.a) || !all_finite(s.b)) throw SpecError("coefficients must be finite");
    return s;
}

BivariateSpec make_bivariate(BivariateOrder order, std::array<double, 2> mu,
                             std::vector<double> a1, std::vector<double> a2,
                             std::vector<double> b11, std::vector<double> b12,
                             std::vector<double> b21, std::vector<double> b22) {
    order.check();
    for (double m : mu) {
        if (!std::isfinite(m) || m <= 0.0) throw SpecError("baseline intensities must be > 0");
    }
    BivariateSpec s;
    s.order = order;
    s.mu = Eigen::Vector2d(mu[0], mu[1]);
    s.a1 = checked_ar(a1, order.p1, "a1");
    s.a2 = checked_ar(a2, order.p2, "a2");
    s.b11 = padded_ma(std::move(b11), order.p1, order.q1, "b11");
    s.b12 = padded_ma(std::move(b12), order.p2, order.q12, "b12");
    s.b21 = padded_ma(std::move(b21), order.p1, order.q21, "b21");
    s.b22 = padded_ma(std::move(b22), order.p2, order.q2, "b22");
    for (const auto* v : {&s.a1, &s.a2, &s.b11, &s.b12, &s.b21, &s.b22}) {
        if (!all_finite(*v)) throw SpecError("coefficients must be finite");
    }
    return s;
}

EventSeries::EventSeries(std::vector<double> times, double horizon) : times_(std::move(times)) {
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (!std::isfinite(times_[i])) throw SpecError("event times must be finite");
        if (i == 0 && times_[0] <= 0.0) throw SpecError("first event time must be > 0");
        if (i > 0 && times_[i] <= times_[i - 1]) {
            throw SpecError("event times must be strictly increasing (index " + std::to_string(i) + ")");
        }
    }
    horizon_ = horizon < 0.0 ? last_time() : horizon;
    if (!std::isfinite(horizon_) || horizon_ < last_time()) {
        throw SpecError("horizon must be >= the last event time");
    }
}

MarkedEventSeries::MarkedEventSeries(std::vector<double> times, std::vector<Mark> marks,
                                     double horizon)
    : marks_(std::move(marks)) {
    if (times.size() != marks_.size()) throw SpecError("marks and times must have equal length");
    EventSeries checked(std::move(times), horizon);
    horizon_ = checked.horizon();
    times_ = checked.times();
}

std::array<std::size_t, 2> MarkedEventSeries::counts() const noexcept {
    std::array<std::size_t, 2> c{0, 0};
    for (Mark m : marks_) ++c[static_cast<std::size_t>(component_of(m))];
    return c;
}

EventSeries MarkedEventSeries::component(int index) const {
    std::vector<double> out;
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (component_of(marks_[i]) == index) out.push_back(times_[i]);
    }
    return EventSeries(std::move(out), horizon_);
}

Eigen::MatrixXd build_companion(const Eigen::VectorXd& a) {
    const auto p = a.size();
    if (p == 0) throw SpecError("autoregressive vector must be non-empty");
    if (!a.allFinite()) throw SpecError("autoregressive coefficients must be finite");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i + 1 < p; ++i) m(i, i + 1) = 1.0;
    for (Eigen::Index j = 0; j < p; ++j) m(p - 1, j) = -a(p - 1 - j);
    return m;
}

Eigen::VectorXd last_unit(int p) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
    e(p - 1) = 1.0;
    return e;
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m, double t) {
    if (m.rows() != m.cols()) throw SpecError("matrix_exponential needs a square matrix");
    if (!m.allFinite() || !std::isfinite(t)) throw SpecError("matrix_exponential input must be finite");
    if (t == 0.0) return Eigen::MatrixXd::Identity(m.rows(), m.cols());
    if (m.rows() == 1) return Eigen::MatrixXd::Constant(1, 1, std::exp(m(0, 0) * t));
    const Eigen::MatrixXd scaled = m * t;
    return scaled.exp();
}

double kernel_eval(const UnivariateSpec& spec, double t) {
    const auto a = build_companion(spec.a);
    return spec.b.dot(matrix_exponential(a, t) * last_unit(spec.order.p));
}

double kernel_eval(const BivariateSpec& spec, int target, int source, double t) {
    const auto& a = source == 0 ? spec.a1 : spec.a2;
    const Eigen::VectorXd* b = nullptr;
    if (target == 0) b = source == 0 ? &spec.b11 : &spec.b12;
    else b = source == 0 ? &spec.b21 : &spec.b22;
    const auto p = static_cast<int>(a.size());
    return b->dot(matrix_exponential(build_companion(a), t) * last_unit(p));
}

double branching_ratio(const UnivariateSpec& spec) {
    const auto a = build_companion(spec.a);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw SpecError("companion matrix is singular");
    return -spec.b.dot(lu.solve(last_unit(spec.order.p)));
}

Eigen::Matrix2d branching_matrix(const BivariateSpec& spec) {
    Eigen::Matrix2d g;
    const Eigen::VectorXd* bs[2][2] = {{&spec.b11, &spec.b12}, {&spec.b21, &spec.b22}};
    for (int j = 0; j < 2; ++j) {
        const auto& a = j == 0 ? spec.a1 : spec.a2;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(build_companion(a));
        if (!lu.isInvertible()) throw SpecError("companion matrix is singular");
        const Eigen::VectorXd x = lu.solve(last_unit(static_cast<int>(a.size())));
        for (int i = 0; i < 2; ++i) g(i, j) = -bs[i][j]->dot(x);
    }
    return g;
}

bool ValidationReport::valid() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string ValidationReport::failures() const {
    std::string out;
    for (const auto& c : checks) {
        if (c.passed) continue;
        if (!out.empty()) out += ", ";
        out += c.name;
        if (!c.detail.empty()) out += " (" + c.detail + ")";
    }
    return out;
}

ValidationReport validate(const UnivariateSpec& spec) {
    ValidationReport r;
    const auto& o = spec.order;
    const bool order_ok = o.p >= 1 && o.q >= 0 && o.q < o.p;
    const bool shape_ok = order_ok && spec.a.size() == o.p && spec.b.size() == o.p;
    add(r, "structure", shape_ok, shape_ok ? "" : "order or coefficient lengths inconsistent");
    const bool finite = std::isfinite(spec.mu) && all_finite(spec.a) && all_finite(spec.b);
    add(r, "finite", finite);
    add(r, "baseline_positive", spec.mu > 0.0, "mu=" + fmt(spec.mu));
    add(r, "ma_padding", shape_ok && padding_ok(spec.b, o.p, o.q));
    if (!shape_ok || !finite) {
        add(r, "spectrum", false, "skipped");
        add(r, "kernel_nonnegative", false, "skipped");
        add(r, "stationary", false, "skipped");
        return r;
    }
    const auto chk = spectral::check_spectrum(spectral::companion_eigenvalues(spec.a));
    const bool spec_ok = chk.finite && chk.distinct && chk.stable;
    add(r, "spectrum", spec_ok,
        "max Re=" + fmt(chk.max_real) + " min separation=" + fmt(chk.min_separation));
    if (!spec_ok) {
        add(r, "kernel_nonnegative", false, "skipped");
        add(r, "stationary", false, "skipped");
        return r;
    }
    const auto sys = spectral::modal_system(spec);
    const double hmin = kernel_grid_min(sys, 0, 0, kernel_grid(sys));
    add(r, "kernel_nonnegative", hmin >= -kKernelTolerance, "min h=" + fmt(hmin));
    const double eta = spectral::modal_kernel_integral(sys, 0, 0);
    add(r, "stationary", eta < 1.0, "branching ratio=" + fmt(eta));
    return r;
}

ValidationReport validate(const BivariateSpec& spec) {
    ValidationReport r;
    const auto& o = spec.order;
    const bool order_ok = o.p1 >= 1 && o.p2 >= 1 && o.q1 >= 0 && o.q12 >= 0 && o.q21 >= 0 &&
                          o.q2 >= 0 && o.q1 < o.p1 && o.q21 < o.p1 && o.q12 < o.p2 && o.q2 < o.p2;
    const bool shape_ok = order_ok && spec.a1.size() == o.p1 && spec.a2.size() == o.p2 &&
                          spec.b11.size() == o.p1 && spec.b21.size() == o.p1 &&
                          spec.b12.size() == o.p2 && spec.b22.size() == o.p2;
    add(r, "structure", shape_ok, shape_ok ? "" : "order or coefficient lengths inconsistent");
    bool finite = spec.mu.allFinite();
    for (const auto* v : {&spec.a1, &spec.a2, &spec.b11, &spec.b12, &spec.b21, &spec.b22}) {
        finite = finite && all_finite(*v);
    }
    add(r, "finite", finite);
    add(r, "baseline_positive", spec.mu(0) > 0.0 && spec.mu(1) > 0.0,
        "mu=(" + fmt(spec.mu(0)) + "," + fmt(spec.mu(1)) + ")");
    add(r, "ma_padding",
        shape_ok && padding_ok(spec.b11, o.p1, o.q1) && padding_ok(spec.b12, o.p2, o.q12) &&
            padding_ok(spec.b21, o.p1, o.q21) && padding_ok(spec.b22, o.p2, o.q2));
    if (!shape_ok || !finite) {
        for (const char* n : {"spectrum", "invertible", "kernel_nonnegative", "stationary"}) {
            add(r, n, false, "skipped");
        }
        return r;
    }
    const auto c1 = spectral::check_spectrum(spectral::companion_eigenvalues(spec.a1));
    const auto c2 = spectral::check_spectrum(spectral::companion_eigenvalues(spec.a2));
    const bool spec_ok = c1.finite && c1.distinct && c1.stable && c2.finite && c2.distinct && c2.stable;
    add(r, "spectrum", spec_ok,
        "max Re=(" + fmt(c1.max_real) + "," + fmt(c2.max_real) + ")");
    if (!spec_ok) {
        for (const char* n : {"invertible", "kernel_nonnegative", "stationary"}) add(r, n, false, "skipped");
        return r;
    }
    // Stable blocks have no zero eigenvalue, so the block-diagonal matrix is invertible.
    add(r, "invertible", true);
    const auto sys = spectral::modal_system(spec);
    const auto grid = kernel_grid(sys);
    double hmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) hmin = std::min(hmin, kernel_grid_min(sys, i, j, grid));
    }
    add(r, "kernel_nonnegative", hmin >= -kKernelTolerance, "min h=" + fmt(hmin));
    Eigen::Matrix2d g;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) g(i, j) = spectral::modal_kernel_integral(sys, i, j);
    }
    const double rho = g.eigenvalues().cwiseAbs().maxCoeff();
    add(r, "stationary", rho < 1.0, "branching spectral radius=" + fmt(rho));
    return r;
}

void require_valid(const UnivariateSpec& spec) {
    const auto r = validate(spec);
    if (!r.valid()) throw SpecError("invalid univariate spec: " + r.failures());
}

void require_valid(const BivariateSpec& spec) {
    const auto r = validate(spec);
    if (!r.valid()) throw SpecError("invalid bivariate spec: " + r.failures());
}

DenseSystem dense_system(const UnivariateSpec& spec) {
    const int p = spec.order.p;
    DenseSystem s;
    s.abar = build_companion(spec.a);
    s.loading = spec.b.transpose();
    s.mu = Eigen::VectorXd::Constant(1, spec.mu);
    s.ebar = last_unit(p);
    return s;
}

DenseSystem dense_system(const BivariateSpec& spec) {
    const int p1 = spec.order.p1;
    const int p2 = spec.order.p2;
    const int d = p1 + p2;
    DenseSystem s;
    s.abar = Eigen::MatrixXd::Zero(d, d);
    s.abar.topLeftCorner(p1, p1) = build_companion(spec.a1);
    s.abar.bottomRightCorner(p2, p2) = build_companion(spec.a2);
    s.loading = Eigen::MatrixXd::Zero(2, d);
    s.loading.block(0, 0, 1, p1) = spec.b11.transpose();
    s.loading.block(0, p1, 1, p2) = spec.b12.transpose();
    s.loading.block(1, 0, 1, p1) = spec.b21.transpose();
    s.loading.block(1, p1, 1, p2) = spec.b22.transpose();
    s.mu = spec.mu;
    s.ebar = Eigen::MatrixXd::Zero(d, 2);
    s.ebar(p1 - 1, 0) = 1.0;
    s.ebar(d - 1, 1) = 1.0;
    return s;
}

namespace {

// Shared propagation for both model shapes. `column(i)` gives the Ebar column
// hit by event i.
template <typename ColumnOf>
std::vector<Eigen::VectorXd> propagate_path(const DenseSystem& sys, const std::vector<double>& times,
                                            ColumnOf column, std::span<const double> grid,
                                            EventSide side) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(grid.size());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.state_dim());
    double last = 0.0;
    std::size_t k = 0;
    for (double g : grid) {
        while (k < times.size() && (times[k] < g || (side == EventSide::Right && times[k] == g))) {
            x = matrix_exponential(sys.abar, times[k] - last) * x + sys.ebar.col(column(k));
            last = times[k];
            ++k;
        }
        const Eigen::VectorXd xg = matrix_exponential(sys.abar, g - last) * x;
        out.push_back(sys.mu + sys.loading * xg);
    }
    return out;
}

}  // namespace

std::vector<double> intensity_path(const UnivariateSpec& spec, const EventSeries& events,
                                   std::span<const double> grid, EventSide side) {
    check_grid(grid, events.horizon());
    const auto sys = dense_system(spec);
    const auto lam = propagate_path(sys, events.times(), [](std::size_t) { return 0; }, grid, side);
    std::vector<double> out;
    out.reserve(lam.size());
    for (const auto& v : lam) out.push_back(v(0));
    return out;
}

std::vector<std::array<double, 2>> intensity_path(const BivariateSpec& spec,
                                                  const MarkedEventSeries& events,
                                                  std::span<const double> grid, EventSide side) {
    check_grid(grid, events.horizon());
    const auto sys = dense_system(spec);
    const auto& marks = events.marks();
    const auto lam = propagate_path(
        sys, events.times(), [&](std::size_t i) { return component_of(marks[i]); }, grid, side);
    std::vector<std::array<double, 2>> out;
    out.reserve(lam.size());
    for (const auto& v : lam) out.push_back({v(0), v(1)});
    return out;
}

}  // namespace carma_hawkes::model
