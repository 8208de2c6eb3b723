#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Parameterizations and state-space primitives for univariate and bivariate
// CARMA(p,q)-Hawkes processes.
//
// A univariate process has intensity lambda_t = mu + b' X_t with
//   dX_t = A X_{t-} dt + e dN_t,  X_0 = 0,
// where A is the companion matrix of the autoregressive coefficients and
// e = [0, ..., 0, 1]'. The bivariate process stacks two such state blocks
// (one per mark) and maps them to two intensities through the 2 x (p1+p2)
// loading matrix B.
namespace carma_hawkes::model {

/// Raised when a parameterization or an event series violates a structural invariant.
class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct UnivariateOrder {
    int p{1};
    int q{0};

    /// Throws SpecError unless p >= 1 and 0 <= q < p.
    void check() const;
    friend bool operator==(const UnivariateOrder&, const UnivariateOrder&) = default;
};

struct BivariateOrder {
    int p1{1};
    int p2{1};
    int q1{0};
    int q12{0};
    int q21{0};
    int q2{0};

    /// Throws SpecError unless q1 < p1, q21 < p1, q12 < p2 and q2 < p2.
    void check() const;
    friend bool operator==(const BivariateOrder&, const BivariateOrder&) = default;
};

std::string to_string(const UnivariateOrder& order);
std::string to_string(const BivariateOrder& order);

/// Full univariate parameterization. `a` holds (a_1, ..., a_p) and `b` holds
/// (b_0, ..., b_{p-1}) with zeros beyond index q. Plain aggregate so that
/// arbitrary (possibly invalid) proposals can be represented and screened by
/// validate(); make_univariate() is the checked constructor.
struct UnivariateSpec {
    UnivariateOrder order;
    double mu{0.0};
    Eigen::VectorXd a;
    Eigen::VectorXd b;
};

/// Bivariate parameterization. Component 1 is driven by positive marks
/// (state block X_1, dimension p1), component 2 by negative marks (X_2, p2).
///   lambda_1 = mu_1 + b11' X_1 + b12' X_2
///   lambda_2 = mu_2 + b21' X_1 + b22' X_2
struct BivariateSpec {
    BivariateOrder order;
    Eigen::Vector2d mu{Eigen::Vector2d::Zero()};
    Eigen::VectorXd a1;
    Eigen::VectorXd a2;
    Eigen::VectorXd b11;
    Eigen::VectorXd b12;
    Eigen::VectorXd b21;
    Eigen::VectorXd b22;
};

/// Checked constructor. `b` may list only (b_0..b_q); it is zero-padded to
/// length p. Throws SpecError on mu <= 0, non-finite values, wrong lengths,
/// or non-zero entries beyond q.
UnivariateSpec make_univariate(UnivariateOrder order, double mu, std::vector<double> a,
                               std::vector<double> b);

BivariateSpec make_bivariate(BivariateOrder order, std::array<double, 2> mu,
                             std::vector<double> a1, std::vector<double> a2,
                             std::vector<double> b11, std::vector<double> b12,
                             std::vector<double> b21, std::vector<double> b22);

/// Number of free parameters: 1 + p + (q + 1).
int parameter_count(const UnivariateOrder& order);
/// 2 + p1 + p2 + (q1+1) + (q12+1) + (q21+1) + (q2+1).
int parameter_count(const BivariateOrder& order);

enum class Mark : std::int8_t { Positive = 1, Negative = -1 };

inline int component_of(Mark m) { return m == Mark::Positive ? 0 : 1; }

/// Strictly increasing event times in (0, horizon].
class EventSeries {
public:
    EventSeries() = default;
    /// horizon < 0 means "use the last event time".
    explicit EventSeries(std::vector<double> times, double horizon = -1.0);

    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
    [[nodiscard]] bool empty() const noexcept { return times_.empty(); }
    [[nodiscard]] double last_time() const noexcept { return times_.empty() ? 0.0 : times_.back(); }

private:
    std::vector<double> times_;
    double horizon_{0.0};
};

class MarkedEventSeries {
public:
    MarkedEventSeries() = default;
    MarkedEventSeries(std::vector<double> times, std::vector<Mark> marks, double horizon = -1.0);

    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] const std::vector<Mark>& marks() const noexcept { return marks_; }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
    [[nodiscard]] bool empty() const noexcept { return times_.empty(); }
    [[nodiscard]] double last_time() const noexcept { return times_.empty() ? 0.0 : times_.back(); }
    /// Event counts per component (positive, negative).
    [[nodiscard]] std::array<std::size_t, 2> counts() const noexcept;
    /// Times of one component's events, same horizon.
    [[nodiscard]] EventSeries component(int index) const;

private:
    std::vector<double> times_;
    std::vector<Mark> marks_;
    double horizon_{0.0};
};

/// p x p companion matrix: ones on the superdiagonal, last row (-a_p, ..., -a_1).
Eigen::MatrixXd build_companion(const Eigen::VectorXd& a);

/// e = [0, ..., 0, 1]' of dimension p.
Eigen::VectorXd last_unit(int p);

/// e^{M t}. Throws SpecError on non-square or non-finite input.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m, double t);

/// h(t) = b' e^{A t} e.
double kernel_eval(const UnivariateSpec& spec, double t);

/// Kernel from events of component `source` onto the intensity of `target`
/// (0 = positive, 1 = negative): b_{target,source}' e^{A_source t} e.
double kernel_eval(const BivariateSpec& spec, int target, int source, double t);

/// Integral of the kernel over [0, inf): -b' A^{-1} e.
double branching_ratio(const UnivariateSpec& spec);

/// Matrix G with G(i, j) = integral of the kernel from source j onto target i.
Eigen::Matrix2d branching_matrix(const BivariateSpec& spec);

struct CheckResult {
    std::string name;
    bool passed{false};
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;

    [[nodiscard]] bool valid() const noexcept;
    /// Names of failed checks joined with ", ".
    [[nodiscard]] std::string failures() const;
};

/// Screens positivity, finiteness, padding, spectrum, kernel non-negativity
/// and stationarity. Never throws.
ValidationReport validate(const UnivariateSpec& spec);
ValidationReport validate(const BivariateSpec& spec);

/// Throws SpecError listing failed checks.
void require_valid(const UnivariateSpec& spec);
void require_valid(const BivariateSpec& spec);

// Spectral screening thresholds.
inline constexpr double kDistinctTolerance = 1e-8;   // relative to spectral radius
inline constexpr double kStableTolerance = 1e-10;    // max real part must be below minus this
inline constexpr double kKernelTolerance = 1e-12;    // h(t) >= -this on the grid
inline constexpr int kKernelGridPoints = 512;

/// Which side of an event a grid point coinciding with an event time reports.
enum class EventSide { Left, Right };

/// Intensity at each (sorted) grid time in [0, horizon] by exact propagation
/// between events. At an event time the left limit is reported by default.
std::vector<double> intensity_path(const UnivariateSpec& spec, const EventSeries& events,
                                   std::span<const double> grid,
                                   EventSide side = EventSide::Left);

std::vector<std::array<double, 2>> intensity_path(const BivariateSpec& spec,
                                                  const MarkedEventSeries& events,
                                                  std::span<const double> grid,
                                                  EventSide side = EventSide::Left);

}  // namespace carma_hawkes::model
