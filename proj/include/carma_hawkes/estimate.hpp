#pragma once

#include "carma_hawkes/likelihood.hpp"
#include "carma_hawkes/model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace carma_hawkes::estimate {

struct FitOptions {
    int n_starts{5};
    /// Relative change in log-likelihood across the simplex at convergence.
    double tolerance{1e-8};
    /// Evaluation budget per start.
    std::size_t max_evaluations{20000};
    /// Seeds the jitter applied to the deterministic start grid.
    std::uint64_t seed{0};
    /// Worker threads for the starts; 0 uses the hardware concurrency.
    unsigned threads{1};
    likelihood::WindowEnd window{likelihood::WindowEnd::LastEvent};
    /// Target branching ratio of the default starts (per kernel in the
    /// bivariate model, halved).
    double start_branching{0.3};
    /// When false, candidates may carry a kernel that dips below zero as
    /// long as the intensity stays positive at every event.
    bool kernel_nonnegative{true};
};

struct StartSummary {
    int index{0};
    bool from_init{false};
    bool valid{false};
    double initial_loglik{0.0};
    double final_loglik{0.0};
    std::size_t evaluations{0};
    bool converged{false};
};

struct OptimizerTrace {
    std::vector<StartSummary> starts;
    int best_start{-1};
};

struct FitResult {
    std::variant<model::UnivariateSpec, model::BivariateSpec> spec;
    double loglik{0.0};
    double aic{0.0};
    int n_params{0};
    bool converged{false};
    std::size_t n_evaluations{0};
    std::optional<OptimizerTrace> optimizer_trace;

    [[nodiscard]] bool is_bivariate() const noexcept { return spec.index() == 1; }
    [[nodiscard]] const model::UnivariateSpec& univariate() const { return std::get<0>(spec); }
    [[nodiscard]] const model::BivariateSpec& bivariate() const { return std::get<1>(spec); }
};

/// Raised when a fit cannot run (too few events, no valid start).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMinimumEvents = 5;

/// Multi-start Nelder-Mead maximization of the exact log-likelihood over
/// valid specs. An `init` spec (if valid) is added as an extra start.
FitResult fit_univariate(const model::EventSeries& events, const model::UnivariateOrder& order,
                         const FitOptions& options = {},
                         const std::optional<model::UnivariateSpec>& init = std::nullopt);

FitResult fit_bivariate(const model::MarkedEventSeries& events, const model::BivariateOrder& order,
                        const FitOptions& options = {},
                        const std::optional<model::BivariateSpec>& init = std::nullopt);

struct LrOutcome {
    double statistic{0.0};
    int df{1};
    double p_value{1.0};
    /// True when the raw statistic was negative and clamped to 0.
    bool clamped{false};
};

/// statistic = max(0, 2 (ll_u - ll_r)), p-value from the chi-square(df) survival.
LrOutcome lr_test(double loglik_unrestricted, double loglik_restricted, int df);

double chi_square_survival(double x, int df);

/// 2k - 2 loglik.
double aic(double loglik, int n_params);

/// Componentwise order comparison: candidate <= alternative in every entry.
bool is_nested(const model::UnivariateOrder& candidate, const model::UnivariateOrder& alternative);
bool is_nested(const model::BivariateOrder& candidate, const model::BivariateOrder& alternative);

/// Re-expresses a spec in a larger (nested) order. Each added autoregressive
/// root -r is matched by a factor (z + r) in the MA polynomial when the MA
/// order has room, which leaves the kernel unchanged; otherwise the MA
/// polynomial is scaled by r instead, which approximates the kernel for
/// large r. Used to start nested fits next to the candidate optimum.
model::UnivariateSpec embed_spec(const model::UnivariateSpec& spec, const model::UnivariateOrder& order);
model::BivariateSpec embed_spec(const model::BivariateSpec& spec, const model::BivariateOrder& order);

/// Numerical-Hessian standard errors in the natural parameters
/// (mu, a, b_0..b_q; bivariate: mu_1, mu_2, a1, a2, b11, b12, b21, b22).
/// Empty when the observed information is not positive definite.
std::optional<std::vector<double>> standard_errors(const model::UnivariateSpec& spec,
                                                   const model::EventSeries& events);
std::optional<std::vector<double>> standard_errors(const model::BivariateSpec& spec,
                                                   const model::MarkedEventSeries& events);

/// Free parameters in the order used by standard_errors.
std::vector<double> natural_parameters(const model::UnivariateSpec& spec);
std::vector<double> natural_parameters(const model::BivariateSpec& spec);

}  // namespace carma_hawkes::estimate
