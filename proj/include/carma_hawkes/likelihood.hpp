#pragma once

#include "carma_hawkes/model.hpp"
#include "carma_hawkes/spectral.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace carma_hawkes::likelihood {

/// End of the integration window for the compensator term. The log-intensity
/// sum always runs over all events.
enum class WindowEnd {
    LastEvent,  // [0, T_n], the closed form with T = T_n
    Horizon     // [0, T] with T the series horizon (censored window)
};

enum class Method {
    MatrixExponential,  // reference path: e^{A dt} per event
    Modal               // eigen-coordinate path used by the optimizer
};

struct LikelihoodOptions {
    WindowEnd window{WindowEnd::LastEvent};
    Method method{Method::MatrixExponential};
    /// When false only the structural checks run, so proposals with negative
    /// kernels can be evaluated (and reported as -inf when lambda <= 0).
    bool require_valid_spec{true};
};

/// Exact log-likelihood
///   -mu T_n - b'A^{-1} s(n) + n b'A^{-1} e + sum_i log lambda(T_i-).
/// Returns -infinity when the intensity is non-positive at some event.
/// An empty series returns -mu * horizon.
double loglik_univariate(const model::UnivariateSpec& spec, const model::EventSeries& events,
                         const LikelihoodOptions& options = {});

/// Bivariate closed form
///   -1'mu T_n + 1'B Abar^{-1} Ebar N_{T_n} - 1'B Abar^{-1} s(n)
///   + sum_i log(mu + B X_{T_i-})' dN_{T_i}.
double loglik_bivariate(const model::BivariateSpec& spec, const model::MarkedEventSeries& events,
                        const LikelihoodOptions& options = {});

/// Fast evaluation on a prepared modal system. `marks` is empty for the
/// univariate model. No validity screening is done here.
double loglik_modal(const spectral::ModalSystem& sys, std::span<const double> times,
                    std::span<const model::Mark> marks, double window_end);

/// Running sum s(k) = Ebar dN_{T_k} + e^{Abar (T_k - T_{k-1})} s(k-1),
/// which equals the post-event state X_{T_k+}.
struct RecursionState {
    Eigen::VectorXd s;
    double last_time{0.0};
    std::size_t count{0};
};

RecursionState initial_state(const model::UnivariateSpec& spec);
RecursionState initial_state(const model::BivariateSpec& spec);

/// Throws model::SpecError unless next_time > state.last_time.
RecursionState update_recursion(const model::UnivariateSpec& spec, const RecursionState& state,
                                double next_time);
RecursionState update_recursion(const model::BivariateSpec& spec, const RecursionState& state,
                                double next_time, model::Mark mark);

/// Lambda(t) = mu t + b'A^{-1}(X_t - e N_t), continuous and non-decreasing.
/// Throws model::SpecError for t outside [0, horizon].
double compensator(const model::UnivariateSpec& spec, const model::EventSeries& events, double t);

/// Per-component compensators (Lambda_1(t), Lambda_2(t)).
std::array<double, 2> compensator(const model::BivariateSpec& spec,
                                  const model::MarkedEventSeries& events, double t);

struct ResidualReport {
    std::vector<double> tau;
    std::vector<double> u;
    double ks_statistic{0.0};
    double p_value{1.0};
};

/// Time-rescaled arrivals tau_i = Lambda(t_i), their increments, and a KS test
/// of the increments against Exp(1).
ResidualReport residual_times(const model::UnivariateSpec& spec, const model::EventSeries& events);

/// One report per component, each on that component's own events and compensator.
std::array<ResidualReport, 2> residual_times(const model::BivariateSpec& spec,
                                             const model::MarkedEventSeries& events);

}  // namespace carma_hawkes::likelihood
