#pragma once

#include "carma_hawkes/model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>

namespace carma_hawkes::simulate {

struct SimulationConfig {
    double horizon{1.0};
    std::uint64_t seed{0};
    std::uint64_t stream{0};
    /// Exceeding this count raises SimulationError (guards near-critical specs).
    std::size_t max_events{10'000'000};
    /// Stop at the n-th accepted event and use its time as the horizon.
    std::optional<std::size_t> stop_after_events{};
    /// Longest stretch before the dominating bound is recomputed.
    double refresh_interval{1.0};

    void check() const;
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Counters from one run; max_bound_ratio is the largest
/// true-intensity / dominating-bound ratio seen at any proposal (<= 1).
struct SimulationDiagnostics {
    std::size_t proposals{0};
    std::size_t accepted{0};
    std::size_t refreshes{0};
    double max_bound_ratio{0.0};
};

/// Ogata-style thinning against the modal envelope
///   lambda(t0 + s) <= mu + sum_k |c_k z_k| e^{Re(lambda_k) s} <= mu + sum_k |c_k z_k|,
/// recomputed after every proposal. Deterministic in (spec, config).
model::EventSeries simulate_univariate(const model::UnivariateSpec& spec,
                                       const SimulationConfig& config,
                                       SimulationDiagnostics* diagnostics = nullptr);

/// Thinning on the total intensity; an accepted point is positive with
/// probability lambda_1 / (lambda_1 + lambda_2).
model::MarkedEventSeries simulate_bivariate(const model::BivariateSpec& spec,
                                            const SimulationConfig& config,
                                            SimulationDiagnostics* diagnostics = nullptr);

}  // namespace carma_hawkes::simulate
