#pragma once

#include "carma_hawkes/data.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

// Lee-Mykland test for jumps in intraday returns, zero-drift form:
//   M(i) = r_i / sigma_hat(t_i),
//   sigma_hat^2(t_i) = 1/(K-2) sum_{j=i-K+2}^{i-1} |r_j| |r_{j-1}|,
// flagged when (|M(i)| - C_n) / S_n exceeds the Gumbel quantile -ln(-ln alpha).
namespace carma_hawkes::jumps {

struct LMConfig {
    /// Window K; 0 selects auto_window from the mean returns per day.
    int window{0};
    std::vector<double> alpha_levels{0.95, 0.975, 0.99, 0.995};
    /// Exponent for auto_window, in (-1, -0.5].
    double window_exponent{-0.6};
    bool drop_zero_returns{true};
    /// Let windows run across session days (overnight returns included).
    bool span_days{false};

    void check() const;
};

/// Paper grid of confidence levels.
inline const std::vector<double> kDefaultAlphas{0.95, 0.975, 0.99, 0.995};

/// c = sqrt(2/pi), the mean of |Z| for standard normal Z.
double lm_c_constant();

/// sigma_hat at 0-based return index i, using r[i-K+1 .. i-1]. Throws
/// std::invalid_argument when i < K - 1 or K < 3; empty when the window is all
/// zeros.
std::optional<double> local_volatility(std::span<const double> returns, std::size_t i, int window);

/// (C_n, S_n) for n >= 3 tested observations.
std::pair<double, double> cs_constants(std::size_t n);

/// -ln(-ln alpha); throws unless 0 < alpha < 1.
double gumbel_threshold(double alpha);

/// K = ceil(n^{-exponent}) clamped to [3, n/2].
int auto_window(std::size_t n_per_day, double bar_exponent);

struct LMStatistics {
    /// Per tested observation.
    std::vector<double> m;
    std::vector<double> sigma_hat;
    /// Tick index of the later tick of each tested return.
    std::vector<std::size_t> tick_index;
    std::vector<double> returns;
    double c_n{0.0};
    double s_n{0.0};
    std::size_t n{0};
    double c_constant{0.0};
};

struct LevelResult {
    double alpha{0.0};
    double beta_star{0.0};
    /// C_n + S_n beta_star, the cut-off for |M(i)|.
    double critical{0.0};
    /// Positions into the tested arrays of LMStatistics.
    std::vector<std::size_t> flagged;
    std::vector<std::size_t> tick_index;
    std::vector<int> signs;
    std::vector<double> statistics;
    double jump_fraction{0.0};
};

struct JumpDetectionResult {
    int window{0};
    LMStatistics stats;
    std::vector<LevelResult> levels;
    std::size_t n_returns{0};
    std::size_t zero_returns_dropped{0};
    std::size_t day_boundary_excluded{0};
    /// Observations with a full window but sigma_hat = 0.
    std::size_t untestable{0};

    /// Level with this alpha (exact match); throws if absent.
    [[nodiscard]] const LevelResult& level(double alpha) const;
};

JumpDetectionResult detect_jumps(const data::TickSeries& ticks, const LMConfig& config = {});

/// Per tested return: timestamp, business_time, return, sigma_hat, m,
/// statistic, one 0/1 flag column per alpha, sign.
void write_jump_csv(std::ostream& out, const JumpDetectionResult& result, const data::TickSeries& ticks);

}  // namespace carma_hawkes::jumps
