#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace carma_hawkes::pipeline {

struct KsResult {
    double statistic{0.0};
    double p_value{1.0};
    std::size_t n{0};
};

/// Asymptotic Kolmogorov survival Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_survival(double x);

/// One-sample KS test against a continuous CDF. The p-value uses
/// Q((sqrt(n) + 0.12 + 0.11 / sqrt(n)) D). Throws std::invalid_argument on an
/// empty or non-finite sample.
KsResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf);

/// KS test of inter-arrival samples against the unit exponential. All
/// samples must be finite and >= 0.
KsResult ks_test_exp1(std::span<const double> u);

}  // namespace carma_hawkes::pipeline
