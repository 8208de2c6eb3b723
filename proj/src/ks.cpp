#include "carma_hawkes/ks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace carma_hawkes::pipeline {

double kolmogorov_survival(double x) {
    if (x <= 0.0) return 1.0;
    // The alternating series converges slowly for small x; there Q is 1 to
    // well beyond double precision.
    if (x < 0.18) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += sign * term;
        if (term < 1e-17) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("KS test needs a non-empty sample");
    std::vector<double> x(sample.begin(), sample.end());
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument("KS test sample must be finite");
    }
    std::sort(x.begin(), x.end());
    const auto n = x.size();
    const double nd = static_cast<double>(n);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, static_cast<double>(i + 1) / nd - f, f - static_cast<double>(i) / nd});
    }
    const double sn = std::sqrt(nd);
    return {d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d), n};
}

KsResult ks_test_exp1(std::span<const double> u) {
    for (double v : u) {
        if (!(v >= 0.0)) throw std::invalid_argument("inter-arrival samples must be >= 0");
    }
    return ks_test(u, [](double x) { return -std::expm1(-x); });
}

}  // namespace carma_hawkes::pipeline
