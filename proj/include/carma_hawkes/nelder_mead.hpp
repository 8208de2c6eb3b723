#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace carma_hawkes::estimate {

struct NelderMeadOptions {
    /// Stop when f_worst - f_best <= tolerance * max(1, |f_best|).
    double tolerance{1e-8};
    std::size_t max_evaluations{20000};
    /// After convergence, rebuild the simplex around the best vertex and rerun
    /// until a pass brings no improvement beyond the tolerance.
    int max_restarts{4};
    /// Dimension-dependent coefficients (Gao and Han); helps beyond ~5 dims.
    bool adaptive{true};
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value{0.0};
    std::size_t evaluations{0};
    int restarts{0};
    bool converged{false};
};

/// Minimizes f from x0 with initial edge lengths `step`. f may return +inf to
/// reject a point; the simplex then contracts away from it. x0 must have a
/// finite value.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                             const NelderMeadOptions& options = {});

}  // namespace carma_hawkes::estimate
