#pragma once

#include "carma_hawkes/model.hpp"

#include <Eigen/Dense>

namespace carma_hawkes::model {

/// Dense block form shared by the univariate and bivariate models:
///   lambda_t = mu + B X_t,  dX_t = Abar X_{t-} dt + Ebar dN_t.
/// For the univariate model B is 1 x p and Ebar is the single column e.
struct DenseSystem {
    Eigen::MatrixXd abar;
    Eigen::MatrixXd loading;  // B, outputs x state
    Eigen::VectorXd mu;       // outputs
    Eigen::MatrixXd ebar;     // state x outputs

    [[nodiscard]] int outputs() const noexcept { return static_cast<int>(mu.size()); }
    [[nodiscard]] int state_dim() const noexcept { return static_cast<int>(abar.rows()); }
};

DenseSystem dense_system(const UnivariateSpec& spec);
DenseSystem dense_system(const BivariateSpec& spec);

}  // namespace carma_hawkes::model
