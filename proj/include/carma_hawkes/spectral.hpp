#pragma once

#include "carma_hawkes/model.hpp"

#include <array>
#include <complex>
#include <vector>

// Modal coordinates for the CARMA state.
//
// For a companion matrix with distinct eigenvalues lambda_k the eigenvectors
// are Vandermonde columns v_k = (1, lambda_k, ..., lambda_k^{p-1}). In the
// coordinates z = V^{-1} X the state decouples:
//   z_k(t + s) = e^{lambda_k s} z_k(t),   an event adds 1 / a'(lambda_k),
// and an MA vector b couples to mode k through the polynomial b(lambda_k).
namespace carma_hawkes::spectral {

using Complex = std::complex<double>;

/// Roots of z^p + a_1 z^{p-1} + ... + a_p.
std::vector<Complex> companion_eigenvalues(const Eigen::VectorXd& a);

struct SpectrumCheck {
    bool finite{false};
    bool distinct{false};
    bool stable{false};
    double spectral_radius{0.0};
    double min_separation{0.0};
    double max_real{0.0};
};

SpectrumCheck check_spectrum(const std::vector<Complex>& eigenvalues);

/// b_0 + b_1 z + ... + b_{p-1} z^{p-1}.
Complex eval_ma_polynomial(const Eigen::VectorXd& b, Complex z);

struct ModalSystem {
    int outputs{1};
    std::array<double, 2> mu{0.0, 0.0};
    std::vector<Complex> eigenvalues;
    /// Mark component feeding each mode (always 0 for the univariate model).
    std::vector<int> source;
    /// Modal increment when an event of the mode's source occurs.
    std::vector<Complex> jump;
    /// Row-major outputs x modes: lambda_i = mu_i + Re sum_k loading(i,k) z_k.
    std::vector<Complex> loading;
    /// True when every eigenvalue is real, enabling the real-arithmetic path.
    bool real{true};

    [[nodiscard]] int modes() const noexcept { return static_cast<int>(eigenvalues.size()); }
    [[nodiscard]] Complex load(int output, int mode) const {
        return loading[static_cast<std::size_t>(output * modes() + mode)];
    }
};

/// Throws model::SpecError when an autoregressive block has repeated or
/// non-finite eigenvalues.
ModalSystem modal_system(const model::UnivariateSpec& spec);
ModalSystem modal_system(const model::BivariateSpec& spec);

/// Kernel from `source` events onto output `target` at lag t >= 0.
double modal_kernel(const ModalSystem& sys, int target, int source, double t);

/// Integral of modal_kernel over [0, inf).
double modal_kernel_integral(const ModalSystem& sys, int target, int source);

/// Smallest |Re lambda| over all modes (the slowest decay rate).
double slowest_decay(const ModalSystem& sys);

}  // namespace carma_hawkes::spectral
