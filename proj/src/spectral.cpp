#include "carma_hawkes/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace carma_hawkes::spectral {

namespace {

bool by_real_then_imag(const Complex& x, const Complex& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
}

std::vector<Complex> quadratic_roots(double a1, double a2) {
    const double disc = a1 * a1 - 4.0 * a2;
    if (disc >= 0.0) {
        // Avoid cancellation: largest-magnitude root first, the other from the product.
        const double s = std::sqrt(disc);
        const double big = a1 >= 0.0 ? -(a1 + s) / 2.0 : (-a1 + s) / 2.0;
        const double small = big != 0.0 ? a2 / big : 0.0;
        std::vector<Complex> r{Complex(big, 0.0), Complex(small, 0.0)};
        std::sort(r.begin(), r.end(), by_real_then_imag);
        return r;
    }
    const double re = -a1 / 2.0;
    const double im = std::sqrt(-disc) / 2.0;
    return {Complex(re, -im), Complex(re, im)};
}

void append_block(ModalSystem& sys, const Eigen::VectorXd& a, int source) {
    const auto eig = companion_eigenvalues(a);
    const auto chk = check_spectrum(eig);
    if (!chk.finite || !chk.distinct) {
        throw model::SpecError("autoregressive block has repeated or non-finite eigenvalues");
    }
    const int p = static_cast<int>(eig.size());
    for (int k = 0; k < p; ++k) {
        Complex deriv(1.0, 0.0);
        for (int l = 0; l < p; ++l) {
            if (l != k) deriv *= eig[k] - eig[l];
        }
        sys.eigenvalues.push_back(eig[k]);
        sys.source.push_back(source);
        sys.jump.push_back(1.0 / deriv);
        if (eig[k].imag() != 0.0) sys.real = false;
    }
}

}  // namespace

std::vector<Complex> companion_eigenvalues(const Eigen::VectorXd& a) {
    const auto p = a.size();
    if (p == 0) throw model::SpecError("empty autoregressive vector");
    if (p == 1) return {Complex(-a(0), 0.0)};
    if (p == 2) return quadratic_roots(a(0), a(1));
    Eigen::EigenSolver<Eigen::MatrixXd> solver(model::build_companion(a), false);
    if (solver.info() != Eigen::Success) {
        throw model::SpecError("eigenvalue computation failed for companion matrix");
    }
    std::vector<Complex> out(solver.eigenvalues().data(),
                             solver.eigenvalues().data() + solver.eigenvalues().size());
    std::sort(out.begin(), out.end(), by_real_then_imag);
    return out;
}

SpectrumCheck check_spectrum(const std::vector<Complex>& eigenvalues) {
    SpectrumCheck c;
    c.finite = std::all_of(eigenvalues.begin(), eigenvalues.end(), [](const Complex& z) {
        return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
    if (!c.finite || eigenvalues.empty()) return c;
    c.max_real = -std::numeric_limits<double>::infinity();
    c.min_separation = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
        c.spectral_radius = std::max(c.spectral_radius, std::abs(eigenvalues[k]));
        c.max_real = std::max(c.max_real, eigenvalues[k].real());
        for (std::size_t l = k + 1; l < eigenvalues.size(); ++l) {
            c.min_separation = std::min(c.min_separation, std::abs(eigenvalues[k] - eigenvalues[l]));
        }
    }
    c.distinct = eigenvalues.size() == 1 || c.min_separation > model::kDistinctTolerance * c.spectral_radius;
    c.stable = c.max_real < -model::kStableTolerance;
    return c;
}

Complex eval_ma_polynomial(const Eigen::VectorXd& b, Complex z) {
    Complex acc(0.0, 0.0);
    for (auto i = b.size(); i-- > 0;) acc = acc * z + b(i);
    return acc;
}

ModalSystem modal_system(const model::UnivariateSpec& spec) {
    ModalSystem sys;
    sys.outputs = 1;
    sys.mu = {spec.mu, 0.0};
    append_block(sys, spec.a, 0);
    sys.loading.reserve(sys.eigenvalues.size());
    for (const auto& lam : sys.eigenvalues) sys.loading.push_back(eval_ma_polynomial(spec.b, lam));
    return sys;
}

ModalSystem modal_system(const model::BivariateSpec& spec) {
    ModalSystem sys;
    sys.outputs = 2;
    sys.mu = {spec.mu(0), spec.mu(1)};
    append_block(sys, spec.a1, 0);
    append_block(sys, spec.a2, 1);
    const int d = sys.modes();
    sys.loading.assign(static_cast<std::size_t>(2 * d), Complex{});
    for (int k = 0; k < d; ++k) {
        const bool first = sys.source[k] == 0;
        sys.loading[k] = eval_ma_polynomial(first ? spec.b11 : spec.b12, sys.eigenvalues[k]);
        sys.loading[d + k] = eval_ma_polynomial(first ? spec.b21 : spec.b22, sys.eigenvalues[k]);
    }
    return sys;
}

double modal_kernel(const ModalSystem& sys, int target, int source, double t) {
    double h = 0.0;
    for (int k = 0; k < sys.modes(); ++k) {
        if (sys.source[k] != source) continue;
        h += (sys.load(target, k) * sys.jump[k] * std::exp(sys.eigenvalues[k] * t)).real();
    }
    return h;
}

double modal_kernel_integral(const ModalSystem& sys, int target, int source) {
    double g = 0.0;
    for (int k = 0; k < sys.modes(); ++k) {
        if (sys.source[k] != source) continue;
        g -= (sys.load(target, k) * sys.jump[k] / sys.eigenvalues[k]).real();
    }
    return g;
}

double slowest_decay(const ModalSystem& sys) {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& lam : sys.eigenvalues) r = std::min(r, std::abs(lam.real()));
    return r;
}

}  // namespace carma_hawkes::spectral
