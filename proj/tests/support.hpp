#pragma once

// Independent oracles and generators shared by the test binaries. Nothing in
// here calls the likelihood module; state propagation uses Eigen's own
// matrix exponential and integrals use Gauss-Kronrod quadrature.

#include "carma_hawkes/model.hpp"
#include "carma_hawkes/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

namespace m = carma_hawkes::model;

inline Eigen::MatrixXd companion(const Eigen::VectorXd& a) {
    const auto p = a.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i + 1 < p; ++i) A(i, i + 1) = 1.0;
    for (Eigen::Index j = 0; j < p; ++j) A(p - 1, j) = -a(p - 1 - j);
    return A;
}

inline Eigen::MatrixXd expm(const Eigen::MatrixXd& A, double t) { return (A * t).exp(); }

/// Coefficients (a_1..a_p) of prod (z + r_k).
inline std::vector<double> poly_from_roots(const std::vector<double>& roots) {
    std::vector<double> c{1.0};
    for (double r : roots) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 1] += c[i] * r;
        }
        c = next;
    }
    return {c.begin() + 1, c.end()};
}

struct LoglikParts {
    double integral{0.0};
    double log_sum{0.0};
    [[nodiscard]] double value() const { return log_sum - integral; }
};

/// -int_0^T lambda dt + sum log lambda(T_i-) by quadrature over each
/// inter-event interval, T = last event unless `window_end` is given.
inline LoglikParts quadrature_loglik(const m::UnivariateSpec& s, const std::vector<double>& times,
                                     double window_end = -1.0) {
    using boost::math::quadrature::gauss_kronrod;
    const Eigen::MatrixXd A = companion(s.a);
    const int p = s.order.p;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
    e(p - 1) = 1.0;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
    double t0 = 0.0;
    LoglikParts out;
    auto segment = [&](double a, double b) {
        if (b <= a) return;
        const Eigen::VectorXd x0 = x;
        const double base = t0;
        auto f = [&](double t) { return s.mu + s.b.dot(expm(A, t - base) * x0); };
        out.integral += gauss_kronrod<double, 31>::integrate(f, a, b, 8, 1e-11);
    };
    for (double t : times) {
        segment(t0, t);
        x = expm(A, t - t0) * x;
        out.log_sum += std::log(s.mu + s.b.dot(x));
        x += e;
        t0 = t;
    }
    if (window_end > t0) segment(t0, window_end);
    return out;
}

inline LoglikParts quadrature_loglik(const m::BivariateSpec& s, const std::vector<double>& times,
                                     const std::vector<m::Mark>& marks) {
    using boost::math::quadrature::gauss_kronrod;
    const int p1 = s.order.p1;
    const int p2 = s.order.p2;
    const int d = p1 + p2;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
    A.topLeftCorner(p1, p1) = companion(s.a1);
    A.bottomRightCorner(p2, p2) = companion(s.a2);
    Eigen::MatrixXd B(2, d);
    B.row(0) << s.b11.transpose(), s.b12.transpose();
    B.row(1) << s.b21.transpose(), s.b22.transpose();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
    double t0 = 0.0;
    LoglikParts out;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        const Eigen::VectorXd x0 = x;
        const double base = t0;
        auto f = [&](double u) {
            const Eigen::Vector2d lam = s.mu + B * (expm(A, u - base) * x0);
            return lam.sum();
        };
        if (t > t0) out.integral += gauss_kronrod<double, 31>::integrate(f, t0, t, 8, 1e-11);
        x = expm(A, t - t0) * x;
        const Eigen::Vector2d lam = s.mu + B * x;
        const int c = m::component_of(marks[i]);
        out.log_sum += std::log(lam(c));
        x(c == 0 ? p1 - 1 : d - 1) += 1.0;
        t0 = t;
    }
    return out;
}

/// Classical exponential Hawkes likelihood with kernel alpha e^{-beta t}
/// on [0, T_n], via the recursion R_i = e^{-beta (t_i - t_{i-1})} (1 + R_{i-1}).
inline double ozaki_loglik(double mu, double alpha, double beta, const std::vector<double>& t) {
    const double tn = t.back();
    double r = 0.0;
    double ll = -mu * tn;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i > 0) r = std::exp(-beta * (t[i] - t[i - 1])) * (1.0 + r);
        ll += std::log(mu + alpha * r);
        ll -= alpha / beta * (1.0 - std::exp(-beta * (tn - t[i])));
    }
    return ll;
}

inline double uniform(carma_hawkes::Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

/// A random spec that passes validate(): real distinct roots, non-negative
/// MA coefficients, branching ratio in [0.2, 0.7].
inline m::UnivariateSpec random_univariate(carma_hawkes::Rng& rng, int p_max = 3) {
    for (;;) {
        const int p = 1 + static_cast<int>(rng.uniform() * p_max);
        const int q = static_cast<int>(rng.uniform() * p);
        std::vector<double> roots;
        double r = uniform(rng, 0.4, 1.5);
        for (int k = 0; k < p; ++k) {
            roots.push_back(r);
            r *= uniform(rng, 1.4, 2.5);
        }
        const auto a = poly_from_roots(roots);
        std::vector<double> b(static_cast<std::size_t>(q) + 1);
        b[0] = 1.0;
        for (int j = 1; j <= q; ++j) b[static_cast<std::size_t>(j)] = uniform(rng, 0.0, 0.8);
        const double eta = uniform(rng, 0.2, 0.7);
        const double scale = eta * a.back() / b[0];
        for (double& v : b) v *= scale;
        auto spec = m::make_univariate({p, q}, uniform(rng, 0.5, 2.0), a, b);
        if (m::validate(spec).valid()) return spec;
    }
}

inline m::BivariateSpec random_bivariate(carma_hawkes::Rng& rng) {
    for (;;) {
        const int p1 = 1 + static_cast<int>(rng.uniform() * 2);
        const int p2 = 1 + static_cast<int>(rng.uniform() * 2);
        auto roots = [&](int p) {
            std::vector<double> rs;
            double r = uniform(rng, 0.5, 1.5);
            for (int k = 0; k < p; ++k) {
                rs.push_back(r);
                r *= uniform(rng, 1.5, 2.5);
            }
            return poly_from_roots(rs);
        };
        const auto a1 = roots(p1);
        const auto a2 = roots(p2);
        const int q1 = static_cast<int>(rng.uniform() * p1);
        const int q21 = static_cast<int>(rng.uniform() * p1);
        const int q12 = static_cast<int>(rng.uniform() * p2);
        const int q2 = static_cast<int>(rng.uniform() * p2);
        auto ma = [&](int q, double ap, double eta) {
            std::vector<double> b(static_cast<std::size_t>(q) + 1);
            b[0] = 1.0;
            for (int j = 1; j <= q; ++j) b[static_cast<std::size_t>(j)] = uniform(rng, 0.0, 0.8);
            for (double& v : b) v *= eta * ap;
            return b;
        };
        auto spec = m::make_bivariate({p1, p2, q1, q12, q21, q2}, {uniform(rng, 0.3, 1.0), uniform(rng, 0.3, 1.0)},
                                      a1, a2, ma(q1, a1.back(), uniform(rng, 0.1, 0.4)),
                                      ma(q12, a2.back(), uniform(rng, 0.05, 0.3)),
                                      ma(q21, a1.back(), uniform(rng, 0.05, 0.3)),
                                      ma(q2, a2.back(), uniform(rng, 0.1, 0.4)));
        if (m::validate(spec).valid()) return spec;
    }
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace oracle
