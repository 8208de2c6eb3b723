#include "carma_hawkes/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace carma_hawkes::estimate {

namespace {

struct Simplex {
    std::vector<Eigen::VectorXd> x;
    std::vector<double> f;
};

bool spread_small(double best, double worst, double tol) {
    return std::isfinite(worst) && worst - best <= tol * std::max(1.0, std::abs(best));
}

double diameter(const Simplex& s) {
    double d = 0.0;
    for (std::size_t i = 1; i < s.x.size(); ++i) d = std::max(d, (s.x[i] - s.x[0]).lpNorm<Eigen::Infinity>());
    return d;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                             const NelderMeadOptions& options) {
    const auto n = x0.size();
    if (n == 0 || step.size() != n) throw std::invalid_argument("nelder_mead: bad dimensions");
    const double dn = static_cast<double>(n);
    const double alpha = 1.0;
    const double gamma = options.adaptive ? 1.0 + 2.0 / dn : 2.0;
    const double rho = options.adaptive ? 0.75 - 0.5 / dn : 0.5;
    const double sigma = options.adaptive ? 1.0 - 1.0 / dn : 0.5;

    NelderMeadResult res;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++res.evaluations;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    Eigen::VectorXd best = x0;
    double best_f = eval(x0);
    if (!std::isfinite(best_f)) throw std::invalid_argument("nelder_mead: start point has no finite value");

    std::vector<std::size_t> order(static_cast<std::size_t>(n) + 1);
    for (int pass = 0; pass <= options.max_restarts; ++pass) {
        Simplex s;
        s.x.push_back(best);
        s.f.push_back(best_f);
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::VectorXd v = best;
            v(i) += step(i);
            s.x.push_back(v);
            s.f.push_back(eval(v));
        }
        bool converged = false;
        while (res.evaluations < options.max_evaluations) {
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return s.f[a] < s.f[b]; });
            Simplex sorted;
            for (auto k : order) {
                sorted.x.push_back(std::move(s.x[k]));
                sorted.f.push_back(s.f[k]);
            }
            s = std::move(sorted);
            const auto w = static_cast<std::size_t>(n);
            if (spread_small(s.f[0], s.f[w], options.tolerance) ||
                diameter(s) <= 1e-14 * (1.0 + s.x[0].lpNorm<Eigen::Infinity>())) {
                converged = std::isfinite(s.f[w]);
                break;
            }
            Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
            for (std::size_t i = 0; i < w; ++i) c += s.x[i];
            c /= dn;

            const Eigen::VectorXd xr = c + alpha * (c - s.x[w]);
            const double fr = eval(xr);
            if (fr < s.f[0]) {
                const Eigen::VectorXd xe = c + gamma * (xr - c);
                const double fe = eval(xe);
                if (fe < fr) {
                    s.x[w] = xe;
                    s.f[w] = fe;
                } else {
                    s.x[w] = xr;
                    s.f[w] = fr;
                }
                continue;
            }
            if (fr < s.f[w - 1]) {
                s.x[w] = xr;
                s.f[w] = fr;
                continue;
            }
            const bool outside = fr < s.f[w];
            const Eigen::VectorXd xc = outside ? Eigen::VectorXd(c + rho * (xr - c))
                                               : Eigen::VectorXd(c + rho * (s.x[w] - c));
            const double fc = eval(xc);
            if (outside ? fc <= fr : fc < s.f[w]) {
                s.x[w] = xc;
                s.f[w] = fc;
                continue;
            }
            for (std::size_t i = 1; i <= w; ++i) {
                s.x[i] = s.x[0] + sigma * (s.x[i] - s.x[0]);
                s.f[i] = eval(s.x[i]);
            }
        }
        const auto it = std::min_element(s.f.begin(), s.f.end());
        const double pass_f = *it;
        const bool improved = pass_f < best_f - options.tolerance * std::max(1.0, std::abs(best_f));
        if (pass_f < best_f) {
            best = s.x[static_cast<std::size_t>(it - s.f.begin())];
            best_f = pass_f;
        }
        res.converged = converged;
        res.restarts = pass;
        if (!converged || (pass > 0 && !improved)) break;
    }
    res.x = best;
    res.value = best_f;
    return res;
}

}  // namespace carma_hawkes::estimate
