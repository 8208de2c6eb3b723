#include "carma_hawkes/simulate.hpp"

#include "carma_hawkes/rng.hpp"
#include "carma_hawkes/spectral.hpp"

#include <cassert>
#include <cmath>
#include <string>
#include <vector>

namespace carma_hawkes::simulate {

using spectral::Complex;

void SimulationConfig::check() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be > 0");
    if (max_events == 0) throw std::invalid_argument("max_events must be > 0");
    if (stop_after_events && *stop_after_events == 0) {
        throw std::invalid_argument("stop_after_events must be > 0");
    }
    if (!(refresh_interval > 0.0)) throw std::invalid_argument("refresh_interval must be > 0");
}

namespace {

struct Outcome {
    std::vector<double> times;
    std::vector<int> components;
    double horizon{0.0};
};

Outcome thin(const spectral::ModalSystem& sys, const SimulationConfig& cfg,
             SimulationDiagnostics& diag) {
    cfg.check();
    Rng rng(cfg.seed, cfg.stream);
    const int d = sys.modes();
    const int m = sys.outputs;
    std::vector<Complex> total_load(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        for (int i = 0; i < m; ++i) total_load[k] += sys.load(i, k);
    }
    const double mu_total = sys.mu[0] + (m == 2 ? sys.mu[1] : 0.0);

    std::vector<Complex> z(static_cast<std::size_t>(d));
    auto advance = [&](double s) {
        for (int k = 0; k < d; ++k) z[k] *= std::exp(sys.eigenvalues[k] * s);
    };

    Outcome out;
    const std::size_t limit = cfg.stop_after_events.value_or(0);
    double t = 0.0;
    out.horizon = cfg.horizon;
    while (true) {
        double bound = mu_total;
        for (int k = 0; k < d; ++k) bound += std::abs(total_load[k] * z[k]);
        const double s = rng.exponential(bound);
        if (t + s > cfg.horizon) break;
        if (s > cfg.refresh_interval) {
            advance(cfg.refresh_interval);
            t += cfg.refresh_interval;
            ++diag.refreshes;
            continue;
        }
        t += s;
        advance(s);
        std::array<double, 2> lam{sys.mu[0], m == 2 ? sys.mu[1] : 0.0};
        for (int i = 0; i < m; ++i) {
            for (int k = 0; k < d; ++k) lam[i] += (sys.load(i, k) * z[k]).real();
            lam[i] = std::max(lam[i], 0.0);
        }
        const double lam_total = lam[0] + lam[1];
        ++diag.proposals;
        diag.max_bound_ratio = std::max(diag.max_bound_ratio, lam_total / bound);
        assert(lam_total <= bound * (1.0 + 1e-9));
        if (rng.uniform() * bound >= lam_total) continue;

        int comp = 0;
        if (m == 2) comp = rng.uniform() * lam_total < lam[0] ? 0 : 1;
        for (int k = 0; k < d; ++k) {
            if (sys.source[k] == comp) z[k] += sys.jump[k];
        }
        out.times.push_back(t);
        out.components.push_back(comp);
        ++diag.accepted;
        if (out.times.size() > cfg.max_events) {
            throw SimulationError("simulation exceeded max_events cap of " +
                                  std::to_string(cfg.max_events) + " events");
        }
        if (limit != 0 && out.times.size() == limit) {
            out.horizon = t;
            break;
        }
    }
    return out;
}

}  // namespace

model::EventSeries simulate_univariate(const model::UnivariateSpec& spec, const SimulationConfig& config,
                                       SimulationDiagnostics* diagnostics) {
    model::require_valid(spec);
    SimulationDiagnostics diag;
    auto out = thin(spectral::modal_system(spec), config, diag);
    if (diagnostics) *diagnostics = diag;
    return model::EventSeries(std::move(out.times), out.horizon);
}

model::MarkedEventSeries simulate_bivariate(const model::BivariateSpec& spec,
                                            const SimulationConfig& config,
                                            SimulationDiagnostics* diagnostics) {
    model::require_valid(spec);
    SimulationDiagnostics diag;
    auto out = thin(spectral::modal_system(spec), config, diag);
    if (diagnostics) *diagnostics = diag;
    std::vector<model::Mark> marks;
    marks.reserve(out.components.size());
    for (int c : out.components) marks.push_back(c == 0 ? model::Mark::Positive : model::Mark::Negative);
    return model::MarkedEventSeries(std::move(out.times), std::move(marks), out.horizon);
}

}  // namespace carma_hawkes::simulate
