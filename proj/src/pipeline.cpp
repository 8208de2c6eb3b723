#include "carma_hawkes/pipeline.hpp"

#include "carma_hawkes/likelihood.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace carma_hawkes::pipeline {

using model::BivariateOrder;
using model::EventSeries;
using model::MarkedEventSeries;
using model::UnivariateOrder;

std::string to_string(FrameworkKind kind) {
    switch (kind) {
        case FrameworkKind::bCH: return "bCH";
        case FrameworkKind::uCHLM: return "uCHLM";
        case FrameworkKind::bCHLM: return "bCHLM";
    }
    return "unknown";
}

namespace {

std::string label(FrameworkKind f, std::optional<double> alpha) {
    return alpha ? to_string(f) + " at alpha " + data::format_double(*alpha) : to_string(f);
}

PointProcess movements(const data::TickSeries& ticks) {
    const auto r = data::log_returns(ticks);
    std::vector<double> times;
    std::vector<model::Mark> marks;
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        if (r.values[i] == 0.0) continue;
        times.push_back(ticks.business_times[i + 1]);
        marks.push_back(r.values[i] > 0.0 ? model::Mark::Positive : model::Mark::Negative);
    }
    if (times.empty()) throw std::invalid_argument("bCH: the tick series has no price movements");
    return MarkedEventSeries(std::move(times), std::move(marks), ticks.business_times.back());
}

estimate::FitResult fit_any(const EventSeries& ev, const UnivariateOrder& o, const estimate::FitOptions& opt,
                            const std::optional<model::UnivariateSpec>& init) {
    return estimate::fit_univariate(ev, o, opt, init);
}

estimate::FitResult fit_any(const MarkedEventSeries& ev, const BivariateOrder& o, const estimate::FitOptions& opt,
                            const std::optional<model::BivariateSpec>& init) {
    return estimate::fit_bivariate(ev, o, opt, init);
}

template <typename Spec>
const Spec& spec_of(const estimate::FitResult& fit) {
    return std::get<Spec>(fit.spec);
}

template <typename Spec, typename Events, typename Order>
SelectionResult select(const Events& events, const std::vector<Order>& lattice, const SelectionConfig& cfg) {
    if (lattice.empty()) throw std::invalid_argument("selection lattice is empty");
    SelectionResult out;
    Order cand = lattice.front();
    estimate::FitResult cand_fit = fit_any(events, cand, cfg.fit, std::nullopt);
    for (std::size_t k = 1; k < lattice.size(); ++k) {
        const Order& alt = lattice[k];
        const bool nested = estimate::is_nested(cand, alt);
        std::optional<Spec> init;
        if (nested) init = estimate::embed_spec(spec_of<Spec>(cand_fit), alt);
        estimate::FitResult alt_fit = fit_any(events, alt, cfg.fit, init);

        SelectionStep step;
        step.candidate = model::to_string(cand);
        step.alternative = model::to_string(alt);
        step.candidate_loglik = cand_fit.loglik;
        step.alternative_loglik = alt_fit.loglik;
        step.candidate_aic = cand_fit.aic;
        step.alternative_aic = alt_fit.aic;
        if (nested) {
            step.test = "lr";
            step.df = alt_fit.n_params - cand_fit.n_params;
            if (step.df >= 1) {
                const auto lr = estimate::lr_test(alt_fit.loglik, cand_fit.loglik, step.df);
                step.statistic = lr.statistic;
                step.p_value = lr.p_value;
                if (lr.clamped) {
                    out.warnings.push_back("LR statistic clamped at 0 for " + step.candidate + " vs " +
                                           step.alternative);
                }
                step.alternative_wins = lr.p_value < cfg.lr_level;
            }
        } else {
            step.test = "aic";
            step.statistic = cand_fit.aic - alt_fit.aic;
            step.alternative_wins = alt_fit.aic < cand_fit.aic;
        }
        out.steps.push_back(step);
        if (!step.alternative_wins) break;
        cand = alt;
        cand_fit = std::move(alt_fit);
    }
    out.order = cand;
    out.fit = std::move(cand_fit);
    return out;
}

void truncate_events(PointProcess& pp, std::size_t cap, StageResult& stage, std::vector<std::string>& warnings) {
    std::visit(
        [&](auto& ev) {
            stage.n_events = ev.size();
            if (ev.size() <= cap) return;
            std::vector<double> t(ev.times().begin(), ev.times().begin() + static_cast<std::ptrdiff_t>(cap));
            const double horizon = t.back();
            if constexpr (std::is_same_v<std::decay_t<decltype(ev)>, MarkedEventSeries>) {
                std::vector<model::Mark> m(ev.marks().begin(), ev.marks().begin() + static_cast<std::ptrdiff_t>(cap));
                ev = MarkedEventSeries(std::move(t), std::move(m), horizon);
            } else {
                ev = EventSeries(std::move(t), horizon);
            }
            warnings.push_back(label(stage.framework, stage.alpha) + ": " + std::to_string(stage.n_events) +
                               " events cut to the first " + std::to_string(cap));
            stage.n_events = cap;
            stage.truncated = true;
        },
        pp);
}

KsSummary summarize(const likelihood::ResidualReport& r) { return {r.ks_statistic, r.p_value, r.u.size()}; }

StageResult run_stage(PointProcess pp, FrameworkKind framework, std::optional<double> alpha,
                      const PipelineConfig& cfg, PipelineReport& report) {
    StageResult stage;
    stage.framework = framework;
    stage.alpha = alpha;
    truncate_events(pp, cfg.max_events, stage, report.warnings);
    SelectionConfig sel{cfg.lr_level, cfg.fit};
    try {
        if (const auto* uni = std::get_if<EventSeries>(&pp)) {
            stage.selection = run_selection(*uni, univariate_lattice(cfg.p_max), sel);
            const auto res = likelihood::residual_times(stage.selection->fit.univariate(), *uni);
            stage.ks.push_back(summarize(res));
        } else {
            const auto& bi = std::get<MarkedEventSeries>(pp);
            stage.selection = run_selection(bi, bivariate_lattice(cfg.p_max), sel);
            const auto res = likelihood::residual_times(stage.selection->fit.bivariate(), bi);
            stage.ks.push_back(summarize(res[0]));
            stage.ks.push_back(summarize(res[1]));
        }
        for (const auto& w : stage.selection->warnings) report.warnings.push_back(label(framework, alpha) + ": " + w);
        stage.passed = std::all_of(stage.ks.begin(), stage.ks.end(),
                                   [&](const KsSummary& k) { return k.n > 0 && k.p_value >= cfg.ks_level; });
    } catch (const std::exception& e) {
        stage.error = e.what();
        stage.passed = false;
    }
    return stage;
}

void accept(PipelineReport& report, std::size_t index) {
    const auto& s = report.stages[index];
    report.success = true;
    report.final_stage = index;
    report.final_framework = s.framework;
    report.final_alpha = s.alpha;
    report.final_order = std::visit([](const auto& o) { return model::to_string(o); }, s.selection->order);
}

}  // namespace

PointProcess build_point_process(const data::TickSeries& ticks, FrameworkKind framework, std::optional<double> alpha,
                                 const jumps::JumpDetectionResult& detection) {
    if (framework == FrameworkKind::bCH) return movements(ticks);
    if (!alpha) throw std::invalid_argument(to_string(framework) + " needs an alpha level");
    const auto& lv = detection.level(*alpha);
    std::vector<double> times;
    std::vector<model::Mark> marks;
    for (std::size_t k = 0; k < lv.tick_index.size(); ++k) {
        times.push_back(ticks.business_times[lv.tick_index[k]]);
        marks.push_back(lv.signs[k] > 0 ? model::Mark::Positive : model::Mark::Negative);
    }
    if (times.empty()) throw std::invalid_argument(label(framework, alpha) + ": the LM test flagged no jumps");
    const double horizon = ticks.business_times.back();
    if (framework == FrameworkKind::uCHLM) return EventSeries(std::move(times), horizon);
    return MarkedEventSeries(std::move(times), std::move(marks), horizon);
}

PointProcess build_point_process(const data::TickSeries& ticks, FrameworkKind framework, std::optional<double> alpha,
                                 const jumps::LMConfig& lm_config) {
    if (framework == FrameworkKind::bCH) return movements(ticks);
    if (!alpha) throw std::invalid_argument(to_string(framework) + " needs an alpha level");
    jumps::LMConfig cfg = lm_config;
    cfg.alpha_levels = {*alpha};
    return build_point_process(ticks, framework, alpha, jumps::detect_jumps(ticks, cfg));
}

std::vector<UnivariateOrder> univariate_lattice(int p_max) {
    std::vector<UnivariateOrder> out;
    for (const auto& o : {UnivariateOrder{1, 0}, UnivariateOrder{2, 0}, UnivariateOrder{2, 1}, UnivariateOrder{3, 0},
                          UnivariateOrder{3, 1}, UnivariateOrder{3, 2}}) {
        if (o.p <= p_max) out.push_back(o);
    }
    return out;
}

std::vector<BivariateOrder> bivariate_lattice(int p_max) {
    std::vector<BivariateOrder> out;
    for (const auto& o : {BivariateOrder{1, 1, 0, 0, 0, 0}, BivariateOrder{2, 1, 1, 0, 1, 0},
                          BivariateOrder{2, 2, 1, 1, 1, 1}, BivariateOrder{3, 3, 1, 1, 1, 1},
                          BivariateOrder{3, 3, 2, 2, 2, 2}}) {
        if (std::max(o.p1, o.p2) <= p_max) out.push_back(o);
    }
    return out;
}

SelectionResult run_selection(const EventSeries& events, const std::vector<UnivariateOrder>& lattice,
                              const SelectionConfig& config) {
    return select<model::UnivariateSpec>(events, lattice, config);
}

SelectionResult run_selection(const MarkedEventSeries& events, const std::vector<BivariateOrder>& lattice,
                              const SelectionConfig& config) {
    return select<model::BivariateSpec>(events, lattice, config);
}

PipelineReport run_pipeline(const data::TickSeries& ticks, const PipelineConfig& cfg) {
    cfg.lm.check();
    if (!(cfg.ks_level > 0.0 && cfg.ks_level < 1.0)) throw std::invalid_argument("ks_level must lie in (0, 1)");
    if (!(cfg.lr_level > 0.0 && cfg.lr_level < 1.0)) throw std::invalid_argument("lr_level must lie in (0, 1)");
    if (cfg.p_max < 1) throw std::invalid_argument("p_max must be >= 1");
    if (cfg.max_events < estimate::kMinimumEvents) throw std::invalid_argument("max_events is too small");
    PipelineReport report;

    report.frameworks_attempted.push_back(FrameworkKind::bCH);
    try {
        report.stages.push_back(run_stage(movements(ticks), FrameworkKind::bCH, std::nullopt, cfg, report));
    } catch (const std::invalid_argument& e) {
        StageResult s;
        s.error = e.what();
        report.stages.push_back(std::move(s));
    }
    if (report.stages.back().passed) {
        accept(report, 0);
        return report;
    }

    const auto detection = jumps::detect_jumps(ticks, cfg.lm);
    report.lm_window = static_cast<std::size_t>(detection.window);
    for (const auto framework : {FrameworkKind::uCHLM, FrameworkKind::bCHLM}) {
        report.frameworks_attempted.push_back(framework);
        const std::size_t first = report.stages.size();
        for (double alpha : cfg.lm.alpha_levels) {
            StageResult stage;
            try {
                stage = run_stage(build_point_process(ticks, framework, alpha, detection), framework, alpha, cfg, report);
            } catch (const std::invalid_argument& e) {
                stage.framework = framework;
                stage.alpha = alpha;
                stage.error = e.what();
            }
            stage.jump_fraction = detection.level(alpha).jump_fraction;
            report.stages.push_back(std::move(stage));
        }
        for (std::size_t i = first; i < report.stages.size(); ++i) {
            if (report.stages[i].passed) {
                accept(report, i);
                return report;
            }
        }
    }
    report.warnings.push_back("no framework passed the residual test");
    return report;
}

void write_stage_table(std::ostream& out, const PipelineReport& report) {
    using data::format_double;
    out << "framework,alpha,n_events,order,loglik,aic,ks1_statistic,ks1_p_value,ks2_statistic,ks2_p_value,"
           "jump_fraction,passed\n";
    for (const auto& s : report.stages) {
        out << to_string(s.framework) << ',' << (s.alpha ? format_double(*s.alpha) : "") << ',' << s.n_events << ',';
        if (s.selection) {
            out << '"' << std::visit([](const auto& o) { return model::to_string(o); }, s.selection->order) << '"'
                << ',' << format_double(s.selection->fit.loglik) << ',' << format_double(s.selection->fit.aic);
        } else {
            out << ",,";
        }
        for (std::size_t k = 0; k < 2; ++k) {
            if (k < s.ks.size()) out << ',' << format_double(s.ks[k].statistic) << ',' << format_double(s.ks[k].p_value);
            else out << ",,";
        }
        out << ',' << (s.jump_fraction ? format_double(*s.jump_fraction) : "") << ',' << (s.passed ? 1 : 0) << '\n';
    }
}

}  // namespace carma_hawkes::pipeline
