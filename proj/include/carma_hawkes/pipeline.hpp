#pragma once

#include "carma_hawkes/data.hpp"
#include "carma_hawkes/estimate.hpp"
#include "carma_hawkes/jumps.hpp"
#include "carma_hawkes/ks.hpp"
#include "carma_hawkes/model.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace carma_hawkes::pipeline {

/// Frameworks in escalation order.
enum class FrameworkKind { bCH, uCHLM, bCHLM };

std::string to_string(FrameworkKind kind);

using PointProcess = std::variant<model::EventSeries, model::MarkedEventSeries>;

/// bCH: every non-zero price change, marked by its sign. uCHLM: LM-flagged
/// returns at `alpha`, unmarked. bCHLM: the same flags with their signs.
/// Event times are the business times of the later tick of each return.
/// Throws std::invalid_argument when the series is empty or alpha is missing.
PointProcess build_point_process(const data::TickSeries& ticks, FrameworkKind framework,
                                 std::optional<double> alpha, const jumps::LMConfig& lm_config);

/// Same, reusing a detection already run on `ticks`.
PointProcess build_point_process(const data::TickSeries& ticks, FrameworkKind framework,
                                 std::optional<double> alpha, const jumps::JumpDetectionResult& detection);

/// (1,0) (2,0) (2,1) (3,0) (3,1) (3,2), truncated at p_max.
std::vector<model::UnivariateOrder> univariate_lattice(int p_max = 3);

/// ([1,1],[0,0,0,0]) ([2,1],[1,0,1,0]) ([2,2],[1,1,1,1]) ([3,3],[1,1,1,1])
/// ([3,3],[2,2,2,2]), truncated at p_max.
std::vector<model::BivariateOrder> bivariate_lattice(int p_max = 3);

struct SelectionConfig {
    double lr_level{0.05};
    estimate::FitOptions fit{};
};

/// One candidate-versus-alternative comparison.
struct SelectionStep {
    std::string candidate;
    std::string alternative;
    /// "lr" for nested pairs, "aic" otherwise.
    std::string test;
    double candidate_loglik{0.0};
    double alternative_loglik{0.0};
    double statistic{0.0};
    double p_value{1.0};
    int df{0};
    double candidate_aic{0.0};
    double alternative_aic{0.0};
    bool alternative_wins{false};
};

struct SelectionResult {
    std::variant<model::UnivariateOrder, model::BivariateOrder> order;
    estimate::FitResult fit;
    std::vector<SelectionStep> steps;
    std::vector<std::string> warnings;
};

/// Walks the lattice from its first entry. For a nested pair the alternative
/// replaces the candidate when the LR test rejects at lr_level; otherwise when
/// its AIC is lower. The walk stops at the first comparison the candidate
/// survives. Nested alternatives are also started from the embedded candidate.
SelectionResult run_selection(const model::EventSeries& events, const std::vector<model::UnivariateOrder>& lattice,
                              const SelectionConfig& config = {});
SelectionResult run_selection(const model::MarkedEventSeries& events,
                              const std::vector<model::BivariateOrder>& lattice, const SelectionConfig& config = {});

struct PipelineConfig {
    jumps::LMConfig lm{};
    /// Residual KS p-value needed to accept a fit (each component for bivariate).
    double ks_level{0.05};
    double lr_level{0.05};
    int p_max{3};
    /// Longer point processes are cut to their first max_events events.
    std::size_t max_events{50000};
    estimate::FitOptions fit{};
};

struct KsSummary {
    double statistic{0.0};
    double p_value{1.0};
    std::size_t n{0};
};

struct StageResult {
    FrameworkKind framework{FrameworkKind::bCH};
    std::optional<double> alpha;
    std::size_t n_events{0};
    bool truncated{false};
    /// LM flagged fraction (LM frameworks only).
    std::optional<double> jump_fraction;
    std::optional<SelectionResult> selection;
    /// One entry for univariate, two (KS1, KS2) for bivariate.
    std::vector<KsSummary> ks;
    bool passed{false};
    /// Set when the stage could not be fitted (too few events, ...).
    std::optional<std::string> error;
};

struct PipelineReport {
    /// Stages in escalation order; LM frameworks list one stage per alpha.
    std::vector<StageResult> stages;
    std::vector<FrameworkKind> frameworks_attempted;
    bool success{false};
    std::optional<FrameworkKind> final_framework;
    std::optional<double> final_alpha;
    std::string final_order;
    std::vector<std::string> warnings;
    std::size_t lm_window{0};

    /// Index into stages of the accepted stage.
    std::optional<std::size_t> final_stage;
};

/// bCH, then uCHLM across every alpha, then bCHLM, stopping at the first
/// framework whose residuals pass. Within an LM framework the first passing
/// alpha (in configured order) is the verdict.
PipelineReport run_pipeline(const data::TickSeries& ticks, const PipelineConfig& config = {});

/// Flat table, one row per stage: framework, alpha, events, order, loglik,
/// aic, KS statistics and p-values, jump fraction, pass flag.
void write_stage_table(std::ostream& out, const PipelineReport& report);

}  // namespace carma_hawkes::pipeline
