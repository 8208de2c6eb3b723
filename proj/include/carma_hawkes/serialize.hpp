#pragma once

#include "carma_hawkes/data.hpp"
#include "carma_hawkes/estimate.hpp"
#include "carma_hawkes/jumps.hpp"
#include "carma_hawkes/model.hpp"
#include "carma_hawkes/pipeline.hpp"

#include <json.hpp>

#include <variant>

// JSON forms of the library types. Model files look like
//   {"model": "univariate", "order": {"p": 1, "q": 0}, "mu": 0.5, "a": [2], "b": [1]}
//   {"model": "bivariate", "order": {"p": [1, 1], "q": [0, 0, 0, 0]}, "mu": [0.4, 0.4],
//    "a1": [...], "a2": [...], "b11": [...], "b12": [...], "b21": [...], "b22": [...]}
// where each MA vector lists b_0..b_q.
namespace carma_hawkes::serialize {

using Json = nlohmann::ordered_json;

Json to_json(const model::UnivariateOrder& order);
Json to_json(const model::BivariateOrder& order);
Json to_json(const model::UnivariateSpec& spec);
Json to_json(const model::BivariateSpec& spec);
Json to_json(const estimate::FitResult& fit);
Json to_json(const jumps::JumpDetectionResult& result);
Json to_json(const pipeline::PipelineReport& report);
Json to_json(const data::SpreadStats& stats);
Json to_json(const data::IngestReport& report);

/// Parses either model kind; throws model::SpecError on malformed input and
/// runs the checked constructors (padding, positivity).
std::variant<model::UnivariateSpec, model::BivariateSpec> spec_from_json(const Json& j);

}  // namespace carma_hawkes::serialize
