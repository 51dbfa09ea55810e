#pragma once

#include "minstab/config.hpp"
#include "minstab/mcf_flow.hpp"
#include "minstab/pointwise_algebra.hpp"
#include "minstab/second_variation.hpp"
#include "minstab/stability_criterion.hpp"

#include <json.hpp>

#include <string>

namespace minstab {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json to_json(const CriterionConstants& constants);
Json to_json(const CriterionReport& report);
/// The eigenfield itself is written to CSV, not to JSON.
Json to_json(const QuadraticFormReport& report);
Json to_json(const TraceRow& row);
Json to_json(const FlowResult& result);
Json to_json(const OmegaMonitorReport& report);
Json to_json(const AlgebraSample& sample);
Json to_json(const XiBatchReport& report);
Json to_json(const OracleEquivalenceReport& report);
Json to_json(const EigenConfig& config);
Json to_json(const RunConfig& config);

/// Writes `report` as indented UTF-8 JSON with a trailing LF.
void write_json(const std::string& path, const Json& report);

}  // namespace minstab
