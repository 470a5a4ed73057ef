#pragma once

#include <string>

#include <json.hpp>

#include "uep/sim.hpp"
#include "uep/verify.hpp"

namespace uep {

using nlohmann::json;

// {"input_size": k, "output_size": m, "rows": [[...], ...]}; entries <= 0 or
// row sums off by more than 1e-9 are rejected.
Channel channel_from_json(const json& j);
json channel_to_json(const Channel& w);
Channel load_channel(const std::string& path);

json distribution_to_json(const Distribution& d);
Distribution distribution_from_json(const json& j);

// Materialized code specs round-trip all fields including seeds. A spec may
// instead carry a "build" object with high-level parameters; loading then
// materializes the construction (plans from the J-optimal witness, thresholds
// from the construction formulas unless overridden).
json mw_spec_to_json(const MwCodeSpec& s);
MwCodeSpec mw_spec_from_json(const json& j);
json erasure_spec_to_json(const ErasureCodeSpec& s);
ErasureCodeSpec erasure_spec_from_json(const json& j);
json bitwise_spec_to_json(const BitwiseCodeSpec& s);
BitwiseCodeSpec bitwise_spec_from_json(const json& j);

json scheme_to_json(const VlcScheme& scheme);
VlcScheme scheme_from_json(const json& j, const Channel& w, const JCurve& curve);
VlcScheme load_scheme(const std::string& path, const Channel& w, const JCurve& curve);

json report_to_json(const SimReport& rep);
SimReport report_from_json(const json& j);
std::string report_to_csv(const SimReport& rep);

json table_to_json(const ExactOutcomeTable& table);

json verdicts_to_json(const std::vector<Verdict>& verdicts);

json time_share_to_json(const TimeSharePlan& plan);
json phase_plan_to_json(const PhasePlan& plan);

// CSV with header x,y,witness_json; witnesses serialized as embedded JSON.
std::string curve_to_csv(const std::vector<CurvePoint>& points);

RateExponentQuery query_from_json(const json& j);

// Codebook audit dump: one row per message, letters comma-separated.
std::string codebook_to_csv(const Codebook& book);

void write_file(const std::string& path, const std::string& content);
json read_json_file(const std::string& path);

// Fixed formatting used for all printed numbers (6 significant digits).
std::string format_sig(double v);

} // namespace uep
