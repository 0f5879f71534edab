#pragma once

#include <optional>
#include <string>

#include "json.hpp"

#include "dcsit/dof_region.hpp"
#include "dcsit/phase_plan.hpp"
#include "dcsit/sim_harness.hpp"

namespace dcsit {

using Json = nlohmann::ordered_json;

inline constexpr const char* kRegionSchema = "dcsit-bc/region/v1";
inline constexpr const char* kPlanSchema = "dcsit-bc/plan/v1";
inline constexpr const char* kReportSchema = "dcsit-bc/report/v1";

// [num, den]; components outside int64 are written as decimal strings.
Json rational_to_json(const Rational& r);
// Accepts [num, den] (integers or strings) or a "p/q" string. Throws
// IntegrityError on anything else.
Rational rational_from_json(const Json& j);

Json point_to_json(const DofPoint& p);

Json region_to_json(const DofRegion& r);

Json plan_to_json(const PhasePlan& plan);
/// Inverse of plan_to_json; also accepts a full plan document. Throws
/// IntegrityError if the fields are malformed or the durations, xi, zeta and
/// feed-forward budgets are inconsistent.
PhasePlan plan_from_json(const Json& j);

Json timeshare_to_json(const TimesharePlan& ts);

// What the `plan` subcommand emits: the route, the plan (multi-phase route)
// or the timeshare fallback at the symmetric corner, with exact DoF values.
Json plan_document(const QualityPair& requested, const PlanOptions& options, int S, std::optional<Integer> T1);

Json config_to_json(const ExperimentConfig& cfg);
Json report_to_json(const SimulationReport& rep);

// RFC 4180: CRLF line ends, header row, quoted where needed.
std::string csv_field(const std::string& s);
std::string region_csv(const DofRegion& r);
std::string report_csv(const SimulationReport& rep);
std::string plan_csv(const PhasePlan& plan);

}  // namespace dcsit
