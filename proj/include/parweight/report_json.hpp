#pragma once

#include <string>

#include <json.hpp>

#include "parweight/bmo.hpp"
#include "parweight/construct.hpp"
#include "parweight/factorize.hpp"
#include "parweight/geometry.hpp"
#include "parweight/weights.hpp"

namespace parweight {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json box_to_json(const SpaceTimeBox& box);
Json rect_to_json(const ParabolicRectangle& rect);
Json provenance_to_json(const FamilyProvenance& prov);
Json weight_report_to_json(const WeightReport& rep);
Json bmo_report_to_json(const BmoReport& rep);
Json jn_fit_to_json(const JnFit& fit);
Json factorization_to_json(const FactorizationResult& res);

/// Writes the report to path via a temporary file and rename, so a report
/// file never exists half-written.
void write_json_atomic(const std::string& path, const Json& j);

/// Measure-spec JSON: {"points":[{"x":[...],"t":...,"mass":...}],
/// "density":"<csv path>|null"}; density paths resolve relative to the file.
MeasureSpec read_measure_spec(const std::string& path, const GridSpec& grid);

}  // namespace parweight
