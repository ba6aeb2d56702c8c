#include "parweight/report_json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "parweight/csv_io.hpp"
#include "parweight/error.hpp"

namespace parweight {

Json box_to_json(const SpaceTimeBox& box) {
  Json j;
  j["spatialLo"] = box.spatial_lo;
  j["spatialHi"] = box.spatial_hi;
  j["timeLo"] = box.time_lo;
  j["timeHi"] = box.time_hi;
  return j;
}

Json rect_to_json(const ParabolicRectangle& rect) {
  Json j;
  j["centerX"] = rect.center_x;
  j["centerT"] = rect.center_t;
  j["side"] = rect.side;
  return j;
}

Json provenance_to_json(const FamilyProvenance& prov) {
  Json j;
  j["minSide"] = prov.min_side;
  j["scaleCount"] = prov.scale_count;
  j["strideFactor"] = prov.stride_factor;
  j["scales"] = prov.scales;
  j["clipping"] = prov.clipping;
  return j;
}

Json weight_report_to_json(const WeightReport& rep) {
  Json j;
  j["constant"] = rep.constant;
  j["direction"] = rep.direction == TimeDirection::forward ? "+" : "-";
  j["p"] = rep.p;
  j["q"] = rep.q;
  j["gamma"] = rep.gamma;
  if (rep.witness_rect) j["witnessRectangle"] = rect_to_json(*rep.witness_rect);
  if (rep.witness_cell) j["witnessCell"] = *rep.witness_cell;
  j["family"] = provenance_to_json(rep.provenance);
  return j;
}

Json bmo_report_to_json(const BmoReport& rep) {
  Json j;
  j["seminorm"] = rep.seminorm;
  j["gamma"] = rep.gamma;
  j["witnessRectangle"] = rect_to_json(rep.witness);
  j["witnessIndex"] = rep.witness_index;
  j["witnessOffset"] = rep.offsets.empty() ? 0.0 : rep.offsets[rep.witness_index];
  j["family"] = provenance_to_json(rep.provenance);
  return j;
}

Json jn_fit_to_json(const JnFit& fit) {
  Json j;
  j["degenerate"] = fit.degenerate;
  j["A"] = fit.A;
  j["B"] = fit.degenerate ? Json("infinite") : Json(fit.B);
  j["fitQuality"] = fit.fit_quality;
  j["pointsUsed"] = fit.points_used;
  j["side"] = std::string(1, fit.side);
  return j;
}

Json factorization_to_json(const FactorizationResult& res) {
  Json j;
  j["B"] = res.B;
  j["terms"] = res.terms;
  j["restarts"] = res.restarts;
  j["residual"] = res.residual;
  j["fixedPointMargin"] = res.fixed_point_margin;
  j["a1ConstantU"] = res.a1_u;
  j["a1ConstantV"] = res.a1_v;
  j["extendedOutsideMask"] = res.extended;
  j["termMaxima"] = res.term_maxima;
  return j;
}

void write_json_atomic(const std::string& path, const Json& j) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) fail_data("cannot open for writing: " + tmp);
    out << j.dump(2) << '\n';
    if (!out) fail_data("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail_data("rename failed for " + path + ": " + ec.message());
}

MeasureSpec read_measure_spec(const std::string& path, const GridSpec& grid) {
  std::ifstream in(path);
  if (!in) fail_data("cannot open measure spec: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail_data(path + ": invalid JSON: " + e.what());
  }
  if (j.contains("schemaVersion") && j["schemaVersion"].get<int>() > kSchemaVersion)
    fail_data(path + ": schemaVersion newer than this tool understands");

  MeasureSpec m;
  if (j.contains("points")) {
    for (const auto& pj : j["points"]) {
      PointMass pm;
      pm.x = pj.at("x").get<std::vector<double>>();
      pm.t = pj.at("t").get<double>();
      pm.mass = pj.at("mass").get<double>();
      m.points.push_back(std::move(pm));
    }
  }
  if (j.contains("density") && !j["density"].is_null()) {
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    std::string rel = j["density"].get<std::string>();
    m.density = read_grid_csv((base / rel).string());
  }
  m.validate(grid);
  return m;
}

}  // namespace parweight
