#include "parweight/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>

#include "parweight/bmo.hpp"
#include "parweight/construct.hpp"
#include "parweight/csv_io.hpp"
#include "parweight/error.hpp"
#include "parweight/factorize.hpp"
#include "parweight/report_json.hpp"
#include "parweight/synthetic.hpp"
#include "parweight/weights.hpp"

namespace parweight {

namespace {

GridSpec config_grid_spec(const RunConfig& cfg) {
  GridSpec spec;
  spec.n = 1;
  spec.cells = {cfg.cells};
  spec.time_cells = cfg.time_cells;
  spec.domain.spatial_lo = {cfg.spatial_lo};
  spec.domain.spatial_hi = {cfg.spatial_hi};
  spec.domain.time_lo = cfg.time_lo;
  spec.domain.time_hi = cfg.time_hi;
  spec.validate();
  return spec;
}

GridFunction load_input(const RunConfig& cfg) {
  if (!cfg.grid_path.empty() && !cfg.synthetic.empty())
    fail_usage("pass either --grid or --synthetic, not both");
  if (!cfg.grid_path.empty()) return read_grid_csv(cfg.grid_path);
  if (!cfg.synthetic.empty())
    return synthetic_grid(cfg.synthetic, config_grid_spec(cfg), cfg.seed);
  fail_usage("an input grid is required (--grid or --synthetic)");
}

Exponents config_exponents(const RunConfig& cfg) {
  return Exponents(cfg.p, cfg.q, cfg.gamma);
}

TimeDirection config_direction(const RunConfig& cfg) {
  if (cfg.direction == "+") return TimeDirection::forward;
  if (cfg.direction == "-") return TimeDirection::backward;
  fail_usage("--direction must be '+' or '-'");
}

std::string sibling_path(const std::string& out, const std::string& tag) {
  std::filesystem::path p(out);
  std::filesystem::path stem = p.parent_path() / p.stem();
  return stem.string() + "." + tag + ".csv";
}

std::string trend_verdict(double base, double refinedv) {
  if (!std::isfinite(base) || !std::isfinite(refinedv)) return "diverging";
  if (base > 0.0 && refinedv >= 2.0 * base) return "diverging";
  return "stable";
}

Json refinement_json(double base, double refinedv) {
  Json j;
  j["base"] = base;
  j["refined"] = refinedv;
  j["relativeChange"] = base > 0.0 ? (refinedv - base) / base : 0.0;
  j["verdict"] = trend_verdict(base, refinedv);
  return j;
}

int cmd_classify(const RunConfig& cfg) {
  GridFunction raw = load_input(cfg);
  ClampResult clamped = clamp_weight(raw);
  GridFunction w = clamped.values;
  Exponents exps = config_exponents(cfg);

  FamilyOptions fopt{cfg.scale_count, cfg.stride, 0.0};
  RectangleFamily family = enumerate_family(w.spec(), exps, fopt);
  RectangleFamily fine = enumerate_family(w.spec(), exps, refined(fopt, w.spec(), exps));

  Json report;
  report["schemaVersion"] = kSchemaVersion;
  report["command"] = "classify";
  report["parameters"] = {{"p", cfg.p},       {"q", cfg.q},         {"gamma", cfg.gamma},
                          {"scales", cfg.scale_count}, {"stride", cfg.stride},
                          {"seed", cfg.seed}, {"synthetic", cfg.synthetic},
                          {"grid", cfg.grid_path}};
  report["clampedCells"] = clamped.clamped_cells;
  report["family"] = provenance_to_json(family.provenance);

  std::vector<double> q_grid{1.5, 2.0, 3.0, 4.0};
  if (std::find(q_grid.begin(), q_grid.end(), cfg.q) == q_grid.end())
    q_grid.push_back(cfg.q);
  std::sort(q_grid.begin(), q_grid.end());

  // Optional divergence probe under a doubled time domain (synthetic only).
  std::optional<GridFunction> extended;
  std::optional<RectangleFamily> ext_family;
  if (!cfg.synthetic.empty()) {
    RunConfig big = cfg;
    big.time_hi = cfg.time_lo + 2.0 * (cfg.time_hi - cfg.time_lo);
    big.time_cells = 2 * cfg.time_cells;
    extended = synthetic_grid(cfg.synthetic, config_grid_spec(big), cfg.seed);
    ext_family = enumerate_family(extended->spec(), exps, fopt);
  }

  Json aq_json = Json::array();
  for (double qi : q_grid) {
    Exponents eq = exps.with_q(qi);
    WeightReport base = aq_constant(w, eq, TimeDirection::forward, family);
    WeightReport fine_rep = aq_constant(w, eq, TimeDirection::forward, fine);
    Json row;
    row["q"] = qi;
    row["report"] = weight_report_to_json(base);
    row["refinement"] = refinement_json(base.constant, fine_rep.constant);
    if (extended) {
      WeightReport ext =
          aq_constant(*extended, eq, TimeDirection::forward, *ext_family);
      double growth = ext.constant;
      row["domainExtension"] = refinement_json(base.constant, growth);
      if (row["domainExtension"]["verdict"] == "diverging")
        row["refinement"]["verdict"] = "diverging";
    }
    aq_json.push_back(std::move(row));
  }
  report["aqConstants"] = std::move(aq_json);

  MaximalOptions mopt;
  mopt.scales = dyadic_scales(w.spec(), exps, cfg.scale_count);
  mopt.naive = cfg.oracle;
  mopt.threads = cfg.threads;
  MaximalOptions mfine = mopt;
  mfine.scales = dyadic_scales(w.spec(), exps, cfg.scale_count + 1);
  {
    Json a1;
    for (TimeDirection dir : {TimeDirection::forward, TimeDirection::backward}) {
      WeightReport base = a1_constant(w, exps, dir, mopt);
      WeightReport fine_rep = a1_constant(w, exps, dir, mfine);
      Json row;
      row["report"] = weight_report_to_json(base);
      row["refinement"] = refinement_json(base.constant, fine_rep.constant);
      a1[dir == TimeDirection::forward ? "+" : "-"] = std::move(row);
    }
    report["a1Constants"] = std::move(a1);
  }

  {
    Json rh = Json::array();
    for (double delta : {0.25, 0.5, 1.0}) {
      WeightReport base = reverse_holder(w, exps, delta, family);
      WeightReport fine_rep = reverse_holder(w, exps, delta, fine);
      Json row;
      row["delta"] = delta;
      row["report"] = weight_report_to_json(base);
      row["refinement"] = refinement_json(base.constant, fine_rep.constant);
      if (extended) {
        WeightReport ext = reverse_holder(*extended, exps, delta, *ext_family);
        row["domainExtension"] = refinement_json(base.constant, ext.constant);
        if (row["domainExtension"]["verdict"] == "diverging")
          row["refinement"]["verdict"] = "diverging";
      }
      rh.push_back(std::move(row));
    }
    report["reverseHolder"] = std::move(rh);
  }

  write_json_atomic(cfg.out_path, report);
  return 0;
}

int cmd_maximal(const RunConfig& cfg) {
  GridFunction f = load_input(cfg);
  Exponents exps = config_exponents(cfg);
  MaximalOptions opt;
  opt.scales = dyadic_scales(f.spec(), exps, cfg.scale_count);
  opt.naive = cfg.oracle;
  opt.threads = cfg.threads;
  TimeDirection dir = config_direction(cfg);
  MaximalResult res = dir == TimeDirection::forward ? maximal_forward(f, exps, opt)
                                                    : maximal_backward(f, exps, opt);

  std::string grid_csv = sibling_path(cfg.out_path, "maximal");
  std::string argmax_csv = sibling_path(cfg.out_path, "argmax");
  write_grid_csv(grid_csv, res.output);
  write_grid_csv(argmax_csv, GridFunction(f.spec(), res.argmax_scale));

  double vmax = 0.0;
  for (std::size_t i = 0; i < res.output.size(); ++i)
    if (res.valid[i]) vmax = std::max(vmax, res.output.value(i));

  Json report;
  report["schemaVersion"] = kSchemaVersion;
  report["command"] = "maximal";
  report["direction"] = cfg.direction;
  report["parameters"] = {{"p", cfg.p}, {"q", cfg.q}, {"gamma", cfg.gamma},
                          {"oracle", cfg.oracle}};
  report["scales"] = res.scales;
  report["validCells"] = res.valid_count;
  report["totalCells"] = f.spec().total_cells();
  report["maxValue"] = vmax;
  report["outputGrid"] = grid_csv;
  report["argmaxGrid"] = argmax_csv;
  write_json_atomic(cfg.out_path, report);
  return 0;
}

int cmd_factorize(const RunConfig& cfg) {
  GridFunction raw = load_input(cfg);
  GridFunction w = clamp_weight(raw).values;
  Exponents exps = config_exponents(cfg);
  FactorizeOptions opt;
  opt.maximal.scales = dyadic_scales(w.spec(), exps, cfg.scale_count);
  opt.maximal.naive = cfg.oracle;
  opt.maximal.threads = cfg.threads;
  opt.tol = cfg.tol;
  opt.seed = cfg.seed;
  FactorizationResult res = factorize(w, exps, opt);

  std::string u_csv = sibling_path(cfg.out_path, "u");
  std::string v_csv = sibling_path(cfg.out_path, "v");
  write_grid_csv(u_csv, res.u);
  write_grid_csv(v_csv, res.v);

  Json report;
  report["schemaVersion"] = kSchemaVersion;
  report["command"] = "factorize";
  report["parameters"] = {{"p", cfg.p},     {"q", cfg.q},   {"gamma", cfg.gamma},
                          {"tol", cfg.tol}, {"seed", cfg.seed}};
  report["scales"] = opt.maximal.scales;
  report["result"] = factorization_to_json(res);
  report["uGrid"] = u_csv;
  report["vGrid"] = v_csv;
  write_json_atomic(cfg.out_path, report);
  return 0;
}

int cmd_construct(const RunConfig& cfg) {
  Exponents exps = config_exponents(cfg);
  Json report;
  report["schemaVersion"] = kSchemaVersion;
  report["command"] = "construct";
  report["op"] = cfg.op;
  report["parameters"] = {{"p", cfg.p},         {"q", cfg.q},   {"gamma", cfg.gamma},
                          {"delta", cfg.delta}, {"seed", cfg.seed}};

  if (cfg.op == "supersolution") {
    GridSpec spec = cfg.grid_path.empty() ? config_grid_spec(cfg)
                                          : read_grid_csv(cfg.grid_path).spec();
    SupersolutionSpec sspec;
    if (cfg.kind == "increasing-time") {
      sspec.kind = SupersolutionKind::increasing_time;
      sspec.rate = cfg.rate;
    } else if (cfg.kind == "heat-kernel") {
      sspec.kind = SupersolutionKind::heat_kernel;
      sspec.source_x.assign(spec.n, 0.0);
      for (int a = 0; a < spec.n; ++a)
        sspec.source_x[a] = 0.5 * (spec.domain.spatial_lo[a] + spec.domain.spatial_hi[a]);
      sspec.source_t = spec.domain.time_lo - 0.25 * spec.domain.time_extent();
    } else {
      fail_usage("construct: unknown supersolution kind " + cfg.kind);
    }
    GridFunction v = supersolution(sspec, spec, exps);
    std::string csv = sibling_path(cfg.out_path, "grid");
    write_grid_csv(csv, v);
    report["kind"] = cfg.kind;
    report["outputGrid"] = csv;
    Json aq = Json::array();
    FamilyOptions fopt{cfg.scale_count, cfg.stride, 0.0};
    RectangleFamily family = enumerate_family(spec, exps, fopt);
    for (double qi : {1.5, 2.0, 4.0}) {
      WeightReport rep = aq_constant(v, exps.with_q(qi), TimeDirection::forward, family);
      aq.push_back({{"q", qi}, {"constant", rep.constant}});
    }
    report["aqConstants"] = std::move(aq);
  } else if (cfg.op == "maximal-measure" || cfg.op == "cr-weight") {
    if (cfg.measure_path.empty()) fail_usage("construct: --measure is required");
    GridSpec spec = config_grid_spec(cfg);
    MeasureSpec m = read_measure_spec(cfg.measure_path, spec);
    MeasureMaximalOptions mopt;
    mopt.scales = dyadic_scales(spec, exps, cfg.scale_count);
    mopt.exact_points = cfg.oracle;
    mopt.threads = cfg.threads;
    if (cfg.op == "maximal-measure") {
      MaskedGrid res = maximal_of_measure(m, spec, exps, config_direction(cfg), mopt);
      std::string csv = sibling_path(cfg.out_path, "grid");
      write_grid_csv(csv, res.values);
      std::size_t valid = 0;
      for (auto b : res.valid) valid += b;
      report["validCells"] = valid;
      report["outputGrid"] = csv;
    } else {
      CrWeightResult res = cr_weight(m, cfg.delta, spec, exps, mopt);
      std::string csv = sibling_path(cfg.out_path, "grid");
      write_grid_csv(csv, res.w);
      report["clampedCells"] = res.clamped_cells;
      report["outputGrid"] = csv;
      GridFunction wc = crop(res.w, mask_bounding_box(spec, res.valid));
      MaximalOptions a1opt;
      a1opt.scales = dyadic_scales(wc.spec(), exps, cfg.scale_count);
      report["a1Constant"] =
          a1_constant(wc, exps, TimeDirection::forward, a1opt).constant;
    }
  } else if (cfg.op == "representation") {
    GridFunction v = load_input(cfg);
    RepresentationOptions ropt;
    ropt.maximal.scales = dyadic_scales(v.spec(), exps, cfg.scale_count);
    ropt.maximal.threads = cfg.threads;
    ropt.tol = cfg.tol;
    ropt.seed = cfg.seed;
    RepresentationResult res = supersolution_representation(v, exps, ropt);
    std::string csv = sibling_path(cfg.out_path, "b");
    write_grid_csv(csv, res.b);
    report["alpha"] = res.alpha;
    report["beta"] = res.beta;
    report["eps"] = res.eps;
    report["residual"] = res.residual;
    report["bMin"] = res.b_min;
    report["bMax"] = res.b_max;
    report["bGrid"] = csv;
  } else {
    fail_usage("construct: unknown --op " + cfg.op);
  }
  write_json_atomic(cfg.out_path, report);
  return 0;
}

int cmd_bmo(const RunConfig& cfg) {
  GridFunction u = load_input(cfg);
  Exponents exps = config_exponents(cfg);
  FamilyOptions fopt{cfg.scale_count, cfg.stride, 0.0};
  RectangleFamily family = enumerate_family(u.spec(), exps, fopt);
  BmoReport rep = pbmo_seminorm(u, exps, family);

  Json report;
  report["schemaVersion"] = kSchemaVersion;
  report["command"] = "bmo";
  report["parameters"] = {{"p", cfg.p},       {"q", cfg.q}, {"gamma", cfg.gamma},
                          {"scales", cfg.scale_count}, {"stride", cfg.stride}};
  report["seminorm"] = bmo_report_to_json(rep);

  // Level-set decay of the witness rectangle at its optimal offset, as a
  // plot-ready table.
  double a = rep.offsets[rep.witness_index];
  try {
    JnFit fit = jn_decay_fit(u, exps, rep.witness, a);
    report["jnFit"] = jn_fit_to_json(fit);
  } catch (const Error& e) {
    report["jnFit"] = {{"refused", true}, {"reason", e.what()}};
  }
  write_json_atomic(cfg.out_path, report);
  return 0;
}

}  // namespace

int run_command(const RunConfig& cfg) {
  if (cfg.out_path.empty()) fail_usage("--out is required");
  if (!(cfg.stride > 0.0 && cfg.stride <= 1.0)) fail_usage("--stride must lie in (0,1]");
  if (cfg.scale_count < 1) fail_usage("--scales must be >= 1");
  if (!(cfg.tol > 0.0)) fail_usage("--tol must be positive");
  Exponents check(cfg.p, cfg.q, cfg.gamma);  // range validation
  (void)check;

  if (cfg.command == "classify") return cmd_classify(cfg);
  if (cfg.command == "maximal") return cmd_maximal(cfg);
  if (cfg.command == "factorize") return cmd_factorize(cfg);
  if (cfg.command == "construct") return cmd_construct(cfg);
  if (cfg.command == "bmo") return cmd_bmo(cfg);
  fail_usage("unknown command: " + cfg.command);
}

}  // namespace parweight
