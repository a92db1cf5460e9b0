#include "otma/runner.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "otma/fields.hpp"
#include "otma/ma_structure.hpp"
#include "otma/ot_solver.hpp"
#include "otma/sampling.hpp"
#include "otma/semigeostrophic.hpp"
#include "otma/transport_geometry.hpp"

namespace otma {

namespace {

using json = nlohmann::ordered_json;

double get_number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError("config." + key + ": expected a number");
  return j[key].get<double>();
}

int get_int(const json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) throw ConfigError("config." + key + ": expected an integer");
  return j[key].get<int>();
}

std::string get_string(const json& j, const std::string& key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ConfigError("config." + key + ": expected a string");
  return j[key].get<std::string>();
}

std::string require_string(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("config." + key + ": missing required field");
  if (!j[key].is_string()) throw ConfigError("config." + key + ": expected a string");
  return j[key].get<std::string>();
}

Box3 parse_box(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(where + ".box: expected three [lo, hi] pairs");
  Box3 box;
  for (int i = 0; i < 3; ++i) {
    const auto& pair = j[i];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
      throw ConfigError(where + ".box: expected three [lo, hi] pairs");
    box.lo[i] = pair[0].get<double>();
    box.hi[i] = pair[1].get<double>();
    if (!(box.hi[i] > box.lo[i])) throw ConfigError(where + ".box: empty interval in axis " + std::to_string(i + 1));
  }
  return box;
}

Density parse_density(const json& config, const std::string& field) {
  if (!config.contains(field)) throw ConfigError("config." + field + ": missing required field");
  const json& j = config[field];
  const std::string kind = require_string(j, "kind");
  const Box3 box = j.contains("box") ? parse_box(j["box"], "config." + field) : Box3{};
  if (kind == "uniform") return Density::uniform(box);
  if (kind == "gaussian") {
    Vec3 mean = Vec3::Zero();
    if (j.contains("mean")) {
      const auto& m = j["mean"];
      if (!m.is_array() || m.size() != 3) throw ConfigError("config." + field + ".mean: expected 3 numbers");
      for (int i = 0; i < 3; ++i) mean[i] = m[i].get<double>();
    }
    Mat3 cov = Mat3::Identity();
    if (j.contains("cov")) {
      const auto& c = j["cov"];
      if (c.is_array() && c.size() == 3) {
        cov = Mat3::Zero();
        for (int i = 0; i < 3; ++i) cov(i, i) = c[i].get<double>();
      } else if (c.is_array() && c.size() == 9) {
        for (int i = 0; i < 3; ++i)
          for (int k = 0; k < 3; ++k) cov(i, k) = c[3 * i + k].get<double>();
      } else {
        throw ConfigError("config." + field + ".cov: expected 3 diagonal or 9 row-major entries");
      }
    }
    return Density::gaussian(box, mean, cov);
  }
  if (kind == "sine") {
    // 1 + amplitude * sin(pi * x1), uniform in the remaining axes.
    const double amplitude = get_number(j, "amplitude", 0.3);
    if (!(std::abs(amplitude) < 1.0))
      throw ConfigError("config." + field + ".amplitude: must lie in (-1, 1)");
    return Density::custom(
        box, [amplitude](const Vec3& p) { return 1.0 + amplitude * std::sin(M_PI * p[0]); },
        "sine");
  }
  throw ConfigError("config." + field + ".kind: unknown density kind '" + kind + "'");
}

CostFunction parse_cost(const json& config) {
  std::string kind = "quadratic";
  json cost_spec = json::object();
  if (config.contains("cost")) {
    cost_spec = config["cost"];
    kind = require_string(cost_spec, "kind");
  }
  CostFunction cost = [&]() {
    if (kind == "quadratic") return CostFunction::quadratic();
    if (kind == "semigeostrophic") return CostFunction::semigeostrophic(get_number(cost_spec, "f", 1.0));
    if (kind == "bilinear") {
      if (!cost_spec.contains("matrix") || !cost_spec["matrix"].is_array() ||
          cost_spec["matrix"].size() != 9)
        throw ConfigError("config.cost.matrix: expected 9 row-major entries");
      Mat3 a;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = cost_spec["matrix"][3 * i + j].get<double>();
      return CostFunction::bilinear(a);
    }
    if (kind == "exp") {
      // c = -exp(x1) xbar1 - x2 xbar2 - x3 xbar3; a custom cost for which
      // the conformal relation fails away from x1 = 0.
      return CostFunction::custom([](const Vec3& x, const Vec3& xb) {
        return -std::exp(x[0]) * xb[0] - x[1] * xb[1] - x[2] * xb[2];
      });
    }
    throw ConfigError("config.cost.kind: unknown cost kind '" + kind + "'");
  }();

  const std::string derivatives = get_string(config, "derivatives", "analytic");
  if (derivatives == "finite-difference") {
    // Re-wrap as a custom evaluator so all derivatives go through stencils.
    return CostFunction::custom([cost](const Vec3& x, const Vec3& xb) { return cost.value(x, xb); });
  }
  if (derivatives != "analytic")
    throw ConfigError("config.derivatives: expected 'analytic' or 'finite-difference'");
  return cost;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json duality_to_json(const DualityReport& r) {
  json j;
  j["primal"] = r.primal;
  j["dual"] = r.dual;
  j["gap"] = r.gap;
  j["max_marginal_defect"] = r.max_marginal_defect;
  j["max_feasibility_violation"] = r.max_feasibility_violation;
  j["support_duality_defect"] = r.support_duality_defect;
  j["support_threshold"] = r.support_threshold;
  return j;
}

struct SweepRow {
  Vec3 x, xbar;
  double conformal_defect = 0.0;
  Signature lr_signature;
  double effectiveness_defect = 0.0;
};

std::string rows_to_csv(const std::vector<SweepRow>& rows) {
  std::string csv = "px1,px2,px3,qx1,qx2,qx3,conformal_defect,sig_plus,sig_minus,sig_zero,effectiveness_defect\n";
  for (const SweepRow& r : rows) {
    for (int i = 0; i < 3; ++i) csv += format_double(r.x[i]) + ",";
    for (int i = 0; i < 3; ++i) csv += format_double(r.xbar[i]) + ",";
    csv += format_double(r.conformal_defect) + ",";
    csv += std::to_string(r.lr_signature.plus) + "," + std::to_string(r.lr_signature.minus) + "," +
           std::to_string(r.lr_signature.zero) + ",";
    csv += format_double(r.effectiveness_defect) + "\n";
  }
  return csv;
}

struct SweepOutcome {
  std::vector<SweepRow> rows;
  double max_conformal = 0.0;
  double sum_conformal = 0.0;
  double max_effectiveness = 0.0;
  double max_lr_closed_form = 0.0;
  bool has_closed_form = false;
  double min_conformal_factor = std::numeric_limits<double>::infinity();
  bool signatures_ok = true;
  int degenerate_points = 0;
};

SweepOutcome run_sweep(const MAStructure& structure, int samples, std::uint64_t seed,
                       double signature_tol) {
  SweepOutcome out;
  out.rows.reserve(samples);
  constexpr double kMargin = 1e-3;

  Mat6 swap = Mat6::Zero();
  swap.topRightCorner<3, 3>() = Mat3::Identity();
  swap.bottomLeftCorner<3, 3>() = Mat3::Identity();
  const CostKind kind = structure.cost.kind();
  out.has_closed_form =
      kind == CostKind::quadratic || kind == CostKind::semigeostrophic;

  PointSampler sampler(seed);
  for (int k = 0; k < samples; ++k) {
    const Vec3 x = sampler.in_box(structure.rho.box(), kMargin);
    const Vec3 xbar = sampler.in_box(structure.rhobar.box(), kMargin);
    SweepRow row;
    row.x = x;
    row.xbar = xbar;
    try {
      const ConformalReport conformal = conformal_defect_at(structure, x, xbar);
      row.conformal_defect = conformal.relative_defect;
      row.lr_signature = metric_signature(conformal.lr.matrix, signature_tol);
      const Signature kmw_sig = metric_signature(conformal.kmw.matrix, signature_tol);
      row.effectiveness_defect = effectiveness_defect(symplectic_form_at(structure, x, xbar),
                                                      effective_form_at(structure, x, xbar));
      out.max_conformal = std::max(out.max_conformal, conformal.relative_defect);
      out.sum_conformal += conformal.relative_defect;
      out.max_effectiveness = std::max(out.max_effectiveness, row.effectiveness_defect);
      out.min_conformal_factor = std::min(out.min_conformal_factor, conformal.conformal_factor);
      if (row.lr_signature.plus != 3 || row.lr_signature.minus != 3 || row.lr_signature.zero != 0 ||
          kmw_sig.plus != 3 || kmw_sig.minus != 3 || kmw_sig.zero != 0)
        out.signatures_ok = false;
      if (out.has_closed_form) {
        const double f = kind == CostKind::semigeostrophic ? structure.cost.coriolis_f() : 1.0;
        const double rr = structure.rho.value(x) * structure.rhobar.value(xbar);
        const Mat6 expected = rr / (f * f * f * f) * swap;
        out.max_lr_closed_form = std::max(
            out.max_lr_closed_form, (conformal.lr.matrix - expected).cwiseAbs().maxCoeff());
      }
    } catch (const DegenerateStructureError&) {
      ++out.degenerate_points;
    }
    out.rows.push_back(row);
  }
  return out;
}

std::vector<Vec3> sample_points(const Density& d, int n, PointSampler& sampler,
                                double margin = 1e-3) {
  std::vector<Vec3> points;
  points.reserve(n);
  for (int i = 0; i < n; ++i) points.push_back(sampler.in_box(d.box(), margin));
  return points;
}

Density1D parse_density_1d(const json& solver, const std::string& field) {
  if (!solver.contains(field))
    throw ConfigError("config.solver." + field + ": missing required field");
  const json& j = solver[field];
  const std::string kind = require_string(j, "kind");
  double lo = -1.0, hi = 1.0;
  if (j.contains("interval")) {
    const auto& iv = j["interval"];
    if (!iv.is_array() || iv.size() != 2)
      throw ConfigError("config.solver." + field + ".interval: expected [lo, hi]");
    lo = iv[0].get<double>();
    hi = iv[1].get<double>();
  }
  if (kind == "uniform") return Density1D::uniform(lo, hi);
  if (kind == "gaussian")
    return Density1D::gaussian(get_number(j, "mean", 0.0), get_number(j, "sigma", 1.0), lo, hi);
  if (kind == "sine") {
    const double amplitude = get_number(j, "amplitude", 0.3);
    Density1D d;
    d.lo = lo;
    d.hi = hi;
    d.unnormalized = [amplitude](double x) { return 1.0 + amplitude * std::sin(M_PI * x); };
    return d;
  }
  throw ConfigError("config.solver." + field + ".kind: unknown 1-D density kind '" + kind + "'");
}

double density_1d_norm(const Density1D& d) {
  constexpr int n = 16384;
  const double h = (d.hi - d.lo) / n;
  double total = 0.5 * (d.unnormalized(d.lo) + d.unnormalized(d.hi));
  for (int i = 1; i < n; ++i) total += d.unnormalized(d.lo + i * h);
  return total * h;
}

json run_solve_ot(const json& config, double tolerance, std::uint64_t seed, int sample_count,
                  bool& pass) {
  if (!config.contains("solver")) throw ConfigError("config.solver: missing required field");
  const json& solver = config["solver"];
  const std::string method = require_string(solver, "method");
  json results;
  results["method"] = method;

  if (method == "monotone1d") {
    const int grid_n = get_int(solver, "grid_n", 256);
    const Density1D rho1 = parse_density_1d(solver, "source");
    const Density1D rhobar1 = parse_density_1d(solver, "target");
    const MonotoneMap1D map = solve_monotone_1d(rho1, rhobar1, grid_n);

    bool monotone = true;
    for (int i = 1; i < map.ts.size(); ++i)
      if (map.ts[i] < map.ts[i - 1]) monotone = false;

    const double source_norm = density_1d_norm(rho1);
    const double target_norm = density_1d_norm(rhobar1);
    double pushforward_defect = 0.0;
    for (int i = 0; i < static_cast<int>(map.xs.size()) - 1; ++i) {
      const double mid = 0.5 * (map.xs[i] + map.xs[i + 1]);
      const double lhs = rho1.unnormalized(mid) / source_norm;
      const double rhs = rhobar1.unnormalized(map.value(mid)) / target_norm * map.slope(mid);
      pushforward_defect = std::max(pushforward_defect, std::abs(lhs - rhs));
    }

    // Embed the 1-D map as a quadratic-cost transport potential on the
    // product of the intervals with a uniform cross-section and sweep the
    // Monge-Ampere residual.
    Box3 source_box{Vec3(rho1.lo, -1.0, -1.0), Vec3(rho1.hi, 1.0, 1.0)};
    Box3 target_box{Vec3(rhobar1.lo, -1.0, -1.0), Vec3(rhobar1.hi, 1.0, 1.0)};
    const Density rho3 = Density::custom(
        source_box, [rho1](const Vec3& p) { return rho1.unnormalized(p[0]); }, "embedded-1d");
    const Density rhobar3 = Density::custom(
        target_box, [rhobar1](const Vec3& p) { return rhobar1.unnormalized(p[0]); }, "embedded-1d");
    const MAStructure structure{CostFunction::quadratic(), rho3, rhobar3};
    const ScalarField u = potential_from_monotone_map(map);
    PointSampler sampler(seed);
    const ResidualSummary residuals =
        el_residual_grid(structure, u, sample_points(rho3, sample_count, sampler, 0.02));

    results["grid_n"] = grid_n;
    results["monotone"] = monotone;
    results["max_pushforward_defect"] = pushforward_defect;
    results["residual"] = {{"max_abs", residuals.max_abs},
                           {"mean_abs", residuals.mean_abs},
                           {"flagged_out_of_support", residuals.flagged_out_of_support},
                           {"failed_points", residuals.failed_points}};
    pass = monotone && residuals.max_abs <= tolerance && residuals.failed_points == 0;
    return results;
  }

  // Matrix solvers need a discrete problem.
  const CostFunction cost = parse_cost(config);
  DiscreteOTProblem problem;
  try {
    if (config.contains("problem") && config["problem"].contains("source_file")) {
      const json& spec = config["problem"];
      std::vector<Vec3> source, target;
      Eigen::VectorXd sw, tw;
      parse_points_file(require_string(spec, "source_file"), source, sw);
      parse_points_file(require_string(spec, "target_file"), target, tw);
      problem = DiscreteOTProblem::from_points(cost, std::move(source), std::move(sw),
                                               std::move(target), std::move(tw));
    } else {
      int n = 16;
      if (config.contains("problem")) {
        const json& spec = config["problem"];
        if (spec.contains("generate")) n = get_int(spec["generate"], "n", 16);
      }
      const Density rho = parse_density(config, "source_density");
      const Density rhobar = parse_density(config, "target_density");
      PointSampler sampler(seed);
      auto source = sample_points(rho, n, sampler);
      auto target = sample_points(rhobar, n, sampler);
      const Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
      problem = DiscreteOTProblem::from_points(cost, std::move(source), w, std::move(target), w);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config.problem: ") + e.what());
  }

  if (method == "assignment") {
    AssignmentResult solution;
    try {
      solution = solve_assignment(problem);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config.solver: ") + e.what());
    }
    const DualityReport report = duality_report(problem, solution.plan, solution.potentials);
    results["n"] = static_cast<int>(problem.cost.rows());
    results["duality"] = duality_to_json(report);
    pass = report.gap <= tolerance && report.support_duality_defect <= tolerance &&
           report.max_feasibility_violation <= tolerance;
    return results;
  }
  if (method == "sinkhorn") {
    const double epsilon = get_number(solver, "epsilon", 0.1);
    const int max_iter = get_int(solver, "max_iter", 20000);
    const double sink_tol = get_number(solver, "tol", 1e-9);
    const SinkhornResult solution = sinkhorn(problem, epsilon, max_iter, sink_tol);
    const DualityReport report = duality_report(problem, solution.plan, solution.potentials);
    results["n"] = static_cast<int>(problem.cost.rows());
    results["epsilon"] = epsilon;
    results["iterations"] = solution.iterations;
    results["converged"] = solution.converged;
    results["marginal_defect"] = solution.marginal_defect;
    results["duality"] = duality_to_json(report);
    pass = solution.converged && solution.marginal_defect <= tolerance;
    return results;
  }
  throw ConfigError("config.solver.method: unknown method '" + method + "'");
}

json run_sg_demo(const json& config, double tolerance, std::uint64_t seed, int sample_count,
                 bool& pass) {
  const double f = get_number(config, "coriolis_f", 1.0);
  if (f != 1.0)
    throw ConfigError(
        "config.coriolis_f: sg-demo verifies the canonical-coordinate and conformal statements, "
        "which hold in the f = 1 normalization; rerun with coriolis_f = 1");
  SGConfig sg{f, parse_density(config, "source_density"), parse_density(config, "target_density")};
  const SGStructureReport checks = verify_sg_structure(sg, sample_count, seed);

  const int particles = get_int(config, "particles", 32);
  if (particles < 2) throw ConfigError("config.particles: need at least 2");
  PointSampler sampler(seed + 1);
  auto source = sample_points(sg.rho, particles, sampler);
  auto target = sample_points(sg.rhobar, particles, sampler);
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(particles, 1.0 / particles);
  const DiscreteOTProblem problem = DiscreteOTProblem::from_points(
      CostFunction::semigeostrophic(f), source, w, target, w);
  const AssignmentResult solution = solve_assignment(problem);
  const DualityReport duality = duality_report(problem, solution.plan, solution.potentials);

  std::vector<WeightedParticle> matched(particles);
  for (int i = 0; i < particles; ++i)
    matched[i] = WeightedParticle{source[i], target[solution.permutation[i]], 1.0 / particles};
  const double energy = sg_energy(matched, f);

  json results;
  results["structure_checks"] = {{"max_canonical_defect", checks.max_canonical_defect},
                       {"max_conformal_defect", checks.max_conformal_defect},
                       {"max_lr_defect", checks.max_lr_defect},
                       {"max_kmw_defect", checks.max_kmw_defect},
                       {"sample_count", checks.sample_count}};
  results["particles"] = particles;
  results["minimized_energy"] = energy;
  results["duality"] = duality_to_json(duality);
  pass = checks.max_canonical_defect <= tolerance && checks.max_conformal_defect <= tolerance &&
         checks.max_lr_defect <= tolerance && checks.max_kmw_defect <= tolerance &&
         duality.gap <= 1e-9;
  return results;
}

}  // namespace

RunResult run_config_json(const std::string& config_json) {
  json config;
  try {
    config = json::parse(config_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!config.is_object()) throw ConfigError("config: expected a JSON object");

  const std::string command = require_string(config, "command");
  const std::uint64_t seed = static_cast<std::uint64_t>(get_number(config, "seed", 0.0));
  const int sample_count = get_int(config, "sample_count", command == "solve-ot" ? 200 : 1000);
  if (sample_count < 1) throw ConfigError("config.sample_count: must be >= 1");
  const double tolerance = get_number(config, "tolerance", 1e-8);
  const bool want_csv = config.contains("points_csv") && config["points_csv"].is_boolean() &&
                        config["points_csv"].get<bool>();

  json report;
  report["schema_version"] = kReportSchemaVersion;
  report["toolkit"] = {{"name", "otma"}, {"version", kToolkitVersion}};
  report["command"] = command;
  report["seed"] = seed;
  report["sample_count"] = sample_count;
  report["tolerance"] = tolerance;
  report["config"] = config;

  RunResult result;
  bool pass = false;
  json results;

  if (command == "verify-conformal" || command == "check-structure") {
    const CostFunction cost = parse_cost(config);
    const Density rho = parse_density(config, "source_density");
    const Density rhobar = parse_density(config, "target_density");
    const MAStructure structure{cost, rho, rhobar};
    const SweepOutcome sweep = run_sweep(structure, sample_count, seed, 1e-10);

    if (command == "verify-conformal") {
      results["max_conformal_defect"] = sweep.max_conformal;
      results["mean_conformal_defect"] = sweep.sum_conformal / sample_count;
      results["max_effectiveness_defect"] = sweep.max_effectiveness;
      results["min_conformal_factor"] = sweep.min_conformal_factor;
      results["signatures_ok"] = sweep.signatures_ok;
      results["degenerate_points"] = sweep.degenerate_points;
      pass = sweep.max_conformal <= tolerance && sweep.signatures_ok &&
             sweep.degenerate_points == 0;
    } else {
      results["max_effectiveness_defect"] = sweep.max_effectiveness;
      if (sweep.has_closed_form) {
        results["max_lr_closed_form_deviation"] = sweep.max_lr_closed_form;
      } else {
        results["max_lr_closed_form_deviation"] = nullptr;
      }
      results["degenerate_points"] = sweep.degenerate_points;
      pass = sweep.max_effectiveness <= tolerance && sweep.degenerate_points == 0 &&
             (!sweep.has_closed_form || sweep.max_lr_closed_form <= tolerance);
    }
    if (want_csv) result.points_csv = rows_to_csv(sweep.rows);
  } else if (command == "solve-ot") {
    results = run_solve_ot(config, tolerance, seed, sample_count, pass);
  } else if (command == "sg-demo") {
    results = run_sg_demo(config, tolerance, seed, sample_count, pass);
  } else {
    throw ConfigError("config.command: unknown command '" + command + "'");
  }

  report["results"] = results;
  report["pass"] = pass;
  result.report_json = report.dump(2);
  result.report_json.push_back('\n');
  result.tolerance_pass = pass;
  return result;
}

}  // namespace otma
