#include "otma/ot_solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace otma {

namespace {

constexpr double kWeightTol = 1e-12;

// Paper convention (u, ubar) = (-phi, -psi) from textbook potentials with
// phi_i + psi_j <= C_ij, then shifted so u[0] = 0. The shift moves a
// constant between u and ubar and changes neither feasibility nor the dual
// value.
PotentialPair to_paper_convention(Eigen::VectorXd phi, Eigen::VectorXd psi) {
  PotentialPair p;
  p.u = -phi;
  p.ubar = -psi;
  const double shift = p.u[0];
  p.u.array() -= shift;
  p.ubar.array() += shift;
  return p;
}

double logsumexp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

void DiscreteOTProblem::validate() const {
  const auto n = cost.rows();
  const auto m = cost.cols();
  if (source_w.size() != n || target_w.size() != m)
    throw std::invalid_argument("DiscreteOTProblem: weight/cost shape mismatch");
  if (n == 0 || m == 0) throw std::invalid_argument("DiscreteOTProblem: empty problem");
  if ((source_w.array() <= 0).any() || (target_w.array() <= 0).any())
    throw std::invalid_argument("DiscreteOTProblem: weights must be positive");
  if (std::abs(source_w.sum() - 1.0) > kWeightTol || std::abs(target_w.sum() - 1.0) > kWeightTol)
    throw std::invalid_argument("DiscreteOTProblem: weights must sum to 1");
  if (!cost.allFinite()) throw std::invalid_argument("DiscreteOTProblem: non-finite cost matrix");
  if (!source_points.empty() && static_cast<Eigen::Index>(source_points.size()) != n)
    throw std::invalid_argument("DiscreteOTProblem: source point count mismatch");
  if (!target_points.empty() && static_cast<Eigen::Index>(target_points.size()) != m)
    throw std::invalid_argument("DiscreteOTProblem: target point count mismatch");
}

DiscreteOTProblem DiscreteOTProblem::from_points(const CostFunction& cost, std::vector<Vec3> source,
                                                 Eigen::VectorXd source_w, std::vector<Vec3> target,
                                                 Eigen::VectorXd target_w) {
  DiscreteOTProblem p;
  p.cost.resize(static_cast<Eigen::Index>(source.size()), static_cast<Eigen::Index>(target.size()));
  for (Eigen::Index i = 0; i < p.cost.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cost.cols(); ++j)
      p.cost(i, j) = cost.value(source[i], target[j]);
  p.source_points = std::move(source);
  p.target_points = std::move(target);
  p.source_w = std::move(source_w);
  p.target_w = std::move(target_w);
  p.validate();
  return p;
}

AssignmentResult solve_assignment(const DiscreteOTProblem& problem) {
  problem.validate();
  const int n = static_cast<int>(problem.cost.rows());
  if (problem.cost.cols() != n)
    throw std::invalid_argument("solve_assignment: problem must be square");
  const double uniform = 1.0 / n;
  if ((problem.source_w.array() - uniform).abs().maxCoeff() > kWeightTol ||
      (problem.target_w.array() - uniform).abs().maxCoeff() > kWeightTol)
    throw std::invalid_argument("solve_assignment: weights must be uniform 1/N");

  const auto& c = problem.cost;
  // Jonker-Volgenant shortest augmenting paths, 1-based with a virtual
  // column 0. Terminates with feasible duals and complementary slackness.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  AssignmentResult result;
  result.permutation.assign(n, -1);
  for (int j = 1; j <= n; ++j)
    if (match[j] != 0) result.permutation[match[j] - 1] = j - 1;

  result.plan.coupling = Eigen::MatrixXd::Zero(n, n);
  result.primal = 0.0;
  for (int i = 0; i < n; ++i) {
    result.plan.coupling(i, result.permutation[i]) = uniform;
    result.primal += uniform * c(i, result.permutation[i]);
  }

  Eigen::VectorXd phi(n), psi(n);
  for (int i = 0; i < n; ++i) phi[i] = u[i + 1];
  for (int j = 0; j < n; ++j) psi[j] = v[j + 1];
  result.potentials = to_paper_convention(phi, psi);
  result.dual = -result.potentials.u.dot(problem.source_w) -
                result.potentials.ubar.dot(problem.target_w);
  return result;
}

SinkhornResult sinkhorn(const DiscreteOTProblem& problem, double epsilon, int max_iter,
                        double tol) {
  problem.validate();
  if (!(epsilon > 0.0)) throw std::invalid_argument("sinkhorn: epsilon must be positive");
  const auto n = problem.cost.rows();
  const auto m = problem.cost.cols();
  const Eigen::VectorXd log_mu = problem.source_w.array().log();
  const Eigen::VectorXd log_nu = problem.target_w.array().log();

  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);

  auto plan_entry_log = [&](Eigen::Index i, Eigen::Index j) {
    return (f[i] + g[j] - problem.cost(i, j)) / epsilon + log_mu[i] + log_nu[j];
  };

  SinkhornResult result;
  for (int it = 1; it <= max_iter; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd row(m);
      for (Eigen::Index j = 0; j < m; ++j) row[j] = (g[j] - problem.cost(i, j)) / epsilon + log_nu[j];
      f[i] = -epsilon * logsumexp(row);
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      Eigen::VectorXd col(n);
      for (Eigen::Index i = 0; i < n; ++i) col[i] = (f[i] - problem.cost(i, j)) / epsilon + log_mu[i];
      g[j] = -epsilon * logsumexp(col);
    }
    if (!f.allFinite() || !g.allFinite())
      throw std::runtime_error(
          "sinkhorn: scaling underflow despite log-domain updates; increase epsilon");

    // After the g update column marginals are exact; the row defect is the
    // convergence measure.
    double defect = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double row_sum = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) row_sum += std::exp(plan_entry_log(i, j));
      defect = std::max(defect, std::abs(row_sum - problem.source_w[i]));
    }
    result.iterations = it;
    result.marginal_defect = defect;
    if (defect <= tol) {
      result.converged = true;
      break;
    }
  }

  result.plan.coupling.resize(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) result.plan.coupling(i, j) = std::exp(plan_entry_log(i, j));

  // Entropic potentials may violate phi_i + psi_j <= C_ij slightly; a final
  // c-transform of f against g restores exact feasibility.
  Eigen::VectorXd phi(n);
  for (Eigen::Index i = 0; i < n; ++i)
    phi[i] = (problem.cost.row(i).transpose() - g).minCoeff();
  result.potentials = to_paper_convention(phi, g);
  return result;
}

Density1D Density1D::uniform(double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("Density1D: empty interval");
  return Density1D{[](double) { return 1.0; }, lo, hi};
}

Density1D Density1D::gaussian(double mean, double sigma, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("Density1D: empty interval");
  if (!(sigma > 0.0)) throw std::invalid_argument("Density1D: sigma must be positive");
  return Density1D{[mean, sigma](double x) {
                     const double z = (x - mean) / sigma;
                     return std::exp(-0.5 * z * z);
                   },
                   lo, hi};
}

double MonotoneMap1D::value(double x) const {
  const int n = static_cast<int>(xs.size()) - 1;
  if (x <= xs[0]) return ts[0];
  if (x >= xs[n]) return ts[n];
  const double h = (xs[n] - xs[0]) / n;
  int k = std::min(n - 1, static_cast<int>((x - xs[0]) / h));
  if (x < xs[k]) --k;  // guard against rounding at cell edges
  if (x > xs[k + 1]) ++k;
  const double w = (x - xs[k]) / (xs[k + 1] - xs[k]);
  return (1.0 - w) * ts[k] + w * ts[k + 1];
}

double MonotoneMap1D::slope(double x) const {
  const int n = static_cast<int>(xs.size()) - 1;
  const double h = (xs[n] - xs[0]) / n;
  int k = static_cast<int>((x - xs[0]) / h);
  k = std::clamp(k, 0, n - 1);
  return (ts[k + 1] - ts[k]) / (xs[k + 1] - xs[k]);
}

MonotoneMap1D solve_monotone_1d(const Density1D& rho, const Density1D& rhobar, int grid_n) {
  if (grid_n < 2) throw std::invalid_argument("solve_monotone_1d: grid_n must be at least 2");

  // Normalized CDF by cumulative trapezoid quadrature on a fine grid.
  auto build_cdf = [](const Density1D& d, Eigen::VectorXd& xs, Eigen::VectorXd& cdf) {
    constexpr int kQuad = 16384;
    xs.resize(kQuad + 1);
    cdf.resize(kQuad + 1);
    const double h = (d.hi - d.lo) / kQuad;
    double prev = d.unnormalized(d.lo);
    if (!(prev > 0.0)) throw std::domain_error("solve_monotone_1d: density must be positive");
    xs[0] = d.lo;
    cdf[0] = 0.0;
    for (int i = 1; i <= kQuad; ++i) {
      xs[i] = d.lo + i * h;
      const double cur = d.unnormalized(xs[i]);
      if (!(cur > 0.0)) throw std::domain_error("solve_monotone_1d: density must be positive");
      cdf[i] = cdf[i - 1] + 0.5 * (prev + cur) * h;
      prev = cur;
    }
    cdf /= cdf[kQuad];
  };

  Eigen::VectorXd sx, scdf, tx, tcdf;
  build_cdf(rho, sx, scdf);
  build_cdf(rhobar, tx, tcdf);

  auto invert_target = [&](double p) {
    // tcdf is strictly increasing; locate the bracketing cell.
    const auto* begin = tcdf.data();
    const auto* end = begin + tcdf.size();
    const auto* it = std::lower_bound(begin, end, p);
    if (it == begin) return tx[0];
    if (it == end) return tx[tcdf.size() - 1];
    const Eigen::Index k = it - begin;
    const double w = (p - tcdf[k - 1]) / (tcdf[k] - tcdf[k - 1]);
    return (1.0 - w) * tx[k - 1] + w * tx[k];
  };

  MonotoneMap1D map;
  map.xs.resize(grid_n + 1);
  map.ts.resize(grid_n + 1);
  const double h = (rho.hi - rho.lo) / grid_n;
  for (int i = 0; i <= grid_n; ++i) {
    map.xs[i] = rho.lo + i * h;
    // CDF of the source at the grid node by interpolation on the fine grid.
    const double x = map.xs[i];
    const double pos = (x - rho.lo) / (rho.hi - rho.lo) * (sx.size() - 1);
    const Eigen::Index k = std::min<Eigen::Index>(static_cast<Eigen::Index>(pos), sx.size() - 2);
    const double w = pos - k;
    const double p = (1.0 - w) * scdf[k] + w * scdf[k + 1];
    map.ts[i] = invert_target(p);
  }
  return map;
}

ScalarField potential_from_monotone_map(const MonotoneMap1D& map) {
  // Cumulative integral of the interpolated map over the grid, so the
  // potential value is available as well as its derivatives.
  const int n = static_cast<int>(map.xs.size()) - 1;
  Eigen::VectorXd integral(n + 1);
  integral[0] = 0.0;
  for (int i = 1; i <= n; ++i)
    integral[i] = integral[i - 1] + 0.5 * (map.ts[i - 1] + map.ts[i]) * (map.xs[i] - map.xs[i - 1]);

  auto integral_at = [map, integral, n](double x) {
    if (x <= map.xs[0]) return integral[0] + map.ts[0] * (x - map.xs[0]);
    if (x >= map.xs[n]) return integral[n] + map.ts[n] * (x - map.xs[n]);
    const double h = (map.xs[n] - map.xs[0]) / n;
    const int k = std::clamp(static_cast<int>((x - map.xs[0]) / h), 0, n - 1);
    const double dx = x - map.xs[k];
    const double slope = (map.ts[k + 1] - map.ts[k]) / (map.xs[k + 1] - map.xs[k]);
    return integral[k] + map.ts[k] * dx + 0.5 * slope * dx * dx;
  };

  ScalarField u([integral_at](const Vec3& x) {
    return integral_at(x[0]) + 0.5 * (x[1] * x[1] + x[2] * x[2]);
  });
  u.with_gradient([map](const Vec3& x) -> Vec3 { return Vec3(map.value(x[0]), x[1], x[2]); });
  u.with_hessian([map](const Vec3& x) -> Mat3 {
    Mat3 h = Mat3::Identity();
    h(0, 0) = map.slope(x[0]);
    return h;
  });
  return u;
}

DualityReport duality_report(const DiscreteOTProblem& problem, const TransportPlan& plan,
                             const PotentialPair& potentials) {
  const auto n = problem.cost.rows();
  const auto m = problem.cost.cols();
  if (plan.coupling.rows() != n || plan.coupling.cols() != m ||
      potentials.u.size() != n || potentials.ubar.size() != m)
    throw std::invalid_argument("duality_report: shape mismatch");

  DualityReport r;
  r.primal = (problem.cost.array() * plan.coupling.array()).sum();
  r.dual = -potentials.u.dot(problem.source_w) - potentials.ubar.dot(problem.target_w);
  r.gap = r.primal - r.dual;

  const Eigen::VectorXd row_sums = plan.coupling.rowwise().sum();
  const Eigen::VectorXd col_sums = plan.coupling.colwise().sum();
  r.max_marginal_defect = std::max((row_sums - problem.source_w).cwiseAbs().maxCoeff(),
                                   (col_sums - problem.target_w).cwiseAbs().maxCoeff());

  r.support_threshold = 1e-3 * plan.coupling.maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double slack = potentials.u[i] + potentials.ubar[j] + problem.cost(i, j);
      r.max_feasibility_violation = std::max(r.max_feasibility_violation, -slack);
      if (plan.coupling(i, j) > r.support_threshold)
        r.support_duality_defect = std::max(r.support_duality_defect, std::abs(slack));
    }
  }
  return r;
}

ResidualSummary el_residual_grid(const MAStructure& s, const ScalarField& u,
                                 const std::vector<Vec3>& grid) {
  ResidualSummary summary;
  summary.residuals.reserve(grid.size());
  double sum_abs = 0.0;
  int ok = 0;
  for (const Vec3& x : grid) {
    try {
      ResidualInfo info;
      const double r = ma_residual_at(s, u, x, &info);
      summary.residuals.push_back(r);
      if (info.out_of_support) ++summary.flagged_out_of_support;
      summary.max_abs = std::max(summary.max_abs, std::abs(r));
      sum_abs += std::abs(r);
      ++ok;
    } catch (const std::exception&) {
      summary.residuals.push_back(std::numeric_limits<double>::quiet_NaN());
      ++summary.failed_points;
    }
  }
  summary.mean_abs = ok > 0 ? sum_abs / ok : 0.0;
  return summary;
}

void parse_points_file(const std::string& path, std::vector<Vec3>& points,
                       Eigen::VectorXd& weights) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open points file: " + path);
  points.clear();
  std::vector<double> w;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double x, y, z, weight;
    if (!(row >> x)) continue;  // blank or comment-only line
    if (!(row >> y >> z >> weight))
      throw std::invalid_argument("points file " + path + " line " + std::to_string(line_no) +
                                  ": expected 'x y z weight'");
    points.emplace_back(x, y, z);
    w.push_back(weight);
  }
  weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
}

}  // namespace otma
