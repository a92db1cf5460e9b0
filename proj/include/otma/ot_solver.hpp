#pragma once

#include <string>
#include <vector>

#include "otma/fields.hpp"
#include "otma/ma_structure.hpp"
#include "otma/types.hpp"

namespace otma {

/// Discrete Monge-Kantorovich problem at desk scale. Point lists are
/// optional metadata; the solvers work on the cost matrix and weights.
struct DiscreteOTProblem {
  Eigen::MatrixXd cost;      // C_ij = c(x_i, xbar_j)
  Eigen::VectorXd source_w;  // rho_i > 0, sums to 1
  Eigen::VectorXd target_w;  // rhobar_j > 0, sums to 1
  std::vector<Vec3> source_points;
  std::vector<Vec3> target_points;

  /// Throws std::invalid_argument on shape mismatch, non-positive weights,
  /// weight sums off by more than 1e-12, or non-finite costs.
  void validate() const;

  static DiscreteOTProblem from_points(const CostFunction& cost, std::vector<Vec3> source,
                                       Eigen::VectorXd source_w, std::vector<Vec3> target,
                                       Eigen::VectorXd target_w);
};

struct TransportPlan {
  Eigen::MatrixXd coupling;  // gamma_ij >= 0
};

/// Dual potentials in the symmetric sign convention: u_i + ubar_j >= -C_ij,
/// with equality on the support of an optimal plan. Normalized so u[0] = 0.
struct PotentialPair {
  Eigen::VectorXd u;
  Eigen::VectorXd ubar;
};

struct AssignmentResult {
  TransportPlan plan;
  PotentialPair potentials;
  std::vector<int> permutation;  // row i -> column permutation[i]
  double primal = 0.0;
  double dual = 0.0;
};

/// Exact solver for square, uniform-weight problems (Jonker-Volgenant
/// shortest augmenting paths). Rejects other shapes.
AssignmentResult solve_assignment(const DiscreteOTProblem& problem);

struct SinkhornResult {
  TransportPlan plan;
  PotentialPair potentials;
  int iterations = 0;
  double marginal_defect = 0.0;
  bool converged = false;
};

/// Entropic regularization with log-domain updates. Stops when the max
/// row/column marginal error drops below `tol` or at the iteration cap.
SinkhornResult sinkhorn(const DiscreteOTProblem& problem, double epsilon, int max_iter = 20000,
                        double tol = 1e-9);

/// One-dimensional positive density on an interval.
struct Density1D {
  std::function<double(double)> unnormalized;
  double lo = 0.0;
  double hi = 1.0;

  static Density1D uniform(double lo, double hi);
  static Density1D gaussian(double mean, double sigma, double lo, double hi);
};

/// Monotone non-decreasing map sampled on a uniform grid, with linear
/// interpolation between samples.
struct MonotoneMap1D {
  Eigen::VectorXd xs;  // grid_n + 1 sample abscissae
  Eigen::VectorXd ts;  // map values at xs

  double value(double x) const;
  double slope(double x) const;  // cellwise slope of the interpolant
};

/// Monotone rearrangement T = Fbar^{-1} o F by cumulative quadrature of the
/// two CDFs and inversion.
MonotoneMap1D solve_monotone_1d(const Density1D& rho, const Density1D& rhobar, int grid_n);

/// Potential on R^3 whose gradient is (T(x1), x2, x3): the 1-D map embedded
/// as a transport potential for the quadratic cost.
ScalarField potential_from_monotone_map(const MonotoneMap1D& map);

struct DualityReport {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double max_marginal_defect = 0.0;
  double max_feasibility_violation = 0.0;  // of u_i + ubar_j >= -C_ij
  double support_duality_defect = 0.0;     // max |u_i + ubar_j + C_ij| where gamma large
  double support_threshold = 0.0;
};

DualityReport duality_report(const DiscreteOTProblem& problem, const TransportPlan& plan,
                             const PotentialPair& potentials);

struct ResidualSummary {
  double max_abs = 0.0;
  double mean_abs = 0.0;
  int flagged_out_of_support = 0;
  int failed_points = 0;
  std::vector<double> residuals;  // one per grid point, NaN where evaluation failed
};

/// Monge-Ampere residual sweep over sample points; failures are recorded,
/// not fatal.
ResidualSummary el_residual_grid(const MAStructure& s, const ScalarField& u,
                                 const std::vector<Vec3>& grid);

/// Parse a plain-text tabular point file: one point per row, coordinates
/// then weight, '#' comments and blank lines allowed.
void parse_points_file(const std::string& path, std::vector<Vec3>& points,
                       Eigen::VectorXd& weights);

}  // namespace otma
