#pragma once

#include "otma/exterior.hpp"
#include "otma/fields.hpp"
#include "otma/ma_structure.hpp"
#include "otma/types.hpp"

namespace otma {

/// Kim-McCann-Warren metric at (x, xbar):
///   (rho rhobar / |det B|)^{1/3} * ( 0  -B ; -B^T  0 ),  B = D_x D_xbar c.
/// Throws DegenerateStructureError for singular B and std::domain_error for
/// non-positive density values.
MetricAtPoint kmw_metric_at(const CostFunction& cost, const Density& rho, const Density& rhobar,
                            const Vec3& x, const Vec3& xbar);

struct ConformalReport {
  Vec3 x = Vec3::Zero();
  Vec3 xbar = Vec3::Zero();
  double conformal_factor = 0.0;  // (rho rhobar)^{2/3}
  double relative_defect = 0.0;   // max-norm defect of g = factor * h
  MetricAtPoint lr;
  MetricAtPoint kmw;
};

/// Pointwise check of the conformal relation between the Lychagin-Roubtsov
/// and Kim-McCann-Warren metrics.
ConformalReport conformal_defect_at(const MAStructure& s, const Vec3& x, const Vec3& xbar);

struct Signature {
  int plus = 0;
  int minus = 0;
  int zero = 0;
};

/// Eigenvalue counts of a symmetric 6x6 matrix: > tol, < -tol, within tol.
Signature metric_signature(const Mat6& m, double tol);

/// Recover the transport map T(x) and its differential from the potential u
/// via Du(x) = -D_x c(x, T(x)). Closed form for the built-in cost kinds,
/// damped Newton for custom costs.
GraphSection transport_map_from_potential(const CostFunction& cost, const ScalarField& u,
                                          const Vec3& x);

/// Newton recovery regardless of cost kind; exposed for cross-checking the
/// closed-form paths. Throws std::runtime_error on non-convergence.
GraphSection transport_map_newton(const CostFunction& cost, const ScalarField& u, const Vec3& x);

struct GraphCheck {
  double lagrangian_defect = 0.0;  // max |omega_c(t_i, t_j)| over tangent pairs
  bool spacelike = false;          // restricted metric positive definite
  bool degenerate = false;         // restricted metric has a near-zero eigenvalue
  Mat3 restricted_metric = Mat3::Zero();
};

/// Lagrangian and space-like tests for the graph of a map at base point x.
GraphCheck graph_geometry_check(const MAStructure& s, const Vec3& x, const GraphSection& section);

}  // namespace otma
