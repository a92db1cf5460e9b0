#pragma once

#include <stdexcept>

#include "otma/exterior.hpp"
#include "otma/fields.hpp"
#include "otma/types.hpp"

namespace otma {

/// Raised when the symplectic form degenerates (singular mixed Hessian of
/// the cost) at a specific base point.
class DegenerateStructureError : public std::runtime_error {
 public:
  DegenerateStructureError(const std::string& what, const Vec3& x, const Vec3& xbar)
      : std::runtime_error(what), x(x), xbar(xbar) {}
  Vec3 x;
  Vec3 xbar;
};

/// A cost with a pair of densities determines the pair (omega_c, alpha) on
/// R^3 x R^3 pointwise.
struct MAStructure {
  CostFunction cost;
  Density rho;
  Density rhobar;
};

struct MetricAtPoint {
  Mat6 matrix = Mat6::Zero();
  Vec3 x = Vec3::Zero();
  Vec3 xbar = Vec3::Zero();
};

/// The 2-form with omega(d/dx^i, d/dxbar^j) = -(D_x D_xbar c)_ij and zero
/// x-x and xbar-xbar pairings. Throws DegenerateStructureError when the
/// mixed Hessian is singular (|det| <= 1e-12).
AltForm symplectic_form_at(const MAStructure& s, const Vec3& x, const Vec3& xbar);

/// rhobar(xbar) dxbar^123 - rho(x) dx^123.
AltForm effective_form_at(const MAStructure& s, const Vec3& x, const Vec3& xbar);

/// Max absolute coefficient of omega ^ alpha; zero means alpha is effective.
double effectiveness_defect(const AltForm& omega, const AltForm& alpha);

/// Lychagin-Roubtsov metric from the contraction identity
/// g(X1, X2) (omega^3 / 3!) = i_{X1} alpha ^ i_{X2} alpha ^ omega,
/// evaluated entrywise over the standard basis.
MetricAtPoint lr_metric_at(const MAStructure& s, const Vec3& x, const Vec3& xbar);

struct ResidualInfo {
  Vec3 map_point = Vec3::Zero();
  Mat3 map_jacobian = Mat3::Zero();
  /// T_u(x) left the target density's box; rhobar was extended by its
  /// boundary value and the sample should be treated as unreliable.
  bool out_of_support = false;
};

/// Monge-Ampere residual at x: the coefficient of dx^123 in the pullback of
/// the effective form along x -> (x, T_u(x)). Zero iff u solves the
/// Monge-Ampere equation at x.
double ma_residual_at(const MAStructure& s, const ScalarField& u, const Vec3& x,
                      ResidualInfo* info = nullptr);

}  // namespace otma
