#pragma once

#include <functional>
#include <optional>
#include <string>

#include "otma/types.hpp"

namespace otma {

struct Box3 {
  Vec3 lo = Vec3::Constant(-1.0);
  Vec3 hi = Vec3::Constant(1.0);

  double volume() const;
  bool contains(const Vec3& p, double margin = 0.0) const;
  Vec3 clamp(const Vec3& p) const;
};

struct FdSteps {
  double gradient = 1e-4;  // first derivatives
  double hessian = 1e-3;   // second derivatives
};

/// Scalar field on R^3 with optional analytic derivative evaluators and an
/// optional domain box. Without analytic evaluators, derivatives fall back
/// to second-order central differences.
class ScalarField {
 public:
  using Eval = std::function<double(const Vec3&)>;
  using GradFn = std::function<Vec3(const Vec3&)>;
  using HessFn = std::function<Mat3(const Vec3&)>;

  explicit ScalarField(Eval value);

  ScalarField& with_gradient(GradFn g);
  ScalarField& with_hessian(HessFn h);
  ScalarField& with_domain(const Box3& box);
  ScalarField& with_steps(FdSteps steps);

  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
  /// Symmetrized as (H + H^T)/2 on the finite-difference path.
  Mat3 hessian(const Vec3& x) const;

  bool has_analytic_gradient() const { return static_cast<bool>(grad_); }
  bool has_analytic_hessian() const { return static_cast<bool>(hess_); }
  const std::optional<Box3>& domain() const { return domain_; }

  /// x^T q x / 2 + b . x + c0 with analytic derivatives.
  static ScalarField quadratic(const Mat3& q, const Vec3& b = Vec3::Zero(), double c0 = 0.0);

 private:
  void require_interior(const Vec3& x, double margin) const;

  Eval value_;
  GradFn grad_;
  HessFn hess_;
  std::optional<Box3> domain_;
  FdSteps steps_;
};

/// Probability density truncated and renormalized on an axis-aligned box.
/// Evaluation outside the box clamps to the boundary value; `contains`
/// reports whether a point is in the support.
class Density {
 public:
  static Density uniform(const Box3& box);
  static Density gaussian(const Box3& box, const Vec3& mean, const Mat3& covariance);
  static Density custom(const Box3& box, std::function<double(const Vec3&)> unnormalized,
                        const std::string& kind = "custom");

  double value(const Vec3& p) const;
  bool contains(const Vec3& p) const { return box_.contains(p); }
  const Box3& box() const { return box_; }
  double normalization() const { return norm_; }
  const std::string& kind() const { return kind_; }

 private:
  Density() = default;
  void normalize();  // midpoint quadrature on a 32^3 grid; checks positivity

  Box3 box_;
  std::function<double(const Vec3&)> raw_;
  double norm_ = 1.0;
  std::string kind_;
};

enum class CostKind { quadratic, semigeostrophic, custom };

/// Transport cost c(x, xbar) with derivative access. Built-in kinds carry
/// analytic derivatives; custom costs use finite differences.
class CostFunction {
 public:
  using Eval = std::function<double(const Vec3&, const Vec3&)>;

  /// c = -x . xbar
  static CostFunction quadratic();
  /// c = f^2 [ (x-X)^2/2 + (y-Y)^2/2 - zZ ]
  static CostFunction semigeostrophic(double coriolis_f);
  /// c = -x . A xbar (tagged custom; analytic derivatives)
  static CostFunction bilinear(const Mat3& a);
  static CostFunction custom(Eval eval);

  double value(const Vec3& x, const Vec3& xbar) const;
  Vec3 grad_x(const Vec3& x, const Vec3& xbar) const;
  Mat3 hess_xx(const Vec3& x, const Vec3& xbar) const;
  /// D_x D_xbar c, entry (i, j) = d^2 c / dx^i dxbar^j.
  Mat3 mixed_hessian(const Vec3& x, const Vec3& xbar) const;

  CostKind kind() const { return kind_; }
  double coriolis_f() const { return coriolis_f_; }
  bool has_analytic_derivatives() const { return static_cast<bool>(mixed_); }

 private:
  CostFunction() = default;

  CostKind kind_ = CostKind::custom;
  double coriolis_f_ = 1.0;
  Eval eval_;
  std::function<Vec3(const Vec3&, const Vec3&)> grad_x_;
  std::function<Mat3(const Vec3&, const Vec3&)> hess_xx_;
  std::function<Mat3(const Vec3&, const Vec3&)> mixed_;
  FdSteps steps_;
};

}  // namespace otma
