#include "otma/transport_geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace otma {

namespace {

constexpr double kSpacelikeTol = 1e-10;

Mat6 off_diagonal_blocks(const Mat3& upper_right, const Mat3& lower_left) {
  Mat6 m = Mat6::Zero();
  m.topRightCorner<3, 3>() = upper_right;
  m.bottomLeftCorner<3, 3>() = lower_left;
  return m;
}

}  // namespace

MetricAtPoint kmw_metric_at(const CostFunction& cost, const Density& rho, const Density& rhobar,
                            const Vec3& x, const Vec3& xbar) {
  const Mat3 b = cost.mixed_hessian(x, xbar);
  const double det = b.determinant();
  if (std::abs(det) <= 1e-12)
    throw DegenerateStructureError("KMW metric: singular mixed Hessian", x, xbar);
  const double rx = rho.value(x);
  const double ry = rhobar.value(xbar);
  if (!(rx > 0.0) || !(ry > 0.0))
    throw std::domain_error("KMW metric: densities must be positive at the base point");
  const double prefactor = std::cbrt(rx * ry / std::abs(det));
  MetricAtPoint m;
  m.x = x;
  m.xbar = xbar;
  m.matrix = off_diagonal_blocks(-prefactor * b, -prefactor * b.transpose());
  return m;
}

ConformalReport conformal_defect_at(const MAStructure& s, const Vec3& x, const Vec3& xbar) {
  ConformalReport r;
  r.x = x;
  r.xbar = xbar;
  r.lr = lr_metric_at(s, x, xbar);
  r.kmw = kmw_metric_at(s.cost, s.rho, s.rhobar, x, xbar);
  const double rr = s.rho.value(x) * s.rhobar.value(xbar);
  r.conformal_factor = std::cbrt(rr * rr);
  const Mat6 scaled = r.conformal_factor * r.kmw.matrix;
  const double denom = scaled.cwiseAbs().maxCoeff();
  r.relative_defect = (r.lr.matrix - scaled).cwiseAbs().maxCoeff() / denom;
  return r;
}

Signature metric_signature(const Mat6& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat6> solver(0.5 * (m + m.transpose().eval()));
  Signature s;
  for (int i = 0; i < 6; ++i) {
    const double lambda = solver.eigenvalues()[i];
    if (lambda > tol) {
      ++s.plus;
    } else if (lambda < -tol) {
      ++s.minus;
    } else {
      ++s.zero;
    }
  }
  return s;
}

GraphSection transport_map_from_potential(const CostFunction& cost, const ScalarField& u,
                                          const Vec3& x) {
  switch (cost.kind()) {
    case CostKind::quadratic: {
      GraphSection s;
      s.map_value = u.gradient(x);
      s.jacobian = u.hessian(x);
      return s;
    }
    case CostKind::semigeostrophic: {
      const double f2 = cost.coriolis_f() * cost.coriolis_f();
      GraphSection s;
      s.map_value = u.gradient(x) / f2 + Vec3(x[0], x[1], 0.0);
      Mat3 shift = Mat3::Zero();
      shift(0, 0) = 1.0;
      shift(1, 1) = 1.0;
      s.jacobian = u.hessian(x) / f2 + shift;
      return s;
    }
    case CostKind::custom:
      return transport_map_newton(cost, u, x);
  }
  throw std::logic_error("transport_map_from_potential: unknown cost kind");
}

GraphSection transport_map_newton(const CostFunction& cost, const ScalarField& u, const Vec3& x) {
  const Vec3 du = u.gradient(x);
  // Solve F(xbar) = Du(x) + D_x c(x, xbar) = 0; the Jacobian in xbar is the
  // mixed Hessian B(x, xbar).
  Vec3 xbar = du;  // exact for the quadratic cost, a sensible scale otherwise
  auto residual = [&](const Vec3& p) -> Vec3 { return du + cost.grad_x(x, p); };
  Vec3 f = residual(xbar);
  constexpr int kMaxIter = 50;
  constexpr int kMaxHalvings = 30;
  constexpr double kTol = 1e-12;
  for (int iter = 0; iter < kMaxIter && f.norm() > kTol; ++iter) {
    const Mat3 b = cost.mixed_hessian(x, xbar);
    const Vec3 step = b.fullPivLu().solve(-f);
    double damping = 1.0;
    Vec3 next = xbar + step;
    Vec3 fnext = residual(next);
    int halvings = 0;
    while (fnext.norm() > f.norm() && halvings < kMaxHalvings) {
      damping *= 0.5;
      next = xbar + damping * step;
      fnext = residual(next);
      ++halvings;
    }
    xbar = next;
    f = fnext;
  }
  if (f.norm() > 1e-9)
    throw std::runtime_error("transport map recovery: Newton iteration did not converge");

  GraphSection s;
  s.map_value = xbar;
  // Implicit differentiation of Du(x) + D_x c(x, T(x)) = 0:
  //   D^2 u + D_x^2 c + B DT = 0.
  const Mat3 b = cost.mixed_hessian(x, xbar);
  s.jacobian = b.fullPivLu().solve(-(u.hessian(x) + cost.hess_xx(x, xbar)));
  return s;
}

GraphCheck graph_geometry_check(const MAStructure& s, const Vec3& x, const GraphSection& section) {
  const Vec3 xbar = section.map_value;
  const Mat3 b = s.cost.mixed_hessian(x, xbar);
  if (std::abs(b.determinant()) <= 1e-12)
    throw DegenerateStructureError("graph check: singular mixed Hessian", x, xbar);

  Mat6 omega = Mat6::Zero();
  omega.topRightCorner<3, 3>() = -b;
  omega.bottomLeftCorner<3, 3>() = b.transpose();

  Eigen::Matrix<double, 6, 3> tangents;
  tangents.topRows<3>() = Mat3::Identity();
  tangents.bottomRows<3>() = section.jacobian;

  GraphCheck check;
  const Mat3 omega_restricted = tangents.transpose() * omega * tangents;
  check.lagrangian_defect = omega_restricted.cwiseAbs().maxCoeff();

  const Mat6 h = kmw_metric_at(s.cost, s.rho, s.rhobar, x, xbar).matrix;
  Mat3 restricted = tangents.transpose() * h * tangents;
  restricted = 0.5 * (restricted + restricted.transpose().eval());
  check.restricted_metric = restricted;

  Eigen::SelfAdjointEigenSolver<Mat3> solver(restricted);
  check.spacelike = (solver.eigenvalues().array() > kSpacelikeTol).all();
  check.degenerate = (solver.eigenvalues().array().abs() <= kSpacelikeTol).any();
  return check;
}

}  // namespace otma
