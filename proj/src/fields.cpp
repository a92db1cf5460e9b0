#include "otma/fields.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace otma {

double Box3::volume() const {
  return (hi - lo).prod();
}

bool Box3::contains(const Vec3& p, double margin) const {
  for (int i = 0; i < 3; ++i) {
    if (p[i] < lo[i] + margin || p[i] > hi[i] - margin) return false;
  }
  return true;
}

Vec3 Box3::clamp(const Vec3& p) const {
  return p.cwiseMax(lo).cwiseMin(hi);
}

ScalarField::ScalarField(Eval value) : value_(std::move(value)) {
  if (!value_) throw std::invalid_argument("ScalarField: null evaluator");
}

ScalarField& ScalarField::with_gradient(GradFn g) {
  grad_ = std::move(g);
  return *this;
}

ScalarField& ScalarField::with_hessian(HessFn h) {
  hess_ = std::move(h);
  return *this;
}

ScalarField& ScalarField::with_domain(const Box3& box) {
  domain_ = box;
  return *this;
}

ScalarField& ScalarField::with_steps(FdSteps steps) {
  steps_ = steps;
  return *this;
}

double ScalarField::value(const Vec3& x) const {
  return value_(x);
}

void ScalarField::require_interior(const Vec3& x, double margin) const {
  if (domain_ && !domain_->contains(x, margin))
    throw std::domain_error("ScalarField: point too close to the domain boundary for the stencil");
}

Vec3 ScalarField::gradient(const Vec3& x) const {
  if (grad_) return grad_(x);
  const double h = steps_.gradient;
  require_interior(x, h);
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    Vec3 xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (value_(xp) - value_(xm)) / (2.0 * h);
  }
  return g;
}

Mat3 ScalarField::hessian(const Vec3& x) const {
  if (hess_) return hess_(x);
  const double h = steps_.hessian;
  require_interior(x, h);
  Mat3 m;
  const double f0 = value_(x);
  for (int i = 0; i < 3; ++i) {
    Vec3 xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    m(i, i) = (value_(xp) - 2.0 * f0 + value_(xm)) / (h * h);
    for (int j = i + 1; j < 3; ++j) {
      Vec3 pp = x, pm = x, mp = x, mm = x;
      pp[i] += h; pp[j] += h;
      pm[i] += h; pm[j] -= h;
      mp[i] -= h; mp[j] += h;
      mm[i] -= h; mm[j] -= h;
      const double v = (value_(pp) - value_(pm) - value_(mp) + value_(mm)) / (4.0 * h * h);
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return 0.5 * (m + m.transpose().eval());
}

ScalarField ScalarField::quadratic(const Mat3& q, const Vec3& b, double c0) {
  Mat3 qs = 0.5 * (q + q.transpose().eval());
  ScalarField f([qs, b, c0](const Vec3& x) { return 0.5 * x.dot(qs * x) + b.dot(x) + c0; });
  f.with_gradient([qs, b](const Vec3& x) -> Vec3 { return qs * x + b; });
  f.with_hessian([qs](const Vec3&) -> Mat3 { return qs; });
  return f;
}

Density Density::uniform(const Box3& box) {
  Density d;
  d.box_ = box;
  d.kind_ = "uniform";
  d.raw_ = [](const Vec3&) { return 1.0; };
  d.normalize();
  return d;
}

Density Density::gaussian(const Box3& box, const Vec3& mean, const Mat3& covariance) {
  Eigen::LLT<Mat3> llt(covariance);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("Density: covariance must be symmetric positive definite");
  Mat3 inv = covariance.inverse();
  Density d;
  d.box_ = box;
  d.kind_ = "gaussian";
  d.raw_ = [mean, inv](const Vec3& p) {
    const Vec3 r = p - mean;
    return std::exp(-0.5 * r.dot(inv * r));
  };
  d.normalize();
  return d;
}

Density Density::custom(const Box3& box, std::function<double(const Vec3&)> unnormalized,
                        const std::string& kind) {
  if (!unnormalized) throw std::invalid_argument("Density: null evaluator");
  Density d;
  d.box_ = box;
  d.kind_ = kind;
  d.raw_ = std::move(unnormalized);
  d.normalize();
  return d;
}

void Density::normalize() {
  constexpr int n = 32;
  const Vec3 width = box_.hi - box_.lo;
  const double cell = width.prod() / (n * n * n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        Vec3 p = box_.lo + Vec3((i + 0.5) / n * width[0], (j + 0.5) / n * width[1],
                                (k + 0.5) / n * width[2]);
        const double v = raw_(p);
        if (!(v > 0.0) || !std::isfinite(v))
          throw std::domain_error("Density: evaluator must be strictly positive and finite on the box");
        total += v * cell;
      }
    }
  }
  norm_ = total;
}

double Density::value(const Vec3& p) const {
  return raw_(box_.clamp(p)) / norm_;
}

CostFunction CostFunction::quadratic() {
  CostFunction c;
  c.kind_ = CostKind::quadratic;
  c.eval_ = [](const Vec3& x, const Vec3& xb) { return -x.dot(xb); };
  c.grad_x_ = [](const Vec3&, const Vec3& xb) -> Vec3 { return -xb; };
  c.hess_xx_ = [](const Vec3&, const Vec3&) -> Mat3 { return Mat3::Zero(); };
  c.mixed_ = [](const Vec3&, const Vec3&) -> Mat3 { return -Mat3::Identity(); };
  return c;
}

CostFunction CostFunction::semigeostrophic(double coriolis_f) {
  if (!(coriolis_f > 0.0)) throw std::invalid_argument("CostFunction: coriolis_f must be positive");
  const double f2 = coriolis_f * coriolis_f;
  CostFunction c;
  c.kind_ = CostKind::semigeostrophic;
  c.coriolis_f_ = coriolis_f;
  c.eval_ = [f2](const Vec3& x, const Vec3& X) {
    const double dx = x[0] - X[0];
    const double dy = x[1] - X[1];
    return f2 * (0.5 * dx * dx + 0.5 * dy * dy - x[2] * X[2]);
  };
  c.grad_x_ = [f2](const Vec3& x, const Vec3& X) -> Vec3 {
    return f2 * Vec3(x[0] - X[0], x[1] - X[1], -X[2]);
  };
  c.hess_xx_ = [f2](const Vec3&, const Vec3&) -> Mat3 {
    Mat3 m = Mat3::Zero();
    m(0, 0) = f2;
    m(1, 1) = f2;
    return m;
  };
  c.mixed_ = [f2](const Vec3&, const Vec3&) -> Mat3 { return -f2 * Mat3::Identity(); };
  return c;
}

CostFunction CostFunction::bilinear(const Mat3& a) {
  CostFunction c;
  c.kind_ = CostKind::custom;
  c.eval_ = [a](const Vec3& x, const Vec3& xb) { return -x.dot(a * xb); };
  c.grad_x_ = [a](const Vec3&, const Vec3& xb) -> Vec3 { return -a * xb; };
  c.hess_xx_ = [](const Vec3&, const Vec3&) -> Mat3 { return Mat3::Zero(); };
  c.mixed_ = [a](const Vec3&, const Vec3&) -> Mat3 { return -a; };
  return c;
}

CostFunction CostFunction::custom(Eval eval) {
  if (!eval) throw std::invalid_argument("CostFunction: null evaluator");
  CostFunction c;
  c.kind_ = CostKind::custom;
  c.eval_ = std::move(eval);
  return c;
}

double CostFunction::value(const Vec3& x, const Vec3& xbar) const {
  return eval_(x, xbar);
}

Vec3 CostFunction::grad_x(const Vec3& x, const Vec3& xbar) const {
  if (grad_x_) return grad_x_(x, xbar);
  const double h = steps_.gradient;
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    Vec3 xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (eval_(xp, xbar) - eval_(xm, xbar)) / (2.0 * h);
  }
  return g;
}

Mat3 CostFunction::hess_xx(const Vec3& x, const Vec3& xbar) const {
  if (hess_xx_) return hess_xx_(x, xbar);
  ScalarField slice([this, xbar](const Vec3& p) { return eval_(p, xbar); });
  slice.with_steps(steps_);
  return slice.hessian(x);
}

Mat3 CostFunction::mixed_hessian(const Vec3& x, const Vec3& xbar) const {
  if (mixed_) return mixed_(x, xbar);
  const double h = steps_.hessian;
  Mat3 m;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Vec3 xp = x, xm = x, bp = xbar, bm = xbar;
      xp[i] += h;
      xm[i] -= h;
      bp[j] += h;
      bm[j] -= h;
      m(i, j) = (eval_(xp, bp) - eval_(xp, bm) - eval_(xm, bp) + eval_(xm, bm)) / (4.0 * h * h);
    }
  }
  return m;
}

}  // namespace otma
