#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "otma/fields.hpp"

using namespace otma;

namespace {

ScalarField gaussian_field() {
  return ScalarField([](const Vec3& x) { return std::exp(-x.squaredNorm()); });
}

Vec3 gaussian_grad(const Vec3& x) { return -2.0 * x * std::exp(-x.squaredNorm()); }

Mat3 gaussian_hess(const Vec3& x) {
  const double e = std::exp(-x.squaredNorm());
  return (4.0 * x * x.transpose() - 2.0 * Mat3::Identity()) * e;
}

}  // namespace

TEST_CASE("gradient of linear and quadratic fields") {
  const Vec3 a(1.0, -2.0, 0.5);
  ScalarField linear([a](const Vec3& x) { return a.dot(x); });
  CHECK((linear.gradient(Vec3(0.2, 0.1, -0.4)) - a).norm() <= 1e-9);

  ScalarField half_norm([](const Vec3& x) { return 0.5 * x.squaredNorm(); });
  const Vec3 x(0.3, -0.7, 0.2);
  CHECK((half_norm.gradient(x) - x).norm() <= 1e-9);
}

TEST_CASE("finite-difference gradient matches the analytic oracle") {
  ScalarField f = gaussian_field();
  const Vec3 x(0.3, 0.0, 0.0);
  CHECK((f.gradient(x) - gaussian_grad(x)).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("hessian examples") {
  ScalarField half_norm = ScalarField::quadratic(Mat3::Identity());
  CHECK((half_norm.hessian(Vec3(0.1, 0.2, 0.3)) - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-12);

  ScalarField xy([](const Vec3& x) { return x[0] * x[1]; });
  Mat3 expected = Mat3::Zero();
  expected(0, 1) = 1.0;
  expected(1, 0) = 1.0;
  CHECK((xy.hessian(Vec3(0.4, -0.2, 0.9)) - expected).cwiseAbs().maxCoeff() <= 1e-8);

  ScalarField g = gaussian_field();
  const Vec3 x(0.2, -0.3, 0.1);
  CHECK((g.hessian(x) - gaussian_hess(x)).cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("finite differences converge at second order") {
  // halving h shrinks the error by roughly 4 while truncation dominates
  ScalarField coarse = gaussian_field();
  ScalarField fine = gaussian_field();
  coarse.with_steps({1e-2, 2e-2});
  fine.with_steps({5e-3, 1e-2});
  const Vec3 x(0.4, -0.1, 0.3);

  const double eg_coarse = (coarse.gradient(x) - gaussian_grad(x)).cwiseAbs().maxCoeff();
  const double eg_fine = (fine.gradient(x) - gaussian_grad(x)).cwiseAbs().maxCoeff();
  CHECK(eg_coarse / eg_fine >= 3.5);
  CHECK(eg_coarse / eg_fine <= 4.5);

  const double eh_coarse = (coarse.hessian(x) - gaussian_hess(x)).cwiseAbs().maxCoeff();
  const double eh_fine = (fine.hessian(x) - gaussian_hess(x)).cwiseAbs().maxCoeff();
  CHECK(eh_coarse / eh_fine >= 3.5);
  CHECK(eh_coarse / eh_fine <= 4.5);
}

TEST_CASE("stencil rejects points too close to the domain boundary") {
  ScalarField f = gaussian_field();
  f.with_domain(Box3{Vec3::Constant(-1.0), Vec3::Constant(1.0)});
  CHECK_THROWS_AS(f.gradient(Vec3(1.0, 0.0, 0.0)), std::domain_error);
  CHECK_THROWS_AS(f.hessian(Vec3(0.0, -0.9999, 0.0)), std::domain_error);
  CHECK_NOTHROW(f.gradient(Vec3(0.9, 0.9, -0.9)));
}

TEST_CASE("mixed hessian of built-in costs") {
  const Vec3 x(0.3, -0.2, 0.5), xb(-0.1, 0.4, 0.2);
  CHECK((CostFunction::quadratic().mixed_hessian(x, xb) + Mat3::Identity()).cwiseAbs().maxCoeff() <=
        1e-14);
  CHECK((CostFunction::semigeostrophic(1.0).mixed_hessian(x, xb) + Mat3::Identity())
            .cwiseAbs()
            .maxCoeff() <= 1e-14);

  Mat3 a;
  a << 2, 1, 0, 0, 1, -1, 0.5, 0, 3;
  CHECK((CostFunction::bilinear(a).mixed_hessian(x, xb) + a).cwiseAbs().maxCoeff() <= 1e-14);

  // finite-difference cross stencil against the analytic oracle
  CostFunction fd = CostFunction::custom([a](const Vec3& p, const Vec3& q) { return -p.dot(a * q); });
  CHECK((fd.mixed_hessian(x, xb) + a).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("mixed hessian of built-in costs is constant in the point pair") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const CostFunction& cost : {CostFunction::quadratic(), CostFunction::semigeostrophic(1.3)}) {
    const Mat3 reference = cost.mixed_hessian(Vec3::Zero(), Vec3::Zero());
    double deviation = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Vec3 x(dist(rng), dist(rng), dist(rng));
      Vec3 xb(dist(rng), dist(rng), dist(rng));
      deviation = std::max(deviation,
                           (cost.mixed_hessian(x, xb) - reference).cwiseAbs().maxCoeff());
    }
    CHECK(deviation <= 1e-10);
  }
}

TEST_CASE("semigeostrophic cost with f = 1 has mixed hessian -I term by term") {
  // c = (x-X)^2/2 + (y-Y)^2/2 - zZ differentiates to -I
  CostFunction sg = CostFunction::semigeostrophic(1.0);
  const Vec3 x(0.1, 0.7, -0.2), X(0.5, -0.3, 0.9);
  CHECK((sg.mixed_hessian(x, X) + Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-14);
  Mat3 dxx = Mat3::Zero();
  dxx(0, 0) = 1.0;
  dxx(1, 1) = 1.0;
  CHECK((sg.hess_xx(x, X) - dxx).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("density normalization and positivity") {
  Box3 box{Vec3::Constant(-1.0), Vec3::Constant(1.0)};
  const Density uniform = Density::uniform(box);
  CHECK(uniform.value(Vec3::Zero()) == doctest::Approx(1.0 / 8.0));
  CHECK(uniform.normalization() == doctest::Approx(8.0));

  const Density gauss = Density::gaussian(box, Vec3::Zero(), 0.25 * Mat3::Identity());
  // midpoint quadrature of the normalized density over a 32^3 grid is 1
  // within quadrature error
  constexpr int n = 32;
  double total = 0.0;
  const double cell = 8.0 / (n * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        total += gauss.value(Vec3(-1.0 + (i + 0.5) * 2.0 / n, -1.0 + (j + 0.5) * 2.0 / n,
                                  -1.0 + (k + 0.5) * 2.0 / n)) *
                 cell;
  CHECK(std::abs(total - 1.0) <= 1e-2);

  CHECK_THROWS_AS(Density::custom(box, [](const Vec3& x) { return x[0]; }), std::domain_error);
}

TEST_CASE("density evaluation clamps to the boundary value outside the box") {
  Box3 box{Vec3::Constant(-1.0), Vec3::Constant(1.0)};
  const Density gauss = Density::gaussian(box, Vec3::Zero(), Mat3::Identity());
  CHECK(gauss.value(Vec3(5.0, 0.0, 0.0)) == doctest::Approx(gauss.value(Vec3(1.0, 0.0, 0.0))));
  CHECK(!gauss.contains(Vec3(5.0, 0.0, 0.0)));
  CHECK(gauss.contains(Vec3(0.5, 0.5, 0.5)));
}
