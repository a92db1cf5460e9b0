#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "otma/ma_structure.hpp"
#include "otma/semigeostrophic.hpp"

using namespace otma;

TEST_CASE("cost integrand on hand-evaluated point pairs") {
  // only the vertical product term survives for stacked points
  CHECK(sg_cost(Vec3(0.0, 0.0, 1.0), Vec3(0.0, 0.0, 2.0), 1.0) == doctest::Approx(-2.0));
  // pure horizontal offset with f = 2: 4 * (1/2) = 2
  CHECK(sg_cost(Vec3(1.0, 0.0, 0.0), Vec3::Zero(), 2.0) == doctest::Approx(2.0));
  // mixed example: (1-0)^2/2 + (2-1)^2/2 - 1*3 = -2
  CHECK(sg_cost(Vec3(1.0, 2.0, 1.0), Vec3(0.0, 1.0, 3.0), 1.0) == doctest::Approx(-2.0));
}

TEST_CASE("cost scales exactly with the squared rotation frequency") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 x(dist(rng), dist(rng), dist(rng));
    const Vec3 X(dist(rng), dist(rng), dist(rng));
    const double f = 0.5 + std::abs(dist(rng));
    CHECK(sg_cost(x, X, f) == doctest::Approx(f * f * sg_cost(x, X, 1.0)).epsilon(1e-14));
  }
}

TEST_CASE("discrete energy on a two-particle configuration") {
  std::vector<WeightedParticle> particles{
      {Vec3(0.0, 0.0, 1.0), Vec3(0.0, 0.0, 2.0), 0.25},
      {Vec3(1.0, 0.0, 0.0), Vec3::Zero(), 0.75},
  };
  CHECK(sg_energy(particles, 1.0) == doctest::Approx(0.25 * -2.0 + 0.75 * 0.5));

  particles[0].weight = -0.25;
  CHECK_THROWS_AS(sg_energy(particles, 1.0), std::invalid_argument);
  particles[0].weight = 0.5;  // sums to 1.25
  CHECK_THROWS_AS(sg_energy(particles, 1.0), std::invalid_argument);
}

TEST_CASE("discrete energy approximates the product-measure integral") {
  // E = int rho(x) rhobar(X) c(x, X) dx dX for independent uniform particles
  // on [0,1]^3 x [0,1]^3: per-axis second moments give
  // E[(x-X)^2]/2 = (1/6 - 2*(1/4) + ...) -> E = 2 * (1/12)/... computed by
  // 8^3 midpoint quadrature below instead of trusting a closed form.
  const int n = 8;
  std::vector<WeightedParticle> particles;
  double oracle = 0.0;
  const double w = 1.0 / (n * n * n * n * n * n);
  auto mid = [&](int i) { return (i + 0.5) / n; };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          for (int e = 0; e < n; ++e)
            for (int g = 0; g < n; ++g) {
              const Vec3 x(mid(a), mid(b), mid(c));
              const Vec3 X(mid(d), mid(e), mid(g));
              particles.push_back({x, X, w});
              oracle += w * ((x[0] - X[0]) * (x[0] - X[0]) / 2.0 +
                             (x[1] - X[1]) * (x[1] - X[1]) / 2.0 - x[2] * X[2]);
            }
  CHECK(sg_energy(particles, 1.0) == doctest::Approx(oracle).epsilon(1e-12));

  // relabeling particles leaves the energy unchanged
  std::vector<WeightedParticle> reversed(particles.rbegin(), particles.rend());
  CHECK(sg_energy(reversed, 1.0) == doctest::Approx(sg_energy(particles, 1.0)).epsilon(1e-12));
}

TEST_CASE("canonical coordinates and the conformal relation at unit rotation frequency") {
  Box3 box{Vec3::Constant(-1.0), Vec3::Constant(1.0)};
  SGConfig config{1.0, Density::gaussian(box, Vec3(0.1, 0.0, -0.2), 0.6 * Mat3::Identity()),
                  Density::uniform(box)};
  const SGStructureReport report = verify_sg_structure(config, 500, 42);
  CHECK(report.sample_count == 500);
  CHECK(report.max_canonical_defect <= 1e-10);
  CHECK(report.max_conformal_defect <= 1e-10);
  CHECK(report.max_lr_defect <= 1e-10);
  CHECK(report.max_kmw_defect <= 1e-10);

  // the same seed reproduces the same maxima
  const SGStructureReport again = verify_sg_structure(config, 500, 42);
  CHECK(again.max_conformal_defect == report.max_conformal_defect);

  config.coriolis_f = 1.3;
  CHECK_THROWS_AS(verify_sg_structure(config, 10, 0), std::invalid_argument);
}

TEST_CASE("a corrupted cost breaks the canonical-coordinate statement measurably") {
  // scale the horizontal quadratic terms by 1.1: the pairing becomes
  // diag(1.1, 1.1, 1) and the dx^i ^ dX^i comparison picks up the 0.1
  Box3 box{Vec3::Constant(-1.0), Vec3::Constant(1.0)};
  CostFunction corrupted = CostFunction::custom([](const Vec3& x, const Vec3& X) {
    const double dx = x[0] - X[0], dy = x[1] - X[1];
    return 1.1 * (dx * dx / 2.0 + dy * dy / 2.0) - x[2] * X[2];
  });
  MAStructure s{corrupted, Density::uniform(box), Density::uniform(box)};
  const AltForm omega = symplectic_form_at(s, Vec3(0.2, -0.1, 0.3), Vec3(0.0, 0.4, -0.2));

  AltForm canonical(2);
  for (int i = 1; i <= 3; ++i) canonical[basis_rank({i, i + 3})] = 1.0;
  AltForm defect = omega;
  defect -= canonical;
  CHECK(defect.max_abs() >= 0.09);
  CHECK(defect.max_abs() <= 0.11);
}

TEST_CASE("finite-difference derivatives of the cost match the analytic ones") {
  CostFunction analytic = CostFunction::semigeostrophic(1.0);
  CostFunction fd = CostFunction::custom(
      [](const Vec3& x, const Vec3& X) { return sg_cost(x, X, 1.0); });
  const Vec3 x(0.3, -0.2, 0.5), X(0.1, 0.4, -0.3);
  CHECK((fd.mixed_hessian(x, X) - analytic.mixed_hessian(x, X)).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((fd.hess_xx(x, X) - analytic.hess_xx(x, X)).cwiseAbs().maxCoeff() <= 1e-6);

  // D_x^2 c = f^2 diag(1, 1, 0)
  Mat3 expected = Vec3(1.0, 1.0, 0.0).asDiagonal();
  CHECK((CostFunction::semigeostrophic(2.0).hess_xx(x, X) - 4.0 * expected)
            .cwiseAbs()
            .maxCoeff() <= 1e-14);
}
