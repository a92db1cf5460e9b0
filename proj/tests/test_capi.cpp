#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "otma.h"

namespace {

const double kUnitBox[6] = {-1.0, 1.0, -1.0, 1.0, -1.0, 1.0};

double negative_dot(const double x[3], const double xbar[3], void*) {
  return -(x[0] * xbar[0] + x[1] * xbar[1] + x[2] * xbar[2]);
}

struct StructureFixture {
  otma_cost* cost = nullptr;
  otma_density* rho = nullptr;
  otma_density* rhobar = nullptr;
  otma_structure* structure = nullptr;

  explicit StructureFixture(otma_cost* c) : cost(c) {
    rho = otma_density_uniform(kUnitBox);
    rhobar = otma_density_uniform(kUnitBox);
    structure = otma_structure_new(cost, rho, rhobar);
  }
  ~StructureFixture() {
    otma_structure_free(structure);
    otma_density_free(rhobar);
    otma_density_free(rho);
    otma_cost_free(cost);
  }
};

}  // namespace

TEST_CASE("null arguments are rejected with an explanatory message") {
  CHECK(otma_lr_metric(nullptr, nullptr, nullptr, nullptr) == OTMA_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(otma_last_error()) > 0);
  CHECK(otma_density_uniform(nullptr) == nullptr);
  CHECK(otma_cost_bilinear(nullptr) == nullptr);
  CHECK(otma_cost_custom(nullptr, nullptr) == nullptr);
  CHECK(otma_structure_new(nullptr, nullptr, nullptr) == nullptr);
  CHECK(otma_run_json(nullptr, nullptr, nullptr) == OTMA_ERR_INVALID_ARGUMENT);
}

TEST_CASE("metrics and the conformal defect through the C interface") {
  StructureFixture fx(otma_cost_quadratic());
  REQUIRE(fx.structure != nullptr);
  const double x[3] = {0.2, -0.1, 0.3};
  const double xb[3] = {0.0, 0.4, -0.2};

  double g[36], h[36];
  REQUIRE(otma_lr_metric(fx.structure, x, xb, g) == OTMA_OK);
  REQUIRE(otma_kmw_metric(fx.structure, x, xb, h) == OTMA_OK);
  // rho rhobar = 1/64: g = (1/64) (0 I; I 0), h = (1/4) (0 I; I 0)
  CHECK(std::abs(g[3] - 1.0 / 64.0) <= 1e-12);
  CHECK(std::abs(g[0]) <= 1e-12);
  CHECK(std::abs(h[3] - 0.25) <= 1e-12);
  for (int i = 0; i < 36; ++i) CHECK(std::abs(g[i] - h[i] / 16.0) <= 1e-12);

  double factor = 0.0, defect = 1.0;
  REQUIRE(otma_conformal_defect(fx.structure, x, xb, &factor, &defect) == OTMA_OK);
  CHECK(std::abs(factor - std::pow(1.0 / 64.0, 2.0 / 3.0)) <= 1e-12);
  CHECK(defect <= 1e-10);

  double eff = 1.0;
  REQUIRE(otma_effectiveness_defect(fx.structure, x, xb, &eff) == OTMA_OK);
  CHECK(eff <= 1e-12);

  int sig[3] = {0, 0, 0};
  REQUIRE(otma_metric_signature(g, 1e-10, sig) == OTMA_OK);
  CHECK(sig[0] == 3);
  CHECK(sig[1] == 3);
  CHECK(sig[2] == 0);
}

TEST_CASE("a callback-defined cost goes through finite differences") {
  StructureFixture fx(otma_cost_custom(negative_dot, nullptr));
  REQUIRE(fx.structure != nullptr);
  const double x[3] = {0.3, -0.1, 0.4};
  const double xb[3] = {0.2, 0.5, 0.0};
  double defect = 1.0;
  REQUIRE(otma_conformal_defect(fx.structure, x, xb, nullptr, &defect) == OTMA_OK);
  CHECK(defect <= 1e-5);
}

TEST_CASE("degenerate pairings surface as the dedicated status code") {
  const double singular[9] = {1, 0, 0, 0, 1, 0, 0, 0, 0};
  StructureFixture fx(otma_cost_bilinear(singular));
  REQUIRE(fx.structure != nullptr);
  const double x[3] = {0.1, 0.2, 0.3};
  double g[36];
  CHECK(otma_lr_metric(fx.structure, x, x, g) == OTMA_ERR_DEGENERATE);
  CHECK(std::strlen(otma_last_error()) > 0);
}

TEST_CASE("rotating-frame cost values") {
  const double x[3] = {0.0, 0.0, 1.0};
  const double bigx[3] = {0.0, 0.0, 2.0};
  double v = 0.0;
  REQUIRE(otma_sg_cost(x, bigx, 1.0, &v) == OTMA_OK);
  CHECK(v == doctest::Approx(-2.0));
  REQUIRE(otma_sg_cost(x, bigx, 2.0, &v) == OTMA_OK);
  CHECK(v == doctest::Approx(-8.0));
}

TEST_CASE("discrete solvers through the C interface") {
  const double cost[4] = {0.0, 1.0, 1.0, 0.0};
  int perm[2];
  double u[2], ubar[2], primal = -1.0, dual = -1.0;
  REQUIRE(otma_solve_assignment(2, cost, perm, u, ubar, &primal, &dual) == OTMA_OK);
  CHECK(perm[0] == 0);
  CHECK(perm[1] == 1);
  CHECK(primal == doctest::Approx(0.0));
  CHECK(primal == doctest::Approx(dual));
  CHECK(u[0] == doctest::Approx(0.0));

  const double mu[2] = {0.5, 0.5};
  double plan[4];
  int iterations = 0;
  double marginal = 1.0;
  REQUIRE(otma_sinkhorn(2, 2, cost, mu, mu, 0.05, 20000, 1e-10, plan, u, ubar, &iterations,
                        &marginal) == OTMA_OK);
  CHECK(marginal <= 1e-9);
  CHECK(plan[0] + plan[1] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(plan[0] > plan[1]);

  CHECK(otma_solve_assignment(0, cost, perm, u, ubar, &primal, &dual) ==
        OTMA_ERR_INVALID_ARGUMENT);
}

TEST_CASE("JSON run entry point distinguishes config errors from tolerance failures") {
  char* report = nullptr;
  char* csv = nullptr;

  CHECK(otma_run_json("{\"command\": \"fly\"}", &report, &csv) == OTMA_ERR_CONFIG);
  CHECK(report == nullptr);

  const char* ok_config = R"({
    "command": "verify-conformal",
    "cost": {"kind": "quadratic"},
    "source_density": {"kind": "uniform"},
    "target_density": {"kind": "uniform"},
    "sample_count": 20,
    "points_csv": true
  })";
  REQUIRE(otma_run_json(ok_config, &report, &csv) == OTMA_OK);
  REQUIRE(report != nullptr);
  CHECK(std::string(report).find("\"pass\": true") != std::string::npos);
  REQUIRE(csv != nullptr);
  CHECK(std::string(csv).find("conformal_defect") != std::string::npos);
  otma_string_free(report);
  otma_string_free(csv);
  report = nullptr;
  csv = nullptr;

  const char* failing_config = R"({
    "command": "verify-conformal",
    "cost": {"kind": "exp"},
    "source_density": {"kind": "uniform"},
    "target_density": {"kind": "uniform"},
    "sample_count": 20
  })";
  CHECK(otma_run_json(failing_config, &report, &csv) == OTMA_ERR_TOLERANCE);
  REQUIRE(report != nullptr);  // the report is still produced
  CHECK(std::string(report).find("\"pass\": false") != std::string::npos);
  otma_string_free(report);
}
