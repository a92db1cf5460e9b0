#include "otma.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "otma/fields.hpp"
#include "otma/ma_structure.hpp"
#include "otma/ot_solver.hpp"
#include "otma/runner.hpp"
#include "otma/semigeostrophic.hpp"
#include "otma/transport_geometry.hpp"

struct otma_cost {
  otma::CostFunction impl;
};

struct otma_density {
  otma::Density impl;
};

struct otma_structure {
  otma::MAStructure impl;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

otma_status classify(const std::exception& e) {
  if (dynamic_cast<const otma::ConfigError*>(&e)) return OTMA_ERR_CONFIG;
  if (dynamic_cast<const otma::DegenerateStructureError*>(&e)) return OTMA_ERR_DEGENERATE;
  if (dynamic_cast<const std::domain_error*>(&e)) return OTMA_ERR_DOMAIN;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return OTMA_ERR_INVALID_ARGUMENT;
  return OTMA_ERR_INTERNAL;
}

template <typename Fn>
otma_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    set_error(e.what());
    return classify(e);
  } catch (...) {
    set_error("unknown error");
    return OTMA_ERR_INTERNAL;
  }
}

template <typename Fn>
auto guarded_new(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  } catch (...) {
    set_error("unknown error");
    return nullptr;
  }
}

otma::Vec3 to_vec3(const double* p) { return otma::Vec3(p[0], p[1], p[2]); }

otma::Mat3 to_mat3(const double* m) {
  otma::Mat3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = m[3 * i + j];
  return out;
}

otma::Box3 to_box(const double* b) {
  otma::Box3 box;
  for (int i = 0; i < 3; ++i) {
    box.lo[i] = b[2 * i];
    box.hi[i] = b[2 * i + 1];
  }
  return box;
}

void write_mat6(const otma::Mat6& m, double* out) {
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) out[6 * i + j] = m(i, j);
}

otma_status require(bool condition, const char* message) {
  if (condition) return OTMA_OK;
  set_error(message);
  return OTMA_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* otma_last_error(void) { return g_last_error.c_str(); }

otma_cost* otma_cost_quadratic(void) {
  return guarded_new([]() { return new otma_cost{otma::CostFunction::quadratic()}; });
}

otma_cost* otma_cost_semigeostrophic(double coriolis_f) {
  return guarded_new(
      [&]() { return new otma_cost{otma::CostFunction::semigeostrophic(coriolis_f)}; });
}

otma_cost* otma_cost_bilinear(const double a[9]) {
  return guarded_new([&]() -> otma_cost* {
    if (!a) throw std::invalid_argument("otma_cost_bilinear: null matrix");
    return new otma_cost{otma::CostFunction::bilinear(to_mat3(a))};
  });
}

otma_cost* otma_cost_custom(otma_cost_fn fn, void* user) {
  return guarded_new([&]() -> otma_cost* {
    if (!fn) throw std::invalid_argument("otma_cost_custom: null callback");
    return new otma_cost{otma::CostFunction::custom(
        [fn, user](const otma::Vec3& x, const otma::Vec3& xb) {
          const double xv[3] = {x[0], x[1], x[2]};
          const double bv[3] = {xb[0], xb[1], xb[2]};
          return fn(xv, bv, user);
        })};
  });
}

void otma_cost_free(otma_cost* cost) { delete cost; }

otma_density* otma_density_uniform(const double box[6]) {
  return guarded_new([&]() -> otma_density* {
    if (!box) throw std::invalid_argument("otma_density_uniform: null box");
    return new otma_density{otma::Density::uniform(to_box(box))};
  });
}

otma_density* otma_density_gaussian(const double box[6], const double mean[3],
                                    const double cov[9]) {
  return guarded_new([&]() -> otma_density* {
    if (!box || !mean || !cov)
      throw std::invalid_argument("otma_density_gaussian: null argument");
    return new otma_density{otma::Density::gaussian(to_box(box), to_vec3(mean), to_mat3(cov))};
  });
}

void otma_density_free(otma_density* density) { delete density; }

otma_structure* otma_structure_new(const otma_cost* cost, const otma_density* rho,
                                   const otma_density* rhobar) {
  return guarded_new([&]() -> otma_structure* {
    if (!cost || !rho || !rhobar)
      throw std::invalid_argument("otma_structure_new: null argument");
    return new otma_structure{otma::MAStructure{cost->impl, rho->impl, rhobar->impl}};
  });
}

void otma_structure_free(otma_structure* s) { delete s; }

otma_status otma_lr_metric(const otma_structure* s, const double x[3], const double xbar[3],
                           double out[36]) {
  if (auto st = require(s && x && xbar && out, "otma_lr_metric: null argument")) return st;
  return guarded([&]() {
    write_mat6(otma::lr_metric_at(s->impl, to_vec3(x), to_vec3(xbar)).matrix, out);
    return OTMA_OK;
  });
}

otma_status otma_kmw_metric(const otma_structure* s, const double x[3], const double xbar[3],
                            double out[36]) {
  if (auto st = require(s && x && xbar && out, "otma_kmw_metric: null argument")) return st;
  return guarded([&]() {
    write_mat6(otma::kmw_metric_at(s->impl.cost, s->impl.rho, s->impl.rhobar, to_vec3(x),
                                   to_vec3(xbar))
                   .matrix,
               out);
    return OTMA_OK;
  });
}

otma_status otma_conformal_defect(const otma_structure* s, const double x[3], const double xbar[3],
                                  double* factor, double* relative_defect) {
  if (auto st = require(s && x && xbar, "otma_conformal_defect: null argument")) return st;
  return guarded([&]() {
    const otma::ConformalReport r = otma::conformal_defect_at(s->impl, to_vec3(x), to_vec3(xbar));
    if (factor) *factor = r.conformal_factor;
    if (relative_defect) *relative_defect = r.relative_defect;
    return OTMA_OK;
  });
}

otma_status otma_effectiveness_defect(const otma_structure* s, const double x[3],
                                      const double xbar[3], double* defect) {
  if (auto st = require(s && x && xbar && defect, "otma_effectiveness_defect: null argument"))
    return st;
  return guarded([&]() {
    const otma::Vec3 px = to_vec3(x);
    const otma::Vec3 pb = to_vec3(xbar);
    *defect = otma::effectiveness_defect(otma::symplectic_form_at(s->impl, px, pb),
                                         otma::effective_form_at(s->impl, px, pb));
    return OTMA_OK;
  });
}

otma_status otma_metric_signature(const double m[36], double tol, int out[3]) {
  if (auto st = require(m && out, "otma_metric_signature: null argument")) return st;
  return guarded([&]() {
    otma::Mat6 mat;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) mat(i, j) = m[6 * i + j];
    const otma::Signature sig = otma::metric_signature(mat, tol);
    out[0] = sig.plus;
    out[1] = sig.minus;
    out[2] = sig.zero;
    return OTMA_OK;
  });
}

otma_status otma_sg_cost(const double x[3], const double bigx[3], double coriolis_f, double* out) {
  if (auto st = require(x && bigx && out, "otma_sg_cost: null argument")) return st;
  return guarded([&]() {
    *out = otma::sg_cost(to_vec3(x), to_vec3(bigx), coriolis_f);
    return OTMA_OK;
  });
}

otma_status otma_solve_assignment(int n, const double* cost, int* perm, double* u, double* ubar,
                                  double* primal, double* dual) {
  if (auto st = require(cost && n > 0, "otma_solve_assignment: need n > 0 and a cost matrix"))
    return st;
  return guarded([&]() {
    otma::DiscreteOTProblem problem;
    problem.cost = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                  Eigen::RowMajor>>(cost, n, n);
    problem.source_w = Eigen::VectorXd::Constant(n, 1.0 / n);
    problem.target_w = Eigen::VectorXd::Constant(n, 1.0 / n);
    const otma::AssignmentResult result = otma::solve_assignment(problem);
    if (perm)
      for (int i = 0; i < n; ++i) perm[i] = result.permutation[i];
    if (u)
      for (int i = 0; i < n; ++i) u[i] = result.potentials.u[i];
    if (ubar)
      for (int j = 0; j < n; ++j) ubar[j] = result.potentials.ubar[j];
    if (primal) *primal = result.primal;
    if (dual) *dual = result.dual;
    return OTMA_OK;
  });
}

otma_status otma_sinkhorn(int n, int m, const double* cost, const double* mu, const double* nu,
                          double epsilon, int max_iter, double tol, double* plan, double* u,
                          double* ubar, int* iterations, double* marginal_defect) {
  if (auto st = require(cost && mu && nu && n > 0 && m > 0, "otma_sinkhorn: bad inputs")) return st;
  return guarded([&]() {
    otma::DiscreteOTProblem problem;
    problem.cost = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                  Eigen::RowMajor>>(cost, n, m);
    problem.source_w = Eigen::Map<const Eigen::VectorXd>(mu, n);
    problem.target_w = Eigen::Map<const Eigen::VectorXd>(nu, m);
    const otma::SinkhornResult result = otma::sinkhorn(problem, epsilon, max_iter, tol);
    if (plan)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) plan[m * i + j] = result.plan.coupling(i, j);
    if (u)
      for (int i = 0; i < n; ++i) u[i] = result.potentials.u[i];
    if (ubar)
      for (int j = 0; j < m; ++j) ubar[j] = result.potentials.ubar[j];
    if (iterations) *iterations = result.iterations;
    if (marginal_defect) *marginal_defect = result.marginal_defect;
    return OTMA_OK;
  });
}

otma_status otma_run_json(const char* config_json, char** report_json, char** points_csv) {
  if (auto st = require(config_json && report_json, "otma_run_json: null argument")) return st;
  *report_json = nullptr;
  if (points_csv) *points_csv = nullptr;
  return guarded([&]() {
    const otma::RunResult result = otma::run_config_json(config_json);
    *report_json = dup_string(result.report_json);
    if (points_csv && !result.points_csv.empty()) *points_csv = dup_string(result.points_csv);
    if (!result.tolerance_pass) {
      set_error("run completed but a configured tolerance failed");
      return OTMA_ERR_TOLERANCE;
    }
    return OTMA_OK;
  });
}

void otma_string_free(char* s) { delete[] s; }

}  // extern "C"
