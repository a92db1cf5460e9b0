#include "otma/semigeostrophic.hpp"

#include <cmath>
#include <stdexcept>

#include "otma/ma_structure.hpp"
#include "otma/sampling.hpp"
#include "otma/transport_geometry.hpp"

namespace otma {

double sg_cost(const Vec3& x, const Vec3& X, double coriolis_f) {
  const double dx = x[0] - X[0];
  const double dy = x[1] - X[1];
  return coriolis_f * coriolis_f * (0.5 * dx * dx + 0.5 * dy * dy - x[2] * X[2]);
}

double sg_energy(std::span<const WeightedParticle> particles, double coriolis_f) {
  double total_weight = 0.0;
  double energy = 0.0;
  for (const WeightedParticle& p : particles) {
    if (!(p.weight > 0.0)) throw std::invalid_argument("sg_energy: weights must be positive");
    total_weight += p.weight;
    energy += p.weight * sg_cost(p.x, p.X, coriolis_f);
  }
  if (std::abs(total_weight - 1.0) > 1e-9)
    throw std::invalid_argument("sg_energy: weights must sum to 1");
  return energy;
}

SGStructureReport verify_sg_structure(const SGConfig& config, int sample_count, std::uint64_t seed) {
  if (config.coriolis_f != 1.0)
    throw std::invalid_argument(
        "verify_sg_structure requires coriolis_f = 1: the canonical-coordinate statement and the "
        "closed-form metrics are stated for the prefactor-free cost, and the conformal relation "
        "does not survive rescaling the symplectic form by f^2");
  if (sample_count < 1) throw std::invalid_argument("verify_sg_structure: sample_count must be >= 1");

  const MAStructure structure{CostFunction::semigeostrophic(1.0), config.rho, config.rhobar};

  AltForm canonical(2);
  for (int i = 1; i <= 3; ++i) canonical[basis_rank({i, i + 3})] = 1.0;

  Mat6 swap = Mat6::Zero();
  swap.topRightCorner<3, 3>() = Mat3::Identity();
  swap.bottomLeftCorner<3, 3>() = Mat3::Identity();

  PointSampler sampler(seed);
  SGStructureReport report;
  report.sample_count = sample_count;
  constexpr double kMargin = 1e-3;
  for (int k = 0; k < sample_count; ++k) {
    const Vec3 x = sampler.in_box(config.rho.box(), kMargin);
    const Vec3 bigx = sampler.in_box(config.rhobar.box(), kMargin);

    const AltForm omega = symplectic_form_at(structure, x, bigx);
    report.max_canonical_defect =
        std::max(report.max_canonical_defect, (omega - canonical).max_abs());

    const ConformalReport conformal = conformal_defect_at(structure, x, bigx);
    report.max_conformal_defect = std::max(report.max_conformal_defect, conformal.relative_defect);

    const double rr = config.rho.value(x) * config.rhobar.value(bigx);
    report.max_lr_defect = std::max(
        report.max_lr_defect, (conformal.lr.matrix - rr * swap).cwiseAbs().maxCoeff());
    report.max_kmw_defect = std::max(
        report.max_kmw_defect, (conformal.kmw.matrix - std::cbrt(rr) * swap).cwiseAbs().maxCoeff());
  }
  return report;
}

}  // namespace otma
