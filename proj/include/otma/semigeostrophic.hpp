#pragma once

#include <cstdint>
#include <span>

#include "otma/fields.hpp"
#include "otma/types.hpp"

namespace otma {

/// f-plane semigeostrophic configuration: Coriolis parameter and the two
/// probability densities, on physical positions x and geostrophic
/// coordinates X respectively.
struct SGConfig {
  double coriolis_f = 1.0;
  Density rho;
  Density rhobar;
};

/// Pointwise energy integrand f^2 [ (x-X)^2/2 + (y-Y)^2/2 - zZ ].
double sg_cost(const Vec3& x, const Vec3& X, double coriolis_f);

struct WeightedParticle {
  Vec3 x = Vec3::Zero();
  Vec3 X = Vec3::Zero();
  double weight = 0.0;
};

/// Discrete total energy: weighted sum of sg_cost over particles. Weights
/// must be positive and sum to 1.
double sg_energy(std::span<const WeightedParticle> particles, double coriolis_f);

struct SGStructureReport {
  double max_canonical_defect = 0.0;  // omega_c vs sum dx^i ^ dX^i
  double max_conformal_defect = 0.0;  // relative defect of the conformal relation
  double max_lr_defect = 0.0;         // LR matrix vs rho rhobar (0 I; I 0)
  double max_kmw_defect = 0.0;        // KMW matrix vs (rho rhobar)^{1/3} (0 I; I 0)
  int sample_count = 0;
};

/// Verify the canonical-coordinate statement and the conformal relation for
/// the semigeostrophic cost at seeded random interior point pairs. Requires
/// coriolis_f = 1: the closed forms are stated in the normalization without
/// the f^2 prefactor, and the relation does not survive rescaling omega_c
/// by f^2. Throws std::invalid_argument otherwise.
SGStructureReport verify_sg_structure(const SGConfig& config, int sample_count, std::uint64_t seed);

}  // namespace otma
