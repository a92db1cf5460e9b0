#include "otma/ma_structure.hpp"

#include <array>
#include <cmath>

#include "otma/transport_geometry.hpp"

namespace otma {

AltForm symplectic_form_at(const MAStructure& s, const Vec3& x, const Vec3& xbar) {
  const Mat3 b = s.cost.mixed_hessian(x, xbar);
  if (std::abs(b.determinant()) <= 1e-12)
    throw DegenerateStructureError("symplectic form degenerates: singular mixed Hessian", x, xbar);
  AltForm omega(2);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      omega[basis_rank({i + 1, j + 4})] = -b(i, j);
    }
  }
  return omega;
}

AltForm effective_form_at(const MAStructure& s, const Vec3& x, const Vec3& xbar) {
  AltForm alpha(3);
  alpha[basis_rank({4, 5, 6})] = s.rhobar.value(xbar);
  alpha[basis_rank({1, 2, 3})] = -s.rho.value(x);
  return alpha;
}

double effectiveness_defect(const AltForm& omega, const AltForm& alpha) {
  return wedge(omega, alpha).max_abs();
}

MetricAtPoint lr_metric_at(const MAStructure& s, const Vec3& x, const Vec3& xbar) {
  const AltForm omega = symplectic_form_at(s, x, xbar);
  const AltForm alpha = effective_form_at(s, x, xbar);
  const AltForm vol6 = wedge(wedge(omega, omega), omega);
  const double vol = vol6[0] / 6.0;
  if (std::abs(vol) <= 1e-12)
    throw DegenerateStructureError("degenerate symplectic form: vanishing top power", x, xbar);

  std::array<AltForm, 6> contractions{AltForm(2), AltForm(2), AltForm(2),
                                      AltForm(2), AltForm(2), AltForm(2)};
  for (int i = 0; i < 6; ++i) {
    Vec6 e = Vec6::Zero();
    e[i] = 1.0;
    contractions[i] = interior_product(e, alpha);
  }

  MetricAtPoint m;
  m.x = x;
  m.xbar = xbar;
  for (int i = 0; i < 6; ++i) {
    for (int j = i; j < 6; ++j) {
      const double g = wedge(wedge(contractions[i], contractions[j]), omega)[0] / vol;
      m.matrix(i, j) = g;
      m.matrix(j, i) = g;
    }
  }
  return m;
}

double ma_residual_at(const MAStructure& s, const ScalarField& u, const Vec3& x,
                      ResidualInfo* info) {
  const GraphSection section = transport_map_from_potential(s.cost, u, x);
  const AltForm alpha = effective_form_at(s, x, section.map_value);
  if (info) {
    info->map_point = section.map_value;
    info->map_jacobian = section.jacobian;
    info->out_of_support = !s.rhobar.contains(section.map_value);
  }
  return pullback_by_section(alpha, section);
}

}  // namespace otma
