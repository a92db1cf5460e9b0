#include "otma/exterior.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace otma {

namespace {

// Basis bookkeeping: each basis covector set is a 6-bit mask (bit i set means
// index i+1 participates). Per degree, masks are stored in the lexicographic
// order of the corresponding increasing multi-index.
struct BasisTables {
  std::array<std::vector<unsigned>, 7> masks;
  std::array<int, 64> rank{};
  std::array<int, 64> deg{};

  BasisTables() {
    for (int k = 0; k <= 6; ++k) {
      gen(0, k, 0u, masks[k]);
      for (int r = 0; r < static_cast<int>(masks[k].size()); ++r) {
        rank[masks[k][r]] = r;
        deg[masks[k][r]] = k;
      }
    }
  }

  static void gen(int start, int remaining, unsigned mask, std::vector<unsigned>& out) {
    if (remaining == 0) {
      out.push_back(mask);
      return;
    }
    for (int i = start; i <= kAmbientDim - remaining; ++i) {
      gen(i + 1, remaining - 1, mask | (1u << i), out);
    }
  }
};

const BasisTables& tables() {
  static const BasisTables t;
  return t;
}

// Sign of the permutation sorting the concatenation (a-indices, b-indices);
// the masks must be disjoint.
int merge_sign(unsigned a, unsigned b) {
  int inversions = 0;
  for (unsigned m = a; m != 0; m &= m - 1) {
    const int i = std::countr_zero(m);
    inversions += std::popcount(b & ((1u << i) - 1u));
  }
  return (inversions % 2 == 0) ? 1 : -1;
}

}  // namespace

int basis_count(int degree) {
  if (degree < 0 || degree > kAmbientDim) throw std::invalid_argument("basis_count: degree out of range");
  return static_cast<int>(tables().masks[degree].size());
}

int basis_rank(std::initializer_list<int> indices) {
  unsigned mask = 0;
  int prev = 0;
  for (int i : indices) {
    if (i < 1 || i > kAmbientDim || i <= prev)
      throw std::invalid_argument("basis_rank: indices must be strictly increasing in 1..6");
    mask |= 1u << (i - 1);
    prev = i;
  }
  return tables().rank[mask];
}

AltForm::AltForm(int degree) : degree_(degree) {
  if (degree < 0 || degree > kAmbientDim) throw std::invalid_argument("AltForm: degree out of range");
  coeffs_.assign(basis_count(degree), 0.0);
}

AltForm AltForm::scalar(double value) {
  AltForm f(0);
  f[0] = value;
  return f;
}

AltForm AltForm::basis(std::initializer_list<int> indices, double coefficient) {
  AltForm f(static_cast<int>(indices.size()));
  f[basis_rank(indices)] = coefficient;
  return f;
}

double AltForm::max_abs() const {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

AltForm& AltForm::operator+=(const AltForm& other) {
  if (other.degree_ != degree_) throw std::invalid_argument("AltForm: degree mismatch");
  for (int i = 0; i < size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

AltForm& AltForm::operator-=(const AltForm& other) {
  if (other.degree_ != degree_) throw std::invalid_argument("AltForm: degree mismatch");
  for (int i = 0; i < size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

AltForm& AltForm::operator*=(double scale) {
  for (double& c : coeffs_) c *= scale;
  return *this;
}

AltForm wedge(const AltForm& a, const AltForm& b) {
  if (a.degree() + b.degree() > kAmbientDim)
    throw std::invalid_argument("wedge: degree overflow");
  const auto& t = tables();
  const auto& ma = t.masks[a.degree()];
  const auto& mb = t.masks[b.degree()];
  AltForm out(a.degree() + b.degree());
  for (int ia = 0; ia < static_cast<int>(ma.size()); ++ia) {
    const double ca = a[ia];
    if (ca == 0.0) continue;
    for (int ib = 0; ib < static_cast<int>(mb.size()); ++ib) {
      if ((ma[ia] & mb[ib]) != 0) continue;
      const double cb = b[ib];
      if (cb == 0.0) continue;
      out[t.rank[ma[ia] | mb[ib]]] += merge_sign(ma[ia], mb[ib]) * ca * cb;
    }
  }
  return out;
}

AltForm interior_product(const Vec6& v, const AltForm& a) {
  if (a.degree() == 0) throw std::invalid_argument("interior_product: degree-0 form");
  const auto& t = tables();
  const auto& masks = t.masks[a.degree()];
  AltForm out(a.degree() - 1);
  for (int i = 0; i < static_cast<int>(masks.size()); ++i) {
    const double c = a[i];
    if (c == 0.0) continue;
    int slot = 0;
    for (unsigned m = masks[i]; m != 0; m &= m - 1, ++slot) {
      const int p = std::countr_zero(m);
      const double sign = (slot % 2 == 0) ? 1.0 : -1.0;
      out[t.rank[masks[i] & ~(1u << p)]] += sign * v[p] * c;
    }
  }
  return out;
}

double evaluate(const AltForm& a, std::span<const Vec6> vectors) {
  const int k = a.degree();
  if (static_cast<int>(vectors.size()) != k)
    throw std::invalid_argument("evaluate: need exactly degree-many vectors");
  if (k == 0) return a[0];
  const auto& masks = tables().masks[k];
  Eigen::MatrixXd minor(k, k);
  double total = 0.0;
  for (int i = 0; i < static_cast<int>(masks.size()); ++i) {
    const double c = a[i];
    if (c == 0.0) continue;
    int row = 0;
    for (unsigned m = masks[i]; m != 0; m &= m - 1, ++row) {
      const int p = std::countr_zero(m);
      for (int col = 0; col < k; ++col) minor(row, col) = vectors[col][p];
    }
    total += c * minor.determinant();
  }
  return total;
}

double pullback_by_section(const AltForm& a, const GraphSection& section) {
  if (a.degree() != 3) throw std::invalid_argument("pullback_by_section: degree must be 3");
  std::array<Vec6, 3> tangents;
  for (int i = 0; i < 3; ++i) {
    Vec6 t = Vec6::Zero();
    t[i] = 1.0;
    t.tail<3>() = section.jacobian.col(i);
    tangents[i] = t;
  }
  return evaluate(a, tangents);
}

}  // namespace otma
