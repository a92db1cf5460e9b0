#pragma once

#include <initializer_list>
#include <span>
#include <vector>

#include "otma/types.hpp"

namespace otma {

inline constexpr int kAmbientDim = 6;

/// Number of basis k-covectors on R^6, i.e. C(6, k).
int basis_count(int degree);

/// Rank of a strictly increasing multi-index (1-based entries in 1..6)
/// within the lexicographic basis of its degree.
int basis_rank(std::initializer_list<int> indices);

/// Alternating k-covector on R^6 with dense coefficients over the
/// lexicographic multi-index basis. Covectors 1..3 are the x-directions,
/// 4..6 the xbar-directions.
class AltForm {
 public:
  explicit AltForm(int degree);

  static AltForm scalar(double value);
  /// Basis k-form e_{i1} ^ ... ^ e_{ik} (indices strictly increasing, 1-based)
  /// scaled by `coefficient`.
  static AltForm basis(std::initializer_list<int> indices, double coefficient = 1.0);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(coeffs_.size()); }

  double operator[](int rank) const { return coeffs_[rank]; }
  double& operator[](int rank) { return coeffs_[rank]; }
  std::span<const double> coeffs() const { return coeffs_; }

  double max_abs() const;

  AltForm& operator+=(const AltForm& other);
  AltForm& operator-=(const AltForm& other);
  AltForm& operator*=(double scale);

  friend AltForm operator+(AltForm a, const AltForm& b) { return a += b; }
  friend AltForm operator-(AltForm a, const AltForm& b) { return a -= b; }
  friend AltForm operator*(double s, AltForm a) { return a *= s; }

 private:
  int degree_;
  std::vector<double> coeffs_;
};

/// Section x -> (x, T(x)) of the product, given pointwise by the map value
/// T(x) and its differential DT(x).
struct GraphSection {
  Vec3 map_value = Vec3::Zero();
  Mat3 jacobian = Mat3::Identity();
};

/// Alternating product. Throws std::invalid_argument on degree overflow.
AltForm wedge(const AltForm& a, const AltForm& b);

/// Interior product (contraction in the first slot). Degree drops by one;
/// throws std::invalid_argument for degree-0 input.
AltForm interior_product(const Vec6& v, const AltForm& a);

/// Evaluate a k-form on k tangent vectors.
double evaluate(const AltForm& a, std::span<const Vec6> vectors);

/// Coefficient of dx1^dx2^dx3 in the pullback of a degree-3 form along
/// x -> (x, T(x)). Throws std::invalid_argument for other degrees.
double pullback_by_section(const AltForm& a, const GraphSection& section);

}  // namespace otma
