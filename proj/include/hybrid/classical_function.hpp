#pragma once

#include <map>
#include <string>
#include <utility>

#include "hybrid/config_space.hpp"

namespace hybrid {

/// Real polynomial f(x, k) of total degree <= 4, where k stands for the
/// mediator momentum field d_x S. There is no way to express a dependence on
/// q or q' in this type: that is the classicality restriction.
class ClassicalPolynomial {
 public:
  static constexpr int kMaxDegree = 4;

  using Exponents = std::pair<int, int>;  // (power of x, power of k)

  ClassicalPolynomial() = default;
  /// Throws OutsideFamily if any term exceeds kMaxDegree.
  explicit ClassicalPolynomial(std::map<Exponents, double> coefficients);

  static ClassicalPolynomial constant(double c);
  static ClassicalPolynomial monomial(double c, int x_power, int k_power);
  static ClassicalPolynomial x() { return monomial(1.0, 1, 0); }
  static ClassicalPolynomial k() { return monomial(1.0, 0, 1); }

  ClassicalPolynomial operator+(const ClassicalPolynomial& rhs) const;
  ClassicalPolynomial operator-(const ClassicalPolynomial& rhs) const;
  ClassicalPolynomial operator*(const ClassicalPolynomial& rhs) const;
  ClassicalPolynomial operator*(double c) const;

  ClassicalPolynomial d_dx() const;
  ClassicalPolynomial d_dk() const;

  double evaluate(double x, double k) const;
  RealField evaluate(const RealField& x, const RealField& k) const;

  int degree() const;
  bool is_zero() const { return coefficients_.empty(); }
  /// Affine in (x, k) jointly.
  bool is_linear() const { return degree() <= 1; }
  const std::map<Exponents, double>& coefficients() const noexcept { return coefficients_; }
  std::string to_string() const;

  bool operator==(const ClassicalPolynomial& rhs) const { return coefficients_ == rhs.coefficients_; }

 private:
  void prune();

  std::map<Exponents, double> coefficients_;
};

/// {f, g}_P = df/dx dg/dk - df/dk dg/dx. Throws OutsideFamily when the
/// result leaves the degree-4 family.
ClassicalPolynomial classical_poisson_bracket(const ClassicalPolynomial& f,
                                              const ClassicalPolynomial& g);

}  // namespace hybrid
