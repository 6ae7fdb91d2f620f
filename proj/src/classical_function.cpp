#include "hybrid/classical_function.hpp"

#include <cmath>
#include <sstream>

namespace hybrid {

namespace {

void check_degree(int xp, int kp) {
  if (xp < 0 || kp < 0 || xp + kp > ClassicalPolynomial::kMaxDegree) {
    std::ostringstream os;
    os << "term x^" << xp << " k^" << kp << " is outside the degree-"
       << ClassicalPolynomial::kMaxDegree << " polynomial family";
    throw Error(ErrorCode::OutsideFamily, os.str());
  }
}

}  // namespace

ClassicalPolynomial::ClassicalPolynomial(std::map<Exponents, double> coefficients)
    : coefficients_(std::move(coefficients)) {
  prune();
  for (const auto& [e, c] : coefficients_) check_degree(e.first, e.second);
}

void ClassicalPolynomial::prune() {
  std::erase_if(coefficients_, [](const auto& kv) { return kv.second == 0.0; });
}

ClassicalPolynomial ClassicalPolynomial::constant(double c) { return monomial(c, 0, 0); }

ClassicalPolynomial ClassicalPolynomial::monomial(double c, int x_power, int k_power) {
  return ClassicalPolynomial({{{x_power, k_power}, c}});
}

ClassicalPolynomial ClassicalPolynomial::operator+(const ClassicalPolynomial& rhs) const {
  auto out = coefficients_;
  for (const auto& [e, c] : rhs.coefficients_) out[e] += c;
  return ClassicalPolynomial(std::move(out));
}

ClassicalPolynomial ClassicalPolynomial::operator-(const ClassicalPolynomial& rhs) const {
  return *this + rhs * -1.0;
}

ClassicalPolynomial ClassicalPolynomial::operator*(const ClassicalPolynomial& rhs) const {
  std::map<Exponents, double> out;
  for (const auto& [ea, ca] : coefficients_)
    for (const auto& [eb, cb] : rhs.coefficients_)
      out[{ea.first + eb.first, ea.second + eb.second}] += ca * cb;
  return ClassicalPolynomial(std::move(out));
}

ClassicalPolynomial ClassicalPolynomial::operator*(double c) const {
  auto out = coefficients_;
  for (auto& [e, coeff] : out) coeff *= c;
  return ClassicalPolynomial(std::move(out));
}

ClassicalPolynomial ClassicalPolynomial::d_dx() const {
  std::map<Exponents, double> out;
  for (const auto& [e, c] : coefficients_)
    if (e.first > 0) out[{e.first - 1, e.second}] += c * e.first;
  return ClassicalPolynomial(std::move(out));
}

ClassicalPolynomial ClassicalPolynomial::d_dk() const {
  std::map<Exponents, double> out;
  for (const auto& [e, c] : coefficients_)
    if (e.second > 0) out[{e.first, e.second - 1}] += c * e.second;
  return ClassicalPolynomial(std::move(out));
}

double ClassicalPolynomial::evaluate(double x, double k) const {
  double total = 0.0;
  for (const auto& [e, c] : coefficients_) total += c * std::pow(x, e.first) * std::pow(k, e.second);
  return total;
}

RealField ClassicalPolynomial::evaluate(const RealField& x, const RealField& k) const {
  if (x.size() != k.size()) throw Error(ErrorCode::ShapeMismatch, "x and k fields differ in size");
  RealField out = RealField::Zero(x.size());
  for (const auto& [e, c] : coefficients_) out += c * x.pow(e.first) * k.pow(e.second);
  return out;
}

int ClassicalPolynomial::degree() const {
  int d = 0;
  for (const auto& [e, c] : coefficients_) d = std::max(d, e.first + e.second);
  return d;
}

std::string ClassicalPolynomial::to_string() const {
  if (coefficients_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : coefficients_) {
    if (!first) os << " + ";
    first = false;
    os << c;
    if (e.first) os << "*x^" << e.first;
    if (e.second) os << "*k^" << e.second;
  }
  return os.str();
}

ClassicalPolynomial classical_poisson_bracket(const ClassicalPolynomial& f,
                                              const ClassicalPolynomial& g) {
  // Build term by term so an out-of-family product is reported, not truncated.
  std::map<ClassicalPolynomial::Exponents, double> out;
  auto add_product = [&](const ClassicalPolynomial& a, const ClassicalPolynomial& b, double sign) {
    for (const auto& [ea, ca] : a.coefficients())
      for (const auto& [eb, cb] : b.coefficients())
        out[{ea.first + eb.first, ea.second + eb.second}] += sign * ca * cb;
  };
  add_product(f.d_dx(), g.d_dk(), 1.0);
  add_product(f.d_dk(), g.d_dx(), -1.0);
  return ClassicalPolynomial(std::move(out));
}

}  // namespace hybrid
