#include "hybrid/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hybrid {

namespace {

constexpr double kPrune = 1e-15;

bool is_momentum(Generator g) { return (static_cast<int>(g) & 1) == 1; }

int mode_of(Generator g) { return static_cast<int>(g) / 2; }

Axis axis_of(Generator g) { return static_cast<Axis>(mode_of(g)); }

// Brings `word` into normal order, adding every produced term to `out`.
void normal_order(Word word, Complex coeff, std::map<Word, Complex>& out) {
  for (std::size_t k = 0; k + 1 < word.size(); ++k) {
    const Generator a = word[k];
    const Generator b = word[k + 1];
    if (static_cast<int>(a) <= static_cast<int>(b)) continue;
    Word swapped = word;
    std::swap(swapped[k], swapped[k + 1]);
    normal_order(std::move(swapped), coeff, out);
    if (mode_of(a) == mode_of(b) && is_momentum(a) && !is_momentum(b)) {
      // p q = q p - i hbar
      Word contracted;
      contracted.reserve(word.size() - 2);
      contracted.insert(contracted.end(), word.begin(), word.begin() + static_cast<long>(k));
      contracted.insert(contracted.end(), word.begin() + static_cast<long>(k) + 2, word.end());
      normal_order(std::move(contracted), coeff * Complex(0.0, -Constants::hbar), out);
    }
    return;
  }
  out[word] += coeff;
}

}  // namespace

const char* generator_name(Generator g) {
  switch (g) {
    case Generator::Q: return "q";
    case Generator::P: return "p";
    case Generator::QPrime: return "q'";
    case Generator::PPrime: return "p'";
    case Generator::X: return "x";
    case Generator::K: return "k";
  }
  return "?";
}

void QuantumOperator::accumulate(const Word& word, Complex coeff) {
  normal_order(word, coeff, terms_);
}

void QuantumOperator::prune() {
  std::erase_if(terms_, [](const auto& kv) { return std::abs(kv.second) < kPrune; });
}

QuantumOperator QuantumOperator::scalar(Complex c) {
  QuantumOperator op;
  op.terms_[Word{}] = c;
  op.prune();
  return op;
}

QuantumOperator QuantumOperator::generator(Generator g) {
  QuantumOperator op;
  op.terms_[Word{g}] = 1.0;
  return op;
}

QuantumOperator QuantumOperator::operator+(const QuantumOperator& rhs) const {
  QuantumOperator out = *this;
  for (const auto& [w, c] : rhs.terms_) out.terms_[w] += c;
  out.prune();
  return out;
}

QuantumOperator QuantumOperator::operator-(const QuantumOperator& rhs) const {
  return *this + rhs * Complex(-1.0);
}

QuantumOperator QuantumOperator::operator*(const QuantumOperator& rhs) const {
  QuantumOperator out;
  for (const auto& [wa, ca] : terms_) {
    for (const auto& [wb, cb] : rhs.terms_) {
      Word w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      out.accumulate(w, ca * cb);
    }
  }
  out.prune();
  return out;
}

QuantumOperator QuantumOperator::operator*(Complex c) const {
  QuantumOperator out = *this;
  for (auto& [w, coeff] : out.terms_) coeff *= c;
  out.prune();
  return out;
}

QuantumOperator QuantumOperator::adjoint() const {
  QuantumOperator out;
  for (const auto& [w, c] : terms_) {
    Word r(w.rbegin(), w.rend());
    out.accumulate(r, std::conj(c));
  }
  out.prune();
  return out;
}

QuantumOperator QuantumOperator::hermitian_part() const { return (*this + adjoint()) * 0.5; }

bool QuantumOperator::is_hermitian(double tol) const { return (*this - adjoint()).is_zero(tol); }

QuantumOperator QuantumOperator::commutator_over_ihbar(const QuantumOperator& rhs) const {
  return ((*this) * rhs - rhs * (*this)) * Complex(0.0, -1.0 / Constants::hbar);
}

bool QuantumOperator::is_zero(double tol) const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [tol](const auto& kv) { return std::abs(kv.second) <= tol; });
}

std::size_t QuantumOperator::max_word_length() const {
  std::size_t n = 0;
  for (const auto& [w, c] : terms_) n = std::max(n, w.size());
  return n;
}

bool QuantumOperator::touches(Generator g) const {
  for (const auto& [w, c] : terms_)
    if (std::find(w.begin(), w.end(), g) != w.end()) return true;
  return false;
}

std::string QuantumOperator::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [w, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.real();
    if (c.imag() != 0.0) os << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i";
    os << ")";
    for (Generator g : w) os << "*" << generator_name(g);
  }
  return os.str();
}

ComplexField QuantumOperator::apply(const ComplexField& psi, const GridSpec& grid) const {
  ComplexField result = ComplexField::Zero(psi.size());
  std::array<RealField, 3> coords;
  for (const auto& [w, c] : terms_) {
    ComplexField v = psi;
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
      const Axis axis = axis_of(*it);
      if (is_momentum(*it)) {
        v = spectral_derivative(v, axis, grid) * Complex(0.0, -Constants::hbar);
      } else {
        auto& x = coords[static_cast<int>(axis)];
        if (x.size() == 0) x = grid.coordinate_field(axis);
        v *= x;
      }
    }
    result += c * v;
  }
  return result;
}

}  // namespace hybrid
