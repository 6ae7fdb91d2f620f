#include "hybrid/observable_parser.hpp"

#include <cctype>
#include <charconv>
#include <string>

namespace hybrid {

namespace {

// Recursive-descent parser generic over the algebra it builds into.
template <typename Algebra>
class Parser {
 public:
  Parser(std::string_view text, Algebra algebra) : text_(text), alg_(std::move(algebra)) {}

  auto parse() {
    auto value = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return value;
  }

 private:
  using Value = typename Algebra::Value;

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError,
                msg + " at column " + std::to_string(pos_) + " in \"" + std::string(text_) + "\"");
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Value expr() {
    Value v = term();
    for (;;) {
      if (accept('+')) v = alg_.add(v, term());
      else if (accept('-')) v = alg_.add(v, alg_.scale(term(), -1.0));
      else return v;
    }
  }

  Value term() {
    Value v = factor();
    while (accept('*')) v = alg_.mul(v, factor());
    return v;
  }

  Value factor() {
    if (accept('-')) return alg_.scale(factor(), -1.0);
    Value base = primary();
    if (accept('^')) {
      skip();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected integer exponent");
      int n = 0;
      std::from_chars(text_.data() + start, text_.data() + pos_, n);
      Value out = alg_.one();
      for (int i = 0; i < n; ++i) out = alg_.mul(out, base);
      return out;
    }
    return base;
  }

  Value primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Value v = expr();
      if (!accept(')')) fail("expected ')'");
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
              text_[pos_] == 'e' || text_[pos_] == 'E' ||
              ((text_[pos_] == '-' || text_[pos_] == '+') && pos_ > start &&
               (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
        ++pos_;
      double value = 0.0;
      auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
      if (res.ec != std::errc{} || res.ptr != text_.data() + pos_) fail("bad number");
      return alg_.scale(alg_.one(), value);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      ++pos_;
      std::string name(1, c);
      if (pos_ < text_.size() && text_[pos_] == '\'') {
        name += '\'';
        ++pos_;
      }
      return alg_.symbol(name);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Algebra alg_;
};

struct ClassicalAlgebra {
  using Value = ClassicalPolynomial;
  Value one() const { return ClassicalPolynomial::constant(1.0); }
  Value add(const Value& a, const Value& b) const { return a + b; }
  Value mul(const Value& a, const Value& b) const { return a * b; }
  Value scale(const Value& a, double c) const { return a * c; }
  Value symbol(const std::string& name) const {
    if (name == "x") return ClassicalPolynomial::x();
    if (name == "k") return ClassicalPolynomial::k();
    if (name == "q" || name == "q'" || name == "p" || name == "p'")
      throw Error(ErrorCode::SectorMixing,
                  "classical observables depend on x and k only; got '" + name + "'");
    throw Error(ErrorCode::ParseError, "unknown symbol '" + name + "'");
  }
};

struct QuantumAlgebra {
  using Value = QuantumOperator;
  Value one() const { return QuantumOperator::identity(); }
  Value add(const Value& a, const Value& b) const { return a + b; }
  Value mul(const Value& a, const Value& b) const { return a * b; }
  Value scale(const Value& a, double c) const { return a * Complex(c); }
  Value symbol(const std::string& name) const {
    if (name == "q") return QuantumOperator::generator(Generator::Q);
    if (name == "p") return QuantumOperator::generator(Generator::P);
    if (name == "q'") return QuantumOperator::generator(Generator::QPrime);
    if (name == "p'") return QuantumOperator::generator(Generator::PPrime);
    if (name == "x") return QuantumOperator::generator(Generator::X);
    if (name == "k") return QuantumOperator::generator(Generator::K);
    throw Error(ErrorCode::ParseError, "unknown symbol '" + name + "'");
  }
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

ClassicalPolynomial parse_classical(std::string_view text) {
  return Parser<ClassicalAlgebra>(text, ClassicalAlgebra{}).parse();
}

QuantumOperator parse_quantum(std::string_view text) {
  QuantumOperator op = Parser<QuantumAlgebra>(text, QuantumAlgebra{}).parse();
  if (op.max_word_length() > kMaxQuantumWordLength) {
    throw Error(ErrorCode::OutsideFamily,
                "operator words are limited to length " + std::to_string(kMaxQuantumWordLength) +
                    ": \"" + std::string(text) + "\"");
  }
  return op;
}

EnsembleObservable parse_observable(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorCode::ParseError, "observable needs a 'C:' or 'Q:' prefix: \"" +
                                           std::string(text) + "\"");
  const auto sector = trim(text.substr(0, colon));
  const auto body = text.substr(colon + 1);
  const std::string label(text);
  if (sector == "C") return EnsembleObservable::classical(parse_classical(body), label);
  if (sector == "Q") return EnsembleObservable::quantum(parse_quantum(body), label);
  throw Error(ErrorCode::ParseError, "unknown sector '" + std::string(sector) + "'");
}

}  // namespace hybrid
