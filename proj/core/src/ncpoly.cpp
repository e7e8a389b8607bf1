#include "ncfair/ncpoly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ncfair/error.hpp"

namespace ncfair {

VariableSet make_variables(std::vector<std::string> names) {
  if (names.empty()) throw ValidationError("variable set must not be empty");
  auto lookup = std::make_shared<std::map<std::string, Letter, std::less<>>>();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) throw ValidationError("variable name must not be empty");
    if (!lookup->emplace(names[i], static_cast<Letter>(i)).second)
      throw ValidationError("duplicate variable name '" + names[i] + "'");
  }
  VariableSet vars;
  vars.names_ = std::make_shared<const std::vector<std::string>>(std::move(names));
  vars.lookup_ = std::move(lookup);
  return vars;
}

Letter VariableSet::index_of(std::string_view name) const {
  if (lookup_) {
    if (auto it = lookup_->find(name); it != lookup_->end()) return it->second;
  }
  throw ValidationError("unknown variable '" + std::string(name) + "'");
}

bool VariableSet::contains(std::string_view name) const noexcept {
  return lookup_ && lookup_->find(name) != lookup_->end();
}

bool operator==(const VariableSet& a, const VariableSet& b) noexcept {
  if (a.names_ == b.names_) return true;
  if (!a.names_ || !b.names_) return false;
  return *a.names_ == *b.names_;
}

Word word_mul(const Word& a, const Word& b) {
  std::vector<Letter> out;
  out.reserve(a.degree() + b.degree());
  out.insert(out.end(), a.letters().begin(), a.letters().end());
  out.insert(out.end(), b.letters().begin(), b.letters().end());
  return Word(std::move(out));
}

Word word_sandwich(const Word& a, const Word& b, const Word& c) {
  std::vector<Letter> out;
  out.reserve(a.degree() + b.degree() + c.degree());
  out.insert(out.end(), a.letters().rbegin(), a.letters().rend());
  out.insert(out.end(), b.letters().begin(), b.letters().end());
  out.insert(out.end(), c.letters().begin(), c.letters().end());
  return Word(std::move(out));
}

Word word_adjoint(const Word& w) {
  return Word(std::vector<Letter>(w.letters().rbegin(), w.letters().rend()));
}

void check_word(const VariableSet& vars, const Word& w) {
  for (Letter l : w.letters()) {
    if (l >= vars.size())
      throw ValidationError("word uses letter " + std::to_string(l) +
                            " outside a set of " + std::to_string(vars.size()) +
                            " variables");
  }
}

std::string to_string(const VariableSet& vars, const Word& w) {
  if (w.is_identity()) return "1";
  std::string out;
  for (std::size_t i = 0; i < w.degree(); ++i) {
    if (i) out += '*';
    out += vars.name(w[i]);
  }
  return out;
}

MomentIndex canonicalize(const Word& w) {
  auto letters = w.letters();
  // Same length, so plain lexicographic comparison against the reversal.
  const bool reversed_smaller = std::lexicographical_compare(
      letters.rbegin(), letters.rend(), letters.begin(), letters.end());
  return {reversed_smaller ? word_adjoint(w) : w};
}

std::vector<Word> enumerate_words(const VariableSet& vars, int max_degree) {
  if (max_degree < 0) throw ValidationError("max_degree must be non-negative");
  const std::size_t n = vars.size();
  std::vector<Word> out{Word::identity()};
  std::size_t level_begin = 0;
  for (int d = 1; d <= max_degree; ++d) {
    const std::size_t level_end = out.size();
    // Extending each word of the previous level in order keeps lex order.
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (Letter l = 0; l < n; ++l) {
        std::vector<Letter> letters(out[i].letters().begin(), out[i].letters().end());
        letters.push_back(l);
        out.emplace_back(std::move(letters));
      }
    }
    level_begin = level_end;
  }
  return out;
}

Polynomial::Polynomial(VariableSet vars, double constant) : vars_(std::move(vars)) {
  add_term(Word::identity(), constant);
}

Polynomial::Polynomial(VariableSet vars, const Word& w, double coeff)
    : vars_(std::move(vars)) {
  check_word(vars_, w);
  add_term(w, coeff);
}

Polynomial Polynomial::variable(const VariableSet& vars, std::string_view name) {
  return Polynomial(vars, Word{vars.index_of(name)});
}

std::size_t Polynomial::degree() const noexcept {
  std::size_t d = 0;
  for (const auto& [w, c] : terms_) d = std::max(d, w.degree());
  return d;
}

double Polynomial::coefficient(const Word& w) const {
  auto it = terms_.find(w);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const Word& w, double coeff) {
  if (coeff == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(w, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void Polynomial::require_same_vars(const Polynomial& other) const {
  if (!(vars_ == other.vars_))
    throw ValidationError("polynomials are over different variable sets");
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  require_same_vars(other);
  for (const auto& [w, c] : other.terms_) add_term(w, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  require_same_vars(other);
  for (const auto& [w, c] : other.terms_) add_term(w, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double scalar) {
  if (scalar == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [w, c] : terms_) c *= scalar;
  return *this;
}

Polynomial operator+(Polynomial a, double c) {
  a.add_term(Word::identity(), c);
  return a;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  a.require_same_vars(b);
  Polynomial out(a.vars_);
  for (const auto& [wa, ca] : a.terms_)
    for (const auto& [wb, cb] : b.terms_) out.add_term(word_mul(wa, wb), ca * cb);
  return out;
}

double Polynomial::evaluate_scalar(std::span<const double> values) const {
  if (values.size() != vars_.size())
    throw ValidationError("expected " + std::to_string(vars_.size()) + " values");
  double total = 0.0;
  for (const auto& [w, c] : terms_) {
    double term = c;
    for (Letter l : w.letters()) term *= values[l];
    total += term;
  }
  return total;
}

std::string to_string(const Polynomial& p) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [w, c] : p.terms()) {
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << '-';
    first = false;
    const double mag = std::abs(c);
    if (w.is_identity()) {
      os << mag;
    } else {
      if (mag != 1.0) os << mag << '*';
      os << to_string(p.vars(), w);
    }
  }
  return os.str();
}

}  // namespace ncfair
