#pragma once

// Non-commutative polynomials over hermitian operator variables.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ncfair {

using Letter = std::uint32_t;

/// Ordered set of named hermitian operator variables. Cheap to copy; copies
/// share the name table, and two sets compare equal iff their names match.
class VariableSet {
 public:
  VariableSet() = default;

  std::size_t size() const noexcept { return names_ ? names_->size() : 0; }
  bool empty() const noexcept { return size() == 0; }
  const std::string& name(Letter i) const { return names_->at(i); }
  std::span<const std::string> names() const noexcept {
    return names_ ? std::span<const std::string>(*names_)
                  : std::span<const std::string>();
  }
  bool hermitian() const noexcept { return true; }

  /// Index of `name`; throws ValidationError when absent.
  Letter index_of(std::string_view name) const;
  bool contains(std::string_view name) const noexcept;

  friend bool operator==(const VariableSet& a, const VariableSet& b) noexcept;

 private:
  friend VariableSet make_variables(std::vector<std::string> names);
  std::shared_ptr<const std::vector<std::string>> names_;
  std::shared_ptr<const std::map<std::string, Letter, std::less<>>> lookup_;
};

/// Validates and builds a variable set; the input order is the letter order.
VariableSet make_variables(std::vector<std::string> names);

/// A monomial: a finite sequence of letters. The empty word is the identity.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<Letter> letters) : letters_(std::move(letters)) {}
  Word(std::initializer_list<Letter> letters) : letters_(letters) {}

  static Word identity() { return {}; }

  std::size_t degree() const noexcept { return letters_.size(); }
  bool is_identity() const noexcept { return letters_.empty(); }
  std::span<const Letter> letters() const noexcept { return letters_; }
  Letter operator[](std::size_t i) const { return letters_[i]; }

  /// Graded order: shorter words first, ties broken lexicographically.
  friend std::strong_ordering operator<=>(const Word& a, const Word& b) {
    if (auto c = a.letters_.size() <=> b.letters_.size(); c != 0) return c;
    return a.letters_ <=> b.letters_;
  }
  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::vector<Letter> letters_;
};

Word word_mul(const Word& a, const Word& b);
/// Product a† b c, the shape every moment-matrix entry takes.
Word word_sandwich(const Word& a, const Word& b, const Word& c);
/// For hermitian letters the adjoint is the reversal.
Word word_adjoint(const Word& w);

/// Throws ValidationError if `w` uses a letter outside `vars`.
void check_word(const VariableSet& vars, const Word& w);

std::string to_string(const VariableSet& vars, const Word& w);

/// Representative of {w, w†}: the moment y_w of a real state equals y_{w†}.
struct MomentIndex {
  Word canonical;

  friend auto operator<=>(const MomentIndex&, const MomentIndex&) = default;
  friend bool operator==(const MomentIndex&, const MomentIndex&) = default;
};

MomentIndex canonicalize(const Word& w);

/// All words of degree <= max_degree in graded-lexicographic order.
std::vector<Word> enumerate_words(const VariableSet& vars, int max_degree);

/// Real linear combination of words over a fixed variable set.
class Polynomial {
 public:
  using Terms = std::map<Word, double>;

  Polynomial() = default;
  explicit Polynomial(VariableSet vars) : vars_(std::move(vars)) {}
  Polynomial(VariableSet vars, double constant);
  Polynomial(VariableSet vars, const Word& w, double coeff = 1.0);

  /// The single-letter polynomial for the named variable.
  static Polynomial variable(const VariableSet& vars, std::string_view name);

  const VariableSet& vars() const noexcept { return vars_; }
  const Terms& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  std::size_t degree() const noexcept;
  double coefficient(const Word& w) const;

  /// Adds `coeff * w`, dropping the term if it cancels to zero.
  void add_term(const Word& w, double coeff);

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double scalar);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator+(Polynomial a, double c);
  friend Polynomial operator+(double c, Polynomial a) { return std::move(a) + c; }
  friend Polynomial operator-(Polynomial a, double c) { return std::move(a) + (-c); }
  friend Polynomial operator-(double c, Polynomial a) { return -std::move(a) + c; }
  /// Non-commutative product: the words of `a` are prefixes.
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

  /// Evaluates with every variable replaced by a commuting real scalar.
  double evaluate_scalar(std::span<const double> values) const;

 private:
  void require_same_vars(const Polynomial& other) const;

  VariableSet vars_;
  Terms terms_;
};

std::string to_string(const Polynomial& p);

}  // namespace ncfair
