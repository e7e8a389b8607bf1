#include "ncfair/npa.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/Dense>

#include "ncfair/error.hpp"

namespace ncfair {
namespace {

int half_degree(std::size_t deg) { return static_cast<int>((deg + 1) / 2); }

/// (q + q†) / 2, so that localizing matrices come out symmetric.
Polynomial hermitian_part(const Polynomial& q) {
  Polynomial out(q.vars());
  for (const auto& [w, c] : q.terms()) {
    out.add_term(w, 0.5 * c);
    out.add_term(word_adjoint(w), 0.5 * c);
  }
  return out;
}

void add_to(LinearMomentForm& form, const MomentIndex& idx, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = form.try_emplace(idx, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) form.erase(it);
  }
}

Eigen::MatrixXd numeric_moment_matrix(const MomentValues& values, const VariableSet& vars, int k) {
  const auto basis = enumerate_words(vars, k);
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const auto idx = canonicalize(word_sandwich(basis[i], Word{}, basis[j]));
      auto it = values.find(idx);
      if (it == values.end())
        throw ValidationError("missing moment y_" + to_string(vars, idx.canonical));
      m(i, j) = m(j, i) = it->second;
    }
  return m;
}

std::size_t numeric_rank(const Eigen::MatrixXd& m, double rank_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rank_tol * s(0)) ++rank;
  return rank;
}

}  // namespace

RelaxationOrder::RelaxationOrder(int order) : k(order) {
  if (order < 1) throw ValidationError("relaxation order must be at least 1");
}

SymbolicMatrix::SymbolicMatrix(std::vector<Word> basis)
    : basis_(std::move(basis)), entries_(basis_.size() * basis_.size()) {}

bool SymbolicMatrix::is_symmetric() const {
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = i + 1; j < dim(); ++j)
      if ((*this)(i, j) != (*this)(j, i)) return false;
  return true;
}

std::vector<MomentIndex> SymbolicMatrix::support() const {
  std::vector<MomentIndex> out;
  for (const auto& form : entries_)
    for (const auto& [idx, c] : form) out.push_back(idx);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SymbolicMatrix moment_matrix(const VariableSet& vars, int k) {
  if (k < 1) throw ValidationError("moment matrix order must be at least 1");
  SymbolicMatrix m(enumerate_words(vars, k));
  const Word one;
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = i; j < m.dim(); ++j) {
      const auto idx = canonicalize(word_sandwich(m.basis()[i], one, m.basis()[j]));
      m(i, j)[idx] = 1.0;
      if (i != j) m(j, i)[idx] = 1.0;
    }
  return m;
}

SymbolicMatrix localizing_matrix(const Polynomial& q, const VariableSet& vars, int k,
                                 const std::string& label) {
  if (!(q.vars() == vars)) throw ValidationError(label + " is over a different variable set");
  const int sub = k - half_degree(q.degree());
  if (sub < 0)
    throw ValidationError(label + " has degree " + std::to_string(q.degree()) +
                          ", too high for relaxation order " + std::to_string(k));
  const Polynomial h = hermitian_part(q);
  SymbolicMatrix m(enumerate_words(vars, sub));
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = i; j < m.dim(); ++j) {
      LinearMomentForm form;
      for (const auto& [u, c] : h.terms())
        add_to(form, canonicalize(word_sandwich(m.basis()[i], u, m.basis()[j])), c);
      m(i, j) = form;
      if (i != j) m(j, i) = std::move(form);
    }
  return m;
}

MomentValues Relaxation::moment_values(const std::vector<double>& y) const {
  if (y.size() != moments.size()) throw ValidationError("solution length does not match relaxation");
  MomentValues out;
  for (std::size_t i = 0; i < moments.size(); ++i) out.emplace(moments[i], y[i]);
  return out;
}

Relaxation assemble_sdp(const NCPOPProblem& prob, RelaxationOrder order) {
  const int k = order.k;
  const auto& vars = prob.vars;
  if (vars.empty()) throw ValidationError("problem has no variables");
  if (prob.objective.is_zero()) throw ValidationError("objective is empty");
  if (!(prob.objective.vars() == vars)) throw ValidationError("objective is over a different variable set");
  auto check_degree = [&](const Polynomial& p, const std::string& label) {
    if (p.degree() > static_cast<std::size_t>(2 * k))
      throw ValidationError(label + " has degree " + std::to_string(p.degree()) +
                            ", above 2k = " + std::to_string(2 * k));
  };
  check_degree(prob.objective, "objective");

  std::vector<SymbolicMatrix> psd;
  psd.push_back(moment_matrix(vars, k));
  for (std::size_t i = 0; i < prob.inequalities.size(); ++i) {
    const std::string label = "inequality #" + std::to_string(i);
    check_degree(prob.inequalities[i], label);
    psd.push_back(localizing_matrix(prob.inequalities[i], vars, k, label));
  }
  if (prob.ball_radius) {
    if (!(*prob.ball_radius > 0)) throw ValidationError("ball radius must be positive");
    Polynomial ball(vars, (*prob.ball_radius) * (*prob.ball_radius));
    for (Letter l = 0; l < vars.size(); ++l) ball.add_term(Word{l, l}, -1.0);
    psd.push_back(localizing_matrix(ball, vars, k, "ball constraint"));
  }

  // Localised equalities: sum_u e_u y_{v† u w} = 0 for |v|, |w| <= k - d.
  std::vector<LinearMomentForm> eq_rows;
  for (std::size_t j = 0; j < prob.equalities.size(); ++j) {
    const auto& e = prob.equalities[j];
    const std::string label = "equality #" + std::to_string(j);
    if (!(e.vars() == vars)) throw ValidationError(label + " is over a different variable set");
    check_degree(e, label);
    const int sub = k - half_degree(e.degree());
    const auto basis = enumerate_words(vars, sub);
    for (const auto& v : basis)
      for (const auto& w : basis) {
        LinearMomentForm form;
        for (const auto& [u, c] : e.terms()) add_to(form, canonicalize(word_sandwich(v, u, w)), c);
        if (!form.empty()) eq_rows.push_back(std::move(form));
      }
  }
  std::sort(eq_rows.begin(), eq_rows.end());
  eq_rows.erase(std::unique(eq_rows.begin(), eq_rows.end()), eq_rows.end());

  Relaxation rel;
  rel.vars = vars;
  rel.order = k;
  rel.moment_matrix_dim = psd.front().dim();
  // Every word of degree <= 2k already occurs in M_k, so its support is the
  // full variable list, in graded-lex order with y_1 first.
  rel.moments = psd.front().support();
  for (std::size_t i = 0; i < rel.moments.size(); ++i) rel.index.emplace(rel.moments[i], i);
  auto var_of = [&](const MomentIndex& idx) {
    auto it = rel.index.find(idx);
    if (it == rel.index.end())
      throw ValidationError("moment y_" + to_string(vars, idx.canonical) + " exceeds degree 2k");
    return it->second;
  };

  auto& sdp = rel.sdp;
  sdp.num_vars = rel.moments.size();
  sdp.objective.assign(sdp.num_vars, 0.0);
  for (const auto& [w, c] : prob.objective.terms()) sdp.objective[var_of(canonicalize(w))] += c;
  for (const auto& idx : rel.moments) sdp.variable_names.push_back(to_string(vars, idx.canonical));

  for (const auto& m : psd) {
    sdp::SymmetricBlock blk;
    blk.dim = m.dim();
    for (std::size_t i = 0; i < m.dim(); ++i)
      for (std::size_t j = i; j < m.dim(); ++j) {
        const auto& form = m(i, j);
        if (form.empty()) continue;
        auto& entry = blk.at(i, j);
        for (const auto& [idx, c] : form) entry.add(var_of(idx), c);
      }
    blk.prune();
    sdp.blocks.push_back(std::move(blk));
  }

  sdp::LinearEquality normalisation;
  normalisation.coeffs[0] = 1.0;
  normalisation.rhs = 1.0;
  sdp.equalities.push_back(normalisation);
  for (const auto& row : eq_rows) {
    sdp::LinearEquality eq;
    for (const auto& [idx, c] : row) eq.coeffs[var_of(idx)] += c;
    std::erase_if(eq.coeffs, [](const auto& kv) { return kv.second == 0.0; });
    // The identity moment is a variable pinned to one, so constants stay on
    // the left-hand side and every right-hand side is zero.
    if (!eq.coeffs.empty()) sdp.equalities.push_back(std::move(eq));
  }
  return rel;
}

std::size_t moment_count(std::size_t n_vars, RelaxationOrder order) {
  if (n_vars < 1) throw ValidationError("need at least one variable");
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  auto power = [&](int e) {
    std::size_t p = 1;
    for (int i = 0; i < e; ++i) {
      if (p > kMax / n_vars) throw ValidationError("moment count overflows");
      p *= n_vars;
    }
    return p;
  };
  std::size_t total = 0;
  for (int j = 0; j <= 2 * order.k; ++j) total += (power(j) + power((j + 1) / 2)) / 2;
  return total;
}

std::size_t moment_matrix_rank(const MomentValues& values, const VariableSet& vars, int k,
                               double rank_tol) {
  return numeric_rank(numeric_moment_matrix(values, vars, k), rank_tol);
}

bool flatness_check(const MomentValues& values, const VariableSet& vars, int k, double rank_tol) {
  if (k < 2) throw ValidationError("flatness needs order k >= 2");
  if (!(rank_tol > 0)) throw ValidationError("rank tolerance must be positive");
  const auto big = numeric_moment_matrix(values, vars, k);
  const auto small = big.topLeftCorner(static_cast<Eigen::Index>(enumerate_words(vars, k - 1).size()),
                                       static_cast<Eigen::Index>(enumerate_words(vars, k - 1).size()));
  return numeric_rank(big, rank_tol) == numeric_rank(small, rank_tol);
}

std::map<std::string, double> extract_first_order(const MomentValues& values,
                                                  const VariableSet& vars) {
  std::map<std::string, double> out;
  for (Letter l = 0; l < vars.size(); ++l) {
    auto it = values.find(canonicalize(Word{l}));
    if (it == values.end()) throw ValidationError("missing first-order moment y_" + vars.name(l));
    out.emplace(vars.name(l), it->second);
  }
  return out;
}

}  // namespace ncfair
