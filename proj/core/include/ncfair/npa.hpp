#pragma once

// Moment relaxations (the NPA hierarchy) of non-commutative polynomial
// optimisation problems
//
//   minimize   <phi, p(X) phi>
//   subject to q_i(X) >= 0 (PSD),  e_j(X) = 0,
//
// turned into block SDPs over the real moments y_w = <phi, w(X) phi>.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ncfair/ncpoly.hpp"
#include "ncfair/sdp.hpp"

namespace ncfair {

struct NCPOPProblem {
  VariableSet vars;
  Polynomial objective;
  std::vector<Polynomial> inequalities;  // each q_i >= 0
  std::vector<Polynomial> equalities;    // each e_j == 0
  /// Adds C^2 - sum_i X_i^2 >= 0 at build time when set.
  std::optional<double> ball_radius;
};

/// Order k of the relaxation; moment matrices are indexed by words of
/// degree <= k.
struct RelaxationOrder {
  int k = 1;
  explicit RelaxationOrder(int order);
};

using LinearMomentForm = std::map<MomentIndex, double>;
using MomentValues = std::map<MomentIndex, double>;

/// Square matrix whose entries are linear forms in the moments.
class SymbolicMatrix {
 public:
  SymbolicMatrix(std::vector<Word> basis);

  std::size_t dim() const noexcept { return basis_.size(); }
  const std::vector<Word>& basis() const noexcept { return basis_; }
  const LinearMomentForm& operator()(std::size_t row, std::size_t col) const {
    return entries_[row * dim() + col];
  }
  LinearMomentForm& operator()(std::size_t row, std::size_t col) {
    return entries_[row * dim() + col];
  }
  bool is_symmetric() const;
  /// Every moment index that appears with a nonzero coefficient.
  std::vector<MomentIndex> support() const;

 private:
  std::vector<Word> basis_;
  std::vector<LinearMomentForm> entries_;
};

/// M_k(y)(v, w) = y_{v† w}.
SymbolicMatrix moment_matrix(const VariableSet& vars, int k);

/// M_{k-d}(q y)(v, w) = sum_u q_u y_{v† u w}, with d = ceil(deg(q) / 2).
/// `q` is symmetrised first, so the result is symmetric for any input.
SymbolicMatrix localizing_matrix(const Polynomial& q, const VariableSet& vars, int k,
                                 const std::string& label = "constraint");

/// An assembled relaxation: the SDP plus the moment behind each SDP variable.
struct Relaxation {
  sdp::SDPProblem sdp;
  VariableSet vars;
  int order = 1;
  std::vector<MomentIndex> moments;  // SDP variable i is moments[i]
  std::map<MomentIndex, std::size_t> index;
  std::size_t moment_matrix_dim = 0;

  /// Moment values read off an SDP solution vector.
  MomentValues moment_values(const std::vector<double>& y) const;
};

Relaxation assemble_sdp(const NCPOPProblem& prob, RelaxationOrder order);

/// Number of distinct moments of degree <= 2k over n hermitian variables:
/// sum_{j=0}^{2k} (n^j + n^ceil(j/2)) / 2.
std::size_t moment_count(std::size_t n_vars, RelaxationOrder order);

/// Rank-loop test rank(M_k) == rank(M_{k-1}) on numeric moments; singular
/// values below rank_tol * sigma_max count as zero.
bool flatness_check(const MomentValues& values, const VariableSet& vars, int k,
                    double rank_tol = 1e-6);

/// Numeric rank of M_k evaluated at `values`.
std::size_t moment_matrix_rank(const MomentValues& values, const VariableSet& vars, int k,
                               double rank_tol = 1e-6);

/// Degree-one moments y_{X_i}, keyed by variable name.
std::map<std::string, double> extract_first_order(const MomentValues& values,
                                                  const VariableSet& vars);

}  // namespace ncfair
