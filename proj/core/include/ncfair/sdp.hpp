#pragma once

// Block semidefinite programs over a real decision vector y:
//
//   minimize    c'y
//   subject to  C_j + sum_i y_i A_ij  is PSD   for every block j
//               A y = b
//
// and a primal-dual interior-point solver for them.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ncfair::sdp {

/// constant + sum of coeffs[i] * y_i. Zero coefficients are never stored.
struct AffineForm {
  double constant = 0.0;
  std::map<std::size_t, double> coeffs;

  void add(std::size_t var, double coeff);
  bool is_zero() const noexcept { return constant == 0.0 && coeffs.empty(); }
  double evaluate(const std::vector<double>& y) const;

  friend bool operator==(const AffineForm&, const AffineForm&) = default;
};

/// Symmetric matrix-valued affine map. Only the upper triangle (row <= col,
/// 0-based) is stored, so symmetry holds by construction.
struct SymmetricBlock {
  std::size_t dim = 0;
  std::map<std::pair<std::size_t, std::size_t>, AffineForm> entries;

  AffineForm& at(std::size_t row, std::size_t col);
  const AffineForm* find(std::size_t row, std::size_t col) const;
  /// Removes entries that became identically zero.
  void prune();

  friend bool operator==(const SymmetricBlock&, const SymmetricBlock&) = default;
};

struct LinearEquality {
  std::map<std::size_t, double> coeffs;
  double rhs = 0.0;

  friend bool operator==(const LinearEquality&, const LinearEquality&) = default;
};

struct SDPProblem {
  std::size_t num_vars = 0;
  std::vector<double> objective;  // length num_vars
  std::vector<SymmetricBlock> blocks;
  std::vector<LinearEquality> equalities;
  std::vector<std::string> variable_names;  // empty, or length num_vars

  /// Throws ValidationError on any dimension or index mismatch.
  void validate() const;
  /// Structural equality: everything except the variable labels.
  bool same_structure(const SDPProblem& other) const;

  friend bool operator==(const SDPProblem&, const SDPProblem&) = default;
};

/// Dense value of block `j` at the point `y`.
Eigen::MatrixXd evaluate_block(const SymmetricBlock& block, const std::vector<double>& y);

enum class Status { optimal, inaccurate, infeasible, unbounded, iteration_limit };

std::string_view to_string(Status s);

struct SolverConfig {
  double tolerance = 1e-6;
  int max_iterations = 50000;
  bool scaling = true;
  double step_fraction = 0.95;  // share of the distance to the cone boundary
};

struct SDPSolution {
  std::vector<double> values;
  double objective_value = 0.0;
  double dual_objective = 0.0;
  Status status = Status::iteration_limit;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  double wall_time = 0.0;  // seconds
};

/// Solves `prob`. Never throws for infeasible or unbounded problems; those
/// are reported through the status. Deterministic for identical inputs.
SDPSolution solve(const SDPProblem& prob, const SolverConfig& cfg = {});

}  // namespace ncfair::sdp
