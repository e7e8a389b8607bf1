#pragma once

// Learning one subgroup-blind linear dynamical system
//
//   m_t = G m_{t-1} + omega_t,   f_t = F' m_t + nu_t,   t in T+
//
// from the trajectories of several subgroups, under a subgroup-fair,
// instant-fair or plain least-squares objective, through the moment
// relaxation of the resulting operator-valued problem.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ncfair/npa.hpp"
#include "ncfair/sdp.hpp"
#include "ncfair/trajectory.hpp"

namespace ncfair::fairlds {

enum class Mode { subgroup_fair, instant_fair, unfair };
enum class LossEncoding { squared, absolute };

std::string_view to_string(Mode m);
std::string_view to_string(LossEncoding e);
/// Accepts "subgroup_fair", "instant_fair", "unfair" (and dashed spellings).
Mode parse_mode(std::string_view s);
LossEncoding parse_loss_encoding(std::string_view s);

struct FairnessModelSpec {
  Mode mode = Mode::subgroup_fair;
  double lambda = 5.0;
  int hidden_dim = 1;
  LossEncoding loss = LossEncoding::squared;
  int relaxation_order = 1;
  /// Radius of the ball constraint; default_ball_radius(data) when unset.
  std::optional<double> ball_radius;

  /// Mode with its default multiplier: 5 (subgroup-fair), 1 (otherwise).
  static FairnessModelSpec defaults(Mode mode);
};

/// 10 * (1 + max |Y|).
double default_ball_radius(const TrajectorySet& data);

/// Names and positions of every operator variable of a model.
class OperatorLayout {
 public:
  OperatorLayout(std::vector<int> periods, int hidden_dim, bool has_z);

  const VariableSet& vars() const noexcept { return vars_; }
  const std::vector<int>& periods() const noexcept { return periods_; }
  int hidden_dim() const noexcept { return n_; }
  bool has_z() const noexcept { return has_z_; }

  /// Predecessor of t in {0} + T+.
  int previous(int t) const;

  std::string G(int row, int col) const;
  std::string F(int c) const;
  std::string m(int t, int c) const;
  std::string omega(int t, int c) const;
  std::string nu(int t) const;
  std::string f(int t) const;
  static std::string z() { return "z"; }

  /// n^2 + n + (|T+|+1) n + |T+| n + 2|T+| (+1 with z).
  static std::size_t expected_count(std::size_t periods, int hidden_dim, bool has_z);

  /// Adds auxiliary epigraph variables (absolute encoding) after the core ones.
  void add_auxiliary(std::vector<std::string> names);

 private:
  void rebuild();
  std::string comp(const std::string& base, int c) const;

  std::vector<int> periods_;
  int n_;
  bool has_z_;
  std::vector<std::string> aux_;
  VariableSet vars_;
};

struct FairModel {
  NCPOPProblem problem;
  OperatorLayout layout;
};

/// Throws ValidationError for empty data or an invalid spec.
FairModel build_model(const TrajectorySet& data, const FairnessModelSpec& spec);

struct SolverSummary {
  sdp::Status status = sdp::Status::iteration_limit;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  double wall_time = 0.0;
};

struct FairSolveReport {
  Mode mode = Mode::subgroup_fair;
  double lambda = 0.0;
  int relaxation_order = 1;
  std::map<int, double> forecasts;                      // f_t, t in T+
  std::map<int, std::vector<double>> state_estimates;   // m_t, t in {0} + T+
  std::map<int, double> nu_estimates;
  std::map<int, std::vector<double>> omega_estimates;
  Eigen::MatrixXd G_estimate;
  Eigen::VectorXd F_estimate;
  std::optional<double> z_value;  // absent for the unfair model
  double objective_value = 0.0;
  SolverSummary solver;
  std::optional<bool> flat;  // set when relaxation_order >= 2
  std::size_t operator_count = 0;
  std::size_t moment_count = 0;
  std::size_t sdp_dim = 0;  // moment matrix dimension

  bool optimal() const noexcept { return solver.status == sdp::Status::optimal; }
};

/// Builds, relaxes and solves. A non-optimal solver status is reported, not
/// thrown.
FairSolveReport solve_fair(const TrajectorySet& data, const FairnessModelSpec& spec,
                           const sdp::SolverConfig& cfg = {});

/// Rolls m <- G m, f = F'm forward `steps` times from the last state estimate.
std::vector<double> forecast_next(const FairSolveReport& report, int steps);

}  // namespace ncfair::fairlds
