#pragma once

// Forecast metrics and file formats.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ncfair/fairlds.hpp"
#include "ncfair/trajectory.hpp"

namespace ncfair::evalio {

using Forecasts = std::map<int, double>;

/// (1/|I|) sum_i (1/|T_i|) sum_t Y_t^{(i,s)}.
double subgroup_mean(const TrajectorySet& data, const std::string& subgroup);

/// sqrt( sum (Y - f_t)^2 / sum (Y - mean)^2 ) over the subgroup's observations.
/// Throws ValidationError for a missing forecast and DegenerateDenominatorError
/// when every observation equals the subgroup mean.
double nrmse(const TrajectorySet& data, const Forecasts& forecasts, const std::string& subgroup);

/// sum over all observations of (Y - f_t)^2.
double total_squared_loss(const TrajectorySet& data, const Forecasts& forecasts);
/// Per-subgroup weighted mean squared loss; the max of these is the
/// subgroup-fair objective.
std::map<std::string, double> subgroup_losses(const TrajectorySet& data, const Forecasts& forecasts);
/// Largest single squared loss; the instant-fair objective.
double max_instant_loss(const TrajectorySet& data, const Forecasts& forecasts);

struct NoiseEstimate {
  double V_hat = 0.0;
  Eigen::MatrixXd W_hat;
};

/// Unbiased sample (co)variances of nu_t = f_t - F'm_t and
/// omega_t = m_t - G m_{t-1} read off the report. Needs at least 2 periods.
NoiseEstimate estimate_noise_covariances(const fairlds::FairSolveReport& report,
                                         const TrajectorySet& data);

/// Sample variance with an (n - 1) denominator.
double sample_variance(std::span<const double> xs);

struct EvalReport {
  std::map<std::string, double> nrmse;
  std::map<std::string, double> means;
  double gap = 0.0;  // max - min nrmse over subgroups
  double total_loss = 0.0;
  double V_hat = 0.0;
  Eigen::MatrixXd W_hat;
};

EvalReport evaluate(const TrajectorySet& data, const fairlds::FairSolveReport& report);

/// Pure premium sum_{t=1}^{10} p_t (1+i)^{-t} / p0 of a ten-year annuity.
double annuity_premium(std::span<const double> survivors, double p0, double interest);

// Trajectory CSV: header "subgroup,trajectory,t,value", LF line endings,
// rows sorted by (subgroup, trajectory, t).
TrajectorySet read_trajectories_csv(std::istream& in);
void write_trajectories_csv(const TrajectorySet& data, std::ostream& out);
TrajectorySet load_trajectories_csv(const std::filesystem::path& path);
void save_trajectories_csv(const TrajectorySet& data, const std::filesystem::path& path);

// JSON reports with a fixed key order.
nlohmann::ordered_json to_json(const fairlds::FairSolveReport& report);
fairlds::FairSolveReport solve_report_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);

void write_json(const nlohmann::ordered_json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace ncfair::evalio
