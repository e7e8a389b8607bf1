#pragma once

// Ground-truth linear dynamical systems and under-representation bias.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ncfair/trajectory.hpp"

namespace ncfair::datagen {

/// phi_t = G phi_{t-1} + w_t,  Y_t = F' phi_t + v_t,  w ~ N(0, W), v ~ N(0, V).
struct SystemMatrices {
  Eigen::MatrixXd G;
  Eigen::VectorXd F;
  double V = 0.0;
  Eigen::MatrixXd W;
  Eigen::VectorXd m0;
};

/// Observations Y_1..Y_T. Throws ValidationError if W is not symmetric PSD,
/// V < 0, dimensions disagree or T < 1.
std::vector<double> simulate_lds(const SystemMatrices& sys, int T, std::uint64_t seed);

struct BiasConfig {
  std::map<std::string, double> beta;  // retention probability per subgroup
  std::uint64_t seed = 0;
  bool guard = true;
};

/// Keeps each observation of subgroup s independently with probability
/// beta[s]. With the guard on, a (subgroup, period) pair that lost all of its
/// observations gets one of them back, chosen uniformly.
TrajectorySet apply_bias(const TrajectorySet& full, const BiasConfig& cfg);

inline const std::string kAdvantaged = "advantaged";
inline const std::string kDisadvantaged = "disadvantaged";

/// The two-subgroup benchmark: shared G = [[0.99, 0], [1.0, 0.2]],
/// F = [1.1, 0.8]; per-subgroup V ~ U[0,1), W = diag(u1, u2) with u ~ U[0,0.1);
/// initial states [5,5] (advantaged, 3 trajectories) and [7,7] (disadvantaged, 2).
TrajectorySet generate_paper_dataset(std::uint64_t seed, int horizon = 20);

/// System matrices used by generate_paper_dataset for `subgroup` and `seed`.
SystemMatrices paper_system(std::uint64_t seed, const std::string& subgroup);

/// Drops trajectories of `subgroup` beyond the first `count` (label order).
TrajectorySet keep_trajectories(const TrajectorySet& data, const std::string& subgroup,
                                std::size_t count);

}  // namespace ncfair::datagen
