#include "ncfair/trajectory.hpp"

#include <cmath>

#include "ncfair/error.hpp"

namespace ncfair {

void TrajectorySet::add(const std::string& subgroup, const std::string& trajectory, int period,
                        double value) {
  if (subgroup.empty() || trajectory.empty())
    throw ValidationError("subgroup and trajectory labels must be non-empty");
  if (period < 1) throw ValidationError("periods must be positive, got " + std::to_string(period));
  if (!std::isfinite(value)) throw ValidationError("observation values must be finite");
  if (!obs_.emplace(ObservationKey{subgroup, trajectory, period}, value).second)
    throw ValidationError("duplicate observation (" + subgroup + "," + trajectory + "," +
                          std::to_string(period) + ")");
}

std::vector<std::string> TrajectorySet::subgroups() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : obs_)
    if (out.empty() || out.back() != k.subgroup) out.push_back(k.subgroup);
  return out;
}

std::vector<std::string> TrajectorySet::trajectories(const std::string& subgroup) const {
  std::vector<std::string> out;
  for (auto it = obs_.lower_bound({subgroup, "", 0}); it != obs_.end() && it->first.subgroup == subgroup; ++it)
    if (out.empty() || out.back() != it->first.trajectory) out.push_back(it->first.trajectory);
  return out;
}

std::map<int, double> TrajectorySet::series(const std::string& subgroup,
                                            const std::string& trajectory) const {
  std::map<int, double> out;
  for (auto it = obs_.lower_bound({subgroup, trajectory, 0});
       it != obs_.end() && it->first.subgroup == subgroup && it->first.trajectory == trajectory; ++it)
    out.emplace(it->first.period, it->second);
  return out;
}

std::vector<int> TrajectorySet::horizon() const {
  std::set<int> periods;
  for (const auto& [k, v] : obs_) periods.insert(k.period);
  return {periods.begin(), periods.end()};
}

double TrajectorySet::max_abs_value() const {
  double m = 0.0;
  for (const auto& [k, v] : obs_) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace ncfair
