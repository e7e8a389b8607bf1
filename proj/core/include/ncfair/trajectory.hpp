#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace ncfair {

/// Identifies one observation Y_t^{(i,s)}.
struct ObservationKey {
  std::string subgroup;
  std::string trajectory;
  int period = 0;

  friend auto operator<=>(const ObservationKey&, const ObservationKey&) = default;
  friend bool operator==(const ObservationKey&, const ObservationKey&) = default;
};

/// Scalar observations of several trajectories per subgroup. Trajectories may
/// have different, non-contiguous period sets.
class TrajectorySet {
 public:
  using Map = std::map<ObservationKey, double>;

  /// Throws ValidationError on a duplicate key, a period < 1 or a non-finite
  /// value.
  void add(const std::string& subgroup, const std::string& trajectory, int period, double value);

  const Map& observations() const noexcept { return obs_; }
  std::size_t size() const noexcept { return obs_.size(); }
  bool empty() const noexcept { return obs_.empty(); }

  std::vector<std::string> subgroups() const;
  std::vector<std::string> trajectories(const std::string& subgroup) const;
  /// Observations of one trajectory, keyed by period.
  std::map<int, double> series(const std::string& subgroup, const std::string& trajectory) const;
  /// Union of all observed periods (T+ in the models), ascending.
  std::vector<int> horizon() const;
  double max_abs_value() const;

  friend bool operator==(const TrajectorySet&, const TrajectorySet&) = default;

 private:
  Map obs_;
};

}  // namespace ncfair
