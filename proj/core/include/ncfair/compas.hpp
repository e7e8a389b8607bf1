#pragma once

// Trajectories of recidivism scores from a COMPAS-style CSV: rows are
// filtered, split by (race, recharge degree), and binned by days until
// re-arrest into fixed-length periods whose observation is the mean score.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "ncfair/trajectory.hpp"

namespace ncfair::compas {

struct CompasFilter {
  std::set<std::string> races{"African-American", "Caucasian"};
  std::string sex = "Male";
  int age_lo = 25;
  int age_hi = 45;
  int max_priors = 1;  // priors_count <= max_priors
  std::string charge_degree = "M";
  std::set<std::string> recharge_degrees{"(M1)", "(M2)"};
  int period_days = 20;
};

/// CSV column names for each field; defaults follow the public two-year file.
struct ColumnMap {
  std::string race = "race";
  std::string sex = "sex";
  std::string age = "age";
  std::string priors = "priors_count";
  std::string charge_degree = "c_charge_degree";
  std::string recidivism = "two_year_recid";
  std::string recharge_degree = "r_charge_degree";
  std::string days = "end";
  std::string score = "decile_score";

  /// Overrides from "key=column,key=column" or a JSON object file/string.
  static ColumnMap parse(const std::string& spec);
};

struct Extraction {
  TrajectorySet trajectories;
  std::size_t total_rows = 0;
  std::size_t retained_rows = 0;
  std::vector<std::string> warnings;
};

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, embedded newlines.
std::vector<std::vector<std::string>> read_csv(std::istream& in);

Extraction extract(std::istream& in, const CompasFilter& filter, const ColumnMap& columns = {});

/// subgroup = race, trajectory = recharge degree, t = ceil(days / period_days).
TrajectorySet compas_extract(const std::filesystem::path& csv_path, const CompasFilter& filter,
                             const ColumnMap& columns = {});
Extraction compas_extract_detailed(const std::filesystem::path& csv_path, const CompasFilter& filter,
                                   const ColumnMap& columns = {});

}  // namespace ncfair::compas
