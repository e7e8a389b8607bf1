#include "ncfair/compas.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ncfair/error.hpp"

namespace ncfair::compas {
namespace {

std::optional<double> to_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (*end != '\0' || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
  return v;
}

void assign(ColumnMap& m, const std::string& key, const std::string& col) {
  std::string* slot = key == "race"              ? &m.race
                      : key == "sex"             ? &m.sex
                      : key == "age"             ? &m.age
                      : key == "priors"          ? &m.priors
                      : key == "charge_degree"   ? &m.charge_degree
                      : key == "recidivism"      ? &m.recidivism
                      : key == "recharge_degree" ? &m.recharge_degree
                      : key == "days"            ? &m.days
                      : key == "score"           ? &m.score
                                                 : nullptr;
  if (!slot) throw ValidationError("unknown column-map key '" + key + "'");
  if (col.empty()) throw ValidationError("empty column name for '" + key + "'");
  *slot = col;
}

}  // namespace

ColumnMap ColumnMap::parse(const std::string& spec) {
  ColumnMap m;
  if (spec.empty()) return m;
  nlohmann::json j;
  if (spec.front() == '{') {
    j = nlohmann::json::parse(spec, nullptr, false);
  } else if (spec.find('=') == std::string::npos) {
    std::ifstream in(spec);
    if (!in) throw IoError("cannot open column map '" + spec + "'");
    j = nlohmann::json::parse(in, nullptr, false);
  } else {
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ',');) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ValidationError("column-map entry '" + item + "' lacks '='");
      assign(m, item.substr(0, eq), item.substr(eq + 1));
    }
    return m;
  }
  if (j.is_discarded() || !j.is_object()) throw ValidationError("column map must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw ValidationError("column map values must be strings");
    assign(m, k, v.get<std::string>());
  }
  return m;
}

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  std::size_t line = 1;
  char ch;
  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    rows.push_back(std::move(row));
    row.clear();
    any = false;
  };
  while (in.get(ch)) {
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        if (any || !field.empty()) end_row();
        break;
      default:
        field += ch;
        any = true;
    }
  }
  if (quoted) throw ParseError(line, "unterminated quoted field");
  if (any || !field.empty()) end_row();
  return rows;
}

Extraction extract(std::istream& in, const CompasFilter& filter, const ColumnMap& columns) {
  if (filter.age_lo > filter.age_hi) throw ValidationError("age range is empty");
  if (filter.period_days < 1) throw ValidationError("period_days must be at least 1");
  const auto rows = read_csv(in);
  if (rows.empty()) throw ValidationError("COMPAS CSV has no header");
  const auto& header = rows.front();
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ValidationError("missing column '" + name + "'");
  };
  const std::size_t c_race = col(columns.race), c_sex = col(columns.sex), c_age = col(columns.age),
                    c_priors = col(columns.priors), c_charge = col(columns.charge_degree),
                    c_recid = col(columns.recidivism), c_recharge = col(columns.recharge_degree),
                    c_days = col(columns.days), c_score = col(columns.score);

  Extraction out;
  // (race, recharge, period) -> (score sum, count)
  std::map<ObservationKey, std::pair<double, int>> bins;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    ++out.total_rows;
    if (row.size() != header.size())
      throw ParseError(r + 1, "expected " + std::to_string(header.size()) + " fields");
    const auto recid = to_number(row[c_recid]);
    if (!recid || *recid != 1.0) continue;
    if (!filter.races.contains(row[c_race]) || row[c_sex] != filter.sex) continue;
    const auto age = to_number(row[c_age]);
    if (!age || *age < filter.age_lo || *age > filter.age_hi) continue;
    const auto priors = to_number(row[c_priors]);
    if (!priors || *priors > filter.max_priors) continue;
    if (row[c_charge] != filter.charge_degree || !filter.recharge_degrees.contains(row[c_recharge])) continue;
    const auto days = to_number(row[c_days]);
    if (!days || *days < 1) continue;
    const auto score = to_number(row[c_score]);
    if (!score) throw ValidationError("row " + std::to_string(r + 1) + ": non-numeric score '" + row[c_score] + "'");

    ++out.retained_rows;
    const int period = static_cast<int>(std::ceil(*days / filter.period_days));
    auto& bin = bins[{row[c_race], row[c_recharge], period}];
    bin.first += *score;
    bin.second += 1;
  }
  for (const auto& [key, acc] : bins)
    out.trajectories.add(key.subgroup, key.trajectory, key.period, acc.first / acc.second);
  if (out.retained_rows == 0) out.warnings.push_back("no rows passed the filter");
  return out;
}

Extraction compas_extract_detailed(const std::filesystem::path& csv_path, const CompasFilter& filter,
                                   const ColumnMap& columns) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + csv_path.string() + "'");
  return extract(in, filter, columns);
}

TrajectorySet compas_extract(const std::filesystem::path& csv_path, const CompasFilter& filter,
                             const ColumnMap& columns) {
  return compas_extract_detailed(csv_path, filter, columns).trajectories;
}

}  // namespace ncfair::compas
