#include "ncfair/evalio.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ncfair/error.hpp"

namespace ncfair::evalio {
namespace {

double forecast_at(const Forecasts& f, int t) {
  auto it = f.find(t);
  if (it == f.end()) throw ValidationError("no forecast for period " + std::to_string(t));
  return it->second;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double subgroup_mean(const TrajectorySet& data, const std::string& subgroup) {
  const auto ids = data.trajectories(subgroup);
  if (ids.empty()) throw ValidationError("no observations for subgroup '" + subgroup + "'");
  double total = 0.0;
  for (const auto& i : ids) {
    const auto series = data.series(subgroup, i);
    double sum = 0.0;
    for (const auto& [t, y] : series) sum += y;
    total += sum / static_cast<double>(series.size());
  }
  return total / static_cast<double>(ids.size());
}

double nrmse(const TrajectorySet& data, const Forecasts& forecasts, const std::string& subgroup) {
  const double mean = subgroup_mean(data, subgroup);
  double num = 0.0, den = 0.0;
  for (const auto& i : data.trajectories(subgroup))
    for (const auto& [t, y] : data.series(subgroup, i)) {
      const double r = y - forecast_at(forecasts, t);
      num += r * r;
      den += (y - mean) * (y - mean);
    }
  if (den == 0.0)
    throw DegenerateDenominatorError("subgroup '" + subgroup + "' has no spread around its mean");
  return std::sqrt(num / den);
}

double total_squared_loss(const TrajectorySet& data, const Forecasts& forecasts) {
  double total = 0.0;
  for (const auto& [key, y] : data.observations()) {
    const double r = y - forecast_at(forecasts, key.period);
    total += r * r;
  }
  return total;
}

std::map<std::string, double> subgroup_losses(const TrajectorySet& data, const Forecasts& forecasts) {
  std::map<std::string, double> out;
  for (const auto& s : data.subgroups()) {
    const auto ids = data.trajectories(s);
    double acc = 0.0;
    for (const auto& i : ids) {
      const auto series = data.series(s, i);
      double sum = 0.0;
      for (const auto& [t, y] : series) {
        const double r = y - forecast_at(forecasts, t);
        sum += r * r;
      }
      acc += sum / static_cast<double>(series.size());
    }
    out.emplace(s, acc / static_cast<double>(ids.size()));
  }
  return out;
}

double max_instant_loss(const TrajectorySet& data, const Forecasts& forecasts) {
  double m = 0.0;
  for (const auto& [key, y] : data.observations()) {
    const double r = y - forecast_at(forecasts, key.period);
    m = std::max(m, r * r);
  }
  return m;
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw ValidationError("sample variance needs at least 2 values");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

NoiseEstimate estimate_noise_covariances(const fairlds::FairSolveReport& report,
                                         const TrajectorySet& data) {
  if (!report.optimal()) throw ValidationError("report does not come from an optimal solve");
  if (report.forecasts.size() < 2) throw ValidationError("need at least 2 periods");
  for (int t : data.horizon())
    if (!report.forecasts.contains(t)) throw ValidationError("report lacks period " + std::to_string(t));

  const auto n = report.F_estimate.size();
  std::vector<double> nu;
  std::vector<Eigen::VectorXd> omega;
  auto state = [&](int t) {
    const auto& v = report.state_estimates.at(t);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  };
  int prev = 0;
  for (const auto& [t, f] : report.forecasts) {
    const Eigen::VectorXd m = state(t);
    if (m.size() != n) throw ValidationError("state dimension disagrees with F");
    nu.push_back(f - report.F_estimate.dot(m));
    omega.push_back(m - report.G_estimate * state(prev));
    prev = t;
  }

  NoiseEstimate est;
  est.V_hat = sample_variance(nu);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (const auto& w : omega) mean += w;
  mean /= static_cast<double>(omega.size());
  est.W_hat = Eigen::MatrixXd::Zero(n, n);
  for (const auto& w : omega) est.W_hat += (w - mean) * (w - mean).transpose();
  est.W_hat /= static_cast<double>(omega.size() - 1);
  return est;
}

EvalReport evaluate(const TrajectorySet& data, const fairlds::FairSolveReport& report) {
  EvalReport out;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : data.subgroups()) {
    const double v = nrmse(data, report.forecasts, s);
    out.nrmse.emplace(s, v);
    out.means.emplace(s, subgroup_mean(data, s));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  out.gap = out.nrmse.empty() ? 0.0 : hi - lo;
  out.total_loss = total_squared_loss(data, report.forecasts);
  const auto noise = estimate_noise_covariances(report, data);
  out.V_hat = noise.V_hat;
  out.W_hat = noise.W_hat;
  return out;
}

double annuity_premium(std::span<const double> survivors, double p0, double interest) {
  if (survivors.size() != 10) throw ValidationError("expected 10 survivor counts");
  if (!(p0 > 0.0)) throw ValidationError("p0 must be positive");
  if (!(interest >= 0.0)) throw ValidationError("interest rate must be non-negative");
  double total = 0.0, discount = 1.0;
  for (double p : survivors) {
    if (!(p >= 0.0)) throw ValidationError("survivor counts must be non-negative");
    discount /= 1.0 + interest;
    total += p * discount;
  }
  return total / p0;
}

// ---------------------------------------------------------------------------
// Trajectory CSV

TrajectorySet read_trajectories_csv(std::istream& in) {
  std::string line;
  std::size_t ln = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++ln;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "subgroup,trajectory,t,value")
    throw ParseError(1, "expected header 'subgroup,trajectory,t,value'");

  TrajectorySet data;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 4) throw ParseError(ln, "expected 4 fields, got " + std::to_string(f.size()));

    errno = 0;
    char* end = nullptr;
    const long t = std::strtol(f[2].c_str(), &end, 10);
    if (f[2].empty() || *end != '\0' || errno == ERANGE || t < 1 || t > std::numeric_limits<int>::max())
      throw ParseError(ln, "period must be a positive integer, got '" + f[2] + "'");
    const double v = std::strtod(f[3].c_str(), &end);
    if (f[3].empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
      throw ParseError(ln, "value must be a finite number, got '" + f[3] + "'");
    try {
      data.add(f[0], f[1], static_cast<int>(t), v);
    } catch (const ValidationError& e) {
      throw ParseError(ln, e.what());
    }
  }
  return data;
}

void write_trajectories_csv(const TrajectorySet& data, std::ostream& out) {
  out << "subgroup,trajectory,t,value\n";
  for (const auto& [key, y] : data.observations()) {
    for (const auto* label : {&key.subgroup, &key.trajectory})
      if (label->find_first_of(",\"\n\r") != std::string::npos)
        throw ValidationError("label '" + *label + "' cannot be written to CSV");
    out << key.subgroup << ',' << key.trajectory << ',' << key.period << ',' << fmt17(y) << '\n';
  }
}

TrajectorySet load_trajectories_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_trajectories_csv(in);
}

void save_trajectories_csv(const TrajectorySet& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_trajectories_csv(data, out);
  if (!out.flush()) throw IoError("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::ordered_json num(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

double get_num(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(num(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j.at(r).size()) != cols) throw ValidationError("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = get_num(j.at(r).at(c));
  }
  return m;
}

sdp::Status parse_status(const std::string& s) {
  for (auto st : {sdp::Status::optimal, sdp::Status::inaccurate, sdp::Status::infeasible,
                  sdp::Status::unbounded, sdp::Status::iteration_limit})
    if (sdp::to_string(st) == s) return st;
  throw ValidationError("unknown solver status '" + s + "'");
}

}  // namespace

nlohmann::ordered_json to_json(const fairlds::FairSolveReport& r) {
  nlohmann::ordered_json j;
  j["mode"] = std::string(fairlds::to_string(r.mode));
  j["lambda"] = r.lambda;
  j["relaxation_order"] = r.relaxation_order;
  j["objective_value"] = num(r.objective_value);
  j["z"] = r.z_value ? num(*r.z_value) : nlohmann::ordered_json(nullptr);
  auto forecasts = nlohmann::ordered_json::array();
  for (const auto& [t, f] : r.forecasts) forecasts.push_back({{"t", t}, {"f", num(f)}});
  j["forecasts"] = std::move(forecasts);
  auto states = nlohmann::ordered_json::array();
  for (const auto& [t, m] : r.state_estimates) {
    auto v = nlohmann::ordered_json::array();
    for (double x : m) v.push_back(num(x));
    states.push_back({{"t", t}, {"m", std::move(v)}});
  }
  j["states"] = std::move(states);
  auto noises = nlohmann::ordered_json::array();
  for (const auto& [t, w] : r.omega_estimates) {
    auto v = nlohmann::ordered_json::array();
    for (double x : w) v.push_back(num(x));
    noises.push_back({{"t", t}, {"nu", num(r.nu_estimates.at(t))}, {"omega", std::move(v)}});
  }
  j["noises"] = std::move(noises);
  j["G"] = matrix_json(r.G_estimate);
  j["F"] = matrix_json(r.F_estimate.transpose()).at(0);
  j["flat"] = r.flat ? nlohmann::ordered_json(*r.flat) : nlohmann::ordered_json(nullptr);
  j["sizes"] = {{"operators", r.operator_count},
                {"moments", r.moment_count},
                {"moment_matrix_dim", r.sdp_dim}};
  j["solver"] = {{"status", std::string(sdp::to_string(r.solver.status))},
                 {"primal_residual", num(r.solver.primal_residual)},
                 {"dual_residual", num(r.solver.dual_residual)},
                 {"gap", num(r.solver.gap)},
                 {"iterations", r.solver.iterations},
                 {"wall_time", r.solver.wall_time}};
  return j;
}

fairlds::FairSolveReport solve_report_from_json(const nlohmann::json& j) {
  try {
    fairlds::FairSolveReport r;
    r.mode = fairlds::parse_mode(j.at("mode").get<std::string>());
    r.lambda = j.at("lambda").get<double>();
    r.relaxation_order = j.at("relaxation_order").get<int>();
    r.objective_value = get_num(j.at("objective_value"));
    if (!j.at("z").is_null()) r.z_value = j.at("z").get<double>();
    for (const auto& e : j.at("forecasts")) r.forecasts.emplace(e.at("t").get<int>(), get_num(e.at("f")));
    for (const auto& e : j.at("states")) {
      std::vector<double> m;
      for (const auto& x : e.at("m")) m.push_back(get_num(x));
      r.state_estimates.emplace(e.at("t").get<int>(), std::move(m));
    }
    for (const auto& e : j.at("noises")) {
      const int t = e.at("t").get<int>();
      r.nu_estimates.emplace(t, get_num(e.at("nu")));
      std::vector<double> w;
      for (const auto& x : e.at("omega")) w.push_back(get_num(x));
      r.omega_estimates.emplace(t, std::move(w));
    }
    r.G_estimate = matrix_from(j.at("G"));
    const auto& F = j.at("F");
    r.F_estimate.resize(static_cast<Eigen::Index>(F.size()));
    for (std::size_t i = 0; i < F.size(); ++i) r.F_estimate(static_cast<Eigen::Index>(i)) = get_num(F.at(i));
    if (!j.at("flat").is_null()) r.flat = j.at("flat").get<bool>();
    r.operator_count = j.at("sizes").at("operators").get<std::size_t>();
    r.moment_count = j.at("sizes").at("moments").get<std::size_t>();
    r.sdp_dim = j.at("sizes").at("moment_matrix_dim").get<std::size_t>();
    const auto& s = j.at("solver");
    r.solver.status = parse_status(s.at("status").get<std::string>());
    r.solver.primal_residual = get_num(s.at("primal_residual"));
    r.solver.dual_residual = get_num(s.at("dual_residual"));
    r.solver.gap = get_num(s.at("gap"));
    r.solver.iterations = s.at("iterations").get<int>();
    r.solver.wall_time = s.at("wall_time").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed solve report: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json nr = nlohmann::ordered_json::object(), means = nlohmann::ordered_json::object();
  for (const auto& [s, v] : r.nrmse) nr[s] = num(v);
  for (const auto& [s, v] : r.means) means[s] = num(v);
  j["nrmse"] = std::move(nr);
  j["means"] = std::move(means);
  j["gap"] = num(r.gap);
  j["total_loss"] = num(r.total_loss);
  j["V_hat"] = num(r.V_hat);
  j["W_hat"] = matrix_json(r.W_hat);
  return j;
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    for (const auto& [s, v] : j.at("nrmse").items()) r.nrmse.emplace(s, get_num(v));
    for (const auto& [s, v] : j.at("means").items()) r.means.emplace(s, get_num(v));
    r.gap = get_num(j.at("gap"));
    r.total_loss = get_num(j.at("total_loss"));
    r.V_hat = get_num(j.at("V_hat"));
    r.W_hat = matrix_from(j.at("W_hat"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed evaluation report: ") + e.what());
  }
}

void write_json(const nlohmann::ordered_json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out.flush()) throw IoError("failed writing '" + path.string() + "'");
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, e.what());
  }
}

}  // namespace ncfair::evalio
