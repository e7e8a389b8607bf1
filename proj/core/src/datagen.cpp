#include "ncfair/datagen.hpp"

#include <algorithm>
#include <random>

#include "ncfair/error.hpp"

namespace ncfair::datagen {
namespace {

std::mt19937_64 make_rng(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (auto p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& W) {
  if (W.rows() != W.cols()) throw ValidationError("W must be square");
  if (W.size() > 0 && (W - W.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + W.cwiseAbs().maxCoeff()))
    throw ValidationError("W must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(W);
  const auto& lam = eig.eigenvalues();
  if (lam.size() > 0 && lam.minCoeff() < -1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff()))
    throw ValidationError("W must be positive semidefinite");
  return eig.eigenvectors() * lam.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         eig.eigenvectors().transpose();
}

}  // namespace

std::vector<double> simulate_lds(const SystemMatrices& sys, int T, std::uint64_t seed) {
  if (T < 1) throw ValidationError("T must be at least 1");
  const auto n = sys.G.rows();
  if (n < 1 || sys.G.cols() != n || sys.F.size() != n || sys.m0.size() != n || sys.W.rows() != n)
    throw ValidationError("system matrix dimensions disagree");
  if (!(sys.V >= 0.0)) throw ValidationError("V must be non-negative");
  const Eigen::MatrixXd Wroot = psd_sqrt(sys.W);
  const double Vroot = std::sqrt(sys.V);

  auto rng = make_rng({seed});
  std::normal_distribution<double> normal;
  Eigen::VectorXd phi = sys.m0, w(n);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) w(i) = normal(rng);
    const double v = normal(rng);
    phi = sys.G * phi + Wroot * w;
    out.push_back(sys.F.dot(phi) + Vroot * v);
  }
  return out;
}

TrajectorySet apply_bias(const TrajectorySet& full, const BiasConfig& cfg) {
  if (full.empty()) throw ValidationError("cannot bias an empty trajectory set");
  const auto groups = full.subgroups();
  for (const auto& [s, b] : cfg.beta) {
    if (std::find(groups.begin(), groups.end(), s) == groups.end())
      throw ValidationError("unknown subgroup '" + s + "' in retention map");
    if (!(b >= 0.0 && b <= 1.0)) throw ValidationError("retention probability must lie in [0, 1]");
  }

  auto rng = make_rng({cfg.seed, 0x62696173ULL});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TrajectorySet out;
  // (subgroup, period) -> keys of that pair, and whether any was kept.
  std::map<std::pair<std::string, int>, std::pair<std::vector<ObservationKey>, bool>> pairs;
  for (const auto& [key, value] : full.observations()) {
    auto it = cfg.beta.find(key.subgroup);
    if (it == cfg.beta.end())
      throw ValidationError("no retention probability for subgroup '" + key.subgroup + "'");
    const bool keep = unit(rng) < it->second;
    auto& slot = pairs[{key.subgroup, key.period}];
    slot.first.push_back(key);
    if (keep) {
      out.add(key.subgroup, key.trajectory, key.period, value);
      slot.second = true;
    }
  }
  if (cfg.guard) {
    for (const auto& [pair, slot] : pairs) {
      if (slot.second) continue;
      std::uniform_int_distribution<std::size_t> pick(0, slot.first.size() - 1);
      const auto& key = slot.first[pick(rng)];
      out.add(key.subgroup, key.trajectory, key.period, full.observations().at(key));
    }
  }
  return out;
}

SystemMatrices paper_system(std::uint64_t seed, const std::string& subgroup) {
  const bool advantaged = subgroup == kAdvantaged;
  if (!advantaged && subgroup != kDisadvantaged)
    throw ValidationError("unknown benchmark subgroup '" + subgroup + "'");
  auto rng = make_rng({seed, advantaged ? 1ULL : 2ULL});
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SystemMatrices sys;
  sys.G.resize(2, 2);
  sys.G << 0.99, 0.0, 1.0, 0.2;
  sys.F.resize(2);
  sys.F << 1.1, 0.8;
  sys.V = unit(rng);
  sys.W = Eigen::MatrixXd::Zero(2, 2);
  sys.W(0, 0) = 0.1 * unit(rng);
  sys.W(1, 1) = 0.1 * unit(rng);
  sys.m0 = Eigen::VectorXd::Constant(2, advantaged ? 5.0 : 7.0);
  return sys;
}

TrajectorySet generate_paper_dataset(std::uint64_t seed, int horizon) {
  if (horizon < 1) throw ValidationError("horizon must be at least 1");
  TrajectorySet out;
  for (const auto& [group, count] : {std::pair{kAdvantaged, 3}, std::pair{kDisadvantaged, 2}}) {
    const auto sys = paper_system(seed, group);
    for (int i = 1; i <= count; ++i) {
      const auto ys = simulate_lds(sys, horizon, make_rng({seed, group == kAdvantaged ? 1ULL : 2ULL,
                                                           static_cast<std::uint64_t>(i)})());
      for (int t = 1; t <= horizon; ++t) out.add(group, std::to_string(i), t, ys[t - 1]);
    }
  }
  return out;
}

TrajectorySet keep_trajectories(const TrajectorySet& data, const std::string& subgroup,
                                std::size_t count) {
  const auto ids = data.trajectories(subgroup);
  TrajectorySet out;
  for (const auto& [key, value] : data.observations()) {
    if (key.subgroup == subgroup) {
      const auto pos = std::find(ids.begin(), ids.end(), key.trajectory) - ids.begin();
      if (static_cast<std::size_t>(pos) >= count) continue;
    }
    out.add(key.subgroup, key.trajectory, key.period, value);
  }
  return out;
}

}  // namespace ncfair::datagen
