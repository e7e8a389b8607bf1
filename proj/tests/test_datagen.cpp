#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "ncfair/datagen.hpp"
#include "ncfair/error.hpp"

using namespace ncfair;
using namespace ncfair::datagen;

namespace {

SystemMatrices scalar(double g, double f, double m0) {
  SystemMatrices s;
  s.G = Eigen::MatrixXd::Constant(1, 1, g);
  s.F = Eigen::VectorXd::Constant(1, f);
  s.W = Eigen::MatrixXd::Zero(1, 1);
  s.m0 = Eigen::VectorXd::Constant(1, m0);
  return s;
}

SystemMatrices benchmark_noiseless() {
  SystemMatrices s;
  s.G.resize(2, 2);
  s.G << 0.99, 0, 1.0, 0.2;
  s.F.resize(2);
  s.F << 1.1, 0.8;
  s.W = Eigen::MatrixXd::Zero(2, 2);
  s.m0.resize(2);
  s.m0 << 1, 0;
  return s;
}

}  // namespace

TEST_CASE("trajectory set bookkeeping") {
  TrajectorySet d;
  d.add("b", "2", 4, 1.0);
  d.add("a", "1", 1, 2.0);
  d.add("a", "1", 3, -1.0);
  CHECK(d.size() == 3);
  CHECK(d.subgroups() == std::vector<std::string>{"a", "b"});
  CHECK(d.horizon() == std::vector<int>{1, 3, 4});
  CHECK(d.series("a", "1").size() == 2);
  CHECK(d.max_abs_value() == 2.0);
  CHECK_THROWS_AS(d.add("a", "1", 3, 0.0), ValidationError);
  CHECK_THROWS_AS(d.add("a", "1", 0, 0.0), ValidationError);
  CHECK_THROWS_AS(d.add("a", "1", 5, std::nan("")), ValidationError);
}

TEST_CASE("noiseless simulation") {
  CHECK(simulate_lds(scalar(1, 1, 5), 4, 9) == std::vector<double>{5, 5, 5, 5});

  // Y_1 = F'(G m0) with G m0 = [0.99, 1.0].
  const auto sys = benchmark_noiseless();
  const auto y = simulate_lds(sys, 6, 3);
  CHECK(y[0] == doctest::Approx(1.1 * 0.99 + 0.8 * 1.0));
  CHECK(y[0] == doctest::Approx(1.889));

  // The recurrence holds exactly.
  Eigen::VectorXd phi = sys.m0;
  for (int t = 0; t < 6; ++t) {
    phi = sys.G * phi;
    CHECK(std::abs(y[t] - sys.F.dot(phi)) <= 1e-14);
  }
}

TEST_CASE("simulation is seeded and validated") {
  auto sys = benchmark_noiseless();
  sys.V = 0.3;
  sys.W = Eigen::Vector2d(0.05, 0.02).asDiagonal();
  CHECK(simulate_lds(sys, 10, 4) == simulate_lds(sys, 10, 4));
  CHECK(simulate_lds(sys, 10, 4) != simulate_lds(sys, 10, 5));
  CHECK_THROWS_AS(simulate_lds(sys, 0, 1), ValidationError);
  auto bad = sys;
  bad.V = -1;
  CHECK_THROWS_AS(simulate_lds(bad, 3, 1), ValidationError);
  bad = sys;
  bad.W(0, 0) = -0.1;
  CHECK_THROWS_AS(simulate_lds(bad, 3, 1), ValidationError);
  bad = sys;
  bad.W(0, 1) = 0.01;
  CHECK_THROWS_AS(simulate_lds(bad, 3, 1), ValidationError);
  bad = sys;
  bad.F.resize(3);
  CHECK_THROWS_AS(simulate_lds(bad, 3, 1), ValidationError);
}

TEST_CASE("benchmark dataset shape") {
  const auto d = generate_paper_dataset(1);
  CHECK(d.size() == 100);
  CHECK(d.subgroups() == std::vector<std::string>{kAdvantaged, kDisadvantaged});
  CHECK(d.trajectories(kAdvantaged).size() == 3);
  CHECK(d.trajectories(kDisadvantaged).size() == 2);
  CHECK(d.horizon().size() == 20);
  CHECK(d == generate_paper_dataset(1));
  CHECK(d != generate_paper_dataset(2));
  CHECK(generate_paper_dataset(1, 10).size() == 50);

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (const auto& s : {kAdvantaged, kDisadvantaged}) {
      const auto sys = paper_system(seed, s);
      CHECK(sys.V >= 0.0);
      CHECK(sys.V < 1.0);
      CHECK(sys.W(0, 1) == 0.0);
      for (int j = 0; j < 2; ++j) {
        CHECK(sys.W(j, j) >= 0.0);
        CHECK(sys.W(j, j) < 0.1);
      }
      CHECK(sys.m0(0) == (s == kAdvantaged ? 5.0 : 7.0));
    }
  }
  CHECK(keep_trajectories(d, kAdvantaged, 2).trajectories(kAdvantaged).size() == 2);
  CHECK(keep_trajectories(d, kAdvantaged, 2).size() == 80);
}

TEST_CASE("bias with full retention is the identity") {
  const auto d = generate_paper_dataset(3);
  CHECK(apply_bias(d, {{{kAdvantaged, 1.0}, {kDisadvantaged, 1.0}}, 7, true}) == d);
}

TEST_CASE("bias with zero retention leaves one observation per period") {
  const auto d = generate_paper_dataset(3);
  const auto b = apply_bias(d, {{{kAdvantaged, 1.0}, {kDisadvantaged, 0.0}}, 7, true});
  std::map<int, int> per_period;
  for (const auto& [k, v] : b.observations())
    if (k.subgroup == kDisadvantaged) ++per_period[k.period];
  CHECK(per_period.size() == 20);
  for (const auto& [t, c] : per_period) CHECK(c == 1);
  const auto off = apply_bias(d, {{{kAdvantaged, 1.0}, {kDisadvantaged, 0.0}}, 7, false});
  CHECK(off.trajectories(kDisadvantaged).empty());
}

TEST_CASE("bias replays its seed") {
  // Oracle: one Bernoulli(beta) draw per observation in key order, from a
  // fresh generator. The guard only adds back, so it cannot remove a kept one.
  const auto d = generate_paper_dataset(4);
  const BiasConfig cfg{{{kAdvantaged, 1.0}, {kDisadvantaged, 0.5}}, 11, true};
  const auto b = apply_bias(d, cfg);
  CHECK(b == apply_bias(d, cfg));
  for (const auto& [k, v] : b.observations()) CHECK(d.observations().at(k) == v);
  CHECK(b.trajectories(kAdvantaged).size() == 3);
  for (const auto& [k, v] : d.observations())
    if (k.subgroup == kAdvantaged) CHECK(b.observations().count(k) == 1);
  CHECK(b.size() < d.size());
  CHECK(b != apply_bias(d, {cfg.beta, 12, true}));

  const std::uint64_t tag = 0x62696173ULL;  // "bias"
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                                   static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::set<ObservationKey> kept;
  std::set<std::pair<std::string, int>> covered, seen;
  for (const auto& [k, v] : d.observations()) {
    seen.insert({k.subgroup, k.period});
    if (unit(rng) < cfg.beta.at(k.subgroup)) {
      kept.insert(k);
      covered.insert({k.subgroup, k.period});
    }
  }
  for (const auto& k : kept) CHECK(b.observations().count(k) == 1);
  CHECK(b.size() == kept.size() + (seen.size() - covered.size()));
}

TEST_CASE("bias validation") {
  const auto d = generate_paper_dataset(1);
  CHECK_THROWS_AS(apply_bias(d, {{{"nobody", 0.5}}, 1, true}), ValidationError);
  CHECK_THROWS_AS(apply_bias(d, {{{kAdvantaged, 1.5}}, 1, true}), ValidationError);
  CHECK_THROWS_AS(apply_bias(TrajectorySet{}, {{}, 1, true}), ValidationError);
}

TEST_CASE("retention rate matches beta") {
  TrajectorySet big;
  for (int i = 0; i < 100; ++i)
    for (int t = 1; t <= 100; ++t) big.add("s", std::to_string(i), t, 1.0);
  for (double beta : {0.2, 0.5, 0.9}) {
    const auto b = apply_bias(big, {{{"s", beta}}, 21, false});
    CHECK(std::abs(static_cast<double>(b.size()) / big.size() - beta) <= 0.02);
  }
}
