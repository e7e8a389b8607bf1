#include <doctest.h>

#include <cmath>
#include <random>

#include "ncfair/datagen.hpp"
#include "ncfair/error.hpp"
#include "ncfair/evalio.hpp"
#include "ncfair/fairlds.hpp"

using namespace ncfair;
using namespace ncfair::fairlds;

namespace {

TrajectorySet two_constant_subgroups(double a, double d, int T) {
  TrajectorySet data;
  for (int t = 1; t <= T; ++t) {
    data.add("a", "1", t, a);
    data.add("d", "1", t, d);
  }
  return data;
}

TrajectorySet noiseless_scalar() {
  datagen::SystemMatrices sys;
  sys.G = Eigen::MatrixXd::Constant(1, 1, 0.9);
  sys.F = Eigen::VectorXd::Ones(1);
  sys.W = Eigen::MatrixXd::Zero(1, 1);
  sys.m0 = Eigen::VectorXd::Ones(1);
  const auto ys = datagen::simulate_lds(sys, 5, 1);
  TrajectorySet data;
  for (int t = 1; t <= 5; ++t) data.add("s", "1", t, ys[t - 1]);
  return data;
}

double max_subgroup_loss(const TrajectorySet& data, const evalio::Forecasts& f) {
  double m = 0;
  for (const auto& [s, v] : evalio::subgroup_losses(data, f)) m = std::max(m, v);
  return m;
}

}  // namespace

TEST_CASE("mode and encoding names") {
  CHECK(parse_mode("subgroup_fair") == Mode::subgroup_fair);
  CHECK(parse_mode("instant-fair") == Mode::instant_fair);
  CHECK(parse_mode("unfair") == Mode::unfair);
  CHECK_THROWS_AS(parse_mode("bogus"), ValidationError);
  CHECK(parse_loss_encoding("absolute") == LossEncoding::absolute);
  CHECK(to_string(Mode::instant_fair) == "instant_fair");
  CHECK(FairnessModelSpec::defaults(Mode::subgroup_fair).lambda == 5.0);
  CHECK(FairnessModelSpec::defaults(Mode::instant_fair).lambda == 1.0);
  CHECK(FairnessModelSpec::defaults(Mode::unfair).lambda == 1.0);
}

TEST_CASE("model sizes for two subgroups over three periods") {
  const auto data = two_constant_subgroups(0, 4, 3);
  SUBCASE("subgroup_fair") {
    const auto m = build_model(data, FairnessModelSpec::defaults(Mode::subgroup_fair));
    CHECK(m.layout.vars().size() == 16);
    CHECK(m.problem.equalities.size() == 6);
    CHECK(m.problem.inequalities.size() == 2);
    CHECK(m.problem.ball_radius.has_value());
  }
  SUBCASE("instant_fair") {
    const auto m = build_model(data, FairnessModelSpec::defaults(Mode::instant_fair));
    CHECK(m.problem.inequalities.size() == 6);
  }
  SUBCASE("unfair") {
    const auto m = build_model(data, FairnessModelSpec::defaults(Mode::unfair));
    CHECK(m.problem.inequalities.empty());
    CHECK(m.layout.vars().size() == 15);
    CHECK(!m.layout.has_z());
    // Sum of (Y - f_t)^2 carries every f_t^2 with weight 2 (two subgroups).
    const auto f1 = Word{static_cast<Letter>(m.layout.vars().index_of(m.layout.f(1)))};
    CHECK(m.problem.objective.coefficient(word_mul(f1, f1)) == doctest::Approx(2.0));
  }
}

TEST_CASE("layout counts hold on random shapes") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    TrajectorySet data;
    const int S = 1 + rng() % 3;
    for (int s = 0; s < S; ++s) {
      const int I = 1 + rng() % 2;
      for (int i = 0; i < I; ++i)
        for (int t = 1; t <= 6; ++t)
          if (rng() % 2 || t == 1) data.add("s" + std::to_string(s), std::to_string(i), t, 0.1 * (rng() % 50));
    }
    const int n = 1 + rng() % 2;
    const auto T = data.horizon().size();
    for (Mode mode : {Mode::subgroup_fair, Mode::instant_fair, Mode::unfair}) {
      auto spec = FairnessModelSpec::defaults(mode);
      spec.hidden_dim = n;
      const auto m = build_model(data, spec);
      const bool z = mode != Mode::unfair;
      CHECK(m.layout.vars().size() == OperatorLayout::expected_count(T, n, z));
      CHECK(m.layout.vars().size() ==
            static_cast<std::size_t>(n * n + n + (T + 1) * n + T * n + 2 * T + (z ? 1 : 0)));
      CHECK(m.problem.equalities.size() == T * (n + 1));
      const std::size_t ineq = mode == Mode::subgroup_fair  ? static_cast<std::size_t>(S)
                               : mode == Mode::instant_fair ? data.size()
                                                            : 0;
      CHECK(m.problem.inequalities.size() == ineq);
    }
  }
}

TEST_CASE("build_model rejects bad input") {
  CHECK_THROWS_AS(build_model(TrajectorySet{}, {}), ValidationError);
  const auto data = two_constant_subgroups(0, 1, 2);
  FairnessModelSpec spec;
  spec.lambda = -1;
  CHECK_THROWS_AS(build_model(data, spec), ValidationError);
  spec = {};
  spec.hidden_dim = 0;
  CHECK_THROWS_AS(build_model(data, spec), ValidationError);
}

TEST_CASE("predecessors skip missing periods") {
  OperatorLayout layout({2, 5, 6}, 1, true);
  CHECK(layout.previous(2) == 0);
  CHECK(layout.previous(5) == 2);
  CHECK(layout.previous(6) == 5);
}

TEST_CASE("noiseless scalar system is recovered") {
  const auto data = noiseless_scalar();
  FairnessModelSpec spec = FairnessModelSpec::defaults(Mode::unfair);
  const auto r = solve_fair(data, spec);
  REQUIRE(r.optimal());
  CHECK(r.objective_value <= 1e-3);
  for (const auto& [key, y] : data.observations()) CHECK(std::abs(r.forecasts.at(key.period) - y) <= 1e-2);
  CHECK(!r.z_value.has_value());
  CHECK(r.forecasts.size() == 5);
  CHECK(r.state_estimates.count(0) == 1);
}

TEST_CASE("constant data gives zero loss in every mode") {
  TrajectorySet data;
  for (int t = 1; t <= 3; ++t) {
    data.add("a", "1", t, 2.5);
    data.add("b", "1", t, 2.5);
  }
  for (Mode mode : {Mode::subgroup_fair, Mode::instant_fair, Mode::unfair}) {
    CAPTURE(to_string(mode));
    const auto r = solve_fair(data, FairnessModelSpec::defaults(mode));
    REQUIRE(r.optimal());
    for (const auto& [t, f] : r.forecasts) CHECK(f == doctest::Approx(2.5).epsilon(1e-3));
    if (r.z_value) CHECK(std::abs(*r.z_value) <= 1e-3);
    CHECK(std::abs(r.objective_value) <= 1e-3);
  }
}

TEST_CASE("minimax midpoint between two constant subgroups") {
  const auto data = two_constant_subgroups(0, 4, 3);
  const auto r = solve_fair(data, FairnessModelSpec::defaults(Mode::instant_fair));
  REQUIRE(r.optimal());
  for (const auto& [t, f] : r.forecasts) CHECK(std::abs(f - 2.0) <= 0.05);
  REQUIRE(r.z_value);
  CHECK(std::abs(*r.z_value - 4.0) <= 0.1);

  SUBCASE("z scales with the square of the data") {
    const auto scaled = solve_fair(two_constant_subgroups(0, 8, 3), FairnessModelSpec::defaults(Mode::instant_fair));
    REQUIRE(scaled.optimal());
    CHECK(*scaled.z_value == doctest::Approx(4.0 * *r.z_value).epsilon(1e-3));
  }
  SUBCASE("absolute encoding puts z at the half distance") {
    auto spec = FairnessModelSpec::defaults(Mode::instant_fair);
    spec.loss = LossEncoding::absolute;
    const auto a = solve_fair(data, spec);
    REQUIRE(a.optimal());
    CHECK(std::abs(*a.z_value - 2.0) <= 0.1);
  }
}

TEST_CASE("unfair and subgroup-fair each win on their own objective") {
  const auto full = datagen::generate_paper_dataset(1, 4);
  const auto data = datagen::apply_bias(full, {{{datagen::kAdvantaged, 1.0}, {datagen::kDisadvantaged, 0.6}}, 2, true});
  auto uf_spec = FairnessModelSpec::defaults(Mode::unfair);
  auto sf_spec = FairnessModelSpec::defaults(Mode::subgroup_fair);
  uf_spec.lambda = sf_spec.lambda = 1.0;
  const auto uf = solve_fair(data, uf_spec);
  const auto sf = solve_fair(data, sf_spec);
  REQUIRE(uf.optimal());
  REQUIRE(sf.optimal());
  const double uf_total = evalio::total_squared_loss(data, uf.forecasts);
  const double sf_total = evalio::total_squared_loss(data, sf.forecasts);
  const double uf_max = max_subgroup_loss(data, uf.forecasts), sf_max = max_subgroup_loss(data, sf.forecasts);
  CAPTURE(uf_total);
  CAPTURE(sf_total);
  CAPTURE(uf_max);
  CAPTURE(sf_max);
  const double tol = 10 * 1e-6;
  CHECK(uf_total <= sf_total + tol * (1 + sf_total));
  CHECK(sf_max <= uf_max + tol * (1 + uf_max));
}

TEST_CASE("shifting period labels only relabels the report") {
  TrajectorySet a, b;
  const double ys[] = {1.0, 1.8, 2.1, 1.2};
  for (int t = 1; t <= 4; ++t) {
    a.add("g", "1", t, ys[t - 1]);
    a.add("h", "1", t, ys[t - 1] + (t % 2));
    b.add("g", "1", t + 10, ys[t - 1]);
    b.add("h", "1", t + 10, ys[t - 1] + (t % 2));
  }
  const auto ra = solve_fair(a, FairnessModelSpec::defaults(Mode::subgroup_fair));
  const auto rb = solve_fair(b, FairnessModelSpec::defaults(Mode::subgroup_fair));
  REQUIRE(ra.optimal());
  REQUIRE(rb.optimal());
  CHECK(ra.objective_value == doctest::Approx(rb.objective_value).epsilon(1e-4));
  for (int t = 1; t <= 4; ++t) CHECK(ra.forecasts.at(t) == doctest::Approx(rb.forecasts.at(t + 10)).epsilon(1e-3));
}

TEST_CASE("second order reports flatness") {
  TrajectorySet data;
  data.add("a", "1", 1, 1.0);
  auto spec = FairnessModelSpec::defaults(Mode::unfair);
  spec.relaxation_order = 2;
  const auto r = solve_fair(data, spec);
  CHECK(r.flat.has_value());
  CHECK(r.relaxation_order == 2);
  CHECK(r.moment_count == moment_count(r.operator_count, RelaxationOrder(2)));
}

TEST_CASE("forecast_next iterates the learned dynamics") {
  FairSolveReport r;
  r.solver.status = sdp::Status::optimal;
  r.G_estimate = Eigen::MatrixXd::Constant(1, 1, 1.0);
  r.F_estimate = Eigen::VectorXd::Ones(1);
  r.state_estimates[0] = {0.0};
  r.state_estimates[4] = {3.0};
  CHECK(forecast_next(r, 2) == std::vector<double>{3.0, 3.0});

  r.G_estimate(0, 0) = 0.5;
  r.F_estimate(0) = 2.0;
  r.state_estimates[4] = {1.0};
  const auto f = forecast_next(r, 3);
  REQUIRE(f.size() == 3);
  CHECK(f[0] == doctest::Approx(1.0));
  CHECK(f[1] == doctest::Approx(0.5));
  CHECK(f[2] == doctest::Approx(0.25));

  CHECK_THROWS_AS(forecast_next(r, 0), ValidationError);
  r.solver.status = sdp::Status::inaccurate;
  CHECK_THROWS_AS(forecast_next(r, 1), ValidationError);
}
