#include <doctest.h>

#include <cmath>
#include <set>

#include "ncfair/error.hpp"
#include "ncfair/npa.hpp"
#include "ncfair/sdp.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace ncfair;

namespace {

MomentIndex idx(std::initializer_list<Letter> l) { return canonicalize(Word(l)); }

LinearMomentForm single(std::initializer_list<Letter> l) { return {{idx(l), 1.0}}; }

double solve_bound(const NCPOPProblem& prob, int k) {
  const auto rel = assemble_sdp(prob, RelaxationOrder(k));
  const auto sol = sdp::solve(rel.sdp);
  REQUIRE(sol.status == sdp::Status::optimal);
  return sol.objective_value;
}

}  // namespace

TEST_CASE("moment matrix n=1 k=1") {
  const auto m = moment_matrix(make_variables({"x"}), 1);
  REQUIRE(m.dim() == 2);
  CHECK(m(0, 0) == single({}));
  CHECK(m(0, 1) == single({0}));
  CHECK(m(1, 0) == single({0}));
  CHECK(m(1, 1) == single({0, 0}));
}

TEST_CASE("moment matrix n=2 k=1 is symmetric") {
  const auto m = moment_matrix(make_variables({"x", "y"}), 1);
  REQUIRE(m.dim() == 3);
  CHECK(m(1, 2) == m(2, 1));
  CHECK(m(1, 2) == single({0, 1}));
  CHECK(m.is_symmetric());
}

TEST_CASE("moment matrix support matches the dedup oracle") {
  const auto m = moment_matrix(make_variables({"x", "y"}), 2);
  CHECK(m.dim() == 7);
  CHECK(m.support().size() == 22);
  for (unsigned n = 1; n <= 3; ++n)
    for (int k = 1; k <= 2; ++k) {
      std::vector<std::string> names;
      for (unsigned i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
      const auto mm = moment_matrix(make_variables(names), k);
      CHECK(mm.is_symmetric());
      CHECK(mm.support().size() == oracle::moment_matrix_support(n, k));
    }
}

TEST_CASE("localizing matrices") {
  const auto vars = make_variables({"x"});
  const auto x = Polynomial::variable(vars, "x");

  SUBCASE("constant one gives the moment matrix") {
    const auto loc = localizing_matrix(Polynomial(vars, 1.0), vars, 2);
    const auto mom = moment_matrix(vars, 2);
    REQUIRE(loc.dim() == mom.dim());
    for (std::size_t i = 0; i < loc.dim(); ++i)
      for (std::size_t j = 0; j < loc.dim(); ++j) CHECK(loc(i, j) == mom(i, j));
  }
  SUBCASE("1 - xx at k=1 is a scalar") {
    const auto loc = localizing_matrix(1.0 - x * x, vars, 1);
    REQUIRE(loc.dim() == 1);
    const LinearMomentForm expected{{idx({}), 1.0}, {idx({0, 0}), -1.0}};
    CHECK(loc(0, 0) == expected);
  }
  SUBCASE("order too low names the constraint") {
    try {
      localizing_matrix(x * x * x, vars, 1, "my constraint");
      FAIL("expected an error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("my constraint") != std::string::npos);
    }
  }
}

TEST_CASE("localizing matrix of z - (c - f)^2 matches a term-by-term expansion") {
  const auto vars = make_variables({"z", "f"});
  const auto z = Polynomial::variable(vars, "z");
  const auto f = Polynomial::variable(vars, "f");
  const double c = 3.5;
  const auto r = Polynomial(vars, c) - f;
  const auto q = z - r * r;  // z - c^2 + 2c f - ff
  const auto loc = localizing_matrix(q, vars, 2);

  // Terms of q written out by hand as (letters, coefficient).
  const std::vector<std::pair<std::vector<unsigned>, double>> terms{
      {{0}, 1.0}, {{}, -c * c}, {{1}, 2 * c}, {{1, 1}, -1.0}};
  const auto basis = oracle::all_words(2, 1);  // 1, z, f
  REQUIRE(loc.dim() == basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j) {
      std::map<std::vector<unsigned>, double> expected;
      for (const auto& [mu, coef] : terms) {
        std::vector<unsigned> w(basis[i].rbegin(), basis[i].rend());
        w.insert(w.end(), mu.begin(), mu.end());
        w.insert(w.end(), basis[j].begin(), basis[j].end());
        auto rw = w;
        std::reverse(rw.begin(), rw.end());
        expected[std::min(w, rw)] += coef;
      }
      std::erase_if(expected, [](const auto& kv) { return kv.second == 0.0; });
      LinearMomentForm want;
      for (const auto& [w, coef] : expected)
        want[MomentIndex{Word(std::vector<Letter>(w.begin(), w.end()))}] = coef;
      CHECK(loc(i, j) == want);
    }
}

TEST_CASE("assemble_sdp worked examples") {
  const auto vars = make_variables({"x"});
  const auto x = Polynomial::variable(vars, "x");

  SUBCASE("min x^2") {
    NCPOPProblem prob{vars, x * x, {}, {}, {}};
    const auto rel = assemble_sdp(prob, RelaxationOrder(1));
    CHECK(rel.sdp.num_vars == 3);
    CHECK(rel.sdp.variable_names == std::vector<std::string>{"1", "x", "x*x"});
    CHECK(rel.sdp.objective == std::vector<double>{0, 0, 1});
    REQUIRE(rel.sdp.blocks.size() == 1);
    CHECK(rel.sdp.blocks[0].dim == 2);
    REQUIRE(rel.sdp.equalities.size() == 1);
    CHECK(rel.sdp.equalities[0].coeffs == std::map<std::size_t, double>{{0, 1.0}});
    CHECK(rel.sdp.equalities[0].rhs == 1.0);
    const auto sol = sdp::solve(rel.sdp);
    CHECK(sol.status == sdp::Status::optimal);
    CHECK(std::abs(sol.objective_value) <= 1e-5);
  }
  SUBCASE("min (x-1)^2") {
    NCPOPProblem prob{vars, (x - 1.0) * (x - 1.0), {}, {}, {}};
    const auto rel = assemble_sdp(prob, RelaxationOrder(1));
    const auto sol = sdp::solve(rel.sdp);
    REQUIRE(sol.status == sdp::Status::optimal);
    CHECK(std::abs(sol.objective_value) <= 1e-5);
    const auto moments = rel.moment_values(sol.values);
    CHECK(moments.at(idx({0})) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(moments.at(idx({0, 0})) == doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("min x on the unit interval") {
    NCPOPProblem prob{vars, x, {1.0 - x * x}, {}, {}};
    CHECK(solve_bound(prob, 1) == doctest::Approx(-1.0).epsilon(1e-5));
  }
}

TEST_CASE("assemble_sdp validation") {
  const auto vars = make_variables({"x"});
  const auto x = Polynomial::variable(vars, "x");
  CHECK_THROWS_AS(assemble_sdp({vars, x * x * x, {}, {}, {}}, RelaxationOrder(1)), ValidationError);
  CHECK_THROWS_AS(assemble_sdp({vars, Polynomial(vars), {}, {}, {}}, RelaxationOrder(1)), ValidationError);
  CHECK_THROWS_AS(assemble_sdp({vars, x, {x * x * x}, {}, {}}, RelaxationOrder(1)), ValidationError);
  CHECK_THROWS_AS(assemble_sdp({vars, x, {}, {x * x * x}, {}}, RelaxationOrder(1)), ValidationError);
  CHECK_THROWS_AS(assemble_sdp({vars, x, {}, {}, -1.0}, RelaxationOrder(1)), ValidationError);
  CHECK_THROWS_AS(RelaxationOrder(0), ValidationError);
}

TEST_CASE("ball constraint and equalities") {
  const auto vars = make_variables({"x", "y"});
  const auto x = Polynomial::variable(vars, "x");
  const auto y = Polynomial::variable(vars, "y");
  NCPOPProblem prob{vars, x + y, {}, {x - y}, 2.0};
  const auto rel = assemble_sdp(prob, RelaxationOrder(1));
  REQUIRE(rel.sdp.blocks.size() == 2);
  // Ball at k=1: scalar 4 y_1 - y_xx - y_yy.
  const auto& ball = rel.sdp.blocks[1];
  CHECK(ball.dim == 1);
  const auto* e = ball.find(0, 0);
  REQUIRE(e != nullptr);
  CHECK(e->coeffs.at(rel.index.at(idx({}))) == 4.0);
  CHECK(e->coeffs.at(rel.index.at(idx({0, 0}))) == -1.0);
  CHECK(e->coeffs.at(rel.index.at(idx({1, 1}))) == -1.0);
  // y_1 = 1 plus y_x - y_y = 0.
  REQUIRE(rel.sdp.equalities.size() == 2);
  // min x + y with x = y and x^2 + y^2 <= 4: x = y = -sqrt(2).
  const auto sol = sdp::solve(rel.sdp);
  REQUIRE(sol.status == sdp::Status::optimal);
  CHECK(sol.objective_value == doctest::Approx(-2.0 * std::sqrt(2.0)).epsilon(1e-5));
}

TEST_CASE("moment_count") {
  CHECK(moment_count(1, RelaxationOrder(1)) == 3);
  CHECK(moment_count(2, RelaxationOrder(1)) == 6);
  CHECK(moment_count(2, RelaxationOrder(2)) == 22);
  for (unsigned n = 1; n <= 3; ++n)
    for (int k = 1; k <= 2; ++k) CHECK(moment_count(n, RelaxationOrder(k)) == oracle::dedup_count(n, 2 * k));
  CHECK_THROWS_AS(moment_count(0, RelaxationOrder(1)), ValidationError);
}

TEST_CASE("assembled variable count equals moment_count") {
  for (unsigned n = 1; n <= 3; ++n) {
    std::vector<std::string> names;
    for (unsigned i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
    const auto vars = make_variables(names);
    for (int k = 1; k <= 2; ++k) {
      const auto rel = assemble_sdp({vars, Polynomial::variable(vars, "v0"), {}, {}, {}}, RelaxationOrder(k));
      CHECK(rel.sdp.num_vars == moment_count(n, RelaxationOrder(k)));
    }
  }
}

TEST_CASE("flatness on point evaluations and mixtures") {
  const auto vars = make_variables({"x"});
  auto point = [&](double x) {
    MomentValues v;
    for (const auto& w : enumerate_words(vars, 4)) v[canonicalize(w)] = std::pow(x, static_cast<double>(w.degree()));
    return v;
  };
  CHECK(flatness_check(point(1.0), vars, 2));
  CHECK(flatness_check(point(0.5), vars, 2));
  CHECK(moment_matrix_rank(point(0.5), vars, 2) == 1);

  // Half mass at 0 and half at 1.
  MomentValues mix;
  for (const auto& w : enumerate_words(vars, 4)) mix[canonicalize(w)] = w.degree() == 0 ? 1.0 : 0.5;
  CHECK(moment_matrix_rank(mix, vars, 1) == 2);
  CHECK(moment_matrix_rank(mix, vars, 2) == 2);
  CHECK(flatness_check(mix, vars, 2));

  // Atoms at -1, 0, 1: rank(M_1) = 2 < rank(M_2) = 3.
  MomentValues three;
  for (const auto& w : enumerate_words(vars, 4)) {
    const double d = static_cast<double>(w.degree());
    three[canonicalize(w)] = d == 0 ? 1.0 : (std::pow(-1.0, d) + 1.0) / 3.0;
  }
  CHECK_FALSE(flatness_check(three, vars, 2));

  MomentValues partial = point(1.0);
  partial.erase(canonicalize(Word{0, 0, 0, 0}));
  CHECK_THROWS_AS(flatness_check(partial, vars, 2), ValidationError);
  CHECK_THROWS_AS(flatness_check(point(1.0), vars, 1), ValidationError);
}

TEST_CASE("extract_first_order") {
  const auto vars = make_variables({"x"});
  MomentValues v{{idx({}), 1.0}, {idx({0}), 0.7}, {idx({0, 0}), 0.49}};
  CHECK(extract_first_order(v, vars).at("x") == 0.7);
  MomentValues zero{{idx({}), 1.0}, {idx({0}), 0.0}};
  CHECK(extract_first_order(zero, vars).at("x") == 0.0);
  CHECK_THROWS_AS(extract_first_order({{idx({}), 1.0}}, vars), ValidationError);
}

TEST_CASE("relaxation bounds are sound and monotone on scalar fixtures") {
  for (const auto& f : fixtures::scalar_suite()) {
    CAPTURE(f.name);
    const auto prob = fixtures::to_problem(f);
    const int k0 = (fixtures::max_degree(f) + 1) / 2;
    const double truth = fixtures::oracle_minimum(f);
    const double lo = solve_bound(prob, k0);
    const double hi = solve_bound(prob, k0 + 1);
    CHECK(lo <= truth + 1e-5 * (1 + std::abs(truth)));
    CHECK(hi <= truth + 1e-5 * (1 + std::abs(truth)));
    CHECK(hi >= lo - 1e-5 * (1 + std::abs(lo)));
  }
}

TEST_CASE("assembly is deterministic") {
  const auto f = fixtures::scalar_suite()[5];
  const auto a = assemble_sdp(fixtures::to_problem(f), RelaxationOrder(2));
  const auto b = assemble_sdp(fixtures::to_problem(f), RelaxationOrder(2));
  CHECK(a.sdp == b.sdp);
  CHECK(a.moments == b.moments);
}
