#pragma once

// Univariate NCPOPs (one hermitian variable is commutative, so a scalar
// oracle gives the true optimum).

#include <string>
#include <vector>

#include "ncfair/ncpoly.hpp"
#include "ncfair/npa.hpp"
#include "support/oracles.hpp"

namespace fixtures {

struct Scalar {
  std::string name;
  oracle::Coeffs objective;
  std::vector<oracle::Coeffs> inequalities;
  std::vector<oracle::Coeffs> equalities;
  double lo, hi;  // search box for the oracle; must contain the minimiser
};

inline std::vector<Scalar> scalar_suite() {
  return {
      {"(x-1)^2", {1, -2, 1}, {}, {}, -20, 20},
      {"x on 1-x^2>=0", {0, 1}, {{1, 0, -1}}, {}, -20, 20},
      {"double well", {0, 1, -3, 0, 1}, {}, {}, -20, 20},
      {"x^2(x-2)^2+1", {1, 0, 4, -4, 1}, {}, {}, -20, 20},
      {"-x^2 on 4-x^2>=0", {0, 0, -1}, {{4, 0, -1}}, {}, -20, 20},
      {"x^3 on [-1,2]", {0, 0, 0, 1}, {{2, 1, -1}}, {}, -20, 20},
      {"x^2+3x on [0,2]", {0, 3, 1}, {{0, 2, -1}}, {}, -20, 20},
      {"x^3+x on x^2=4", {0, 1, 0, 1}, {}, {{-4, 0, 1}}, -20, 20},
      {"-x^4+x on [-1,1]", {0, 1, 0, 0, -1}, {{1, 0, -1}}, {}, -20, 20},
      {"3x^4+4x^3-12x^2", {0, 0, -12, 4, 3}, {}, {}, -20, 20},
  };
}

inline ncfair::Polynomial to_poly(const ncfair::VariableSet& vars, const oracle::Coeffs& c) {
  ncfair::Polynomial p(vars);
  for (std::size_t e = 0; e < c.size(); ++e) p.add_term(ncfair::Word(std::vector<ncfair::Letter>(e, 0)), c[e]);
  return p;
}

inline ncfair::NCPOPProblem to_problem(const Scalar& f) {
  const auto vars = ncfair::make_variables({"x"});
  ncfair::NCPOPProblem prob;
  prob.vars = vars;
  prob.objective = to_poly(vars, f.objective);
  for (const auto& q : f.inequalities) prob.inequalities.push_back(to_poly(vars, q));
  for (const auto& e : f.equalities) prob.equalities.push_back(to_poly(vars, e));
  return prob;
}

inline int max_degree(const Scalar& f) {
  std::size_t d = f.objective.size();
  for (const auto& q : f.inequalities) d = std::max(d, q.size());
  for (const auto& e : f.equalities) d = std::max(d, e.size());
  return static_cast<int>(d) - 1;
}

inline double oracle_minimum(const Scalar& f) {
  return oracle::scalar_minimum(f.objective, f.inequalities, f.equalities, f.lo, f.hi);
}

}  // namespace fixtures
