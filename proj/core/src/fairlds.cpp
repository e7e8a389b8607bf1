#include "ncfair/fairlds.hpp"

#include <algorithm>

#include "ncfair/error.hpp"

namespace ncfair::fairlds {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::subgroup_fair: return "subgroup_fair";
    case Mode::instant_fair: return "instant_fair";
    case Mode::unfair: return "unfair";
  }
  return "unknown";
}

std::string_view to_string(LossEncoding e) {
  return e == LossEncoding::squared ? "squared" : "absolute";
}

Mode parse_mode(std::string_view s) {
  if (s == "subgroup_fair" || s == "subgroup-fair") return Mode::subgroup_fair;
  if (s == "instant_fair" || s == "instant-fair") return Mode::instant_fair;
  if (s == "unfair") return Mode::unfair;
  throw ValidationError("unknown mode '" + std::string(s) + "'");
}

LossEncoding parse_loss_encoding(std::string_view s) {
  if (s == "squared") return LossEncoding::squared;
  if (s == "absolute") return LossEncoding::absolute;
  throw ValidationError("unknown loss encoding '" + std::string(s) + "'");
}

FairnessModelSpec FairnessModelSpec::defaults(Mode mode) {
  FairnessModelSpec spec;
  spec.mode = mode;
  spec.lambda = mode == Mode::subgroup_fair ? 5.0 : 1.0;
  return spec;
}

double default_ball_radius(const TrajectorySet& data) { return 10.0 * (1.0 + data.max_abs_value()); }

OperatorLayout::OperatorLayout(std::vector<int> periods, int hidden_dim, bool has_z)
    : periods_(std::move(periods)), n_(hidden_dim), has_z_(has_z) {
  if (n_ < 1) throw ValidationError("hidden dimension must be at least 1");
  if (periods_.empty()) throw ValidationError("no periods");
  std::sort(periods_.begin(), periods_.end());
  if (periods_.front() < 1) throw ValidationError("periods must be positive");
  rebuild();
}

std::string OperatorLayout::comp(const std::string& base, int c) const {
  return n_ == 1 ? base : base + "_" + std::to_string(c + 1);
}

std::string OperatorLayout::G(int row, int col) const {
  return n_ == 1 ? "G" : "G_" + std::to_string(row + 1) + "_" + std::to_string(col + 1);
}
std::string OperatorLayout::F(int c) const { return comp("F", c); }
std::string OperatorLayout::m(int t, int c) const { return comp("m" + std::to_string(t), c); }
std::string OperatorLayout::omega(int t, int c) const { return comp("w" + std::to_string(t), c); }
std::string OperatorLayout::nu(int t) const { return "nu" + std::to_string(t); }
std::string OperatorLayout::f(int t) const { return "f" + std::to_string(t); }

int OperatorLayout::previous(int t) const {
  auto it = std::lower_bound(periods_.begin(), periods_.end(), t);
  if (it == periods_.end() || *it != t) throw ValidationError("period " + std::to_string(t) + " not in T+");
  return it == periods_.begin() ? 0 : *std::prev(it);
}

std::size_t OperatorLayout::expected_count(std::size_t periods, int hidden_dim, bool has_z) {
  const auto n = static_cast<std::size_t>(hidden_dim);
  return n * n + n + (periods + 1) * n + periods * n + 2 * periods + (has_z ? 1 : 0);
}

void OperatorLayout::add_auxiliary(std::vector<std::string> names) {
  aux_.insert(aux_.end(), names.begin(), names.end());
  rebuild();
}

void OperatorLayout::rebuild() {
  std::vector<std::string> names;
  for (int r = 0; r < n_; ++r)
    for (int c = 0; c < n_; ++c) names.push_back(G(r, c));
  for (int c = 0; c < n_; ++c) names.push_back(F(c));
  for (int c = 0; c < n_; ++c) names.push_back(m(0, c));
  for (int t : periods_)
    for (int c = 0; c < n_; ++c) names.push_back(m(t, c));
  for (int t : periods_)
    for (int c = 0; c < n_; ++c) names.push_back(omega(t, c));
  for (int t : periods_) names.push_back(nu(t));
  for (int t : periods_) names.push_back(f(t));
  if (has_z_) names.push_back(z());
  names.insert(names.end(), aux_.begin(), aux_.end());
  vars_ = make_variables(std::move(names));
}

FairModel build_model(const TrajectorySet& data, const FairnessModelSpec& spec) {
  if (data.empty()) throw ValidationError("no observations");
  if (!(spec.lambda >= 0.0)) throw ValidationError("lambda must be non-negative");
  if (spec.hidden_dim < 1) throw ValidationError("hidden dimension must be at least 1");
  if (spec.ball_radius && !(*spec.ball_radius > 0.0)) throw ValidationError("ball radius must be positive");
  const bool fair = spec.mode != Mode::unfair;
  const bool absolute = spec.loss == LossEncoding::absolute;
  const int n = spec.hidden_dim;

  OperatorLayout layout(data.horizon(), n, fair);
  // Epigraph variables for |Y - f| wherever a loss is summed.
  const bool needs_aux = absolute && spec.mode != Mode::instant_fair;
  auto aux_name = [](const ObservationKey& k) {
    return "abs[" + k.subgroup + "," + k.trajectory + "," + std::to_string(k.period) + "]";
  };
  if (needs_aux) {
    std::vector<std::string> names;
    for (const auto& [key, y] : data.observations()) names.push_back(aux_name(key));
    layout.add_auxiliary(std::move(names));
  }
  const VariableSet& vars = layout.vars();
  auto var = [&](const std::string& name) { return Polynomial::variable(vars, name); };

  // Loss of one observation, as a polynomial of degree <= 2.
  auto loss = [&](const ObservationKey& key, double y) {
    if (absolute) return var(aux_name(key));
    const Polynomial r = Polynomial(vars, y) - var(layout.f(key.period));
    return r * r;
  };

  NCPOPProblem prob;
  prob.vars = vars;
  prob.ball_radius = spec.ball_radius ? *spec.ball_radius : default_ball_radius(data);

  Polynomial noise(vars);
  for (int t : layout.periods()) noise += var(layout.nu(t)) * var(layout.nu(t));
  noise *= spec.lambda;

  if (needs_aux) {
    for (const auto& [key, y] : data.observations()) {
      const Polynomial r = Polynomial(vars, y) - var(layout.f(key.period));
      prob.inequalities.push_back(var(aux_name(key)) - r);
      prob.inequalities.push_back(var(aux_name(key)) + r);
    }
  }

  switch (spec.mode) {
    case Mode::subgroup_fair: {
      prob.objective = var(layout.z()) + noise;
      for (const auto& s : data.subgroups()) {
        const auto ids = data.trajectories(s);
        Polynomial avg(vars);
        for (const auto& i : ids) {
          const auto series = data.series(s, i);
          Polynomial sum(vars);
          for (const auto& [t, y] : series) sum += loss({s, i, t}, y);
          avg += sum * (1.0 / static_cast<double>(series.size()));
        }
        avg *= 1.0 / static_cast<double>(ids.size());
        prob.inequalities.push_back(var(layout.z()) - avg);
      }
      break;
    }
    case Mode::instant_fair: {
      prob.objective = var(layout.z()) + noise;
      for (const auto& [key, y] : data.observations()) {
        if (absolute) {
          const Polynomial r = Polynomial(vars, y) - var(layout.f(key.period));
          prob.inequalities.push_back(var(layout.z()) - r);
          prob.inequalities.push_back(var(layout.z()) + r);
        } else {
          prob.inequalities.push_back(var(layout.z()) - loss(key, y));
        }
      }
      break;
    }
    case Mode::unfair: {
      Polynomial total(vars);
      for (const auto& [key, y] : data.observations()) total += loss(key, y);
      prob.objective = total + noise;
      break;
    }
  }

  for (int t : layout.periods()) {
    const int prev = layout.previous(t);
    for (int r = 0; r < n; ++r) {
      Polynomial e = var(layout.m(t, r)) - var(layout.omega(t, r));
      for (int c = 0; c < n; ++c) e -= var(layout.G(r, c)) * var(layout.m(prev, c));
      prob.equalities.push_back(std::move(e));
    }
    Polynomial e = var(layout.f(t)) - var(layout.nu(t));
    for (int c = 0; c < n; ++c) e -= var(layout.F(c)) * var(layout.m(t, c));
    prob.equalities.push_back(std::move(e));
  }
  return {std::move(prob), std::move(layout)};
}

FairSolveReport solve_fair(const TrajectorySet& data, const FairnessModelSpec& spec,
                           const sdp::SolverConfig& cfg) {
  const auto model = build_model(data, spec);
  const auto rel = assemble_sdp(model.problem, RelaxationOrder(spec.relaxation_order));
  const auto sol = sdp::solve(rel.sdp, cfg);
  const auto moments = rel.moment_values(sol.values);
  const auto first = extract_first_order(moments, model.layout.vars());
  const auto& L = model.layout;
  const int n = L.hidden_dim();

  FairSolveReport rep;
  rep.mode = spec.mode;
  rep.lambda = spec.lambda;
  rep.relaxation_order = spec.relaxation_order;
  rep.objective_value = sol.objective_value;
  rep.solver = {sol.status, sol.primal_residual, sol.dual_residual, sol.gap, sol.iterations, sol.wall_time};
  rep.operator_count = L.vars().size();
  rep.moment_count = rel.sdp.num_vars;
  rep.sdp_dim = rel.moment_matrix_dim;

  rep.G_estimate.resize(n, n);
  rep.F_estimate.resize(n);
  for (int r = 0; r < n; ++r) {
    rep.F_estimate(r) = first.at(L.F(r));
    for (int c = 0; c < n; ++c) rep.G_estimate(r, c) = first.at(L.G(r, c));
  }
  auto state = [&](int t) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) v[static_cast<std::size_t>(c)] = first.at(L.m(t, c));
    return v;
  };
  rep.state_estimates.emplace(0, state(0));
  for (int t : L.periods()) {
    rep.forecasts.emplace(t, first.at(L.f(t)));
    rep.state_estimates.emplace(t, state(t));
    rep.nu_estimates.emplace(t, first.at(L.nu(t)));
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) w[static_cast<std::size_t>(c)] = first.at(L.omega(t, c));
    rep.omega_estimates.emplace(t, std::move(w));
  }
  if (L.has_z()) rep.z_value = first.at(OperatorLayout::z());
  if (spec.relaxation_order >= 2) rep.flat = flatness_check(moments, L.vars(), spec.relaxation_order);
  return rep;
}

std::vector<double> forecast_next(const FairSolveReport& report, int steps) {
  if (steps < 1) throw ValidationError("steps must be at least 1");
  if (!report.optimal()) throw ValidationError("report does not come from an optimal solve");
  if (report.state_estimates.empty()) throw ValidationError("report has no state estimates");
  const auto& last = report.state_estimates.rbegin()->second;
  Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(last.data(), static_cast<Eigen::Index>(last.size()));
  if (report.G_estimate.rows() != m.size() || report.F_estimate.size() != m.size())
    throw ValidationError("report dimensions disagree");
  std::vector<double> out;
  for (int s = 0; s < steps; ++s) {
    m = report.G_estimate * m;
    out.push_back(report.F_estimate.dot(m));
  }
  return out;
}

}  // namespace ncfair::fairlds
