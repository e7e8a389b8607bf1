#include "commands.hpp"

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>

#include <CLI11.hpp>

#include "ncfair/compas.hpp"
#include "ncfair/datagen.hpp"
#include "ncfair/error.hpp"
#include "ncfair/evalio.hpp"
#include "ncfair/npa.hpp"
#include "ncfair/sdpa_format.hpp"

namespace ncfair::cli {

namespace {

// Shortest text that reads back to the same double.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_grid(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items) {
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ValidationError("bad beta_d value '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError("empty beta grid");
  return out;
}

std::vector<fairlds::Mode> parse_modes(const std::vector<std::string>& names) {
  std::vector<fairlds::Mode> out;
  for (const auto& n : names) out.push_back(fairlds::parse_mode(n));
  if (out.empty()) throw ValidationError("no modes given");
  return out;
}

// Writes to `path`, or to `out` when the path is "-".
template <class F>
void emit(const std::string& path, std::ostream& out, F&& body) {
  if (path == "-") {
    body(out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  body(f);
  if (!f.flush()) throw IoError("failed writing '" + path + "'");
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t beta_index, int repeat) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(beta_index), static_cast<std::uint32_t>(repeat)};
  std::uint32_t w[2];
  seq.generate(w, w + 2);
  return (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
}

// --seed, else NCFAIR_SEED, else 1.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("NCFAIR_SEED"); env && *env) {
    char* end = nullptr;
    errno = 0;
    const auto v = std::strtoull(env, &end, 10);
    if (*end != '\0' || errno == ERANGE || *env == '-')
      throw ValidationError(std::string("NCFAIR_SEED is not an unsigned integer: '") + env + "'");
    return v;
  }
  return 1;
}

struct SolveFlags {
  std::string mode = "subgroup_fair";
  std::optional<double> lambda;
  int order = 1;
  int hidden_dim = 1;
  std::string loss = "squared";
  std::optional<double> ball_radius;
  double tolerance = 1e-6;
  int max_iterations = 50000;

  void attach(CLI::App* cmd) {
    cmd->add_option("--mode", mode, "subgroup_fair, instant_fair or unfair")->capture_default_str();
    cmd->add_option("--lambda", lambda, "noise multiplier (default depends on the mode)");
    cmd->add_option("--order", order, "relaxation order k")->capture_default_str();
    cmd->add_option("--hidden-dim", hidden_dim, "hidden state dimension n")->capture_default_str();
    cmd->add_option("--loss", loss, "squared or absolute")->capture_default_str();
    cmd->add_option("--ball-radius", ball_radius, "radius of the ball constraint");
    cmd->add_option("--tolerance", tolerance, "solver tolerance")->capture_default_str();
    cmd->add_option("--max-iterations", max_iterations, "solver iteration cap")->capture_default_str();
  }
  fairlds::FairnessModelSpec spec() const {
    auto s = fairlds::FairnessModelSpec::defaults(fairlds::parse_mode(mode));
    if (lambda) s.lambda = *lambda;
    s.relaxation_order = order;
    s.hidden_dim = hidden_dim;
    s.loss = fairlds::parse_loss_encoding(loss);
    s.ball_radius = ball_radius;
    return s;
  }
  sdp::SolverConfig solver() const {
    sdp::SolverConfig c;
    c.tolerance = tolerance;
    c.max_iterations = max_iterations;
    return c;
  }
};

void log_status(std::ostream& err, const fairlds::FairSolveReport& r) {
  err << "status " << sdp::to_string(r.solver.status) << ", objective " << num(r.objective_value) << ", "
      << r.solver.iterations << " iterations, " << num(r.solver.wall_time) << " s\n";
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  if (cfg.beta_grid.empty()) throw ValidationError("empty beta grid");
  if (cfg.repeats < 1) throw ValidationError("repeats must be at least 1");
  if (cfg.modes.empty()) throw ValidationError("no modes given");
  if (cfg.advantaged < 1) throw ValidationError("need at least one advantaged trajectory");
  for (double b : cfg.beta_grid)
    if (!(b >= 0.0 && b <= 1.0)) throw ValidationError("beta_d must lie in [0, 1]");

  // One ground set; only the biasing is redrawn per cell.
  const auto ground = datagen::keep_trajectories(datagen::generate_paper_dataset(cfg.seed, cfg.horizon),
                                                 datagen::kAdvantaged, static_cast<std::size_t>(cfg.advantaged));
  std::vector<SweepRow> rows;
  for (auto mode : cfg.modes)
    for (std::size_t bi = 0; bi < cfg.beta_grid.size(); ++bi)
      for (int r = 0; r < cfg.repeats; ++r) {
        const double beta_d = cfg.beta_grid[bi];
        const datagen::BiasConfig bias{
            {{datagen::kAdvantaged, cfg.beta_a}, {datagen::kDisadvantaged, beta_d}}, cell_seed(cfg.seed, bi, r), true};
        const auto train = datagen::apply_bias(ground, bias);
        const auto rep = fairlds::solve_fair(train, fairlds::FairnessModelSpec::defaults(mode), cfg.solver);
        const double a = evalio::nrmse(ground, rep.forecasts, datagen::kAdvantaged);
        const double d = evalio::nrmse(ground, rep.forecasts, datagen::kDisadvantaged);
        rows.push_back({mode, beta_d, r, a, d, std::abs(d - a), rep.optimal()});
      }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "mode,beta_d,repeat,nrmse_a,nrmse_d,gap\n";
  for (const auto& r : rows)
    out << fairlds::to_string(r.mode) << ',' << num(r.beta_d) << ',' << r.repeat << ',' << num(r.nrmse_a) << ','
        << num(r.nrmse_d) << ',' << num(r.gap) << '\n';
}

std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  if (cfg.horizons.empty()) throw ValidationError("no horizons given");
  for (int T : cfg.horizons)
    if (T < 2) throw ValidationError("horizons must be at least 2");
  if (cfg.modes.empty()) throw ValidationError("no modes given");
  if (cfg.repeats < 1) throw ValidationError("repeats must be at least 1");

  std::vector<BenchRow> rows;
  for (auto mode : cfg.modes)
    for (int T : cfg.horizons) {
      const auto data = datagen::generate_paper_dataset(cfg.seed, T);
      const auto spec = fairlds::FairnessModelSpec::defaults(mode);
      BenchRow row{mode, T, 0, 0, 0.0};
      if (!cfg.solve) {
        const auto model = fairlds::build_model(data, spec);
        const auto rel = assemble_sdp(model.problem, RelaxationOrder(spec.relaxation_order));
        row.moment_count = rel.sdp.num_vars;
        row.sdp_dim = rel.moment_matrix_dim;
      } else {
        double total = 0;
        for (int r = 0; r < cfg.repeats; ++r) {
          const auto start = std::chrono::steady_clock::now();
          const auto rep = fairlds::solve_fair(data, spec, cfg.solver);
          total += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          row.moment_count = rep.moment_count;
          row.sdp_dim = rep.sdp_dim;
        }
        row.wall_time = total / cfg.repeats;
      }
      rows.push_back(row);
    }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "mode,T,moment_count,sdp_dim,wall_time\n";
  for (const auto& r : rows)
    out << fairlds::to_string(r.mode) << ',' << r.T << ',' << r.moment_count << ',' << r.sdp_dim << ','
        << num(r.wall_time) << '\n';
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fair learning of linear dynamical systems through moment relaxations"};
  app.name("ncfair");
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed_flag;
  int code = kOk;

  // gen
  auto* gen = app.add_subcommand("gen", "generate the two-subgroup benchmark and bias it");
  std::string gen_out = "-";
  double beta_a = 1.0, beta_d = 1.0;
  int gen_horizon = 20;
  bool paper_defaults = false, no_guard = false;
  gen->add_option("--seed", seed_flag, "random seed (falls back to NCFAIR_SEED)");
  gen->add_option("--out", gen_out, "trajectory CSV, '-' for stdout")->capture_default_str();
  gen->add_option("--beta-a", beta_a, "retention probability, advantaged subgroup")->capture_default_str();
  gen->add_option("--beta-d", beta_d, "retention probability, disadvantaged subgroup")->capture_default_str();
  gen->add_option("--horizon", gen_horizon, "periods per trajectory")->capture_default_str();
  gen->add_flag("--paper-defaults", paper_defaults, "published settings: horizon 20, 3 + 2 trajectories");
  gen->add_flag("--no-guard", no_guard, "allow periods without disadvantaged observations");
  gen->callback([&] {
    const auto seed = resolve_seed(seed_flag);
    const int horizon = paper_defaults ? 20 : gen_horizon;
    if (horizon < 1) throw ValidationError("horizon must be at least 1");
    const auto full = datagen::generate_paper_dataset(seed, horizon);
    const auto data = datagen::apply_bias(
        full, {{{datagen::kAdvantaged, beta_a}, {datagen::kDisadvantaged, beta_d}}, seed, !no_guard});
    emit(gen_out, out, [&](std::ostream& o) { evalio::write_trajectories_csv(data, o); });
    err << "kept " << data.size() << " of " << full.size() << " observations\n";
  });

  // solve
  auto* solve = app.add_subcommand("solve", "fit one model to a trajectory CSV");
  std::string solve_data, solve_out = "-";
  SolveFlags solve_flags;
  solve->add_option("--data", solve_data, "trajectory CSV")->required();
  solve->add_option("--out", solve_out, "JSON report, '-' for stdout")->capture_default_str();
  solve_flags.attach(solve);
  solve->callback([&] {
    const auto data = evalio::load_trajectories_csv(solve_data);
    const auto rep = fairlds::solve_fair(data, solve_flags.spec(), solve_flags.solver());
    emit(solve_out, out, [&](std::ostream& o) { o << evalio::to_json(rep).dump(2) << '\n'; });
    log_status(err, rep);
    if (!rep.optimal()) code = kNonOptimal;
  });

  // eval
  auto* eval = app.add_subcommand("eval", "score a solve report against trajectory data");
  std::string eval_data, eval_report, eval_out = "-";
  eval->add_option("--data", eval_data, "trajectory CSV")->required();
  eval->add_option("--report", eval_report, "JSON report from 'solve'")->required();
  eval->add_option("--out", eval_out, "JSON evaluation, '-' for stdout")->capture_default_str();
  eval->callback([&] {
    const auto data = evalio::load_trajectories_csv(eval_data);
    const auto rep = evalio::solve_report_from_json(evalio::read_json(eval_report));
    const auto ev = evalio::evaluate(data, rep);
    emit(eval_out, out, [&](std::ostream& o) { o << evalio::to_json(ev).dump(2) << '\n'; });
  });

  // sweep
  auto* sweep = app.add_subcommand("sweep", "NRMSE gaps over a grid of disadvantaged retention rates");
  std::vector<std::string> grid;
  std::vector<std::string> sweep_modes{"subgroup_fair", "instant_fair", "unfair"};
  std::string sweep_out = "-";
  SweepConfig sweep_cfg;
  sweep->add_option("--beta-grid", grid, "beta_d values, comma separated")->delimiter(',')->required();
  sweep->add_option("--repeats", sweep_cfg.repeats, "repeats per grid point")->capture_default_str();
  sweep->add_option("--modes", sweep_modes, "modes, comma separated")->delimiter(',')->capture_default_str();
  sweep->add_option("--out", sweep_out, "CSV, '-' for stdout")->capture_default_str();
  sweep->add_option("--seed", seed_flag, "random seed (falls back to NCFAIR_SEED)");
  sweep->add_option("--horizon", sweep_cfg.horizon, "periods per trajectory")->capture_default_str();
  sweep->add_option("--advantaged", sweep_cfg.advantaged, "advantaged trajectories used")->capture_default_str();
  sweep->add_option("--beta-a", sweep_cfg.beta_a, "retention probability, advantaged subgroup")
      ->capture_default_str();
  sweep->callback([&] {
    sweep_cfg.beta_grid = parse_grid(grid);
    sweep_cfg.modes = parse_modes(sweep_modes);
    sweep_cfg.seed = resolve_seed(seed_flag);
    if (!(sweep_cfg.beta_a >= 0.0 && sweep_cfg.beta_a <= 1.0)) throw ValidationError("beta_a must lie in [0, 1]");
    const auto rows = run_sweep(sweep_cfg);
    emit(sweep_out, out, [&](std::ostream& o) { write_sweep_csv(rows, o); });
    std::size_t bad = 0;
    for (const auto& r : rows) bad += r.optimal ? 0 : 1;
    if (bad) {
      err << bad << " of " << rows.size() << " solves were not optimal\n";
      code = kNonOptimal;
    }
  });

  // bench
  auto* bench = app.add_subcommand("bench", "relaxation size and solve time against the horizon");
  std::vector<int> horizons;
  std::vector<std::string> bench_modes{"subgroup_fair", "instant_fair"};
  std::string bench_out = "-";
  BenchConfig bench_cfg;
  bench->add_option("--horizons", horizons, "horizons, comma separated")->delimiter(',')->required();
  bench->add_option("--modes", bench_modes, "modes, comma separated")->delimiter(',')->capture_default_str();
  bench->add_option("--out", bench_out, "CSV, '-' for stdout")->capture_default_str();
  bench->add_option("--seed", seed_flag, "random seed (falls back to NCFAIR_SEED)");
  bench->callback([&] {
    bench_cfg.horizons = horizons;
    bench_cfg.modes = parse_modes(bench_modes);
    bench_cfg.seed = resolve_seed(seed_flag);
    const auto rows = run_bench(bench_cfg);
    emit(bench_out, out, [&](std::ostream& o) { write_bench_csv(rows, o); });
  });

  // compas
  auto* comp = app.add_subcommand("compas", "extract score trajectories from a COMPAS CSV and fit them");
  std::string csv_path, column_map, compas_out = "-", traj_out;
  SolveFlags compas_flags;
  compas::CompasFilter filter;
  comp->add_option("--csv", csv_path, "COMPAS CSV")->required();
  comp->add_option("--column-map", column_map, "key=column list, JSON object or JSON file");
  comp->add_option("--out", compas_out, "JSON report, '-' for stdout")->capture_default_str();
  comp->add_option("--trajectories-out", traj_out, "trajectory CSV (default: next to --out)");
  comp->add_option("--max-priors", filter.max_priors, "largest priors count kept")->capture_default_str();
  comp->add_option("--period-days", filter.period_days, "days per period")->capture_default_str();
  compas_flags.attach(comp);
  comp->callback([&] {
    const auto ex = compas::compas_extract_detailed(csv_path, filter, compas::ColumnMap::parse(column_map));
    for (const auto& w : ex.warnings) err << "warning: " << w << '\n';
    err << "retained " << ex.retained_rows << " of " << ex.total_rows << " rows\n";
    std::string traj = traj_out;
    if (traj.empty() && compas_out != "-")
      traj = std::filesystem::path(compas_out).replace_extension(".trajectories.csv").string();
    if (!traj.empty()) evalio::save_trajectories_csv(ex.trajectories, traj);
    if (ex.trajectories.empty()) throw ValidationError("no trajectories to fit");
    const auto rep = fairlds::solve_fair(ex.trajectories, compas_flags.spec(), compas_flags.solver());
    emit(compas_out, out, [&](std::ostream& o) { o << evalio::to_json(rep).dump(2) << '\n'; });
    log_status(err, rep);
    if (!rep.optimal()) code = kNonOptimal;
  });

  // export
  auto* exp = app.add_subcommand("export", "write the relaxation of a model in sparse SDPA format");
  std::string exp_data, exp_out = "-";
  SolveFlags exp_flags;
  exp->add_option("--data", exp_data, "trajectory CSV")->required();
  exp->add_option("--out", exp_out, "dat-s file, '-' for stdout")->capture_default_str();
  exp_flags.attach(exp);
  exp->callback([&] {
    const auto data = evalio::load_trajectories_csv(exp_data);
    const auto spec = exp_flags.spec();
    const auto model = fairlds::build_model(data, spec);
    const auto rel = assemble_sdp(model.problem, RelaxationOrder(spec.relaxation_order));
    emit(exp_out, out, [&](std::ostream& o) { sdp::write_sparse_sdpa(rel.sdp, o); });
    err << rel.sdp.num_vars << " moments, " << rel.sdp.blocks.size() << " blocks\n";
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kInputError;
  } catch (const std::exception& e) {
    // Validation, parse, I/O and degenerate-metric errors are all input problems.
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return code;
}

}  // namespace ncfair::cli
