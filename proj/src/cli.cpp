#include "ugvbs/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ugvbs/allocation.hpp"
#include "ugvbs/experiment.hpp"
#include "ugvbs/planner.hpp"
#include "ugvbs/scenario.hpp"

namespace ugvbs {

namespace {

struct SearchFlags {
  std::uint64_t seed = 1;
  std::size_t L = 3;
  std::size_t iters = 50;
  std::optional<double> speed;
  std::optional<double> noise_dbm;
  bool no_cache = false;
  bool exhaustive = false;
  bool depot_only = false;
  bool visit_all = false;

  void attach(CLI::App &cmd) {
    cmd.add_option("--seed", seed, "Local-search RNG seed");
    cmd.add_option("--L", L, "Neighbourhood radius (bits flipped)")->check(CLI::PositiveNumber);
    cmd.add_option("--iters", iters, "Iteration cap")->check(CLI::PositiveNumber);
    cmd.add_option("--speed", speed, "Override vehicle speed (m/s)")->check(CLI::PositiveNumber);
    cmd.add_option("--noise-dbm", noise_dbm, "Override receiver noise power (dBm)");
    cmd.add_flag("--no-cache", no_cache, "Disable memoization of evaluated selections");
    auto *ex = cmd.add_flag("--exhaustive", exhaustive, "Exhaustive search (M <= 12)");
    auto *dep = cmd.add_flag("--depot-only", depot_only, "Evaluate the no-movement plan");
    auto *all = cmd.add_flag("--visit-all", visit_all, "Evaluate the visit-every-vertex plan");
    ex->excludes(dep)->excludes(all);
    dep->excludes(all);
  }

  SolverConfig config() const {
    SolverConfig c;
    c.neighborhood_L = L;
    c.iter_cap = iters;
    c.rng_seed = seed;
    c.cache_enabled = !no_cache;
    return c;
  }

  Scenario load(const std::string &path) const {
    Scenario s = load_scenario(path);
    if (speed)
      s.params.speed_a = *speed;
    if (noise_dbm)
      s.params.noise_N0 = dbm_to_watt(*noise_dbm);
    s.validate();
    return s;
  }
};

struct Solved {
  PlanOutcome outcome;
  std::optional<SearchResult> search;
  std::string method;
};

Solved solve_with(const Scenario &s, const SearchFlags &f) {
  const SolverConfig cfg = f.config();
  const std::size_t M = s.num_vertices();
  if (f.depot_only)
    return {evaluate_xi(s, Selection::depot_only(M), cfg.tolerances), std::nullopt, "no_move"};
  if (f.visit_all)
    return {evaluate_xi(s, Selection::all(M), cfg.tolerances), std::nullopt, "visit_all"};
  if (f.exhaustive)
    return {exhaustive_search(s, cfg.tolerances), std::nullopt, "exhaustive"};
  SearchResult sr = sls_optimize(s, cfg);
  PlanOutcome best = sr.best;
  return {std::move(best), std::move(sr), "sls"};
}

void write_file(const std::string &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out)
    throw std::runtime_error("failed writing '" + path + "'");
}

std::string order_string(const PlanOutcome &o) {
  std::ostringstream os;
  const auto &order = o.tsp.plan.order;
  for (std::size_t i = 0; i < order.size(); ++i)
    os << (i ? "-" : "") << order[i];
  return os.str();
}

std::vector<double> parse_grid(const std::string &text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  for (std::string cell; std::getline(ss, cell, ',');) {
    if (cell.empty())
      continue;
    grid.push_back(parse_double(cell));
  }
  if (grid.empty())
    throw ValidationError("--noise-grid must list at least one value");
  return grid;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Joint motion and backscatter-communication energy planner"};
  app.require_subcommand(1);

  // solve
  auto *solve = app.add_subcommand("solve", "Plan a tour and allocation for one scenario");
  std::string solve_scenario, solve_out;
  SearchFlags solve_flags;
  solve->add_option("--scenario", solve_scenario, "Scenario file")->required();
  solve->add_option("--out", solve_out, "Result document path");
  solve_flags.attach(*solve);

  // sweep
  auto *sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over noise power");
  std::string spec_path, sweep_out, grid_text;
  std::optional<std::size_t> runs, jobs, sweep_M, sweep_K, sweep_L, sweep_iters;
  std::optional<std::uint64_t> master_seed;
  std::optional<double> sweep_speed;
  bool sweep_no_cache = false, sweep_exhaustive = false, sweep_timing = false;
  sweep->add_option("--spec", spec_path, "Experiment spec file");
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  sweep->add_option("--runs", runs, "Number of Monte-Carlo runs")->check(CLI::PositiveNumber);
  sweep->add_option("--noise-grid", grid_text, "Comma-separated noise powers (dBm)");
  sweep->add_option("--seed", master_seed, "Master seed");
  sweep->add_option("--M", sweep_M, "Number of stopping points")->check(CLI::PositiveNumber);
  sweep->add_option("--K", sweep_K, "Number of users")->check(CLI::PositiveNumber);
  sweep->add_option("--L", sweep_L, "Neighbourhood radius")->check(CLI::PositiveNumber);
  sweep->add_option("--iters", sweep_iters, "Iteration cap")->check(CLI::PositiveNumber);
  sweep->add_option("--speed", sweep_speed, "Vehicle speed (m/s)")->check(CLI::PositiveNumber);
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_flag("--no-cache", sweep_no_cache, "Disable memoization");
  sweep->add_flag("--exhaustive", sweep_exhaustive, "Add the exhaustive oracle (M <= 12)");
  sweep->add_flag("--timing", sweep_timing, "Add a wall-time column (not reproducible)");

  // trace
  auto *trace = app.add_subcommand("trace", "Dump the local-search objective trace");
  std::string trace_scenario, trace_out;
  SearchFlags trace_flags;
  trace->add_option("--scenario", trace_scenario, "Scenario file")->required();
  trace->add_option("--out", trace_out, "CSV path (stdout if omitted)");
  trace_flags.attach(*trace);

  // path-dump
  auto *path = app.add_subcommand("path-dump", "Dump plot-ready geometry of the chosen tour");
  std::string path_scenario, path_out;
  SearchFlags path_flags;
  path->add_option("--scenario", path_scenario, "Scenario file")->required();
  path->add_option("--out", path_out, "CSV path (stdout if omitted)");
  path_flags.attach(*path);

  // gen-scenario
  auto *gen = app.add_subcommand("gen-scenario", "Generate a random scenario file");
  GenerateOptions gen_opts;
  double gen_noise_dbm = -70.0;
  std::string gen_fading = "rayleigh", gen_out;
  gen->add_option("--seed", gen_opts.seed, "Scenario seed");
  gen->add_option("--M", gen_opts.num_vertices, "Number of stopping points")
      ->check(CLI::Range(std::size_t{1}, kMaxVertices));
  gen->add_option("--K", gen_opts.num_users, "Number of users")->check(CLI::PositiveNumber);
  gen->add_option("--area", gen_opts.area_side, "Side of the square area (m)")
      ->check(CLI::PositiveNumber);
  gen->add_option("--noise-dbm", gen_noise_dbm, "Receiver noise power (dBm)");
  gen->add_option("--speed", gen_opts.params.speed_a, "Vehicle speed (m/s)")
      ->check(CLI::PositiveNumber);
  gen->add_option("--fading", gen_fading, "rayleigh or none")
      ->check(CLI::IsMember({"rayleigh", "none"}));
  gen->add_option("--out", gen_out, "Scenario file path")->required();

  // fit-beta
  auto *fit = app.add_subcommand("fit-beta", "Fit the OOK modulation loss beta");
  double grid_max = 10.0;
  std::size_t grid_points = 1000;
  fit->add_option("--grid-max", grid_max, "Largest SNR on the fit grid")
      ->check(CLI::PositiveNumber);
  fit->add_option("--points", grid_points, "Number of grid points (>= 10)")
      ->check(CLI::Range(std::size_t{10}, std::size_t{10000000}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*solve) {
      const Scenario s = solve_flags.load(solve_scenario);
      const Solved r = solve_with(s, solve_flags);
      if (!solve_out.empty())
        write_file(solve_out, result_document(s, r.outcome, r.search ? &*r.search : nullptr,
                                              r.method));
      out << "method=" << r.method << " xi=" << format_double(r.outcome.xi)
          << " motion=" << format_double(r.outcome.energy_motion)
          << " comm=" << format_double(r.outcome.energy_comm)
          << " visited=" << r.outcome.selection.count() << " order=" << order_string(r.outcome)
          << " speed=" << format_double(s.params.speed_a);
      if (r.search)
        out << " exit=" << to_string(r.search->exit) << " best=" << r.search->best_source;
      if (r.outcome.high_power_warning)
        out << " warning=high_power";
      out << '\n';
      return r.outcome.feasible() ? kExitOk : kExitInfeasible;
    }

    if (*sweep) {
      ExperimentSpec spec = spec_path.empty() ? ExperimentSpec{} : load_experiment_spec(spec_path);
      if (runs)
        spec.runs = *runs;
      if (!grid_text.empty())
        spec.noise_grid_dbm = parse_grid(grid_text);
      if (master_seed)
        spec.master_seed = *master_seed;
      if (sweep_M)
        spec.num_vertices = *sweep_M;
      if (sweep_K)
        spec.num_users = *sweep_K;
      if (sweep_L)
        spec.solver.neighborhood_L = *sweep_L;
      if (sweep_iters)
        spec.solver.iter_cap = *sweep_iters;
      if (sweep_speed)
        spec.params.speed_a = *sweep_speed;
      if (jobs)
        spec.jobs = *jobs;
      if (sweep_no_cache)
        spec.solver.cache_enabled = false;
      if (sweep_exhaustive)
        spec.exhaustive = true;
      if (sweep_timing)
        spec.timing = true;
      spec.validate();

      const std::filesystem::path dir(sweep_out);
      std::filesystem::create_directories(dir);
      const auto rows = run_sweep(spec);
      {
        std::ostringstream os;
        write_rows_csv(os, rows, spec.timing);
        write_file((dir / "rows.csv").string(), os.str());
      }
      const auto agg = aggregate(rows);
      {
        std::ostringstream os;
        write_aggregate_csv(os, agg);
        write_file((dir / "aggregate.csv").string(), os.str());
      }
      write_file((dir / "spec.json").string(), experiment_spec_to_json(spec));
      out << "wrote " << rows.size() << " rows and " << agg.size() << " aggregates to "
          << dir.string() << '\n';
      return kExitOk;
    }

    if (*trace) {
      const Scenario s = trace_flags.load(trace_scenario);
      const SearchResult sr = sls_optimize(s, trace_flags.config());
      std::ostringstream os;
      write_trace_csv(os, sr, s.params.speed_a);
      if (trace_out.empty())
        out << os.str();
      else
        write_file(trace_out, os.str());
      return sr.incumbent.feasible() ? kExitOk : kExitInfeasible;
    }

    if (*path) {
      const Scenario s = path_flags.load(path_scenario);
      const Solved r = solve_with(s, path_flags);
      std::ostringstream os;
      write_path_csv(os, s, r.outcome);
      if (path_out.empty())
        out << os.str();
      else
        write_file(path_out, os.str());
      return r.outcome.feasible() ? kExitOk : kExitInfeasible;
    }

    if (*gen) {
      gen_opts.params.noise_N0 = dbm_to_watt(gen_noise_dbm);
      gen_opts.channel.fading = fading_from_string(gen_fading);
      save_scenario(generate_scenario(gen_opts), gen_out);
      out << "wrote " << gen_out << '\n';
      return kExitOk;
    }

    if (*fit) {
      out << "beta_ook=" << format_double(fit_beta_ook(grid_max, grid_points))
          << " beta_fsk=" << format_double(kBetaFsk) << '\n';
      return kExitOk;
    }
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

} // namespace ugvbs
