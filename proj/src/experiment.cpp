#include "ugvbs/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <chrono>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json_fields.hpp"

namespace ugvbs {

using detail::json;

// ---------------------------------------------------------------------------
// Seeds
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t splitmix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

} // namespace

std::uint64_t run_seed(std::uint64_t master, std::size_t run) {
  return splitmix64(master + (static_cast<std::uint64_t>(run) + 1) * kGolden);
}

std::uint64_t search_seed(std::uint64_t seed) {
  return splitmix64(seed ^ 0x5151515151515151ull);
}

// ---------------------------------------------------------------------------
// Experiment spec
// ---------------------------------------------------------------------------

void ExperimentSpec::validate() const {
  if (runs < 1)
    throw ValidationError("runs must be at least 1");
  if (noise_grid_dbm.empty())
    throw ValidationError("noise grid must not be empty");
  if (num_vertices < 1 || num_users < 1)
    throw ValidationError("num_vertices and num_users must be at least 1");
  if (num_vertices > kTspSelectionCap)
    throw ValidationError("num_vertices exceeds the exact tour solver cap");
  if (exhaustive && num_vertices > kExhaustiveCap)
    throw ValidationError("exhaustive method requires num_vertices <= 12");
  if (jobs < 1)
    throw ValidationError("jobs must be at least 1");
  channel.validate();
  params.validate();
  solver.validate();
}

namespace {

template <typename T>
void read_opt(const json &obj, const std::string &key, const std::string &path, T &out) {
  auto it = obj.find(key);
  if (it == obj.end())
    return;
  try {
    out = it->get<T>();
  } catch (const json::exception &) {
    detail::field_error(detail::child(path, key), "wrong type");
  }
}

void read_opt_number(const json &obj, const std::string &key, const std::string &path,
                     double &out) {
  if (auto it = obj.find(key); it != obj.end())
    out = detail::number_from_json(*it, detail::child(path, key));
}

} // namespace

ExperimentSpec experiment_spec_from_json(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("malformed experiment spec: ") + e.what());
  }
  if (!doc.is_object())
    detail::field_error("", "expected an object");

  ExperimentSpec spec;
  read_opt(doc, "runs", "", spec.runs);
  if (auto it = doc.find("noise_grid_dbm"); it != doc.end())
    spec.noise_grid_dbm = detail::vector_from_json(*it, "noise_grid_dbm");
  read_opt(doc, "num_vertices", "", spec.num_vertices);
  read_opt(doc, "num_users", "", spec.num_users);
  read_opt_number(doc, "area_side", "", spec.area_side);
  read_opt_number(doc, "gamma_lo", "", spec.gamma_lo);
  read_opt_number(doc, "gamma_hi", "", spec.gamma_hi);
  read_opt(doc, "master_seed", "", spec.master_seed);
  read_opt(doc, "exhaustive", "", spec.exhaustive);
  read_opt(doc, "timing", "", spec.timing);
  read_opt(doc, "jobs", "", spec.jobs);

  if (auto it = doc.find("channel_cfg"); it != doc.end()) {
    read_opt_number(*it, "pathloss_rho0", "channel_cfg", spec.channel.pathloss_rho0);
    read_opt_number(*it, "ref_d0", "channel_cfg", spec.channel.ref_d0);
    read_opt_number(*it, "exponent", "channel_cfg", spec.channel.exponent);
    std::string fading = to_string(spec.channel.fading);
    read_opt(*it, "fading", "channel_cfg", fading);
    spec.channel.fading = fading_from_string(fading);
  }
  if (auto it = doc.find("params"); it != doc.end()) {
    read_opt_number(*it, "alpha1", "params", spec.params.alpha1);
    read_opt_number(*it, "alpha2", "params", spec.params.alpha2);
    read_opt_number(*it, "speed_a", "params", spec.params.speed_a);
    read_opt_number(*it, "eta", "params", spec.params.eta);
    read_opt_number(*it, "beta", "params", spec.params.beta);
    read_opt_number(*it, "horizon_T", "params", spec.params.horizon_T);
  }
  if (auto it = doc.find("solver"); it != doc.end()) {
    read_opt(*it, "L", "solver", spec.solver.neighborhood_L);
    read_opt(*it, "iter_cap", "solver", spec.solver.iter_cap);
    read_opt(*it, "cache", "solver", spec.solver.cache_enabled);
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open spec file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return experiment_spec_from_json(buf.str());
}

std::string experiment_spec_to_json(const ExperimentSpec &spec) {
  json doc{{"runs", spec.runs},
           {"noise_grid_dbm", detail::vector_to_json(spec.noise_grid_dbm)},
           {"num_vertices", spec.num_vertices},
           {"num_users", spec.num_users},
           {"area_side", spec.area_side},
           {"gamma_lo", spec.gamma_lo},
           {"gamma_hi", spec.gamma_hi},
           {"master_seed", spec.master_seed},
           {"exhaustive", spec.exhaustive},
           {"timing", spec.timing},
           {"jobs", spec.jobs},
           {"channel_cfg",
            {{"pathloss_rho0", spec.channel.pathloss_rho0},
             {"ref_d0", spec.channel.ref_d0},
             {"exponent", spec.channel.exponent},
             {"fading", to_string(spec.channel.fading)}}},
           {"params",
            {{"alpha1", spec.params.alpha1},
             {"alpha2", spec.params.alpha2},
             {"speed_a", spec.params.speed_a},
             {"eta", spec.params.eta},
             {"beta", spec.params.beta},
             {"horizon_T", spec.params.horizon_T}}},
           {"solver",
            {{"L", spec.solver.neighborhood_L},
             {"iter_cap", spec.solver.iter_cap},
             {"cache", spec.solver.cache_enabled}}}};
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

Scenario sweep_scenario(const ExperimentSpec &spec, std::size_t run) {
  GenerateOptions g;
  g.seed = run_seed(spec.master_seed, run);
  g.num_vertices = spec.num_vertices;
  g.num_users = spec.num_users;
  g.area_side = spec.area_side;
  g.gamma_lo = spec.gamma_lo;
  g.gamma_hi = spec.gamma_hi;
  g.channel = spec.channel;
  g.params = spec.params;
  g.params.noise_N0 = dbm_to_watt(spec.noise_grid_dbm.front());
  return generate_scenario(g);
}

namespace {

std::string sanitize(std::string s) {
  for (char &c : s)
    if (c == ',' || c == '\n' || c == '\r')
      c = ' ';
  return s;
}

ResultRow row_from_outcome(std::size_t run, std::uint64_t seed, double noise_dbm, double speed,
                           const std::string &method, const PlanOutcome &o,
                           std::size_t iterations) {
  ResultRow r;
  r.run = run;
  r.seed = seed;
  r.noise_dbm = noise_dbm;
  r.speed_a = speed;
  r.method = method;
  r.xi = o.xi;
  r.energy_motion = o.energy_motion;
  r.energy_comm = o.energy_comm;
  r.feasible = o.feasible();
  r.visited = o.selection.count();
  r.iterations = iterations;
  r.status = o.feasible() ? "ok" : "infeasible:" + to_string(o.p2_status);
  return r;
}

std::vector<ResultRow> sweep_one_run(const ExperimentSpec &spec, std::size_t run) {
  using clock = std::chrono::steady_clock;
  std::vector<ResultRow> rows;
  const std::uint64_t seed = run_seed(spec.master_seed, run);

  Scenario base;
  try {
    base = sweep_scenario(spec, run);
  } catch (const std::exception &e) {
    for (double dbm : spec.noise_grid_dbm) {
      ResultRow r;
      r.run = run;
      r.seed = seed;
      r.noise_dbm = dbm;
      r.speed_a = spec.params.speed_a;
      r.method = "all";
      r.status = "error:" + sanitize(e.what());
      rows.push_back(r);
    }
    return rows;
  }

  SolverConfig cfg = spec.solver;
  cfg.rng_seed = search_seed(seed);
  const double speed = spec.params.speed_a;

  for (double dbm : spec.noise_grid_dbm) {
    const Scenario s = with_noise(base, dbm_to_watt(dbm));
    const Evaluator ev(s, cfg.tolerances, cfg.cache_enabled);

    auto timed = [&](const std::string &method, auto &&solve) {
      const auto t0 = clock::now();
      try {
        ResultRow r = solve();
        r.wall_time_s = std::chrono::duration<double>(clock::now() - t0).count();
        rows.push_back(std::move(r));
      } catch (const std::exception &e) {
        ResultRow r;
        r.run = run;
        r.seed = seed;
        r.noise_dbm = dbm;
        r.speed_a = speed;
        r.method = method;
        r.status = "error:" + sanitize(e.what());
        rows.push_back(std::move(r));
      }
    };

    timed("sls", [&] {
      SearchResult sr = sls_optimize(ev, cfg);
      return row_from_outcome(run, seed, dbm, speed, "sls", sr.best, sr.iterations_used);
    });
    timed("no_move", [&] {
      return row_from_outcome(run, seed, dbm, speed, "no_move",
                              ev.evaluate(Selection::depot_only(s.num_vertices())), 1);
    });
    timed("visit_all", [&] {
      return row_from_outcome(run, seed, dbm, speed, "visit_all",
                              ev.evaluate(Selection::all(s.num_vertices())), 1);
    });
    if (spec.exhaustive) {
      timed("exhaustive", [&] {
        return row_from_outcome(run, seed, dbm, speed, "exhaustive", exhaustive_search(ev),
                                std::size_t{1} << (s.num_vertices() - 1));
      });
    }
  }
  return rows;
}

} // namespace

std::vector<ResultRow> run_sweep(const ExperimentSpec &spec) {
  spec.validate();
  std::vector<std::vector<ResultRow>> per_run(spec.runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < spec.runs; r = next++)
      per_run[r] = sweep_one_run(spec, r);
  };

  const std::size_t workers = std::min(spec.jobs, spec.runs);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i)
      pool.emplace_back(worker);
  }

  std::vector<ResultRow> rows;
  for (auto &v : per_run)
    rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

std::vector<AggregateRow> aggregate(const std::vector<ResultRow> &rows) {
  struct Acc {
    AggregateRow row;
    double xi = 0.0, motion = 0.0, comm = 0.0, visited = 0.0;
  };
  std::vector<Acc> accs;
  std::map<std::pair<double, std::string>, std::size_t> index;
  for (const auto &r : rows) {
    auto key = std::make_pair(r.noise_dbm, r.method);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, accs.size()).first;
      Acc a;
      a.row.noise_dbm = r.noise_dbm;
      a.row.speed_a = r.speed_a;
      a.row.method = r.method;
      accs.push_back(a);
    }
    Acc &a = accs[it->second];
    ++a.row.runs;
    if (r.feasible) {
      ++a.row.feasible;
      a.xi += r.xi;
      a.motion += r.energy_motion;
      a.comm += r.energy_comm;
      a.visited += static_cast<double>(r.visited);
    }
  }
  std::vector<AggregateRow> out;
  for (auto &a : accs) {
    if (a.row.feasible > 0) {
      const double n = static_cast<double>(a.row.feasible);
      a.row.mean_xi = a.xi / n;
      a.row.mean_motion = a.motion / n;
      a.row.mean_comm = a.comm / n;
      a.row.mean_visited = a.visited / n;
    }
    out.push_back(a.row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::string format_double(double x) {
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  if (std::isnan(x))
    return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string &s) {
  if (s == "inf")
    return kInf;
  if (s == "-inf")
    return -kInf;
  double x = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("not a number: '" + s + "'");
  return x;
}

void write_rows_csv(std::ostream &os, const std::vector<ResultRow> &rows, bool with_timing) {
  os << "run,seed,noise_dbm,noise_w,speed_a,method,xi,energy_motion,energy_comm,feasible,visited,"
        "iterations,status";
  if (with_timing)
    os << ",wall_time_s";
  os << '\n';
  for (const auto &r : rows) {
    os << r.run << ',' << r.seed << ',' << format_double(r.noise_dbm) << ','
       << format_double(dbm_to_watt(r.noise_dbm)) << ',' << format_double(r.speed_a) << ','
       << r.method << ',' << format_double(r.xi) << ',' << format_double(r.energy_motion) << ','
       << format_double(r.energy_comm) << ',' << (r.feasible ? 1 : 0) << ',' << r.visited << ','
       << r.iterations << ',' << r.status;
    if (with_timing)
      os << ',' << format_double(r.wall_time_s);
    os << '\n';
  }
}

void write_aggregate_csv(std::ostream &os, const std::vector<AggregateRow> &rows) {
  os << "noise_dbm,noise_w,speed_a,method,runs,feasible,mean_xi,mean_energy_motion,mean_energy_comm,"
        "mean_visited\n";
  for (const auto &a : rows) {
    os << format_double(a.noise_dbm) << ',' << format_double(dbm_to_watt(a.noise_dbm)) << ','
       << format_double(a.speed_a) << ',' << a.method << ',' << a.runs << ',' << a.feasible << ',' << format_double(a.mean_xi)
       << ',' << format_double(a.mean_motion) << ',' << format_double(a.mean_comm) << ','
       << format_double(a.mean_visited) << '\n';
  }
}

std::vector<ResultRow> read_rows_csv(std::istream &is) {
  std::string line;
  if (!std::getline(is, line))
    throw ParseError("rows CSV: missing header");
  const bool with_timing = line.find("wall_time_s") != std::string::npos;
  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty())
      continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');)
      f.push_back(cell);
    if (f.size() != (with_timing ? 14u : 13u))
      throw ParseError("rows CSV line " + std::to_string(lineno) + ": wrong field count");
    ResultRow r;
    r.run = std::stoull(f[0]);
    r.seed = std::stoull(f[1]);
    r.noise_dbm = parse_double(f[2]);
    r.speed_a = parse_double(f[4]);
    r.method = f[5];
    r.xi = parse_double(f[6]);
    r.energy_motion = parse_double(f[7]);
    r.energy_comm = parse_double(f[8]);
    r.feasible = f[9] == "1";
    r.visited = std::stoull(f[10]);
    r.iterations = std::stoull(f[11]);
    r.status = f[12];
    if (with_timing)
      r.wall_time_s = parse_double(f[13]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_trace_csv(std::ostream &os, const SearchResult &search, double speed_a) {
  os << "iteration,xi,speed_a\n";
  for (std::size_t i = 0; i < search.trace.size(); ++i)
    os << (i + 1) << ',' << format_double(search.trace[i]) << ',' << format_double(speed_a)
       << '\n';
}

void write_path_csv(std::ostream &os, const Scenario &scenario, const PlanOutcome &outcome) {
  os << "kind,id,from,to,x,y,x2,y2,selected\n";
  for (std::size_t m = 0; m < scenario.num_vertices(); ++m) {
    const auto &p = scenario.vertex_positions[m];
    os << "vertex," << m << ",,," << format_double(p.x) << ',' << format_double(p.y) << ",,,"
       << (outcome.selection.contains(m) ? 1 : 0) << '\n';
  }
  for (std::size_t k = 0; k < scenario.num_users(); ++k) {
    const auto &p = scenario.user_positions[k];
    os << "user," << k << ",,," << format_double(p.x) << ',' << format_double(p.y) << ",,,\n";
  }
  const auto &order = outcome.tsp.plan.order;
  for (std::size_t j = 0; j + 1 < order.size(); ++j) {
    const auto &a = scenario.vertex_positions[order[j]];
    const auto &b = scenario.vertex_positions[order[j + 1]];
    os << "edge," << j << ',' << order[j] << ',' << order[j + 1] << ',' << format_double(a.x)
       << ',' << format_double(a.y) << ',' << format_double(b.x) << ',' << format_double(b.y)
       << ",\n";
  }
}

// ---------------------------------------------------------------------------
// Result documents
// ---------------------------------------------------------------------------

double max_qos_shortfall(const Scenario &scenario, const Selection &selection,
                         const Allocation &alloc) {
  const Matrix A = effective_gains(scenario, selection);
  double worst = 0.0;
  for (std::size_t k = 0; k < scenario.num_users(); ++k) {
    double delivered = 0.0;
    for (std::size_t m = 0; m < scenario.num_vertices(); ++m)
      delivered += phi(alloc.t(k, m), alloc.Q(k, m), A(k, m));
    worst = std::max(worst, scenario.demand_gamma[k] - delivered);
  }
  return worst;
}

std::string result_document(const Scenario &scenario, const PlanOutcome &outcome,
                            const SearchResult *search, const std::string &method) {
  json doc;
  doc["schema_version"] = 1;
  doc["method"] = method;
  doc["scenario"] = json{{"num_vertices", scenario.num_vertices()},
                         {"num_users", scenario.num_users()},
                         {"seed", scenario.seed ? json(*scenario.seed) : json(nullptr)},
                         {"params", detail::params_to_json(scenario.params)}};

  json tour;
  tour["selection"] = outcome.selection.to_string();
  tour["order"] = outcome.tsp.plan.order;
  tour["length_m"] = detail::number_to_json(outcome.tsp.tour_length);
  tour["upsilon_s"] = detail::number_to_json(outcome.tsp.upsilon);
  doc["tour"] = tour;

  doc["energy_motion_J"] = detail::number_to_json(outcome.energy_motion);
  doc["energy_comm_J"] = detail::number_to_json(outcome.energy_comm);
  doc["xi_J"] = detail::number_to_json(outcome.xi);
  doc["feasible"] = outcome.feasible();
  doc["status"] = to_string(outcome.p2_status);

  if (outcome.alloc) {
    doc["allocation"] = json{{"t_s", detail::matrix_to_json(outcome.alloc->t)},
                             {"Q_J", detail::matrix_to_json(outcome.alloc->Q)},
                             {"p_W", detail::matrix_to_json(outcome.alloc->p)}};
  } else {
    doc["allocation"] = nullptr;
  }
  if (outcome.kkt) {
    doc["kkt"] = json{{"primal_residual", outcome.kkt->primal_residual},
                      {"time_residual", outcome.kkt->time_residual},
                      {"stationarity_residual", outcome.kkt->stationarity_residual},
                      {"mu", detail::vector_to_json(outcome.kkt->mu)},
                      {"nu", detail::number_to_json(outcome.kkt->nu)}};
  }
  json warnings = json::array();
  if (outcome.high_power_warning)
    warnings.push_back("recovered power above 1 kW");
  doc["warnings"] = warnings;

  if (search) {
    doc["search"] = json{{"exit", to_string(search->exit)},
                         {"best_source", search->best_source},
                         {"iterations_used", search->iterations_used},
                         {"accepted_moves", search->accepted_moves},
                         {"trace", detail::vector_to_json(search->trace)}};
  }
  return doc.dump(2) + "\n";
}

} // namespace ugvbs
