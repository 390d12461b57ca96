#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ugvbs/cli.hpp"
#include "ugvbs/experiment.hpp"

using namespace ugvbs;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string &name) {
  auto dir = fs::temp_directory_path() / "ugvbs_test_experiment" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ugvbs");
  std::vector<const char *> argv;
  for (auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.runs = 3;
  spec.num_vertices = 7;
  spec.num_users = 3;
  spec.noise_grid_dbm = {-120, -90, -60};
  return spec;
}

} // namespace

TEST_CASE("seed splitting") {
  CHECK(run_seed(2024, 0) != run_seed(2024, 1));
  CHECK(run_seed(2024, 3) == run_seed(2024, 3));
  CHECK(search_seed(run_seed(1, 0)) != run_seed(1, 0));
}

TEST_CASE("number formatting round-trips") {
  for (double x : {0.0, 1.0, -2.5, 1e-15, 3.141592653589793, 1e300, kInf, -kInf})
    CHECK(parse_double(format_double(x)) == x);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(kInf) == "inf");
  CHECK_THROWS_AS(parse_double("1.0x"), ParseError);
}

TEST_CASE("spec parsing") {
  const ExperimentSpec s = experiment_spec_from_json(
      R"({"runs": 4, "noise_grid_dbm": [-100, -80], "num_vertices": 6,
          "params": {"speed_a": 2.0}, "solver": {"L": 2, "iter_cap": 30}})");
  CHECK(s.runs == 4);
  CHECK(s.noise_grid_dbm == std::vector<double>{-100, -80});
  CHECK(s.num_vertices == 6);
  CHECK(s.params.speed_a == 2.0);
  CHECK(s.solver.neighborhood_L == 2);
  CHECK(s.solver.iter_cap == 30);
  CHECK(experiment_spec_from_json(experiment_spec_to_json(s)).runs == 4);

  CHECK_THROWS_AS(experiment_spec_from_json(R"({"runs": 0})"), ValidationError);
  CHECK_THROWS_AS(experiment_spec_from_json(R"({"noise_grid_dbm": []})"), ValidationError);
  CHECK_THROWS_AS(experiment_spec_from_json(R"({"runs": "many"})"), ParseError);
  CHECK_THROWS_AS(experiment_spec_from_json(R"({"num_vertices": 14, "exhaustive": true})"),
                  ValidationError);
}

TEST_CASE("sweep rows are consistent") {
  ExperimentSpec spec = small_spec();
  spec.exhaustive = true;
  const auto rows = run_sweep(spec);
  CHECK(rows.size() == spec.runs * spec.noise_grid_dbm.size() * 4);

  for (const auto &r : rows) {
    CHECK(r.status.rfind("error", 0) == std::string::npos);
    if (r.feasible)
      CHECK(r.xi == doctest::Approx(r.energy_motion + r.energy_comm).epsilon(1e-9));
    if (r.method == "no_move")
      CHECK(r.energy_motion == 0.0);
  }

  // Stored allocations meet every demand.
  for (std::size_t run = 0; run < spec.runs; ++run) {
    const Scenario base = sweep_scenario(spec, run);
    for (double dbm : spec.noise_grid_dbm) {
      const Scenario s = with_noise(base, dbm_to_watt(dbm));
      SolverConfig cfg = spec.solver;
      cfg.rng_seed = search_seed(run_seed(spec.master_seed, run));
      const SearchResult sr = sls_optimize(s, cfg);
      REQUIRE(sr.best.alloc);
      CHECK(max_qos_shortfall(s, sr.best.selection, *sr.best.alloc) <= 1e-6);
    }
  }

  // Exhaustive rows bound the local search rows.
  std::map<std::pair<std::size_t, double>, std::map<std::string, double>> xi;
  for (const auto &r : rows)
    xi[{r.run, r.noise_dbm}][r.method] = r.xi;
  for (auto &[key, m] : xi) {
    CHECK(m["exhaustive"] <= m["sls"]);
    CHECK(m["sls"] <= m["no_move"]);
  }
}

TEST_CASE("aggregation re-computed from the rows file matches") {
  const auto rows = run_sweep(small_spec());
  std::stringstream csv;
  write_rows_csv(csv, rows, false);
  const auto back = read_rows_csv(csv);
  REQUIRE(back.size() == rows.size());

  std::ostringstream a, b;
  write_aggregate_csv(a, aggregate(rows));
  write_aggregate_csv(b, aggregate(back));
  CHECK(a.str() == b.str());
  CHECK(aggregate(rows).size() == 3 * 3);

  // Independent mean of the sls rows at the first grid point.
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto &r : back)
    if (r.method == "sls" && r.noise_dbm == -120 && r.feasible) {
      sum += r.xi;
      ++n;
    }
  const auto agg = aggregate(back);
  REQUIRE(n > 0);
  CHECK(agg.front().method == "sls");
  CHECK(agg.front().mean_xi == doctest::Approx(sum / static_cast<double>(n)).epsilon(1e-15));
}

TEST_CASE("thread count does not change the output") {
  ExperimentSpec spec = small_spec();
  std::ostringstream one, many;
  write_rows_csv(one, run_sweep(spec), false);
  spec.jobs = 3;
  write_rows_csv(many, run_sweep(spec), false);
  CHECK(one.str() == many.str());
}

TEST_CASE("cli solve, trace and path dump") {
  const fs::path dir = temp_dir("solve");
  const std::string scen = (dir / "s.json").string();
  REQUIRE(cli({"gen-scenario", "--seed", "3", "--M", "8", "--K", "3", "--out", scen}).code ==
          kExitOk);

  const std::string r1 = (dir / "r1.json").string(), r2 = (dir / "r2.json").string();
  const CliResult a = cli({"solve", "--scenario", scen, "--out", r1, "--seed", "4"});
  const CliResult b = cli({"solve", "--scenario", scen, "--out", r2, "--seed", "4"});
  CHECK(a.code == kExitOk);
  CHECK(a.out == b.out);
  CHECK(slurp(r1) == slurp(r2));
  CHECK(slurp(r1).find("\"t_s\"") != std::string::npos);

  const CliResult depot = cli({"solve", "--scenario", scen, "--depot-only"});
  CHECK(depot.code == kExitOk);
  CHECK(depot.out.find("motion=0 ") != std::string::npos);

  const CliResult ex = cli({"solve", "--scenario", scen, "--exhaustive"});
  CHECK(ex.code == kExitOk);

  const CliResult trace = cli({"trace", "--scenario", scen, "--iters", "20"});
  CHECK(trace.code == kExitOk);
  std::istringstream lines(trace.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "iteration,xi,speed_a");
  int n = 0;
  double prev = kInf;
  while (std::getline(lines, line)) {
    ++n;
    const double xi = parse_double(line.substr(line.find(',') + 1, line.rfind(',') - line.find(',') - 1));
    CHECK(xi <= prev);
    prev = xi;
  }
  CHECK(n == 20);

  const CliResult path = cli({"path-dump", "--scenario", scen, "--depot-only"});
  CHECK(path.code == kExitOk);
  CHECK(path.out.find("\nedge,") == std::string::npos);

  const CliResult tour = cli({"path-dump", "--scenario", scen, "--visit-all", "--speed", "10"});
  CHECK(tour.code == kExitOk);
  // Edges chain from the depot back to the depot.
  std::istringstream rows(tour.out);
  std::string expect_from = "0", last_to;
  int edges = 0;
  while (std::getline(rows, line)) {
    if (line.rfind("edge,", 0) != 0)
      continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');)
      f.push_back(c);
    CHECK(f[2] == expect_from);
    expect_from = last_to = f[3];
    ++edges;
  }
  CHECK(edges == 8);
  CHECK(last_to == "0");
}

TEST_CASE("cli error handling") {
  const fs::path dir = temp_dir("errors");
  CHECK(cli({"solve", "--scenario", (dir / "missing.json").string()}).code == kExitError);
  {
    std::ofstream(dir / "bad.json") << "{ \"schema_version\": 1 ";
  }
  const CliResult bad = cli({"solve", "--scenario", (dir / "bad.json").string()});
  CHECK(bad.code == kExitError);
  CHECK_FALSE(bad.err.empty());
  CHECK(cli({"bogus"}).code == kExitError);
  CHECK(cli({"solve"}).code == kExitError);

  // A horizon shorter than any tour and a user out of reach of the depot.
  const std::string scen = (dir / "tight.json").string();
  REQUIRE(cli({"gen-scenario", "--seed", "1", "--M", "4", "--K", "2", "--out", scen}).code == 0);
  const CliResult inf = cli({"solve", "--scenario", scen, "--visit-all", "--speed", "0.01"});
  CHECK(inf.code == kExitInfeasible);
  CHECK(inf.out.find("xi=inf") != std::string::npos);
}

TEST_CASE("cli sweep writes deterministic files") {
  const fs::path d1 = temp_dir("sweep1"), d2 = temp_dir("sweep2");
  const std::vector<std::string> common{"--runs", "2", "--M", "6", "--K", "2",
                                        "--noise-grid", "-110,-70", "--exhaustive"};
  auto args1 = std::vector<std::string>{"sweep", "--out", d1.string()};
  auto args2 = std::vector<std::string>{"sweep", "--out", d2.string(), "--jobs", "2"};
  args1.insert(args1.end(), common.begin(), common.end());
  args2.insert(args2.end(), common.begin(), common.end());
  REQUIRE(cli(args1).code == kExitOk);
  REQUIRE(cli(args2).code == kExitOk);
  CHECK(slurp(d1 / "rows.csv") == slurp(d2 / "rows.csv"));
  CHECK(slurp(d1 / "aggregate.csv") == slurp(d2 / "aggregate.csv"));
  CHECK(slurp(d1 / "rows.csv").find("wall_time_s") == std::string::npos);

  std::istringstream agg(slurp(d1 / "aggregate.csv"));
  std::string line;
  int n = -1;
  while (std::getline(agg, line))
    ++n;
  CHECK(n == 2 * 4);

  const ExperimentSpec echoed = load_experiment_spec(d1 / "spec.json");
  CHECK(echoed.runs == 2);
  CHECK(echoed.exhaustive);
}

TEST_CASE("cli fit-beta") {
  const CliResult r = cli({"fit-beta"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("beta_fsk=0.5") != std::string::npos);
}
