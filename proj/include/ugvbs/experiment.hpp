/**
 * @file experiment.hpp
 * @brief Monte-Carlo sweeps over receiver noise power, result documents and
 * plot-ready CSV output.
 */

#ifndef UGVBS_EXPERIMENT_HPP
#define UGVBS_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ugvbs/planner.hpp"
#include "ugvbs/scenario.hpp"

namespace ugvbs {

/// Seed of run `run` derived from the master seed (SplitMix64 of
/// master + (run + 1) * 0x9E3779B97F4A7C15).
std::uint64_t run_seed(std::uint64_t master, std::size_t run);

/// Local-search seed of a run, SplitMix64 of (run seed XOR 0x5151...).
std::uint64_t search_seed(std::uint64_t run_seed);

struct ExperimentSpec {
  std::size_t runs = 20;
  std::vector<double> noise_grid_dbm{-120, -110, -100, -90, -80, -70, -60};
  std::size_t num_vertices = 15;
  std::size_t num_users = 10;
  double area_side = 20.0;
  double gamma_lo = 2.0;
  double gamma_hi = 4.0;
  std::uint64_t master_seed = 2024;
  ChannelModelConfig channel;
  PhysicalParams params;
  SolverConfig solver;
  bool exhaustive = false; ///< add the exhaustive oracle (M <= 12)
  bool timing = false;     ///< record wall time per row
  std::size_t jobs = 1;

  void validate() const;
};

ExperimentSpec experiment_spec_from_json(const std::string &text);
ExperimentSpec load_experiment_spec(const std::filesystem::path &path);
std::string experiment_spec_to_json(const ExperimentSpec &spec);

struct ResultRow {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double noise_dbm = 0.0;
  double speed_a = 0.0;
  std::string method;
  double xi = kInf;
  double energy_motion = 0.0;
  double energy_comm = 0.0;
  bool feasible = false;
  std::size_t visited = 0;
  std::size_t iterations = 0;
  std::string status; ///< "ok", "infeasible:<reason>" or "error:<message>"
  double wall_time_s = 0.0;
};

struct AggregateRow {
  double noise_dbm = 0.0;
  double speed_a = 0.0;
  std::string method;
  std::size_t runs = 0;
  std::size_t feasible = 0;
  double mean_xi = kInf; ///< over feasible runs; inf when none
  double mean_motion = kInf;
  double mean_comm = kInf;
  double mean_visited = 0.0;
};

/// Generates the instance of one run (noise set to the first grid point).
Scenario sweep_scenario(const ExperimentSpec &spec, std::size_t run);

/// Solves every method on every run and noise level. Channels of a run are
/// shared by all its noise levels. Rows come out in (run, noise, method)
/// order whatever the number of worker threads.
std::vector<ResultRow> run_sweep(const ExperimentSpec &spec);

/// Mean per (noise, method), in first-appearance order.
std::vector<AggregateRow> aggregate(const std::vector<ResultRow> &rows);

void write_rows_csv(std::ostream &os, const std::vector<ResultRow> &rows, bool with_timing);
void write_aggregate_csv(std::ostream &os, const std::vector<AggregateRow> &rows);
std::vector<ResultRow> read_rows_csv(std::istream &is);

/// Locale-independent shortest round-trip formatting; "inf" for infinity.
std::string format_double(double x);
double parse_double(const std::string &s);

/// Full result document of one solve: tour, allocation matrices, energies,
/// search trace and diagnostics.
std::string result_document(const Scenario &scenario, const PlanOutcome &outcome,
                            const SearchResult *search, const std::string &method);

/// Iteration-vs-objective CSV of a search trace.
void write_trace_csv(std::ostream &os, const SearchResult &search, double speed_a);

/// Vertex and user coordinates plus the edges of the chosen tour.
void write_path_csv(std::ostream &os, const Scenario &scenario, const PlanOutcome &outcome);

/// Re-checks each user's delivered data from a stored allocation.
double max_qos_shortfall(const Scenario &scenario, const Selection &selection,
                         const Allocation &alloc);

} // namespace ugvbs

#endif // UGVBS_EXPERIMENT_HPP
