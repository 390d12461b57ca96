/**
 * @file planner.hpp
 * @brief Outer search over vertex selections.
 *
 * A selection is scored by composing the exact tour solver with the
 * time/energy allocation: the shortest tour fixes the time left for
 * communication, and the allocation spends it at minimum energy. The
 * successive local search samples Hamming-ball neighbours of the incumbent
 * and accepts any candidate that is no worse.
 */

#ifndef UGVBS_PLANNER_HPP
#define UGVBS_PLANNER_HPP

#include <cstdint>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ugvbs/allocation.hpp"
#include "ugvbs/mobility.hpp"
#include "ugvbs/scenario.hpp"

namespace ugvbs {

struct PlanOutcome {
  Selection selection = Selection::depot_only(1);
  TspResult tsp;
  std::optional<Allocation> alloc; ///< absent when infeasible
  std::optional<KktReport> kkt;
  P2Status p2_status = P2Status::ok;
  double energy_motion = 0.0;
  double energy_comm = 0.0;
  double xi = kInf;
  bool high_power_warning = false;

  bool feasible() const { return xi < kInf; }
};

struct SolverConfig {
  std::size_t neighborhood_L = 3;
  std::size_t iter_cap = 50;
  std::uint64_t rng_seed = 1;
  Tolerances tolerances;
  bool cache_enabled = true;

  void validate() const;
};

/// Scores selections of one scenario, memoizing by selection bitmask.
/// Safe to call from several threads.
class Evaluator {
public:
  Evaluator(const Scenario &scenario, Tolerances tol = {}, bool cache_enabled = true);

  PlanOutcome evaluate(const Selection &selection) const;

  const Scenario &scenario() const { return scenario_; }
  std::size_t cache_hits() const;
  std::size_t evaluations() const;

private:
  PlanOutcome compute(const Selection &selection) const;

  const Scenario &scenario_;
  Tolerances tol_;
  bool cache_enabled_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::uint64_t, PlanOutcome> cache_;
  mutable std::size_t hits_ = 0;
  mutable std::size_t evaluations_ = 0;
};

/// One-shot evaluation without a cache.
PlanOutcome evaluate_xi(const Scenario &scenario, const Selection &selection,
                        const Tolerances &tol = {});

/**
 * @brief Draws neighbours of one incumbent: selections within Hamming
 * distance L that keep the depot, excluding the incumbent itself. Sampling
 * is uniform and without replacement; `next` returns nullopt once every
 * neighbour has been drawn.
 */
class Neighborhood {
public:
  Neighborhood(const Selection &center, std::size_t L);

  std::optional<Selection> next(std::mt19937_64 &rng);

  /// Number of distinct neighbours.
  std::uint64_t size() const { return total_; }
  std::uint64_t remaining() const { return total_ - drawn_; }

private:
  Selection center_;
  std::size_t free_bits_;
  std::size_t radius_;
  std::uint64_t total_ = 0;
  std::uint64_t drawn_ = 0;
  // Explicit pool of flip masks for small neighbourhoods (partial
  // Fisher-Yates); rejection against `seen_` otherwise.
  std::vector<std::uint64_t> pool_;
  bool enumerated_ = false;
  std::unordered_set<std::uint64_t> seen_;
};

enum class SearchExit { local_optimum, iteration_capped };

std::string to_string(SearchExit e);

struct SearchResult {
  PlanOutcome best;               ///< min of incumbent and the two baselines
  PlanOutcome incumbent;          ///< where the local search ended
  std::vector<double> trace;      ///< incumbent objective after each iteration
  std::size_t iterations_used = 0; ///< candidates actually evaluated
  std::size_t accepted_moves = 0;
  SearchExit exit = SearchExit::iteration_capped;
  std::string best_source;        ///< "sls", "no_move" or "visit_all"
};

/// Successive local search from the depot-only selection.
SearchResult sls_optimize(const Scenario &scenario, const SolverConfig &config);
SearchResult sls_optimize(const Evaluator &evaluator, const SolverConfig &config);

inline constexpr std::size_t kExhaustiveCap = 12;

/// Evaluates every selection; ties go to fewer visited vertices, then the
/// lexicographically smaller selection. Throws std::length_error for M > 12.
PlanOutcome exhaustive_search(const Scenario &scenario, const Tolerances &tol = {});
PlanOutcome exhaustive_search(const Evaluator &evaluator);

PlanOutcome baseline_no_move(const Scenario &scenario, const Tolerances &tol = {});
PlanOutcome baseline_visit_all(const Scenario &scenario, const Tolerances &tol = {});

} // namespace ugvbs

#endif // UGVBS_PLANNER_HPP
