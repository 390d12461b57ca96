#include "ugvbs/planner.hpp"

#include <stdexcept>

namespace ugvbs {

void SolverConfig::validate() const {
  if (neighborhood_L < 1)
    throw std::invalid_argument("neighborhood_L must be at least 1");
  if (iter_cap < 1)
    throw std::invalid_argument("iter_cap must be at least 1");
}

// ---------------------------------------------------------------------------
// Evaluation of one selection
// ---------------------------------------------------------------------------

Evaluator::Evaluator(const Scenario &scenario, Tolerances tol, bool cache_enabled)
    : scenario_(scenario), tol_(tol), cache_enabled_(cache_enabled) {}

PlanOutcome Evaluator::compute(const Selection &selection) const {
  const auto &params = scenario_.params;
  PlanOutcome out;
  out.selection = selection;
  out.tsp = solve_tsp(selection, scenario_.dist_D, params);
  out.energy_motion = params.motion_energy_per_metre() * out.tsp.tour_length;

  if (!out.tsp.has_tour() || !(out.tsp.upsilon > 0.0)) {
    out.p2_status = P2Status::no_time;
    out.energy_comm = kInf;
    out.xi = kInf;
    return out;
  }

  P2Result p2 = solve_p2(scenario_, selection, out.tsp.upsilon, tol_);
  out.p2_status = p2.status;
  if (!p2.feasible()) {
    out.energy_comm = kInf;
    out.xi = kInf;
    return out;
  }
  out.energy_comm = p2.alloc.total_energy();
  out.xi = out.energy_motion + out.energy_comm;
  out.high_power_warning = p2.high_power_warning;
  out.alloc = std::move(p2.alloc);
  out.kkt = std::move(p2.kkt);
  return out;
}

PlanOutcome Evaluator::evaluate(const Selection &selection) const {
  if (selection.size() != scenario_.num_vertices())
    throw std::invalid_argument("selection size does not match the scenario");
  if (cache_enabled_) {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(selection.bits()); it != cache_.end()) {
      ++hits_;
      return it->second;
    }
  }
  PlanOutcome out = compute(selection);
  std::lock_guard lock(mutex_);
  ++evaluations_;
  if (cache_enabled_)
    cache_.emplace(selection.bits(), out);
  return out;
}

std::size_t Evaluator::cache_hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t Evaluator::evaluations() const {
  std::lock_guard lock(mutex_);
  return evaluations_;
}

PlanOutcome evaluate_xi(const Scenario &scenario, const Selection &selection,
                        const Tolerances &tol) {
  return Evaluator(scenario, tol, false).evaluate(selection);
}

// ---------------------------------------------------------------------------
// Successive local search
// ---------------------------------------------------------------------------

std::string to_string(SearchExit e) {
  return e == SearchExit::local_optimum ? "local_optimum" : "iteration_capped";
}

SearchResult sls_optimize(const Evaluator &evaluator, const SolverConfig &config) {
  config.validate();
  const std::size_t M = evaluator.scenario().num_vertices();

  SearchResult res;
  res.trace.reserve(config.iter_cap);
  std::mt19937_64 rng(config.rng_seed);

  PlanOutcome incumbent = evaluator.evaluate(Selection::depot_only(M));
  Neighborhood hood(incumbent.selection, config.neighborhood_L);

  for (std::size_t iter = 0; iter < config.iter_cap; ++iter) {
    auto candidate = hood.next(rng);
    if (!candidate) {
      // Every neighbour is strictly worse.
      res.exit = SearchExit::local_optimum;
      res.trace.resize(config.iter_cap, incumbent.xi);
      break;
    }
    PlanOutcome out = evaluator.evaluate(*candidate);
    ++res.iterations_used;
    if (out.xi <= incumbent.xi) {
      incumbent = std::move(out);
      hood = Neighborhood(incumbent.selection, config.neighborhood_L);
      ++res.accepted_moves;
    }
    res.trace.push_back(incumbent.xi);
  }
  if (hood.remaining() == 0)
    res.exit = SearchExit::local_optimum;

  res.incumbent = incumbent;
  res.best = std::move(incumbent);
  res.best_source = "sls";

  auto consider = [&](const Selection &sel, const char *name) {
    PlanOutcome b = evaluator.evaluate(sel);
    if (b.xi < res.best.xi) {
      res.best = std::move(b);
      res.best_source = name;
    }
  };
  consider(Selection::depot_only(M), "no_move");
  if (M <= kTspSelectionCap)
    consider(Selection::all(M), "visit_all");
  return res;
}

SearchResult sls_optimize(const Scenario &scenario, const SolverConfig &config) {
  Evaluator ev(scenario, config.tolerances, config.cache_enabled);
  return sls_optimize(ev, config);
}

// ---------------------------------------------------------------------------
// Oracle and baselines
// ---------------------------------------------------------------------------

PlanOutcome exhaustive_search(const Evaluator &evaluator) {
  const std::size_t M = evaluator.scenario().num_vertices();
  if (M > kExhaustiveCap)
    throw std::length_error("exhaustive_search: M = " + std::to_string(M) +
                            " exceeds the cap of " + std::to_string(kExhaustiveCap));

  auto better = [](const PlanOutcome &a, const PlanOutcome &b) {
    if (a.xi != b.xi)
      return a.xi < b.xi;
    if (a.selection.count() != b.selection.count())
      return a.selection.count() < b.selection.count();
    return a.selection.to_string() < b.selection.to_string();
  };

  PlanOutcome best = evaluator.evaluate(Selection::depot_only(M));
  const std::uint64_t combos = std::uint64_t{1} << (M - 1);
  for (std::uint64_t c = 1; c < combos; ++c) {
    PlanOutcome out = evaluator.evaluate(Selection::from_bits(M, (c << 1) | 1u));
    if (better(out, best))
      best = std::move(out);
  }
  return best;
}

PlanOutcome exhaustive_search(const Scenario &scenario, const Tolerances &tol) {
  return exhaustive_search(Evaluator(scenario, tol, false));
}

PlanOutcome baseline_no_move(const Scenario &scenario, const Tolerances &tol) {
  return evaluate_xi(scenario, Selection::depot_only(scenario.num_vertices()), tol);
}

PlanOutcome baseline_visit_all(const Scenario &scenario, const Tolerances &tol) {
  return evaluate_xi(scenario, Selection::all(scenario.num_vertices()), tol);
}

} // namespace ugvbs
