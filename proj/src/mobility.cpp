#include "ugvbs/mobility.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ugvbs {

// ---------------------------------------------------------------------------
// Selection
// ---------------------------------------------------------------------------

namespace {

std::uint64_t low_mask(std::size_t n) {
  return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
}

void check_size(std::size_t n) {
  if (n < 1 || n > kMaxVertices)
    throw std::invalid_argument("selection size must lie in [1, 64]");
}

} // namespace

Selection Selection::depot_only(std::size_t num_vertices) {
  check_size(num_vertices);
  return {num_vertices, 1};
}

Selection Selection::all(std::size_t num_vertices) {
  check_size(num_vertices);
  return {num_vertices, low_mask(num_vertices)};
}

Selection Selection::from_bits(std::size_t num_vertices, std::uint64_t bits) {
  check_size(num_vertices);
  if ((bits & 1u) == 0)
    throw std::invalid_argument("selection must include the depot");
  if ((bits & ~low_mask(num_vertices)) != 0)
    throw std::invalid_argument("selection has bits beyond the vertex count");
  return {num_vertices, bits};
}

Selection Selection::parse(const std::string &text) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1')
      bits |= std::uint64_t{1} << i;
    else if (text[i] != '0')
      throw std::invalid_argument("selection string may only contain '0' and '1'");
  }
  return from_bits(text.size(), bits);
}

std::size_t Selection::count() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<std::size_t> Selection::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < size_; ++m)
    if (contains(m))
      out.push_back(m);
  return out;
}

Selection Selection::flipped(std::size_t m) const {
  if (m == 0 || m >= size_)
    throw std::out_of_range("can only flip non-depot vertices");
  return {size_, bits_ ^ (std::uint64_t{1} << m)};
}

std::size_t Selection::hamming(const Selection &other) const {
  return static_cast<std::size_t>(std::popcount(bits_ ^ other.bits_));
}

std::string Selection::to_string() const {
  std::string s(size_, '0');
  for (std::size_t m = 0; m < size_; ++m)
    if (contains(m))
      s[m] = '1';
  return s;
}

// ---------------------------------------------------------------------------
// Tour plans and motion
// ---------------------------------------------------------------------------

TourPlan TourPlan::from_order(const Selection &selection, std::vector<std::size_t> order) {
  TourPlan plan;
  plan.selection = selection;
  const std::size_t M = selection.size();
  plan.edge_W = EdgeMatrix(M);
  plan.mtz_lambda.assign(M, 0.0);
  for (std::size_t j = 0; j + 1 < order.size(); ++j) {
    plan.edge_W(order[j], order[j + 1]) = 1;
    if (j > 0)
      plan.mtz_lambda[order[j]] = static_cast<double>(j);
  }
  plan.order = std::move(order);
  return plan;
}

double tour_length(const TourPlan &plan, const Matrix &dist) {
  const std::size_t M = plan.edge_W.size();
  double total = 0.0;
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t j = 0; j < M; ++j)
      if (plan.edge_W(m, j))
        total += dist(m, j);
  return total;
}

double motion_time(const TourPlan &plan, const Matrix &dist, double speed) {
  if (!(speed > 0.0))
    throw std::invalid_argument("motion_time: speed must be positive");
  return tour_length(plan, dist) / speed;
}

double motion_energy(const TourPlan &plan, const Matrix &dist, const PhysicalParams &params) {
  return params.motion_energy_per_metre() * tour_length(plan, dist);
}

// ---------------------------------------------------------------------------
// Held-Karp
// ---------------------------------------------------------------------------

TspResult solve_tsp(const Selection &selection, const Matrix &dist, const PhysicalParams &params,
                    std::size_t cap) {
  const std::size_t M = selection.size();
  if (dist.rows() != M || dist.cols() != M)
    throw std::invalid_argument("solve_tsp: distance matrix does not match selection size");
  if (selection.count() > cap)
    throw std::length_error("solve_tsp: " + std::to_string(selection.count()) +
                            " selected vertices exceed the exact-solver cap of " +
                            std::to_string(cap));

  const double T = params.horizon_T;
  const double a = params.speed_a;

  std::vector<std::size_t> interior = selection.indices();
  interior.erase(interior.begin()); // depot
  const std::size_t n = interior.size();

  TspResult result;
  if (n == 0) {
    result.plan = TourPlan::from_order(selection, {0});
    result.tour_length = 0.0;
    result.upsilon = T;
    return result;
  }

  // cost[S * n + i]: shortest path from interior[i] through every vertex of
  // S (i not in S) and back to the depot.
  const std::size_t full = (std::size_t{1} << n) - 1;
  std::vector<double> cost((full + 1) * n, kInf);
  auto at = [&](std::size_t S, std::size_t i) -> double & { return cost[S * n + i]; };

  for (std::size_t i = 0; i < n; ++i)
    at(0, i) = dist(interior[i], 0);

  for (std::size_t S = 1; S <= full; ++S) {
    for (std::size_t i = 0; i < n; ++i) {
      if ((S >> i) & 1u)
        continue;
      double best = kInf;
      for (std::size_t rest = S; rest; rest &= rest - 1) {
        const std::size_t k = static_cast<std::size_t>(std::countr_zero(rest));
        const double c = dist(interior[i], interior[k]) + at(S & ~(std::size_t{1} << k), k);
        best = std::min(best, c);
      }
      at(S, i) = best;
    }
  }

  auto step_cost = [&](std::size_t from, std::size_t S, std::size_t k) {
    return dist(from, interior[k]) + at(S & ~(std::size_t{1} << k), k);
  };

  double optimum = kInf;
  for (std::size_t k = 0; k < n; ++k)
    optimum = std::min(optimum, step_cost(0, full, k));

  if (!(optimum < kInf)) {
    result.plan.selection = selection;
    result.plan.edge_W = EdgeMatrix(M);
    result.plan.mtz_lambda.assign(M, 0.0);
    result.tour_length = kInf;
    result.upsilon = -kInf;
    return result;
  }

  // Forward reconstruction, taking the smallest vertex index that stays on
  // an optimal completion.
  std::vector<std::size_t> order{0};
  std::size_t cur = 0;
  std::size_t S = full;
  double remaining = optimum;
  while (S) {
    const double tol = 1e-12 * std::max(1.0, remaining);
    std::size_t pick = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (((S >> k) & 1u) && step_cost(cur, S, k) <= remaining + tol) {
        pick = k;
        break;
      }
    }
    if (pick == n) // unreachable: the optimum is attained by some k
      throw std::logic_error("solve_tsp: reconstruction failed");
    remaining = at(S & ~(std::size_t{1} << pick), pick);
    cur = interior[pick];
    S &= ~(std::size_t{1} << pick);
    order.push_back(cur);
  }
  order.push_back(0);

  result.plan = TourPlan::from_order(selection, std::move(order));
  result.tour_length = tour_length(result.plan, dist);
  result.upsilon = T - result.tour_length / a;
  return result;
}

// ---------------------------------------------------------------------------
// Degree and subtour verification
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<std::size_t>> decompose_cycles(const EdgeMatrix &W) {
  const std::size_t M = W.size();
  std::vector<std::vector<std::size_t>> cycles;
  std::vector<bool> seen(M, false);

  auto successor = [&](std::size_t m) -> std::optional<std::size_t> {
    for (std::size_t j = 0; j < M; ++j)
      if (W(m, j))
        return j;
    return std::nullopt;
  };

  for (std::size_t start = 0; start < M; ++start) {
    if (seen[start] || !successor(start))
      continue;
    std::vector<std::size_t> path;
    std::size_t cur = start;
    while (!seen[cur]) {
      seen[cur] = true;
      path.push_back(cur);
      auto next = successor(cur);
      if (!next)
        break;
      cur = *next;
    }
    auto it = std::find(path.begin(), path.end(), cur);
    if (it != path.end()) {
      std::vector<std::size_t> cycle(it, path.end());
      cycle.push_back(cur);
      cycles.push_back(std::move(cycle));
    }
  }
  return cycles;
}

std::string join(const std::vector<std::size_t> &v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i)
    os << (i ? "->" : "") << v[i];
  return os.str();
}

/// Smallest right-hand side c of  lambda_m - lambda_j <= c  for the pair.
double pair_bound(const TourPlan &plan, std::size_t m, std::size_t j, double n) {
  const auto &v = plan.selection;
  const double vm = v.contains(m) ? 1.0 : 0.0;
  const double vj = v.contains(j) ? 1.0 : 0.0;
  return n - 2.0 + kMtzBigJ * (2.0 - vm - vj) - (n - 1.0) * plan.edge_W(m, j) -
         (n - 3.0) * plan.edge_W(j, m);
}

void check_lambda(const TourPlan &plan, const std::vector<double> &lambda, MtzReport &report) {
  const std::size_t M = plan.selection.size();
  const double n = static_cast<double>(plan.selection.count());
  constexpr double eps = 1e-9;
  if (lambda.size() != M) {
    report.mtz_violations.push_back("lambda has " + std::to_string(lambda.size()) +
                                    " entries, expected " + std::to_string(M));
    return;
  }
  for (std::size_t m = 1; m < M; ++m) {
    const double vm = plan.selection.contains(m) ? 1.0 : 0.0;
    if (lambda[m] < vm - eps || lambda[m] > (n - 1.0) * vm + eps) {
      std::ostringstream os;
      os << "lambda[" << m << "]=" << lambda[m] << " outside [" << vm << ", " << (n - 1.0) * vm
         << "]";
      report.mtz_violations.push_back(os.str());
    }
  }
  for (std::size_t m = 1; m < M; ++m) {
    for (std::size_t j = 1; j < M; ++j) {
      if (m == j)
        continue;
      if (lambda[m] - lambda[j] > pair_bound(plan, m, j, n) + eps) {
        std::ostringstream os;
        os << "subtour constraint (" << m << ", " << j << ") violated";
        report.mtz_violations.push_back(os.str());
      }
    }
  }
}

/// Decides whether some lambda satisfies the constraints. They are all of the
/// difference form x_m - x_j <= c, so feasibility is the absence of a
/// negative cycle in the constraint graph (Bellman-Ford).
std::optional<std::vector<double>> find_lambda(const TourPlan &plan) {
  const std::size_t M = plan.selection.size();
  const double n = static_cast<double>(plan.selection.count());
  // Node M is a reference fixed at zero.
  struct Arc {
    std::size_t from, to;
    double w;
  };
  std::vector<Arc> arcs;
  for (std::size_t m = 1; m < M; ++m) {
    const double vm = plan.selection.contains(m) ? 1.0 : 0.0;
    arcs.push_back({M, m, (n - 1.0) * vm}); // lambda_m - ref <= (n-1) v_m
    arcs.push_back({m, M, -vm});            // ref - lambda_m <= -v_m
    for (std::size_t j = 1; j < M; ++j)
      if (j != m)
        arcs.push_back({j, m, pair_bound(plan, m, j, n)});
  }

  std::vector<double> d(M + 1, 0.0);
  for (std::size_t pass = 0; pass <= M + 1; ++pass) {
    bool changed = false;
    for (const auto &a : arcs) {
      if (d[a.from] + a.w < d[a.to] - 1e-12) {
        d[a.to] = d[a.from] + a.w;
        changed = true;
      }
    }
    if (!changed) {
      std::vector<double> lambda(M, 0.0);
      for (std::size_t m = 1; m < M; ++m)
        lambda[m] = d[m] - d[M];
      return lambda;
    }
  }
  return std::nullopt;
}

} // namespace

std::string MtzReport::summary() const {
  if (ok)
    return "ok";
  std::ostringstream os;
  for (const auto &s : degree_violations)
    os << "degree: " << s << "; ";
  if (cycles.size() > 1) {
    os << cycles.size() << " disjoint cycles:";
    for (const auto &c : cycles)
      os << " [" << join(c) << "]";
    os << "; ";
  }
  for (const auto &s : mtz_violations)
    os << "mtz: " << s << "; ";
  return os.str();
}

MtzReport check_mtz(const TourPlan &plan, bool use_plan_lambda) {
  MtzReport report;
  const auto &v = plan.selection;
  const std::size_t M = v.size();
  const auto &W = plan.edge_W;

  if (W.size() != M) {
    report.ok = false;
    report.degree_violations.push_back("edge matrix is " + std::to_string(W.size()) +
                                       "x" + std::to_string(W.size()) + ", expected " +
                                       std::to_string(M));
    return report;
  }

  for (std::size_t m = 0; m < M; ++m) {
    int out = 0, in = 0;
    for (std::size_t j = 0; j < M; ++j) {
      out += W(m, j);
      in += W(j, m);
    }
    const int vm = v.contains(m) ? 1 : 0;
    if (W(m, m))
      report.degree_violations.push_back("self loop at vertex " + std::to_string(m));
    // A depot-only tour has no edges at all.
    const int expect = v.count() == 1 ? 0 : vm;
    if (out != expect)
      report.degree_violations.push_back("row sum of vertex " + std::to_string(m) + " is " +
                                         std::to_string(out) + ", expected " +
                                         std::to_string(expect));
    if (in != expect)
      report.degree_violations.push_back("column sum of vertex " + std::to_string(m) + " is " +
                                         std::to_string(in) + ", expected " +
                                         std::to_string(expect));
  }

  report.cycles = decompose_cycles(W);
  const bool single_cycle = v.count() == 1 ? report.cycles.empty() : report.cycles.size() == 1;

  if (use_plan_lambda) {
    report.lambda = plan.mtz_lambda;
    check_lambda(plan, report.lambda, report);
  } else if (auto witness = find_lambda(plan)) {
    report.lambda = *witness;
    check_lambda(plan, report.lambda, report);
  } else {
    report.mtz_violations.push_back("no slack vector satisfies the subtour constraints");
  }

  report.ok = report.degree_violations.empty() && report.mtz_violations.empty() && single_cycle;
  return report;
}

} // namespace ugvbs
