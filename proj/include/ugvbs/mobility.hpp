/**
 * @file mobility.hpp
 * @brief Tours over the stopping-point graph: selection vectors, edge
 * matrices, motion time and energy, an exact TSP over a selected subset and
 * a verifier for the degree and Miller-Tucker-Zemlin subtour constraints.
 */

#ifndef UGVBS_MOBILITY_HPP
#define UGVBS_MOBILITY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ugvbs/scenario.hpp"

namespace ugvbs {

/// Largest graph a selection can describe (one bit per vertex).
inline constexpr std::size_t kMaxVertices = 64;

/// Binary vertex-selection vector with the depot bit always set.
class Selection {
public:
  /// Depot-only selection over `num_vertices` vertices.
  static Selection depot_only(std::size_t num_vertices);
  static Selection all(std::size_t num_vertices);
  /// Throws std::invalid_argument when the depot bit is clear or bits lie
  /// beyond `num_vertices`.
  static Selection from_bits(std::size_t num_vertices, std::uint64_t bits);
  /// Parses a string of '0'/'1' characters, depot first.
  static Selection parse(const std::string &text);

  std::size_t size() const { return size_; }
  std::uint64_t bits() const { return bits_; }
  bool contains(std::size_t m) const { return (bits_ >> m) & 1u; }
  std::size_t count() const;

  /// Selected vertex indices in increasing order; the depot comes first.
  std::vector<std::size_t> indices() const;

  /// Flips a non-depot vertex.
  Selection flipped(std::size_t m) const;

  /// Number of differing entries.
  std::size_t hamming(const Selection &other) const;

  std::string to_string() const;

  bool operator==(const Selection &) const = default;

private:
  Selection(std::size_t size, std::uint64_t bits) : size_(size), bits_(bits) {}
  std::size_t size_ = 1;
  std::uint64_t bits_ = 1;
};

/// Dense M x M 0/1 matrix of traversed edges.
class EdgeMatrix {
public:
  EdgeMatrix() = default;
  explicit EdgeMatrix(std::size_t n) : n_(n), data_(n * n, 0) {}

  std::size_t size() const { return n_; }
  std::uint8_t operator()(std::size_t m, std::size_t j) const { return data_[m * n_ + j]; }
  std::uint8_t &operator()(std::size_t m, std::size_t j) { return data_[m * n_ + j]; }

  bool operator==(const EdgeMatrix &) const = default;

private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Discrete decision variables of one tour.
struct TourPlan {
  Selection selection = Selection::depot_only(1);
  EdgeMatrix edge_W;
  /// Visit sequence starting and ending at the depot; just {0} when only the
  /// depot is selected.
  std::vector<std::size_t> order;
  /// MTZ slack per vertex; zero for the depot and unselected vertices.
  std::vector<double> mtz_lambda;

  /// Builds W and position-based lambda from a closed visit order.
  static TourPlan from_order(const Selection &selection, std::vector<std::size_t> order);
};

struct TspResult {
  TourPlan plan;
  double tour_length = 0.0; ///< metres, +inf when no closed tour exists
  double upsilon = 0.0;     ///< T - tour_length / a, -inf when infeasible

  bool has_tour() const { return tour_length < kInf; }
};

/// Sum of the distances on traversed edges, Tr(D^T W).
double tour_length(const TourPlan &plan, const Matrix &dist);

/// Tr(D^T W) / a; +inf if the plan uses a missing edge.
double motion_time(const TourPlan &plan, const Matrix &dist, double speed);

/// (alpha1 / a + alpha2) Tr(D^T W).
double motion_energy(const TourPlan &plan, const Matrix &dist, const PhysicalParams &params);

/// Default limit on the number of selected vertices handed to the exact solver.
inline constexpr std::size_t kTspSelectionCap = 24;

/// Exact minimum closed tour through exactly the selected vertices, starting
/// and ending at the depot (Held-Karp). Asymmetric and infinite distances are
/// supported. Among equal-length tours the lexicographically smallest visit
/// order is returned. Throws std::length_error above `cap` selected vertices.
TspResult solve_tsp(const Selection &selection, const Matrix &dist, const PhysicalParams &params,
                    std::size_t cap = kTspSelectionCap);

/// Big constant of the subtour elimination constraints.
inline constexpr double kMtzBigJ = 1e6;

struct MtzReport {
  bool ok = true;
  std::vector<std::string> degree_violations;
  /// Every cycle formed by W, as vertex sequences. A valid tour has one.
  std::vector<std::vector<std::size_t>> cycles;
  std::vector<std::string> mtz_violations;
  /// The slack vector that was checked: the supplied one, or a witness found
  /// by the verifier (empty if none exists).
  std::vector<double> lambda;

  std::string summary() const;
};

/**
 * @brief Verifies degree and MTZ subtour constraints on a tour plan.
 *
 * Checks row/column sums of W against the selection, decomposes W into
 * cycles, and checks
 *   lambda_m - lambda_j + (n-1) W_mj + (n-3) W_jm <= n - 2 + J (2 - v_m - v_j)
 *   v_m <= lambda_m <= (n-1) v_m
 * for m, j != depot, n = number of selected vertices. With `use_plan_lambda`
 * the plan's own mtz_lambda is checked; otherwise existence of a feasible
 * lambda is decided exactly as a system of difference constraints.
 */
MtzReport check_mtz(const TourPlan &plan, bool use_plan_lambda = false);

} // namespace ugvbs

#endif // UGVBS_MOBILITY_HPP
