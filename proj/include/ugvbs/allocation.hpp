/**
 * @file allocation.hpp
 * @brief Continuous inner problem: given the visited vertices and the time
 * left after travelling, split that time among (user, vertex) pairs and pick
 * the transmit energies that meet every user's data target at minimum total
 * energy.
 *
 * With Q = t p the data delivered by user k at vertex m is the perspective
 * function  phi(t, Q) = t log2(1 + A Q / t), jointly concave in (t, Q), so
 * the problem is convex. Its KKT conditions give water-filling powers
 * p = max(0, mu_k / ln 2 - 1 / A) and a common marginal value of time nu.
 */

#ifndef UGVBS_ALLOCATION_HPP
#define UGVBS_ALLOCATION_HPP

#include <span>
#include <string>
#include <vector>

#include "ugvbs/mobility.hpp"
#include "ugvbs/scenario.hpp"

namespace ugvbs {

/// log2(1 + A p), bit/Hz per second of transmission.
double rate(double gain, double power);

/// t log2(1 + A Q / t) for t > 0 and 0 at t = 0.
double phi(double t, double energy, double gain);

/// Partial derivative of phi in t:
///   log2(1 + A Q / t) - (1 / ln 2) A Q / (t + A Q).
/// Nonnegative everywhere. Throws std::domain_error for t <= 0.
double phi_grad_t(double t, double energy, double gain);

/// A[k][m] = v_m beta eta |g|^2 |h|^2 / N0, in 1/W.
Matrix effective_gains(const Scenario &scenario, const Selection &selection);

struct Allocation {
  Matrix t; ///< K x M stop-time shares (s)
  Matrix Q; ///< K x M communication energies (J)
  Matrix p; ///< K x M recovered powers Q / t, zero where t = 0 (W)

  double total_time() const;
  double total_energy() const;
  double max_power() const;
};

struct Tolerances {
  double primal = 1e-6;        ///< QoS shortfall, bit/Hz
  double time_relative = 1e-8; ///< |sum t - upsilon| / upsilon
  double stationarity = 1e-5;  ///< relative KKT stationarity
};

struct KktReport {
  double primal_residual = 0.0;
  double time_residual = 0.0;
  double stationarity_residual = 0.0;
  std::vector<double> mu; ///< per-user QoS multipliers
  double nu = 0.0;        ///< multiplier of the time budget

  bool within(const Tolerances &tol, double upsilon) const;
};

/**
 * @brief KKT certificate of an allocation, computed from the primal data and
 * the supplied multipliers only.
 *
 * Stationarity at a pair with t > 0 requires p to equal the water-filling
 * power and the per-second Lagrangian value mu log2(1 + A p*) - p* to equal
 * nu; at t = 0 that value may not exceed nu. Complementary slackness of the
 * QoS constraints is folded into the stationarity residual.
 */
KktReport kkt_report(const Matrix &gains, std::span<const double> gamma, double upsilon,
                     const Allocation &alloc, std::vector<double> mu, double nu);

enum class P2Status { ok, no_time, unreachable_user, energy_overflow };

std::string to_string(P2Status s);

struct P2Result {
  P2Status status = P2Status::ok;
  Allocation alloc;
  KktReport kkt;
  bool high_power_warning = false; ///< some recovered power above 1 kW
  bool certified = false;          ///< KKT residuals within tolerance

  bool feasible() const { return status == P2Status::ok; }
};

/// Recovered powers above this are flagged in diagnostics.
inline constexpr double kHighPowerWatts = 1e3;

/**
 * @brief Minimum-energy time and energy allocation for a fixed selection.
 *
 * Spends exactly `upsilon` seconds. Each user is served only at one of its
 * best-gain vertices (splitting a user's time across vertices cannot beat
 * concentrating it on the best one), and the time shares are found by
 * bisection on nu. Infeasible when upsilon <= 0 or a user with positive
 * demand has zero gain at every selected vertex.
 */
P2Result solve_p2(const Matrix &gains, std::span<const double> gamma, double upsilon,
                  const Tolerances &tol = {});

P2Result solve_p2(const Scenario &scenario, const Selection &selection, double upsilon,
                  const Tolerances &tol = {});

/// Modulation loss of bistatic FSK backscatter.
inline constexpr double kBetaFsk = 0.5;

/// Gaussian tail probability Q(x).
double gaussian_q(double x);

/// Least-squares fit of log2(1 + beta x) to 1 - Q(sqrt(x)) on the grid
/// x_i = grid_max i / n, i = 1..n. Requires grid_max > 0 and n >= 10.
double fit_beta_ook(double grid_max, std::size_t grid_points);

} // namespace ugvbs

#endif // UGVBS_ALLOCATION_HPP
