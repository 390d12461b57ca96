#include "ugvbs/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ugvbs {

namespace {

constexpr double kLn2 = std::numbers::ln2;

/// log1p(z) - z / (1 + z), accurate for small z.
double log1p_minus_ratio(double z) {
  if (z < 0.1) {
    double term = z;
    double sum = 0.0;
    for (int n = 2; n < 40; ++n) {
      term *= -z;
      // term = (-1)^(n-1) z^n; coefficient (-1)^n (n - 1) / n
      sum -= term * (n - 1) / n;
    }
    return sum;
  }
  return std::log1p(z) - z / (1.0 + z);
}

/// log of psi(x) = x e^x - (e^x - 1) for x > 0.
///
/// With x = gamma ln2 / t, psi(x) / A is the marginal energy saved per extra
/// second of transmit time for a user on a link of gain A.
double log_psi(double x) {
  if (x < 1.0) {
    // psi(x) = sum_{n>=2} (n - 1) x^n / n!
    double term = x; // x^n / n!
    double sum = 0.0;
    for (int n = 2; n < 30; ++n) {
      term *= x / n;
      sum += (n - 1) * term;
    }
    return std::log(sum);
  }
  return x + std::log(x - 1.0 + std::exp(-x));
}

/// Solves log_psi(x) = target for x > 0.
double solve_log_psi(double target) {
  double lo = 0.0;
  double hi = 1.0;
  while (log_psi(hi) < target)
    hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    (log_psi(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

} // namespace

double rate(double gain, double power) { return std::log1p(gain * power) / kLn2; }

double phi(double t, double energy, double gain) {
  if (t <= 0.0)
    return 0.0;
  return t * std::log1p(gain * energy / t) / kLn2;
}

double phi_grad_t(double t, double energy, double gain) {
  if (!(t > 0.0))
    throw std::domain_error("phi_grad_t: t must be positive");
  return log1p_minus_ratio(gain * energy / t) / kLn2;
}

Matrix effective_gains(const Scenario &scenario, const Selection &selection) {
  const std::size_t K = scenario.num_users();
  const std::size_t M = scenario.num_vertices();
  if (selection.size() != M)
    throw std::invalid_argument("effective_gains: selection size does not match scenario");
  const auto &p = scenario.params;
  const double scale = p.beta * p.eta / p.noise_N0;
  Matrix A(K, M);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t m = 0; m < M; ++m)
      A(k, m) = selection.contains(m) ? scale * scenario.gain_gh_sq(k, m) : 0.0;
  return A;
}

double Allocation::total_time() const {
  double s = 0.0;
  for (double x : t.data())
    s += x;
  return s;
}

double Allocation::total_energy() const {
  double s = 0.0;
  for (double x : Q.data())
    s += x;
  return s;
}

double Allocation::max_power() const {
  double s = 0.0;
  for (double x : p.data())
    s = std::max(s, x);
  return s;
}

bool KktReport::within(const Tolerances &tol, double upsilon) const {
  return primal_residual <= tol.primal && time_residual <= tol.time_relative * upsilon &&
         stationarity_residual <= tol.stationarity &&
         std::all_of(mu.begin(), mu.end(), [](double m) { return m >= 0.0; });
}

KktReport kkt_report(const Matrix &gains, std::span<const double> gamma, double upsilon,
                     const Allocation &alloc, std::vector<double> mu, double nu) {
  const std::size_t K = gains.rows();
  const std::size_t M = gains.cols();
  KktReport r;
  r.time_residual = std::abs(alloc.total_time() - upsilon);

  double stat = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double delivered = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      const double t = alloc.t(k, m);
      const double Q = alloc.Q(k, m);
      const double A = gains(k, m);
      delivered += phi(t, Q, A);
      if (A <= 0.0) {
        // Unvisited vertex: time and energy must vanish.
        if (t != 0.0 || Q != 0.0)
          stat = std::max(stat, 1.0);
        continue;
      }
      const double p_star = std::max(0.0, mu[k] / kLn2 - 1.0 / A);
      const double value = mu[k] * rate(A, p_star) - p_star;
      if (t > 0.0) {
        stat = std::max(stat, relative_gap(value, nu));
        stat = std::max(stat, relative_gap(alloc.p(k, m), p_star));
      } else if (value > nu) {
        stat = std::max(stat, relative_gap(value, nu));
      }
    }
    r.primal_residual = std::max(r.primal_residual, gamma[k] - delivered);
    if (mu[k] > 0.0 && gamma[k] > 0.0)
      stat = std::max(stat, std::max(0.0, delivered - gamma[k]) / gamma[k]);
  }
  r.stationarity_residual = stat;
  r.mu = std::move(mu);
  r.nu = nu;
  return r;
}

std::string to_string(P2Status s) {
  switch (s) {
  case P2Status::ok:
    return "ok";
  case P2Status::no_time:
    return "no_time";
  case P2Status::unreachable_user:
    return "unreachable_user";
  case P2Status::energy_overflow:
    return "energy_overflow";
  }
  return "unknown";
}

P2Result solve_p2(const Matrix &gains, std::span<const double> gamma, double upsilon,
                  const Tolerances &tol) {
  const std::size_t K = gains.rows();
  const std::size_t M = gains.cols();
  if (gamma.size() != K)
    throw std::invalid_argument("solve_p2: demand vector does not match gain rows");

  P2Result res;
  res.alloc = {Matrix(K, M), Matrix(K, M), Matrix(K, M)};
  if (!(upsilon > 0.0) || !std::isfinite(upsilon)) {
    res.status = P2Status::no_time;
    return res;
  }

  // Best vertex per user, lowest index on ties.
  std::vector<std::size_t> best(K, 0);
  std::vector<double> best_gain(K, 0.0);
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t m = 0; m < M; ++m) {
      if (gains(k, m) > best_gain[k]) {
        best_gain[k] = gains(k, m);
        best[k] = m;
      }
    }
    if (gamma[k] > 0.0) {
      if (best_gain[k] <= 0.0) {
        res.status = P2Status::unreachable_user;
        return res;
      }
      active.push_back(k);
    }
  }

  std::vector<double> mu(K, 0.0);
  double nu = 0.0;

  if (active.empty()) {
    // Nothing to deliver: park all the time on one pair at zero energy.
    std::size_t k0 = 0;
    res.alloc.t(k0, best[k0]) = upsilon;
    res.kkt = kkt_report(gains, gamma, upsilon, res.alloc, mu, nu);
    res.certified = res.kkt.within(tol, upsilon);
    return res;
  }

  // Time spent by user k when the marginal value of time is e^u:
  //   psi(x_k) = e^u A_k,  t_k = gamma_k ln2 / x_k.
  std::vector<double> x(K, 0.0);
  auto total_time = [&](double u) {
    double sum = 0.0;
    for (std::size_t k : active) {
      x[k] = solve_log_psi(u + std::log(best_gain[k]));
      sum += gamma[k] * kLn2 / x[k];
    }
    return sum;
  };

  double u_lo = 0.0, u_hi = 0.0;
  while (total_time(u_lo) < upsilon)
    u_lo -= 16.0;
  while (total_time(u_hi) > upsilon)
    u_hi += 16.0;
  for (int it = 0; it < 300 && u_hi - u_lo > 1e-15 * std::max(1.0, std::abs(u_hi)); ++it) {
    const double mid = 0.5 * (u_lo + u_hi);
    if (mid <= u_lo || mid >= u_hi)
      break;
    (total_time(mid) > upsilon ? u_lo : u_hi) = mid;
  }
  const double u = 0.5 * (u_lo + u_hi);
  const double spent = total_time(u);
  nu = std::exp(u);

  // Rescale so the budget is met exactly, then set each energy to the
  // smallest value meeting the demand in that time.
  const double scale = upsilon / spent;
  for (std::size_t k : active) {
    const std::size_t m = best[k];
    const double A = best_gain[k];
    const double t = gamma[k] * kLn2 / x[k] * scale;
    const double xk = gamma[k] * kLn2 / t;
    const double Q = t * std::expm1(xk) / A;
    if (!std::isfinite(Q)) {
      res.status = P2Status::energy_overflow;
      return res;
    }
    res.alloc.t(k, m) = t;
    res.alloc.Q(k, m) = Q;
    res.alloc.p(k, m) = Q / t;
    mu[k] = kLn2 * std::exp(xk) / A;
  }

  res.high_power_warning = res.alloc.max_power() > kHighPowerWatts;
  res.kkt = kkt_report(gains, gamma, upsilon, res.alloc, std::move(mu), nu);
  res.certified = res.kkt.within(tol, upsilon);
  return res;
}

P2Result solve_p2(const Scenario &scenario, const Selection &selection, double upsilon,
                  const Tolerances &tol) {
  const Matrix A = effective_gains(scenario, selection);
  return solve_p2(A, scenario.demand_gamma, upsilon, tol);
}

double gaussian_q(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

} // namespace ugvbs
