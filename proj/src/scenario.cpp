#include "ugvbs/scenario.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace ugvbs {

double distance(const Point2 &a, const Point2 &b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

namespace {

void require(bool ok, const std::string &what) {
  if (!ok)
    throw ValidationError(what);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

} // namespace

void PhysicalParams::validate() const {
  require(positive_finite(alpha1), "params.alpha1 must be positive");
  require(positive_finite(alpha2), "params.alpha2 must be positive");
  require(positive_finite(speed_a), "params.speed_a must be positive");
  require(positive_finite(eta) && eta <= 1.0, "params.eta must lie in (0, 1]");
  require(positive_finite(beta) && beta <= 1.0, "params.beta must lie in (0, 1]");
  require(positive_finite(noise_N0), "params.noise_N0 must be positive");
  require(positive_finite(horizon_T), "params.horizon_T must be positive");
}

std::string to_string(Fading f) {
  return f == Fading::rayleigh ? "rayleigh" : "none";
}

Fading fading_from_string(const std::string &s) {
  if (s == "rayleigh")
    return Fading::rayleigh;
  if (s == "none")
    return Fading::none;
  throw ValidationError("unknown fading model '" + s + "'");
}

void ChannelModelConfig::validate() const {
  require(positive_finite(pathloss_rho0), "channel_cfg.pathloss_rho0 must be positive");
  require(positive_finite(ref_d0), "channel_cfg.ref_d0 must be positive");
  require(positive_finite(exponent), "channel_cfg.exponent must be positive");
}

void Scenario::validate() const {
  params.validate();
  channel_cfg.validate();

  const std::size_t M = dist_D.rows();
  const std::size_t K = demand_gamma.size();
  require(M >= 1, "scenario needs at least one vertex");
  require(dist_D.cols() == M, "dist_D must be square");
  require(vertex_positions.size() == M, "vertex_positions size must equal M");
  require(user_positions.size() == K, "user_positions size must equal K");
  require(gain_gh_sq.rows() == K && gain_gh_sq.cols() == M,
          "gain_gh_sq must be K x M");

  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t j = 0; j < M; ++j) {
      const double d = dist_D(m, j);
      std::ostringstream where;
      where << "dist_D[" << m << "][" << j << "]";
      if (m == j) {
        require(d == 0.0, where.str() + " must be exactly zero");
      } else {
        require(!std::isnan(d) && d >= 0.0, where.str() + " must be nonnegative");
      }
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t m = 0; m < M; ++m) {
      const double g = gain_gh_sq(k, m);
      std::ostringstream where;
      where << "gain_gh_sq[" << k << "][" << m << "]";
      require(std::isfinite(g) && g >= 0.0, where.str() + " must be finite and nonnegative");
    }
    std::ostringstream where;
    where << "demand_gamma[" << k << "]";
    require(positive_finite(demand_gamma[k]), where.str() + " must be positive");
  }
}

double pathloss(double d, const ChannelModelConfig &cfg) {
  if (!(d > 0.0))
    throw std::domain_error("pathloss: distance must be positive");
  return cfg.pathloss_rho0 * std::pow(d / cfg.ref_d0, -cfg.exponent);
}

double draw_channel_power(double rho, Fading fading, std::mt19937_64 &rng) {
  if (fading == Fading::none)
    return rho;
  // Real and imaginary parts are N(0, rho / 2).
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double re = gauss(rng);
  const double im = gauss(rng);
  return 0.5 * rho * (re * re + im * im);
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

Scenario generate_scenario(const GenerateOptions &opts) {
  if (opts.num_vertices < 1 || opts.num_users < 1)
    throw ValidationError("generate_scenario: M and K must be at least 1");
  if (!positive_finite(opts.area_side))
    throw ValidationError("generate_scenario: area_side must be positive");
  if (!(opts.gamma_lo > 0.0) || opts.gamma_hi < opts.gamma_lo)
    throw ValidationError("generate_scenario: demand bounds must satisfy 0 < lo <= hi");
  opts.channel.validate();
  opts.params.validate();

  const std::size_t M = opts.num_vertices;
  const std::size_t K = opts.num_users;

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> coord(0.0, opts.area_side);

  Scenario s;
  s.seed = opts.seed;
  s.params = opts.params;
  s.channel_cfg = opts.channel;

  s.vertex_positions.resize(M);
  for (auto &p : s.vertex_positions) {
    p.x = coord(rng);
    p.y = coord(rng);
  }
  s.user_positions.resize(K);
  for (auto &p : s.user_positions) {
    p.x = coord(rng);
    p.y = coord(rng);
  }

  s.dist_D = Matrix(M, M);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t j = 0; j < M; ++j)
      s.dist_D(m, j) = m == j ? 0.0 : distance(s.vertex_positions[m], s.vertex_positions[j]);

  s.gain_gh_sq = Matrix(K, M);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t m = 0; m < M; ++m) {
      const double rho = pathloss(distance(s.user_positions[k], s.vertex_positions[m]), opts.channel);
      const double g = draw_channel_power(rho, opts.channel.fading, rng);
      const double h = draw_channel_power(rho, opts.channel.fading, rng);
      s.gain_gh_sq(k, m) = g * h;
    }
  }

  std::uniform_real_distribution<double> demand(opts.gamma_lo, opts.gamma_hi);
  s.demand_gamma.resize(K);
  for (auto &g : s.demand_gamma)
    g = opts.gamma_lo == opts.gamma_hi ? opts.gamma_lo : demand(rng);

  return s;
}

Scenario with_noise(Scenario s, double noise_watt) {
  s.params.noise_N0 = noise_watt;
  s.params.validate();
  return s;
}

} // namespace ugvbs
