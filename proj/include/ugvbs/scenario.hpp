/**
 * @file scenario.hpp
 * @brief Problem instances: stopping-point graph, user positions, channels
 * and the physical constants of the vehicle and the backscatter link.
 *
 * Vertices and users are indexed from zero. Vertex 0 is the depot where
 * every tour starts and ends.
 */

#ifndef UGVBS_SCENARIO_HPP
#define UGVBS_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ugvbs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Dense row-major matrix of doubles.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<double> &data() const { return data_; }

  bool operator==(const Matrix &) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2 &) const = default;
};

double distance(const Point2 &a, const Point2 &b);

/// Vehicle and link constants. All strictly positive; eta and beta at most 1.
struct PhysicalParams {
  double alpha1 = 0.29;   ///< motion energy per metre (J/m)
  double alpha2 = 7.4;    ///< motion power coefficient (J/m per m/s)
  double speed_a = 1.0;   ///< vehicle speed (m/s)
  double eta = 0.78;      ///< tag scattering efficiency
  double beta = 0.5;      ///< modulation/coding loss
  double noise_N0 = 1e-10; ///< receiver noise power (W)
  double horizon_T = 50.0; ///< mission time budget (s)

  /// Energy per metre travelled: alpha1 / a + alpha2.
  double motion_energy_per_metre() const { return alpha1 / speed_a + alpha2; }

  void validate() const;
  bool operator==(const PhysicalParams &) const = default;
};

enum class Fading { rayleigh, none };

std::string to_string(Fading f);
Fading fading_from_string(const std::string &s);

struct ChannelModelConfig {
  double pathloss_rho0 = 1e-3;
  double ref_d0 = 1.0;
  double exponent = 2.5;
  Fading fading = Fading::rayleigh;

  void validate() const;
  bool operator==(const ChannelModelConfig &) const = default;
};

/// Thrown when an instance or its parameters break an invariant.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::vector<Point2> vertex_positions; ///< M entries
  std::vector<Point2> user_positions;   ///< K entries
  Matrix dist_D;                        ///< M x M, +inf for a missing edge
  Matrix gain_gh_sq;                    ///< K x M, |g|^2 |h|^2
  std::vector<double> demand_gamma;     ///< K entries, bit/Hz
  PhysicalParams params;
  ChannelModelConfig channel_cfg;
  std::optional<std::uint64_t> seed;    ///< generator seed, if generated

  std::size_t num_vertices() const { return dist_D.rows(); }
  std::size_t num_users() const { return demand_gamma.size(); }

  /// Checks every structural and physical invariant; throws ValidationError.
  void validate() const;

  bool operator==(const Scenario &) const = default;
};

/// Mean channel power at distance d: rho0 * (d / d0)^(-exponent).
/// Throws std::domain_error for d <= 0.
double pathloss(double d, const ChannelModelConfig &cfg);

/// One draw of |x|^2 for x ~ CN(0, rho); returns rho itself without fading.
double draw_channel_power(double rho, Fading fading, std::mt19937_64 &rng);

/// Noise power conversions, N0[W] = 10^((dBm - 30) / 10).
double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

struct GenerateOptions {
  std::uint64_t seed = 0;
  std::size_t num_vertices = 15;
  std::size_t num_users = 10;
  double area_side = 20.0;
  double gamma_lo = 2.0; ///< demand drawn U(gamma_lo, gamma_hi)
  double gamma_hi = 4.0;
  ChannelModelConfig channel;
  PhysicalParams params;
};

/// Draws vertices and users uniformly over the square, builds the complete
/// Euclidean distance digraph and samples the combined channel gains.
/// Deterministic in the seed.
Scenario generate_scenario(const GenerateOptions &opts);

/// Same scenario with a different receiver noise power.
Scenario with_noise(Scenario s, double noise_watt);

// Structured-text (JSON) persistence.

inline constexpr int kScenarioSchemaVersion = 1;

class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::string scenario_to_json(const Scenario &s);
Scenario scenario_from_json(const std::string &text);

void save_scenario(const Scenario &s, const std::filesystem::path &path);
Scenario load_scenario(const std::filesystem::path &path);

} // namespace ugvbs

#endif // UGVBS_SCENARIO_HPP
