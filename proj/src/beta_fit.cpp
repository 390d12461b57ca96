#include <cmath>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "ugvbs/allocation.hpp"

namespace ugvbs {

double fit_beta_ook(double grid_max, std::size_t grid_points) {
  if (!(grid_max > 0.0))
    throw std::invalid_argument("fit_beta_ook: grid_max must be positive");
  if (grid_points < 10)
    throw std::invalid_argument("fit_beta_ook: need at least 10 grid points");

  std::vector<double> xs(grid_points), target(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    xs[i] = grid_max * static_cast<double>(i + 1) / static_cast<double>(grid_points);
    target[i] = 1.0 - gaussian_q(std::sqrt(xs[i]));
  }

  auto sse = [&](double beta) {
    double s = 0.0;
    for (std::size_t i = 0; i < grid_points; ++i) {
      const double r = std::log2(1.0 + beta * xs[i]) - target[i];
      s += r * r;
    }
    return s;
  };

  // 30 bits gives a bracket width of about 1e-9 on [0, 2].
  const auto [beta, err] = boost::math::tools::brent_find_minima(sse, 0.0, 2.0, 30);
  (void)err;
  return beta;
}

} // namespace ugvbs
