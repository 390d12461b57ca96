#include <algorithm>
#include <bit>
#include <stdexcept>

#include "ugvbs/planner.hpp"

namespace ugvbs {

namespace {

// Neighbourhoods up to this many members are enumerated up front.
constexpr std::uint64_t kEnumerateLimit = std::uint64_t{1} << 20;

std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n)
    return 0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (std::size_t i = 1; i <= k; ++i)
    c = c / i * (n - k + i) + c % i * (n - k + i) / i;
  return c;
}

std::uint64_t uniform_below(std::uint64_t n, std::mt19937_64 &rng) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

} // namespace

Neighborhood::Neighborhood(const Selection &center, std::size_t L)
    : center_(center), free_bits_(center.size() - 1), radius_(std::min(L, center.size() - 1)) {
  if (L < 1)
    throw std::invalid_argument("neighbourhood size L must be at least 1");
  for (std::size_t d = 1; d <= radius_; ++d)
    total_ += binomial(free_bits_, d);

  if (total_ <= kEnumerateLimit) {
    enumerated_ = true;
    pool_.reserve(total_);
    // Flip masks over bits 1..free_bits_, by weight (Gosper's hack).
    for (std::size_t d = 1; d <= radius_; ++d) {
      const std::uint64_t limit = std::uint64_t{1} << free_bits_;
      for (std::uint64_t c = (std::uint64_t{1} << d) - 1; c < limit;) {
        pool_.push_back(c << 1);
        const std::uint64_t lowest = c & -c;
        const std::uint64_t ripple = c + lowest;
        c = (((ripple ^ c) >> 2) / lowest) | ripple;
        if (ripple == 0)
          break;
      }
    }
  }
}

std::optional<Selection> Neighborhood::next(std::mt19937_64 &rng) {
  if (drawn_ >= total_)
    return std::nullopt;

  std::uint64_t mask = 0;
  if (enumerated_) {
    const std::uint64_t pick = drawn_ + uniform_below(total_ - drawn_, rng);
    std::swap(pool_[drawn_], pool_[pick]);
    mask = pool_[drawn_];
  } else {
    // Weight d with probability C(n, d) / total, then a uniform d-subset.
    std::vector<std::size_t> positions(free_bits_);
    for (;;) {
      std::uint64_t r = uniform_below(total_, rng);
      std::size_t d = 1;
      for (; d <= radius_; ++d) {
        const std::uint64_t c = binomial(free_bits_, d);
        if (r < c)
          break;
        r -= c;
      }
      for (std::size_t i = 0; i < free_bits_; ++i)
        positions[i] = i + 1;
      mask = 0;
      for (std::size_t i = 0; i < d; ++i) {
        const std::size_t j = i + uniform_below(free_bits_ - i, rng);
        std::swap(positions[i], positions[j]);
        mask |= std::uint64_t{1} << positions[i];
      }
      if (seen_.insert(mask).second)
        break;
    }
  }
  ++drawn_;
  return Selection::from_bits(center_.size(), center_.bits() ^ mask);
}

} // namespace ugvbs
