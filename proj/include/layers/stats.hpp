#pragma once

#include "layers/errors.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace layers {

/// Welford accumulator; same values in the same order give the same bits.
class RunningStats {
 public:
  void add(double x) {
    ++count_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(count_);
    m2_ += d * (x - mean_);
  }

  std::uint64_t count() const noexcept { return count_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept {
    return count_ < 2 ? 0.0 : m2_ / static_cast<double>(count_ - 1);
  }
  double stddev() const noexcept { return std::sqrt(variance()); }
  /// Standard error of the mean.
  double sem() const noexcept {
    return count_ == 0 ? 0.0 : stddev() / std::sqrt(static_cast<double>(count_));
  }

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline RunningStats summarize(std::span<const double> xs) {
  RunningStats s;
  for (double x : xs) s.add(x);
  return s;
}

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double x) const noexcept { return x >= lower && x <= upper; }
};

/// Two-sided normal quantile for a confidence level in (0, 1).
inline double z_for_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidParameter("confidence level must be in (0, 1)");
  boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, 0.5 + level / 2.0);
}

inline Interval mean_interval(const RunningStats& s, double level) {
  const double half = z_for_level(level) * s.sem();
  return {s.mean() - half, s.mean() + half};
}

/// Clopper-Pearson interval for k successes in n trials.
inline Interval clopper_pearson(std::uint64_t k, std::uint64_t n, double level) {
  if (n == 0) return {0.0, 1.0};
  const double alpha = 1.0 - level;
  const auto kd = static_cast<double>(k);
  const auto nd = static_cast<double>(n);
  const double lo = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, alpha / 2.0);
  const double hi = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - alpha / 2.0);
  return {lo, hi};
}

/// Normal-approximation binomial interval, falling back to Clopper-Pearson
/// when fewer than 10 successes or failures are expected.
inline Interval binomial_interval(std::uint64_t k, std::uint64_t n, double level) {
  if (n == 0) return {0.0, 1.0};
  const double p = static_cast<double>(k) / static_cast<double>(n);
  const double nd = static_cast<double>(n);
  if (nd * p < 10.0 || nd * (1.0 - p) < 10.0) return clopper_pearson(k, n, level);
  const double half = z_for_level(level) * std::sqrt(p * (1.0 - p) / nd);
  return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

/// Standard deviation of a Bernoulli(p) frequency over n draws.
inline double binomial_sigma(double p, std::uint64_t n) {
  return n == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

/// Median of a copy of xs (mean of the middle pair for even counts).
inline double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 == 1 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

}  // namespace layers
