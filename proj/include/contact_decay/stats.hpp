#pragma once

#include <cstdint>

namespace contact_decay {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
  bool contains(double v) const { return lo <= v && v <= hi; }
};

// Wilson score interval for k successes out of n trials at normal quantile z.
Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054);

// sqrt(p (1 - p) / n)
double binomial_se(double p, std::uint64_t n);

// Running mean / variance (Welford). merge() is exact up to rounding, and
// results depend only on the order of merges.
class MeanAccumulator {
 public:
  void add(double x);
  void merge(const MeanAccumulator& other);

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // sample variance
  double standard_error() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace contact_decay
