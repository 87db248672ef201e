#include "contact_decay/stats.hpp"

#include <cmath>
#include <algorithm>
#include <stdexcept>

namespace contact_decay {

Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
  if (n == 0) throw std::invalid_argument("wilson_interval: n must be positive");
  if (k > n) throw std::invalid_argument("wilson_interval: k > n");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  Interval out{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  // pin the exact endpoints so the interval always contains p
  if (k == 0) out.lo = 0.0;
  if (k == n) out.hi = 1.0;
  return out;
}

double binomial_se(double p, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("binomial_se: n must be positive");
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

void MeanAccumulator::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void MeanAccumulator::merge(const MeanAccumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double delta = other.mean_ - mean_;
  const double n = na + nb;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  n_ += other.n_;
}

double MeanAccumulator::variance() const {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double MeanAccumulator::standard_error() const {
  return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

}  // namespace contact_decay
