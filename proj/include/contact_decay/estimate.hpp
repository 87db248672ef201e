#pragma once

// Decay-rate extraction from survival curves P(t) = P(origin infected at t).
//
// Two estimators:
//   fekete_lower     max_i (1/t_i) log p_i, the sup characterization of the
//                    rate evaluated on the grid;
//   tail_regression  weighted least-squares slope of log p_i against t_i.
//
// Survival events within one replicate are nested, so the log-estimates on a
// curve are correlated: Cov(log p_i, log p_j) ~= (1 - p_a) / (n p_a) with
// a = min(i, j). Standard errors below use that full covariance.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "contact_decay/stats.hpp"

namespace contact_decay {

class SurvivalCurve {
 public:
  SurvivalCurve() = default;
  // Counts-based curve: k[i] of n replicates survive to times[i].
  SurvivalCurve(std::vector<double> times, std::uint64_t replicates,
                std::vector<std::uint64_t> survivors);
  // Noise-free curve (e.g. an exact law), reported with zero variance.
  static SurvivalCurve exact(std::vector<double> times, std::vector<double> probabilities);

  std::size_t size() const { return times_.size(); }
  bool is_exact() const { return exact_; }
  std::span<const double> times() const { return times_; }
  std::uint64_t replicates() const { return n_; }
  std::span<const std::uint64_t> survivors() const { return k_; }

  double p_hat(std::size_t i) const { return p_[i]; }
  // Wilson 95% interval (degenerate at p_hat for exact curves).
  Interval ci(std::size_t i) const;
  // Delta-method variance of log p_hat(i): (1 - p) / (n p).
  double log_variance(std::size_t i) const;

 private:
  std::vector<double> times_;
  std::uint64_t n_ = 0;
  std::vector<std::uint64_t> k_;
  std::vector<double> p_;
  bool exact_ = false;
};

struct FitWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

enum class DecayMethod { fekete_sup, tail_regression };
std::string_view to_string(DecayMethod m);

struct DecayEstimate {
  double rate = 0.0;  // per unit time
  double se = 0.0;
  DecayMethod method = DecayMethod::fekete_sup;
  FitWindow window;
  Interval ci;        // 95% interval on the rate
  std::size_t points = 0;
};

inline constexpr double kDefaultBurnIn = 2.0;
inline constexpr std::uint64_t kMinWindowSurvivors = 50;

// From t_lo = burn_in to the last grid time whose survivor count is at least
// min_survivors (exact curves: the last time). Throws NumericalError when no
// grid point qualifies.
FitWindow default_window(const SurvivalCurve& curve, double burn_in = kDefaultBurnIn,
                         std::uint64_t min_survivors = kMinWindowSurvivors);

// Grid points with t > 0 inside the window (default: from the first positive
// time to the last point with >= 50 survivors). Throws NumericalError when a
// window point has zero survivors.
DecayEstimate fekete_lower(const SurvivalCurve& curve, std::optional<FitWindow> window = {});

// Needs >= 3 window points; throws NumericalError on a zero-survivor point.
DecayEstimate tail_regression(const SurvivalCurve& curve, std::optional<FitWindow> window = {});

struct SupermultiplicativityViolation {
  double t = 0.0;
  double s = 0.0;
  double deficit = 0.0;  // log p(t) + log p(s) - log p(t+s)
  double slack = 0.0;    // z * combined SE
};

// Checks log p(t+s) >= log p(t) + log p(s) - z * sqrt(v_t + v_s + v_{t+s})
// for every pair of positive grid times whose sum is on the grid (within
// 1e-9). Pairs touching a zero-survivor point are skipped.
std::vector<SupermultiplicativityViolation> supermultiplicativity_violations(
    const SurvivalCurve& curve, double z = 3.0);

// start:stop:step grid, inclusive of stop when it lies on the grid.
std::vector<double> parse_time_grid(std::string_view spec);

}  // namespace contact_decay
