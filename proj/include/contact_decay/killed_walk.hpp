#pragma once

// Hitting probability of the origin for the discrete-time simple random walk
// on Z^d that is killed with probability 1 - p at every step:
//
//   R(x, d, p) = P(walk started at x ever visits O before being killed).
//
// R(O) = 1 and R(x) = (p / 2d) * sum_{y ~ x} R(y) for x != O.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "contact_decay/lattice.hpp"
#include "contact_decay/stats.hpp"

namespace contact_decay {

struct KilledWalkSpec {
  int d = 1;
  double p = 0.0;

  void validate() const;  // d >= 1, 0 <= p <= 1
};

// Two-sided solution of the truncated system on [-M, M]^d. `lower` uses a zero
// exterior, `upper` an exterior held at 1; by monotonicity of the iteration
// lower <= R <= upper at every site, at every sweep.
class HittingSolution {
 public:
  HittingSolution(KilledWalkSpec spec, Box box, std::vector<double> lower,
                  std::vector<double> upper, int sweeps, double certified_error);

  const KilledWalkSpec& spec() const { return spec_; }
  const Box& box() const { return box_; }
  int radius() const { return box_.radius(); }
  int sweeps() const { return sweeps_; }

  // Largest half-gap over the requested sites.
  double certified_error() const { return certified_error_; }

  // Closures padded outward by a few ulps to absorb rounding in the sweeps.
  Interval bracket(const Site& x) const;
  double value(const Site& x) const;  // midpoint of the two closures
  double error(const Site& x) const { return 0.5 * bracket(x).width(); }

  // Midpoint field over the box, indexed like box().
  std::vector<double> midpoint() const;
  // Zero-exterior closure: harmonic on the box with H = 0 outside.
  const std::vector<double>& lower_field() const { return lower_; }

  // max over x != O with all neighbors in the box of
  // |H(x) - (p / 2d) sum_{y ~ x} H(y)| for the midpoint field H.
  double harmonic_residual() const;

 private:
  KilledWalkSpec spec_;
  Box box_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  int sweeps_;
  double certified_error_;
};

struct SolveOptions {
  int initial_radius = 4;
  int max_radius = 4096;
  std::size_t max_unknowns = 3'000'000;
  int max_sweeps_per_radius = 200'000;
};

// Gauss-Seidel sweeps on both closures, growing M until the half-gap at every
// requested site (default: e_1) is <= tol. Throws NumericalError when the box
// limits are reached first (p too close to 1 in d <= 2, or p = 1 with d >= 3).
HittingSolution hitting_solve(const KilledWalkSpec& spec, double tol,
                              std::span<const Site> requested = {}, SolveOptions options = {});

struct HittingEstimate {
  double value = 0.0;
  double se = 0.0;
  Interval ci;  // Wilson 95%
  std::uint64_t hits = 0;
  std::uint64_t replicates = 0;
  std::uint64_t capped = 0;  // walks stopped at max_steps (counted as misses)

  double half_width() const { return 0.5 * ci.width(); }
};

inline constexpr std::uint64_t kDefaultMaxSteps = 10'000'000;

// Walks driven by common random numbers: step n survives iff U_n < p. A walk
// that reaches O at step tau under p_max records theta = max(U_1..U_tau);
// it hits under any p <= p_max iff theta < p. R estimates for every p in
// [0, p_max] therefore come from one simulation and are monotone in p.
class HittingProfile {
 public:
  static HittingProfile simulate(int d, double p_max, const Site& start, std::uint64_t replicates,
                                 std::uint64_t seed, int threads = 0,
                                 std::uint64_t max_steps = kDefaultMaxSteps);

  int dim() const { return d_; }
  double p_max() const { return p_max_; }
  std::uint64_t replicates() const { return n_; }
  HittingEstimate estimate(double p) const;  // requires p <= p_max

 private:
  int d_ = 1;
  double p_max_ = 0.0;
  std::uint64_t n_ = 0;
  std::uint64_t capped_ = 0;
  std::vector<double> thresholds_;  // sorted; walks that hit under p_max
};

HittingEstimate hitting_mc(const KilledWalkSpec& spec, const Site& start,
                           std::uint64_t replicates, std::uint64_t seed, int threads = 0);

struct ScanPoint {
  double p = 0.0;
  double value = 0.0;
  double error = 0.0;
};

// R(e_1, d, p) on a grid in [0, 1) via hitting_solve.
std::vector<ScanPoint> continuity_scan(int d, std::span<const double> grid, double tol = 1e-8);

// R(e_1, d, p) as a value with an error bar, for the fixed-point solver.
struct HittingValue {
  double value = 0.0;
  double error = 0.0;
};

class RProvider {
 public:
  using Eval = std::function<HittingValue(double p, double tol)>;

  RProvider(std::string method, bool refinable, Eval eval)
      : method_(std::move(method)), refinable_(refinable), eval_(std::move(eval)) {}

  HittingValue operator()(double p, double tol) const { return eval_(p, tol); }
  const std::string& method() const { return method_; }
  // True when a smaller tol yields a smaller error (deterministic solver).
  bool refinable() const { return refinable_; }

 private:
  std::string method_;
  bool refinable_;
  Eval eval_;
};

RProvider solver_provider(int d, SolveOptions options = {});

// Monte Carlo profile sized so the Wilson half-width of R at e_1 is about
// target_half_width (pilot run of 10^5 walks); profiles are rebuilt with a
// larger p_max when asked for p beyond the current one.
RProvider mc_provider(int d, double target_half_width = 1e-3, std::uint64_t seed = 1,
                      int threads = 0);

// Solver for d <= 3, Monte Carlo for d >= 4.
RProvider default_provider(int d, double mc_half_width = 1e-3, std::uint64_t seed = 1,
                           int threads = 0);

}  // namespace contact_decay
