#pragma once

// Second-moment operators, the fixed-point equation for the lower bound, and
// the resulting two-sided bounds on the decay rate.
//
// Threshold model, G acting on F(x) = E[zeta_t(O) zeta_t(x)]:
//   x != O:  (GF)(x) = -4 lambda d F(x) + 2 lambda sum_{y ~ x} F(y)
//   x == O:  (GF)(O) = (1 - 2 lambda d) F(O) + 2 lambda d F(e1)
//                      + 2 lambda d sum_{z ~ e1, z != O} F(z)
// Classic model, the origin row is (1 - 2 lambda d) F(O) + 4 lambda d F(e1).
//
// With H = R(., d, p) and mu = 4 lambda d (1/p - 1), GH = mu H holds exactly
// when p is the root of
//   threshold:  K(p)  = (4 lambda d / p)(1 - d R(e1)) - 1 - 2 lambda d R(e1)
//   classic:    K~(p) = 4 lambda d / p - 2 lambda d - 1 - 4 lambda d R(e1)
// and then -mu <= rate <= 2 lambda d - 1.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "contact_decay/engine.hpp"
#include "contact_decay/killed_walk.hpp"
#include "contact_decay/lattice.hpp"
#include "contact_decay/stats.hpp"

namespace contact_decay {

// Matrix-free action of G (threshold) or G~ (classic) on a box with a zero
// exterior.
class MomentOperator {
 public:
  MomentOperator(Model model, double lambda, int d);

  Model model() const { return model_; }
  double lambda() const { return lambda_; }
  int dim() const { return d_; }

  void apply(const Box& box, std::span<const double> in, std::span<double> out) const;
  // Row of G at box index i (i may be the origin).
  double apply_row(const Box& box, std::span<const double> in, std::size_t i) const;

  // sup-norm Lipschitz constant 1 + 8 lambda d + 4 lambda d^2.
  double lipschitz_bound() const;

 private:
  Model model_;
  double lambda_;
  int d_;
};

struct KValue {
  Interval k;  // K evaluated over the R error bar
  double k_mid = 0.0;
  double r = 0.0;
  double r_error = 0.0;
};

// K(p) (threshold) or K~(p) (classic), with R(e1, d, p) from the provider at
// accuracy r_tol. Requires 0 < p <= 1.
KValue k_function(Model model, double lambda, int d, double p, const RProvider& provider,
                  double r_tol = 1e-6);

struct FixedPointOptions {
  double tol = 1e-6;          // bracket width on p
  double r_tol = 1e-6;        // initial R accuracy (solver providers)
  double min_r_tol = 1e-12;   // refinement floor
  int max_iterations = 200;
};

struct FixedPointResult {
  Model model = Model::threshold;
  double lambda = 0.0;
  int d = 1;
  double p_star = 0.0;
  Interval bracket;
  double mu = 0.0;  // 4 lambda d (1/p* - 1)
  double r_e1 = 0.0;
  double r_error = 0.0;
  Interval k_at_root;
  std::string r_method;
  int iterations = 0;
};

// Bisection on (0, 1). K(0+) = +inf and K(1) < 0 for lambda < 1/(2d), and K is
// decreasing, so the bracket always holds the unique root. A midpoint is
// classified by the sign of the K interval; when the interval straddles 0
// and the bracket is still wider than tol, R is recomputed at 1/10 the
// tolerance (solver) or the point value decides (Monte Carlo). Stops once
// the bracket is <= tol; k_at_root is then K at the midpoint when that
// straddles 0, otherwise the hull [K(hi), K(lo)] of the signed bracket ends.
// Throws std::domain_error unless 0 < lambda < 1/(2d); NumericalError when R
// cannot be refined enough to sign K.
FixedPointResult solve_fixed_point(Model model, double lambda, int d, const RProvider& provider,
                                   FixedPointOptions options = {});

struct RateBounds {
  Model model = Model::threshold;
  double lambda = 0.0;
  int d = 1;
  std::optional<double> lower;  // -mu
  double upper = 0.0;           // 2 lambda d - 1
  std::optional<FixedPointResult> fixed_point;
  std::string warning;  // set when lambda >= 1/(2d) drops the lower bound
};

// lambda == 0 gives lower = upper = -1 exactly.
RateBounds rate_bounds(Model model, double lambda, int d, const RProvider& provider,
                       FixedPointOptions options = {});

struct EigenReport {
  double p = 0.0;
  double mu = 0.0;
  int radius = 0;
  std::size_t rows_checked = 0;
  double origin_residual = 0.0;     // |(GH)(O) - mu H(O)|
  double off_origin_residual = 0.0; // max over interior x != O
  double max_residual = 0.0;
  double bound = 0.0;
  bool passed = false;
};

// Applies G to H = R(., d, p) from `solution` (which must be solved at p) on
// every row whose stencil lies inside the box and compares with mu H, where
// mu = 4 lambda d (1/p - 1). The origin residual is |K(p)|; the bound is
// 2 (origin_allowance + c eps_R) + 1e-12, with eps_R the certified R error
// and c = 4 lambda d (d / p + 1 + 1 / p) covering the R sensitivity of every
// row. origin_allowance is the admissible |K(p)| (0 when p is exact).
EigenReport eigencheck(Model model, double lambda, double p, const HittingSolution& solution,
                       double origin_allowance = 0.0);

// Solves R at result.p_star + p_shift with certified error r_tol, then runs
// eigencheck. With p_shift == 0 the allowance is max(K(lo), -K(hi)) over the
// bracket ends, which bounds |K(p*)| by monotonicity. p_shift != 0 is the
// negative control and gets no allowance.
EigenReport eigencheck(const FixedPointResult& result, double r_tol = 1e-9, double p_shift = 0.0);

struct MomentFlow {
  std::vector<double> times;
  std::vector<double> origin;  // F_t(O)
  std::vector<double> final_state;
  std::size_t rhs_evaluations = 0;
};

// Integrates dF/dt = G F on the box (zero exterior) with an adaptive
// Dormand-Prince 5(4) scheme, reporting F at each of the strictly increasing
// times (>= 0). Throws NumericalError on step-size collapse or a non-finite
// state.
MomentFlow moment_flow(const MomentOperator& op, const Box& box, std::vector<double> initial,
                       std::span<const double> times, double rel_tol = 1e-8,
                       double abs_tol = 1e-12);

struct EigenflowReport {
  double mu = 0.0;
  double max_relative_deviation = 0.0;  // max_t |F_t(O)/H(O) / e^{mu t} - 1|
  MomentFlow flow;
};

// moment_flow started from the zero-exterior closure of R(., d, p*) on the
// solver box, which is harmonic on the box itself, so only the origin row
// departs from mu H.
EigenflowReport eigenflow_check(const FixedPointResult& result, std::span<const double> times,
                                double r_tol = 1e-10, double rel_tol = 1e-10);

// e^{-x} I_0(x) by its power series; throws NumericalError for x > 700.
double scaled_bessel_i0_series(double x);

struct HeatKernelReport {
  double t = 0.0;
  double series = 0.0;      // (e^{-2 lambda t} I_0(2 lambda t))^d
  double matrix_exp = 0.0;  // e^{tQ}(O, O) on a truncated box
  int radius = 0;
  bool product_form = false;  // 1-d box value raised to the d-th power
};

// Return probability of the continuous-time walk with rate lambda per edge.
HeatKernelReport heat_kernel_check(double lambda, int d, double t);

struct LimitRow {
  int d = 1;
  double rate = 0.0;  // lambda / d
  double p_star = 0.0;
  double mu = 0.0;
  double lower = 0.0;
  double upper = 0.0;  // 2 lambda - 1
  double gap_p = 0.0;      // |p* - 4 lambda / (1 + 2 lambda)|
  double gap_lower = 0.0;  // |lower - (2 lambda - 1)|
  double r_e1 = 0.0;
  double r_error = 0.0;
  std::string r_method;
};

struct LimitScanOptions {
  double mc_half_width = 2e-4;  // R half-width for d >= 4
  std::uint64_t seed = 1;
  int threads = 0;
  FixedPointOptions fixed_point;
};

// 4 lambda / (1 + 2 lambda).
double limit_fixed_point(double lambda);

// For each d solves the fixed point at infection rate lambda / d. Requires
// 0 < lambda < 1/2.
std::vector<LimitRow> limit_scan(Model model, double lambda, std::span<const int> dims,
                                 LimitScanOptions options = {});

}  // namespace contact_decay
