#include "contact_decay/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "contact_decay/errors.hpp"
#include "contact_decay/rng.hpp"

namespace contact_decay {

namespace ode = boost::numeric::odeint;

// ---------------------------------------------------------------- MomentOperator

MomentOperator::MomentOperator(Model model, double lambda, int d)
    : model_(model), lambda_(lambda), d_(d) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be finite and >= 0");
}

double MomentOperator::apply_row(const Box& box, std::span<const double> in, std::size_t i) const {
  const double ld = lambda_ * d_;
  const int deg = 2 * d_;
  auto at = [&](std::size_t j) { return j == Box::npos ? 0.0 : in[j]; };
  if (i != box.origin()) {
    double sum = 0.0;
    for (int k = 0; k < deg; ++k) sum += at(box.neighbor(i, k));
    return -4.0 * ld * in[i] + 2.0 * lambda_ * sum;
  }
  const std::size_t e1 = box.neighbor(i, 0);
  double out = (1.0 - 2.0 * ld) * in[i];
  if (model_ == Model::classic) return out + 4.0 * ld * at(e1);
  out += 2.0 * ld * at(e1);
  if (e1 == Box::npos) return out;
  double fan = 0.0;
  for (int k = 0; k < deg; ++k) {
    const std::size_t z = box.neighbor(e1, k);
    if (z != i) fan += at(z);
  }
  return out + 2.0 * ld * fan;
}

void MomentOperator::apply(const Box& box, std::span<const double> in, std::span<double> out) const {
  if (in.size() != box.size() || out.size() != box.size())
    throw std::invalid_argument("operator field does not match the box");
  for (std::size_t i = 0; i < box.size(); ++i) out[i] = apply_row(box, in, i);
}

double MomentOperator::lipschitz_bound() const {
  const double d = d_;
  return 1.0 + 8.0 * lambda_ * d + 4.0 * lambda_ * d * d;
}

// ---------------------------------------------------------------- fixed point

namespace {

void require_subcritical(double lambda, int d) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (!(lambda > 0.0) || !(lambda < 1.0 / (2.0 * d)))
    throw std::domain_error("fixed point requires 0 < lambda < 1/(2d), got lambda=" +
                            std::to_string(lambda) + " for d=" + std::to_string(d));
}

double k_at(Model model, double lambda, int d, double p, double r) {
  const double ld = lambda * d;
  if (model == Model::classic) return 4.0 * ld / p - 2.0 * ld - 1.0 - 4.0 * ld * r;
  return (4.0 * ld / p) * (1.0 - d * r) - 1.0 - 2.0 * ld * r;
}

}  // namespace

KValue k_function(Model model, double lambda, int d, double p, const RProvider& provider,
                  double r_tol) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("K requires 0 < p <= 1");
  const HittingValue hv = provider(p, r_tol);
  KValue kv;
  kv.r = hv.value;
  kv.r_error = hv.error;
  kv.k_mid = k_at(model, lambda, d, p, hv.value);
  // K is decreasing in R
  const double r_lo = std::max(0.0, hv.value - hv.error);
  const double r_hi = std::min(1.0, hv.value + hv.error);
  kv.k = {k_at(model, lambda, d, p, r_hi), k_at(model, lambda, d, p, r_lo)};
  return kv;
}

FixedPointResult solve_fixed_point(Model model, double lambda, int d, const RProvider& provider,
                                   FixedPointOptions options) {
  require_subcritical(lambda, d);
  if (!(options.tol > 0.0) || !(options.r_tol > 0.0))
    throw std::invalid_argument("tolerances must be positive");

  // K(0+) = +inf; K(1) < 0 because R(e1, d, 1) >= 1/(2d)
  double lo = 0.0, hi = 1.0;
  double r_tol = options.r_tol;
  FixedPointResult res;
  res.model = model;
  res.lambda = lambda;
  res.d = d;
  res.r_method = provider.method();

  // K(lo) > 0 > K(hi) with these interval ends; by monotonicity K over the
  // bracket lies in [k_hi, k_lo]
  double k_lo = std::numeric_limits<double>::infinity();
  double k_hi = -std::numeric_limits<double>::infinity();
  auto finish = [&](double p, const KValue& kv, Interval k) {
    res.p_star = p;
    res.bracket = {lo, hi};
    res.mu = 4.0 * lambda * d * (1.0 / p - 1.0);
    res.r_e1 = kv.r;
    res.r_error = kv.r_error;
    res.k_at_root = k;
    return res;
  };

  for (int it = 0; it < options.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const KValue kv = k_function(model, lambda, d, mid, provider, r_tol);
    ++res.iterations;
    if (kv.k.lo > 0.0) {
      lo = mid;
      k_lo = kv.k.hi;
    } else if (kv.k.hi < 0.0) {
      hi = mid;
      k_hi = kv.k.lo;
    } else if (hi - lo <= options.tol) {
      return finish(mid, kv, kv.k);
    } else if (provider.refinable()) {
      if (r_tol <= options.min_r_tol)
        throw NumericalError("R accuracy floor reached without signing K at p=" +
                             std::to_string(mid) + "; bracket [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "]");
      r_tol = std::max(options.min_r_tol, r_tol * 0.1);
      continue;
    } else if (kv.k_mid > 0.0) {
      lo = mid;
      k_lo = kv.k.hi;
    } else {
      hi = mid;
      k_hi = kv.k.lo;
    }
    if (hi - lo <= options.tol && std::isfinite(k_lo) && std::isfinite(k_hi)) {
      const double p = 0.5 * (lo + hi);
      return finish(p, k_function(model, lambda, d, p, provider, r_tol), {k_hi, k_lo});
    }
  }
  throw NumericalError("fixed-point bisection did not converge; bracket [" + std::to_string(lo) +
                       ", " + std::to_string(hi) + "] after " + std::to_string(res.iterations) +
                       " K evaluations");
}

RateBounds rate_bounds(Model model, double lambda, int d, const RProvider& provider,
                       FixedPointOptions options) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be finite and >= 0");
  RateBounds b;
  b.model = model;
  b.lambda = lambda;
  b.d = d;
  b.upper = 2.0 * lambda * d - 1.0;
  if (lambda == 0.0) {
    b.lower = -1.0;
    return b;
  }
  if (lambda >= 1.0 / (2.0 * d)) {
    b.warning = "lambda >= 1/(2d): lower bound unavailable, upper bound only";
    return b;
  }
  b.fixed_point = solve_fixed_point(model, lambda, d, provider, options);
  b.lower = -b.fixed_point->mu;
  return b;
}

// ---------------------------------------------------------------- eigencheck

EigenReport eigencheck(Model model, double lambda, double p, const HittingSolution& solution,
                       double origin_allowance) {
  const int d = solution.spec().d;
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("eigencheck requires 0 < p < 1");
  if (std::abs(solution.spec().p - p) > 0.0)
    throw std::invalid_argument("hitting solution was computed at a different p");
  const MomentOperator op(model, lambda, d);
  const Box& box = solution.box();
  const auto h = solution.midpoint();
  const int deg = 2 * d;
  const double ld = lambda * d;

  EigenReport rep;
  rep.p = p;
  rep.mu = 4.0 * ld * (1.0 / p - 1.0);
  rep.radius = box.radius();

  auto interior = [&](std::size_t i) {
    for (int k = 0; k < deg; ++k)
      if (box.neighbor(i, k) == Box::npos) return false;
    return true;
  };
  for (std::size_t i = 0; i < box.size(); ++i) {
    const bool origin = i == box.origin();
    if (!interior(i)) continue;
    if (origin && !interior(box.neighbor(i, 0))) continue;
    const double r = std::abs(op.apply_row(box, h, i) - rep.mu * h[i]);
    ++rep.rows_checked;
    if (origin)
      rep.origin_residual = r;
    else
      rep.off_origin_residual = std::max(rep.off_origin_residual, r);
  }
  rep.max_residual = std::max(rep.origin_residual, rep.off_origin_residual);
  const double sensitivity = 4.0 * ld * (d / p + 1.0 + 1.0 / p);
  rep.bound = 2.0 * (origin_allowance + sensitivity * solution.certified_error()) + 1e-12;
  rep.passed = rep.max_residual <= rep.bound;
  return rep;
}

EigenReport eigencheck(const FixedPointResult& result, double r_tol, double p_shift) {
  const double p = result.p_star + p_shift;
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("shifted p leaves (0, 1)");
  const auto sol = hitting_solve({result.d, p}, r_tol);
  double allowance = 0.0;
  if (p_shift == 0.0) {
    const auto provider = solver_provider(result.d);
    const auto k_lo = k_function(result.model, result.lambda, result.d, result.bracket.lo > 0.0
                                     ? result.bracket.lo : p, provider, r_tol);
    const auto k_hi = k_function(result.model, result.lambda, result.d, result.bracket.hi, provider,
                                 r_tol);
    allowance = std::max({0.0, k_lo.k.hi, -k_hi.k.lo});
  }
  return eigencheck(result.model, result.lambda, p, sol, allowance);
}

// ---------------------------------------------------------------- ODE flows

namespace {

using State = std::vector<double>;

// Dense-output Dormand-Prince integration of x' = rhs(x), observing the state
// at each of the strictly increasing times.
template <class Rhs, class Observe>
std::size_t integrate(Rhs&& rhs, State x, std::span<const double> times, double rel_tol,
                      double abs_tol, Observe&& observe) {
  if (times.empty()) return 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0)
      throw std::invalid_argument("flow times must be finite and >= 0");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw std::invalid_argument("flow times must be strictly increasing");
  }
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw std::invalid_argument("flow tolerances must be positive");

  std::vector<double> grid;
  const bool prepend = times.front() > 0.0;
  if (prepend) grid.push_back(0.0);
  grid.insert(grid.end(), times.begin(), times.end());

  std::size_t evaluations = 0;
  auto system = [&](const State& in, State& out, double) {
    ++evaluations;
    rhs(in, out);
  };
  std::size_t seen = 0;
  auto observer = [&](const State& s, double t) {
    if (prepend && seen++ == 0) return;
    for (double v : s)
      if (!std::isfinite(v)) throw NumericalError("flow state is not finite at t=" + std::to_string(t));
    observe(s, t);
  };
  if (grid.size() == 1) {
    observer(x, grid.front());
    return 0;
  }
  const double dt0 = std::min(1e-3, grid[1] - grid[0]);
  try {
    auto stepper = ode::make_dense_output(abs_tol, rel_tol, ode::runge_kutta_dopri5<State>());
    ode::integrate_times(stepper, system, x, grid.begin(), grid.end(), dt0, observer,
                         ode::max_step_checker(1'000'000));
  } catch (const ode::odeint_error& e) {
    throw NumericalError(std::string("moment flow integration failed: ") + e.what());
  }
  return evaluations;
}

}  // namespace

MomentFlow moment_flow(const MomentOperator& op, const Box& box, std::vector<double> initial,
                       std::span<const double> times, double rel_tol, double abs_tol) {
  if (op.dim() != box.dim()) throw std::invalid_argument("operator and box dimensions differ");
  if (initial.size() != box.size()) throw std::invalid_argument("initial field does not match the box");
  MomentFlow flow;
  const std::size_t origin = box.origin();
  flow.rhs_evaluations = integrate(
      [&](const State& in, State& out) { op.apply(box, in, out); }, std::move(initial), times,
      rel_tol, abs_tol, [&](const State& s, double t) {
        flow.times.push_back(t);
        flow.origin.push_back(s[origin]);
        flow.final_state = s;
      });
  return flow;
}

EigenflowReport eigenflow_check(const FixedPointResult& result, std::span<const double> times,
                                double r_tol, double rel_tol) {
  const auto sol = hitting_solve({result.d, result.p_star}, r_tol);
  const MomentOperator op(result.model, result.lambda, result.d);
  const auto& h = sol.lower_field();
  const double h0 = h[sol.box().origin()];
  EigenflowReport rep;
  rep.mu = result.mu;
  rep.flow = moment_flow(op, sol.box(), h, times, rel_tol, 1e-14);
  for (std::size_t i = 0; i < rep.flow.times.size(); ++i) {
    const double ratio = rep.flow.origin[i] / h0 / std::exp(rep.mu * rep.flow.times[i]);
    rep.max_relative_deviation = std::max(rep.max_relative_deviation, std::abs(ratio - 1.0));
  }
  return rep;
}

// ---------------------------------------------------------------- heat kernel

double scaled_bessel_i0_series(double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("Bessel series argument must be >= 0");
  if (x > 700.0) throw NumericalError("Bessel series unsupported for x > 700");
  if (x == 0.0) return 1.0;
  // sum_k (x/2)^{2k} / (k!)^2, each term scaled by e^{-x} in log space
  const double lh = std::log(0.5 * x);
  double sum = 0.0;
  for (int k = 0; k < 100'000; ++k) {
    const double term = std::exp(2.0 * k * lh - 2.0 * std::lgamma(k + 1.0) - x);
    sum += term;
    if (k > 0.5 * x && term < 1e-18 * sum) return sum;
  }
  throw NumericalError("Bessel series did not converge");
}

HeatKernelReport heat_kernel_check(double lambda, int d, double t) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be finite and >= 0");
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("t must be finite and >= 0");
  HeatKernelReport rep;
  rep.t = t;
  const double x = 2.0 * lambda * t;
  rep.series = std::pow(scaled_bessel_i0_series(x), d);
  if (t == 0.0 || lambda == 0.0) {
    rep.matrix_exp = 1.0;
    return rep;
  }

  // walk mass beyond radius M is negligible against the 1e-10 target
  const int radius = static_cast<int>(std::ceil(x + 10.0 * std::sqrt(x + 1.0) + 10.0));
  rep.radius = radius;
  double cells = 1.0;
  for (int i = 0; i < d; ++i) cells *= 2.0 * radius + 1.0;
  rep.product_form = d > 1 && cells > 200'000.0;
  const int dim = rep.product_form ? 1 : d;

  const Box box(dim, radius);
  State init(box.size(), 0.0);
  init[box.origin()] = 1.0;
  const int deg = 2 * dim;
  double value = 0.0;
  const double times[] = {t};
  integrate(
      [&](const State& in, State& out) {
        for (std::size_t i = 0; i < box.size(); ++i) {
          double sum = 0.0;
          for (int k = 0; k < deg; ++k) {
            const std::size_t j = box.neighbor(i, k);
            if (j != Box::npos) sum += in[j];
          }
          out[i] = lambda * (sum - deg * in[i]);
        }
      },
      std::move(init), times, 1e-12, 1e-15,
      [&](const State& s, double) { value = s[box.origin()]; });
  rep.matrix_exp = rep.product_form ? std::pow(value, d) : value;
  return rep;
}

// ---------------------------------------------------------------- limit scan

double limit_fixed_point(double lambda) { return 4.0 * lambda / (1.0 + 2.0 * lambda); }

std::vector<LimitRow> limit_scan(Model model, double lambda, std::span<const int> dims,
                                 LimitScanOptions options) {
  if (!(lambda > 0.0 && lambda < 0.5)) throw std::domain_error("limit scan requires 0 < lambda < 1/2");
  if (dims.empty()) throw std::invalid_argument("dimension list is empty");
  const double c = limit_fixed_point(lambda);
  std::vector<LimitRow> rows;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("dimensions must be >= 1");
    const auto provider = default_provider(d, options.mc_half_width,
                                           derive_seed(options.seed, static_cast<std::uint64_t>(d)),
                                           options.threads);
    const double rate = lambda / d;
    const auto fp = solve_fixed_point(model, rate, d, provider, options.fixed_point);
    LimitRow row;
    row.d = d;
    row.rate = rate;
    row.p_star = fp.p_star;
    row.mu = fp.mu;
    row.lower = -fp.mu;
    row.upper = 2.0 * lambda - 1.0;
    row.gap_p = std::abs(fp.p_star - c);
    row.gap_lower = std::abs(row.lower - row.upper);
    row.r_e1 = fp.r_e1;
    row.r_error = fp.r_error;
    row.r_method = fp.r_method;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace contact_decay
