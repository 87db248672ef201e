#include "contact_decay/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "contact_decay/errors.hpp"

namespace contact_decay {

namespace {

constexpr double kZ95 = 1.959963984540054;

std::string fmt_time(double t) { return std::to_string(t); }

// Window indices with t_lo <= t <= t_hi (and t > 0).
std::vector<std::size_t> window_points(const SurvivalCurve& c, const FitWindow& w) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double t = c.times()[i];
    if (t > 0.0 && t >= w.t_lo - 1e-12 && t <= w.t_hi + 1e-12) idx.push_back(i);
  }
  return idx;
}

void require_positive(const SurvivalCurve& c, std::span<const std::size_t> idx) {
  for (std::size_t i : idx)
    if (!(c.p_hat(i) > 0.0))
      throw NumericalError("fit window contains a zero-survivor point at t=" +
                           fmt_time(c.times()[i]) +
                           " (horizon too long for the replicate budget)");
}

}  // namespace

std::string_view to_string(DecayMethod m) {
  return m == DecayMethod::fekete_sup ? "fekete_sup" : "tail_regression";
}

// ---------------------------------------------------------------- SurvivalCurve

SurvivalCurve::SurvivalCurve(std::vector<double> times, std::uint64_t replicates,
                             std::vector<std::uint64_t> survivors)
    : times_(std::move(times)), n_(replicates), k_(std::move(survivors)) {
  if (n_ == 0) throw std::invalid_argument("survival curve needs at least one replicate");
  if (k_.size() != times_.size())
    throw std::invalid_argument("survivor counts and times differ in length");
  p_.reserve(k_.size());
  for (std::size_t i = 0; i < k_.size(); ++i) {
    if (k_[i] > n_) throw std::invalid_argument("survivor count exceeds replicates");
    if (i > 0 && times_[i] < times_[i - 1]) throw std::invalid_argument("times must be sorted");
    p_.push_back(static_cast<double>(k_[i]) / static_cast<double>(n_));
  }
}

SurvivalCurve SurvivalCurve::exact(std::vector<double> times, std::vector<double> probabilities) {
  if (probabilities.size() != times.size())
    throw std::invalid_argument("probabilities and times differ in length");
  SurvivalCurve c;
  c.times_ = std::move(times);
  c.p_ = std::move(probabilities);
  c.exact_ = true;
  for (double p : c.p_)
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probabilities must lie in [0,1]");
  return c;
}

Interval SurvivalCurve::ci(std::size_t i) const {
  if (exact_) return {p_[i], p_[i]};
  return wilson_interval(k_[i], n_);
}

double SurvivalCurve::log_variance(std::size_t i) const {
  if (exact_) return 0.0;
  const double p = p_[i];
  if (!(p > 0.0)) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(n_);
  // floor keeps p_hat == 1 points from receiving infinite weight
  return std::max((1.0 - p) / (n * p), 0.25 / (n * n));
}

// ---------------------------------------------------------------- windows

FitWindow default_window(const SurvivalCurve& curve, double burn_in,
                         std::uint64_t min_survivors) {
  std::optional<double> last;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const bool ok = curve.is_exact() ? curve.p_hat(i) > 0.0 : curve.survivors()[i] >= min_survivors;
    if (ok) last = curve.times()[i];
  }
  if (!last || *last < burn_in)
    throw NumericalError("no grid point beyond t=" + fmt_time(burn_in) + " has at least " +
                         std::to_string(min_survivors) + " survivors");
  return {burn_in, *last};
}

// ---------------------------------------------------------------- estimators

DecayEstimate fekete_lower(const SurvivalCurve& curve, std::optional<FitWindow> window) {
  FitWindow w;
  if (window) {
    w = *window;
  } else {
    double first_positive = std::numeric_limits<double>::infinity();
    for (double t : curve.times())
      if (t > 0.0) first_positive = std::min(first_positive, t);
    w = default_window(curve, first_positive);
  }
  const auto idx = window_points(curve, w);
  if (idx.empty()) throw NumericalError("fekete window contains no positive grid time");
  require_positive(curve, idx);

  std::size_t best = idx.front();
  double best_rate = -std::numeric_limits<double>::infinity();
  for (std::size_t i : idx) {
    const double r = std::log(curve.p_hat(i)) / curve.times()[i];
    if (r > best_rate) {
      best_rate = r;
      best = i;
    }
  }
  const double t = curve.times()[best];
  const Interval pci = curve.ci(best);
  DecayEstimate est;
  est.rate = best_rate;
  est.se = std::sqrt(curve.log_variance(best)) / t;
  est.method = DecayMethod::fekete_sup;
  est.window = w;
  est.ci = curve.is_exact() ? Interval{best_rate, best_rate}
                            : Interval{pci.lo > 0.0 ? std::log(pci.lo) / t
                                                    : -std::numeric_limits<double>::infinity(),
                                       std::log(pci.hi) / t};
  est.points = idx.size();
  return est;
}

DecayEstimate tail_regression(const SurvivalCurve& curve, std::optional<FitWindow> window) {
  const FitWindow w = window ? *window : default_window(curve);
  const auto idx = window_points(curve, w);
  if (idx.size() < 3)
    throw NumericalError("tail regression needs at least 3 grid points in the window");
  require_positive(curve, idx);

  const std::size_t m = idx.size();
  std::vector<double> t(m), y(m), v(m), wt(m);
  for (std::size_t j = 0; j < m; ++j) {
    t[j] = curve.times()[idx[j]];
    y[j] = std::log(curve.p_hat(idx[j]));
    v[j] = curve.log_variance(idx[j]);
    wt[j] = curve.is_exact() ? 1.0 : 1.0 / v[j];
  }
  double sw = 0.0, swt = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    sw += wt[j];
    swt += wt[j] * t[j];
  }
  const double tbar = swt / sw;
  double stt = 0.0;
  for (std::size_t j = 0; j < m; ++j) stt += wt[j] * (t[j] - tbar) * (t[j] - tbar);
  if (!(stt > 0.0)) throw NumericalError("tail regression window has no time spread");

  // slope = sum_j c_j y_j
  std::vector<double> c(m);
  double slope = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    c[j] = wt[j] * (t[j] - tbar) / stt;
    slope += c[j] * y[j];
  }
  // Var(slope) = c^T S c with S_jk = v_{min(j,k)} (nested survival events);
  // computed with suffix sums of c.
  double var = 0.0;
  if (!curve.is_exact()) {
    double suffix = 0.0;
    for (std::size_t j = m; j-- > 0;) {
      const double after = suffix;
      suffix += c[j];
      var += v[j] * (c[j] * c[j] + 2.0 * c[j] * after);
    }
  }
  DecayEstimate est;
  est.rate = slope;
  est.se = std::sqrt(std::max(0.0, var));
  est.method = DecayMethod::tail_regression;
  est.window = w;
  est.ci = {slope - kZ95 * est.se, slope + kZ95 * est.se};
  est.points = m;
  return est;
}

std::vector<SupermultiplicativityViolation> supermultiplicativity_violations(
    const SurvivalCurve& curve, double z) {
  std::vector<SupermultiplicativityViolation> out;
  const auto times = curve.times();
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (!(times[i] > 0.0) || !(curve.p_hat(i) > 0.0)) continue;
    for (std::size_t j = i; j < curve.size(); ++j) {
      if (!(curve.p_hat(j) > 0.0)) continue;
      const double target = times[i] + times[j];
      auto it = std::find_if(times.begin(), times.end(),
                             [&](double u) { return std::abs(u - target) <= 1e-9; });
      if (it == times.end()) continue;
      const auto l = static_cast<std::size_t>(it - times.begin());
      if (!(curve.p_hat(l) > 0.0)) continue;
      const double deficit =
          std::log(curve.p_hat(i)) + std::log(curve.p_hat(j)) - std::log(curve.p_hat(l));
      const double slack =
          z * std::sqrt(curve.log_variance(i) + curve.log_variance(j) + curve.log_variance(l)) +
          1e-12;
      if (deficit > slack) out.push_back({times[i], times[j], deficit, slack});
    }
  }
  return out;
}

std::vector<double> parse_time_grid(std::string_view spec) {
  const auto first = spec.find(':');
  const auto second = first == std::string_view::npos ? first : spec.find(':', first + 1);
  if (second == std::string_view::npos)
    throw std::invalid_argument("time grid must look like start:stop:step");
  auto num = [](std::string_view s) {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument("bad number in time grid: " + str);
    return v;
  };
  const double start = num(spec.substr(0, first));
  const double stop = num(spec.substr(first + 1, second - first - 1));
  const double step = num(spec.substr(second + 1));
  if (!(start >= 0.0) || !(stop >= start) || !(step > 0.0))
    throw std::invalid_argument("time grid needs 0 <= start <= stop and step > 0");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) grid.push_back(start + static_cast<double>(i) * step);
  return grid;
}

}  // namespace contact_decay
