#include "contact_decay/killed_walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "contact_decay/errors.hpp"
#include "contact_decay/parallel.hpp"
#include "contact_decay/rng.hpp"

namespace contact_decay {

void KilledWalkSpec::validate() const {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
}

// ---------------------------------------------------------------- HittingSolution

HittingSolution::HittingSolution(KilledWalkSpec spec, Box box, std::vector<double> lower,
                                 std::vector<double> upper, int sweeps, double certified_error)
    : spec_(spec),
      box_(std::move(box)),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      sweeps_(sweeps),
      certified_error_(certified_error) {}

Interval HittingSolution::bracket(const Site& x) const {
  if (x.is_origin()) return {1.0, 1.0};
  const std::size_t i = box_.index(x);
  if (i == Box::npos) return {0.0, 1.0};
  constexpr double pad = 8.0 * std::numeric_limits<double>::epsilon();
  return {std::max(0.0, lower_[i] - pad), std::min(1.0, upper_[i] + pad)};
}

double HittingSolution::value(const Site& x) const {
  if (x.is_origin()) return 1.0;
  const std::size_t i = box_.index(x);
  if (i == Box::npos) return 0.5;
  return 0.5 * (lower_[i] + upper_[i]);
}

std::vector<double> HittingSolution::midpoint() const {
  std::vector<double> mid(lower_.size());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (lower_[i] + upper_[i]);
  return mid;
}

double HittingSolution::harmonic_residual() const {
  const auto h = midpoint();
  const int deg = 2 * spec_.d;
  const double w = spec_.p / deg;
  double worst = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (i == box_.origin()) continue;
    double sum = 0.0;
    bool interior = true;
    for (int k = 0; k < deg && interior; ++k) {
      const std::size_t j = box_.neighbor(i, k);
      if (j == Box::npos)
        interior = false;
      else
        sum += h[j];
    }
    if (interior) worst = std::max(worst, std::abs(h[i] - w * sum));
  }
  return worst;
}

// ---------------------------------------------------------------- solver

namespace {

struct SweepResult {
  double delta_lower = 0.0;
  double delta_upper = 0.0;
};

// One Gauss-Seidel sweep over both closures.
SweepResult sweep(const Box& box, double w, int deg, std::vector<double>& lower,
                  std::vector<double>& upper) {
  SweepResult r;
  const std::size_t origin = box.origin();
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (i == origin) continue;
    double sl = 0.0, su = 0.0;
    for (int k = 0; k < deg; ++k) {
      const std::size_t j = box.neighbor(i, k);
      if (j == Box::npos) {
        su += 1.0;
      } else {
        sl += lower[j];
        su += upper[j];
      }
    }
    const double nl = w * sl;
    const double nu = std::min(1.0, w * su);
    r.delta_lower = std::max(r.delta_lower, std::abs(nl - lower[i]));
    r.delta_upper = std::max(r.delta_upper, std::abs(nu - upper[i]));
    lower[i] = nl;
    upper[i] = nu;
  }
  return r;
}

// Copy a field from a smaller centred box into a larger one, filling new
// sites with `fill`.
std::vector<double> embed(const Box& from, const std::vector<double>& values, const Box& to,
                          double fill) {
  std::vector<double> out(to.size(), fill);
  for (std::size_t i = 0; i < from.size(); ++i) out[to.index(from.site(i))] = values[i];
  return out;
}

std::size_t box_size(int d, int radius) {
  double s = 1.0;
  for (int i = 0; i < d; ++i) s *= 2.0 * radius + 1.0;
  return s > 1e18 ? static_cast<std::size_t>(-1) : static_cast<std::size_t>(s);
}

}  // namespace

HittingSolution hitting_solve(const KilledWalkSpec& spec, double tol,
                              std::span<const Site> requested, SolveOptions options) {
  spec.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (options.initial_radius < 2) throw std::invalid_argument("box radius must be >= 2");
  std::vector<Site> targets(requested.begin(), requested.end());
  if (targets.empty()) targets.push_back(Site::unit(spec.d));
  for (const auto& x : targets)
    if (x.dim() != spec.d) throw std::invalid_argument("requested site has the wrong dimension");

  const int deg = 2 * spec.d;
  const double w = spec.p / deg;
  // sweep-to-sweep change below which the iteration has settled at this radius
  const double settle = std::min(tol, 1e-8) * 1e-3;

  int radius = options.initial_radius;
  for (const auto& x : targets)
    for (Coord c : x.coords()) radius = std::max(radius, std::abs(c) + 2);
  if (box_size(spec.d, radius) > options.max_unknowns)
    throw NumericalError("initial box already exceeds the unknown budget");

  Box box(spec.d, radius);
  std::vector<double> lower(box.size(), 0.0), upper(box.size(), 1.0);
  lower[box.origin()] = 1.0;
  int total_sweeps = 0;

  while (true) {
    double gap = 1.0;
    bool settled = false;
    for (int s = 0; s < options.max_sweeps_per_radius; ++s) {
      const SweepResult r = sweep(box, w, deg, lower, upper);
      ++total_sweeps;
      gap = 0.0;
      for (const auto& x : targets) {
        const std::size_t i = box.index(x);
        gap = std::max(gap, 0.5 * (upper[i] - lower[i]));
      }
      settled = std::max(r.delta_lower, r.delta_upper) <= settle;
      if (settled) break;
    }
    if (gap <= tol && settled)
      return HittingSolution(spec, std::move(box), std::move(lower), std::move(upper),
                             total_sweeps, gap);

    const int next = std::max(radius + 2, (radius * 3) / 2);
    if (next > options.max_radius || box_size(spec.d, next) > options.max_unknowns)
      throw NumericalError("hitting_solve did not converge: half-gap " + std::to_string(gap) +
                           " at radius " + std::to_string(radius) + " for d=" +
                           std::to_string(spec.d) + ", p=" + std::to_string(spec.p));
    Box bigger(spec.d, next);
    lower = embed(box, lower, bigger, 0.0);
    upper = embed(box, upper, bigger, 1.0);
    box = std::move(bigger);
    radius = next;
  }
}

// ---------------------------------------------------------------- Monte Carlo

HittingProfile HittingProfile::simulate(int d, double p_max, const Site& start,
                                        std::uint64_t replicates, std::uint64_t seed,
                                        int threads, std::uint64_t max_steps) {
  KilledWalkSpec{d, p_max}.validate();
  if (start.dim() != d) throw std::invalid_argument("start site has the wrong dimension");
  if (replicates == 0) throw std::invalid_argument("replicates must be >= 1");

  struct Partial {
    std::vector<double> thresholds;
    std::uint64_t capped = 0;
  };
  std::vector<Partial> partials(block_count(replicates));
  const auto deg = static_cast<std::uint64_t>(2 * d);
  parallel_blocks(replicates, threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
    Rng rng(derive_seed(seed, b));
    Partial part;
    std::vector<std::int64_t> pos(static_cast<std::size_t>(d));
    for (std::size_t r = begin; r < end; ++r) {
      int nonzero = 0;
      for (int i = 0; i < d; ++i) {
        pos[static_cast<std::size_t>(i)] = start[i];
        nonzero += start[i] != 0;
      }
      if (nonzero == 0) {
        part.thresholds.push_back(-1.0);  // tau = 0: hits for every p
        continue;
      }
      double theta = 0.0;
      bool done = false;
      for (std::uint64_t step = 0; step < max_steps; ++step) {
        const double u = uniform01(rng);
        if (u >= p_max) {
          done = true;  // killed
          break;
        }
        theta = std::max(theta, u);
        const std::uint64_t k = uniform_below(rng, deg);
        auto& c = pos[static_cast<std::size_t>(k / 2)];
        const bool was_zero = c == 0;
        c += (k % 2 == 0) ? 1 : -1;
        if (was_zero)
          ++nonzero;
        else if (c == 0)
          --nonzero;
        if (nonzero == 0) {
          part.thresholds.push_back(theta);
          done = true;
          break;
        }
      }
      if (!done) ++part.capped;
    }
    partials[b] = std::move(part);
  });

  HittingProfile prof;
  prof.d_ = d;
  prof.p_max_ = p_max;
  prof.n_ = replicates;
  for (auto& part : partials) {
    prof.thresholds_.insert(prof.thresholds_.end(), part.thresholds.begin(), part.thresholds.end());
    prof.capped_ += part.capped;
  }
  std::sort(prof.thresholds_.begin(), prof.thresholds_.end());
  return prof;
}

HittingEstimate HittingProfile::estimate(double p) const {
  if (!(p >= 0.0) || p > p_max_)
    throw std::invalid_argument("profile queried beyond its p_max");
  HittingEstimate e;
  // a walk hits under p iff every survival uniform was < p; the tau = 0
  // entries (-1) hit for every p >= 0
  e.hits = static_cast<std::uint64_t>(
      std::lower_bound(thresholds_.begin(), thresholds_.end(), p) - thresholds_.begin());
  e.replicates = n_;
  e.capped = capped_;
  e.value = static_cast<double>(e.hits) / static_cast<double>(n_);
  e.se = binomial_se(e.value, n_);
  e.ci = wilson_interval(e.hits, n_);
  return e;
}

HittingEstimate hitting_mc(const KilledWalkSpec& spec, const Site& start,
                           std::uint64_t replicates, std::uint64_t seed, int threads) {
  spec.validate();
  return HittingProfile::simulate(spec.d, spec.p, start, replicates, seed, threads)
      .estimate(spec.p);
}

std::vector<ScanPoint> continuity_scan(int d, std::span<const double> grid, double tol) {
  std::vector<ScanPoint> out;
  out.reserve(grid.size());
  const Site e1 = Site::unit(d);
  for (double p : grid) {
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("scan grid must lie in [0, 1)");
    const auto sol = hitting_solve({d, p}, tol);
    out.push_back({p, sol.value(e1), sol.error(e1)});
  }
  return out;
}

// ---------------------------------------------------------------- providers

RProvider solver_provider(int d, SolveOptions options) {
  const Site e1 = Site::unit(d);
  return RProvider("solver", true, [d, options, e1](double p, double tol) {
    const auto sol = hitting_solve({d, p}, tol, {}, options);
    return HittingValue{sol.value(e1), sol.error(e1)};
  });
}

RProvider mc_provider(int d, double target_half_width, std::uint64_t seed, int threads) {
  if (!(target_half_width > 0.0)) throw std::invalid_argument("target half-width must be > 0");
  struct State {
    std::unique_ptr<HittingProfile> profile;
  };
  auto state = std::make_shared<State>();
  const Site e1 = Site::unit(d);
  return RProvider("monte_carlo", false, [=](double p, double) {
    if (!state->profile || p > state->profile->p_max()) {
      double p_max = state->profile ? state->profile->p_max() : 0.9;
      while (p_max < p) p_max = 1.0 - 0.5 * (1.0 - p_max);
      p_max = std::min(p_max, 1.0);
      const auto pilot = HittingProfile::simulate(d, p_max, e1, 100'000, seed ^ 0x5eedULL, threads);
      const double r = std::min(0.5, pilot.estimate(p_max).value + pilot.estimate(p_max).se * 3.0);
      const double z = 1.959963984540054;
      const auto n = static_cast<std::uint64_t>(
          std::ceil(z * z * std::max(r * (1.0 - r), 1e-4) / (target_half_width * target_half_width)));
      state->profile = std::make_unique<HittingProfile>(HittingProfile::simulate(
          d, p_max, e1, std::max<std::uint64_t>(n, 100'000), seed, threads));
    }
    const auto est = state->profile->estimate(p);
    return HittingValue{est.value, est.half_width()};
  });
}

RProvider default_provider(int d, double mc_half_width, std::uint64_t seed, int threads) {
  if (d <= 3) return solver_provider(d);
  return mc_provider(d, mc_half_width, seed, threads);
}

}  // namespace contact_decay
