#include "contact_decay/dual.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

#include "contact_decay/errors.hpp"
#include "contact_decay/parallel.hpp"
#include "contact_decay/stats.hpp"

namespace contact_decay {

// ---------------------------------------------------------------- DualFront

DualFront::DualFront(int d) : codec_(d) { insert(codec_.origin()); }

DualFront::DualFront(int d, std::span<const Site> sites) : codec_(d) {
  for (const Site& x : sites) insert(codec_.encode(x));
}

std::vector<Site> DualFront::sites() const {
  std::vector<Site> out;
  out.reserve(members_.size());
  for (Key k : members_) out.push_back(codec_.decode(k));
  std::sort(out.begin(), out.end());
  return out;
}

bool DualFront::insert(Key k) {
  auto [it, added] = pos_.try_emplace(k, members_.size());
  if (added) members_.push_back(k);
  return added;
}

bool DualFront::erase(Key k) {
  auto it = pos_.find(k);
  if (it == pos_.end()) return false;
  const std::size_t i = it->second;
  const Key last = members_.back();
  members_[i] = last;
  pos_[last] = i;
  members_.pop_back();
  pos_.erase(k);
  return true;
}

// ---------------------------------------------------------------- moves

namespace {

void branch_key(DualFront& front, DualFront::Key k) {
  const auto& codec = front.codec();
  for (int slot = 0; slot < 2 * codec.dim(); ++slot) front.insert(codec.neighbor(k, slot));
}

double infection_rate(const DualFront& front, double lambda, Model model) {
  return model == Model::threshold ? lambda : 2.0 * front.dim() * lambda;
}

}  // namespace

void dual_death(DualFront& front, const Site& x) { front.erase(front.codec().encode(x)); }

void dual_branch_threshold(DualFront& front, const Site& x) {
  const auto k = front.codec().encode(x);
  if (!front.contains_key(k)) throw std::invalid_argument("branching site is not in the front");
  branch_key(front, k);
}

void dual_birth_classic(DualFront& front, const Site& x, int slot) {
  const auto k = front.codec().encode(x);
  if (!front.contains_key(k)) throw std::invalid_argument("birth site is not in the front");
  front.insert(front.codec().neighbor(k, slot));
}

void step_dual(DualFront& front, double lambda, Model model, Rng& rng) {
  if (front.empty()) throw std::logic_error("dual step on an empty front");
  const double r = infection_rate(front, lambda, model);
  front.advance(exponential(rng, (1.0 + r) * static_cast<double>(front.size())));
  const auto k = front.key_at(static_cast<std::size_t>(uniform_below(rng, front.size())));
  if (uniform01(rng) * (1.0 + r) < 1.0) {
    front.erase(k);
  } else if (model == Model::threshold) {
    branch_key(front, k);
  } else {
    const auto slot = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(2 * front.dim())));
    front.insert(front.codec().neighbor(k, slot));
  }
}

void step_dual_threshold(DualFront& front, double lambda, Rng& rng) {
  step_dual(front, lambda, Model::threshold, rng);
}

void step_dual_classic(DualFront& front, double lambda, Rng& rng) {
  step_dual(front, lambda, Model::classic, rng);
}

// ---------------------------------------------------------------- estimators

void DualParams::validate() const {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be finite and >= 0");
  if (max_front == 0) throw std::invalid_argument("max_front must be positive");
}

std::vector<std::size_t> simulate_dual(const DualParams& params,
                                       std::span<const double> sample_times) {
  params.validate();
  validate_sample_times(sample_times,
                        sample_times.empty() ? 0.0 : sample_times.back());
  DualFront front(params.d);
  Rng rng(params.seed);
  std::vector<std::size_t> sizes(sample_times.size(), 0);
  std::size_t next = 0;
  while (next < sample_times.size() && !front.empty()) {
    const std::size_t before = front.size();
    step_dual(front, params.lambda, params.model, rng);
    // the step happened at front.time(); earlier samples saw the old front
    while (next < sample_times.size() && sample_times[next] < front.time()) sizes[next++] = before;
    if (front.size() > params.max_front)
      throw NumericalError("dual front exceeded " + std::to_string(params.max_front) +
                           " sites (supercritical or horizon too long)");
  }
  return sizes;
}

DualRunResult run_dual(const DualParams& params, std::span<const double> sample_times,
                       std::uint64_t replicates, int threads) {
  params.validate();
  if (replicates == 0) throw std::invalid_argument("replicates must be >= 1");
  const std::size_t m = sample_times.size();
  struct Partial {
    std::vector<std::uint64_t> alive;
    std::vector<MeanAccumulator> size;
  };
  std::vector<Partial> partials(block_count(replicates));
  parallel_blocks(replicates, threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
    Partial p{std::vector<std::uint64_t>(m, 0), std::vector<MeanAccumulator>(m)};
    DualParams local = params;
    for (std::size_t r = begin; r < end; ++r) {
      local.seed = derive_seed(params.seed, r);
      const auto sizes = simulate_dual(local, sample_times);
      for (std::size_t i = 0; i < m; ++i) {
        p.alive[i] += sizes[i] > 0 ? 1 : 0;
        p.size[i].add(static_cast<double>(sizes[i]));
      }
    }
    partials[b] = std::move(p);
  });

  std::vector<std::uint64_t> alive(m, 0);
  std::vector<MeanAccumulator> size(m);
  for (const auto& p : partials)
    for (std::size_t i = 0; i < m; ++i) {
      alive[i] += p.alive[i];
      size[i].merge(p.size[i]);
    }
  FrontSizeCurve fs;
  fs.times.assign(sample_times.begin(), sample_times.end());
  fs.replicates = replicates;
  for (const auto& acc : size) {
    fs.mean.push_back(acc.mean());
    fs.se.push_back(acc.standard_error());
  }
  return {SurvivalCurve(std::vector<double>(sample_times.begin(), sample_times.end()), replicates,
                        std::move(alive)),
          std::move(fs)};
}

SurvivalCurve survival_probability(const DualParams& params,
                                   std::span<const double> sample_times,
                                   std::uint64_t replicates, int threads) {
  return run_dual(params, sample_times, replicates, threads).survival;
}

FrontSizeCurve mean_front_size(const DualParams& params, std::span<const double> sample_times,
                               std::uint64_t replicates, int threads) {
  return run_dual(params, sample_times, replicates, threads).front_size;
}

// ---------------------------------------------------------------- graphical dual

namespace {

// Ring sequence of one site's merged clock (rate 1 + r).
struct SiteClock {
  Rng rng;
  double next = 0.0;
  bool death = true;
  int slot = -1;

  void ring(double total_rate, double death_probability, int degree, bool classic) {
    next += exponential(rng, total_rate);
    death = uniform01(rng) < death_probability;
    slot = (!death && classic)
               ? static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(degree)))
               : -1;
  }
};

}  // namespace

DualFront simulate_dual_graphical(const DualParams& params, std::span<const Site> initial,
                                  double t_max) {
  params.validate();
  DualFront front(params.d, initial);
  const bool classic = params.model == Model::classic;
  const int degree = 2 * params.d;
  const double r = classic ? degree * params.lambda : params.lambda;
  const double total = 1.0 + r;
  const double p_death = 1.0 / total;

  std::unordered_map<DualFront::Key, SiteClock, KeyHash> clocks;
  using Entry = std::pair<double, DualFront::Key>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;

  auto clock_of = [&](DualFront::Key k) -> SiteClock& {
    auto it = clocks.find(k);
    if (it == clocks.end()) {
      SiteClock c{Rng(derive_seed(params.seed, KeyHash::fold(k)))};
      c.ring(total, p_death, degree, classic);
      it = clocks.emplace(k, std::move(c)).first;
    }
    return it->second;
  };
  // First ring of k strictly after time t.
  auto schedule = [&](DualFront::Key k, double t) {
    SiteClock& c = clock_of(k);
    while (c.next <= t) c.ring(total, p_death, degree, classic);
    queue.emplace(c.next, k);
  };

  for (std::size_t i = 0; i < front.size(); ++i) schedule(front.key_at(i), 0.0);
  while (!queue.empty()) {
    const auto [t, k] = queue.top();
    queue.pop();
    if (t > t_max) break;
    SiteClock& c = clock_of(k);
    if (!front.contains_key(k) || c.next != t) continue;  // stale entry
    front.advance(t - front.time());
    if (c.death) {
      front.erase(k);
    } else {
      std::vector<DualFront::Key> added;
      const auto& codec = front.codec();
      if (classic) {
        const auto y = codec.neighbor(k, c.slot);
        if (front.insert(y)) added.push_back(y);
      } else {
        for (int slot = 0; slot < degree; ++slot) {
          const auto y = codec.neighbor(k, slot);
          if (front.insert(y)) added.push_back(y);
        }
      }
      for (auto y : added) schedule(y, t);
      c.ring(total, p_death, degree, classic);
      queue.emplace(c.next, k);
    }
    if (front.size() > params.max_front)
      throw NumericalError("dual front exceeded " + std::to_string(params.max_front) + " sites");
  }
  front.advance(t_max - front.time());
  return front;
}

}  // namespace contact_decay
