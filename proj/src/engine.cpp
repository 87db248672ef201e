#include "contact_decay/engine.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "contact_decay/parallel.hpp"
#include "contact_decay/stats.hpp"

namespace contact_decay {

std::string_view to_string(Model m) {
  return m == Model::threshold ? "threshold" : "classic";
}

Model parse_model(std::string_view name) {
  if (name == "threshold") return Model::threshold;
  if (name == "classic") return Model::classic;
  throw std::invalid_argument("unknown model '" + std::string(name) +
                              "' (expected threshold or classic)");
}

void SimParams::validate() const {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be finite and >= 0");
  if (!(t_max >= 0.0) || !std::isfinite(t_max))
    throw std::invalid_argument("t_max must be finite and >= 0");
  if (side < 4 || side % 2 != 0) throw std::invalid_argument("torus side must be even and >= 4");
}

void validate_sample_times(std::span<const double> times, double t_max) {
  double prev = 0.0;
  for (double t : times) {
    if (!(t >= prev) || t > t_max)
      throw std::invalid_argument("sample times must be sorted within [0, t_max]");
    prev = t;
  }
}

// ---------------------------------------------------------------- EventStream

EventStream::EventStream(const Torus& torus, double lambda, Model model, std::uint64_t seed)
    : sites_(torus.size()),
      degree_(torus.degree()),
      model_(model),
      infection_rate_(model == Model::threshold ? lambda : lambda * torus.degree()),
      total_rate_((1.0 + infection_rate_) * static_cast<double>(torus.size())),
      death_probability_(1.0 / (1.0 + infection_rate_)),
      rng_(seed) {}

Event EventStream::next() {
  now_ += exponential(rng_, total_rate_);
  Event e;
  e.time = now_;
  e.site = static_cast<std::size_t>(uniform_below(rng_, sites_));
  if (uniform01(rng_) < death_probability_) {
    e.kind = EventKind::death;
  } else {
    e.kind = EventKind::infection;
    if (model_ == Model::classic)
      e.slot = static_cast<int>(uniform_below(rng_, static_cast<std::uint64_t>(degree_)));
  }
  return e;
}

// ---------------------------------------------------------------- SpinField

SpinField::SpinField(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) b = b ? 1 : 0;
}

SpinField SpinField::all_ones(std::size_t n) { return SpinField(std::vector<std::uint8_t>(n, 1)); }
SpinField SpinField::all_zeros(std::size_t n) { return SpinField(std::vector<std::uint8_t>(n, 0)); }

std::size_t SpinField::count() const {
  std::size_t c = 0;
  for (auto b : bits_) c += b;
  return c;
}

void step_threshold(SpinField& field, const Torus& torus, const Event& event) {
  const std::size_t x = event.site;
  if (event.kind == EventKind::death) {
    field.set(x, false);
    return;
  }
  if (field[x]) return;
  for (std::size_t y : torus.neighbors(x)) {
    if (field[y]) {
      field.set(x, true);
      return;
    }
  }
}

void step_classic(SpinField& field, const Torus& torus, const Event& event) {
  const std::size_t x = event.site;
  if (event.kind == EventKind::death) {
    field.set(x, false);
    return;
  }
  if (event.slot < 0 || event.slot >= torus.degree())
    throw std::invalid_argument("classic infection event without a neighbor slot");
  if (!field[x] && field[torus.neighbors(x)[static_cast<std::size_t>(event.slot)]])
    field.set(x, true);
}

void step_spin(SpinField& field, const Torus& torus, const Event& event, Model model) {
  if (model == Model::threshold)
    step_threshold(field, torus, event);
  else
    step_classic(field, torus, event);
}

// ---------------------------------------------------------------- WeightField

WeightField::WeightField(std::vector<double> init, double drift_rate, double t0)
    : base_(std::move(init)), stamp_(base_.size(), t0), drift_rate_(drift_rate) {
  for (double v : base_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("weights must be finite and nonnegative");
}

double WeightField::value(std::size_t x, double t) const {
  const double b = base_[x];
  if (b == 0.0) return 0.0;
  return b * std::exp(drift_rate_ * (t - stamp_[x]));
}

double WeightField::absolute_value(std::size_t x, double t) const {
  return value(x, t) * std::exp(log_scale_);
}

void WeightField::set(std::size_t x, double v, double t) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw std::logic_error("weight field produced a negative or non-finite value");
  base_[x] = v;
  stamp_[x] = t;
  if (v > kRescaleAbove) rescale(t);
}

void WeightField::rescale(double t) {
  for (std::size_t x = 0; x < base_.size(); ++x) {
    base_[x] = value(x, t) / kRescaleAbove;
    stamp_[x] = t;
  }
  log_scale_ += std::log(kRescaleAbove);
}

std::vector<double> WeightField::values(double t) const {
  std::vector<double> out(base_.size());
  for (std::size_t x = 0; x < base_.size(); ++x) out[x] = value(x, t);
  return out;
}

void step_weighted(WeightField& field, const Torus& torus, const Event& event, Model model) {
  const std::size_t x = event.site;
  const double t = event.time;
  if (event.kind == EventKind::death) {
    field.set(x, 0.0, t);
    return;
  }
  double v = field.value(x, t);
  if (model == Model::threshold) {
    for (std::size_t y : torus.neighbors(x)) v += field.value(y, t);
  } else {
    if (event.slot < 0 || event.slot >= torus.degree())
      throw std::invalid_argument("classic infection event without a neighbor slot");
    v += field.value(torus.neighbors(x)[static_cast<std::size_t>(event.slot)], t);
  }
  field.set(x, v, t);
}

// ---------------------------------------------------------------- runs

namespace {

// Feeds stream events up to t_max, calling on_sample(i, t) when the clock
// passes sample time i (before any event at a later time is applied).
template <class OnEvent, class OnSample>
void drive(EventStream& stream, double t_max, std::span<const double> sample_times,
           OnEvent&& on_event, OnSample&& on_sample) {
  std::size_t next_sample = 0;
  while (next_sample < sample_times.size()) {
    const Event e = stream.next();
    while (next_sample < sample_times.size() && sample_times[next_sample] < e.time) {
      on_sample(next_sample, sample_times[next_sample]);
      ++next_sample;
    }
    if (e.time > t_max) break;
    on_event(e);
  }
}

}  // namespace

std::size_t CoupledTrace::mismatches() const {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < times.size(); ++i)
    for (std::size_t x = 0; x < spins[i].size(); ++x)
      if ((weights[i][x] > 0.0) != spins[i][x]) ++bad;
  return bad;
}

CoupledTrace run_coupled(const SimParams& params, std::vector<double> init,
                         std::span<const double> sample_times) {
  params.validate();
  validate_sample_times(sample_times, params.t_max);
  const Torus torus(params.d, params.side);
  if (init.size() != torus.size())
    throw std::invalid_argument("initial weights must have one entry per torus site");
  for (double v : init)
    if (!(v > 0.0)) throw std::invalid_argument("initial weights must be strictly positive");

  SpinField spins = SpinField::all_ones(torus.size());
  WeightField weights(std::move(init), 1.0 - 2.0 * params.lambda * params.d);
  EventStream stream(torus, params.lambda, params.model, params.seed);

  CoupledTrace trace;
  drive(
      stream, params.t_max, sample_times,
      [&](const Event& e) {
        step_spin(spins, torus, e, params.model);
        step_weighted(weights, torus, e, params.model);
      },
      [&](std::size_t, double t) {
        trace.times.push_back(t);
        trace.spins.push_back(spins);
        trace.weights.push_back(weights.values(t));
      });
  return trace;
}

ForwardSample run_forward(const SimParams& params, const SpinField& init,
                          std::span<const double> sample_times) {
  params.validate();
  validate_sample_times(sample_times, params.t_max);
  const Torus torus(params.d, params.side);
  if (init.size() != torus.size())
    throw std::invalid_argument("initial field must have one entry per torus site");

  SpinField field = init;
  std::size_t infected = field.count();
  EventStream stream(torus, params.lambda, params.model, params.seed);
  ForwardSample out;
  out.origin.reserve(sample_times.size());
  out.density.reserve(sample_times.size());
  const double n = static_cast<double>(torus.size());
  drive(
      stream, params.t_max, sample_times,
      [&](const Event& e) {
        const bool before = field[e.site];
        step_spin(field, torus, e, params.model);
        const bool after = field[e.site];
        if (before != after) after ? ++infected : --infected;
      },
      [&](std::size_t, double) {
        out.origin.push_back(field[torus.origin()] ? 1 : 0);
        out.density.push_back(static_cast<double>(infected) / n);
      });
  return out;
}

ForwardEstimate forward_estimate(const SimParams& params, std::span<const double> sample_times,
                                 std::uint64_t replicates, int threads) {
  params.validate();
  validate_sample_times(sample_times, params.t_max);
  if (replicates == 0) throw std::invalid_argument("replicates must be >= 1");
  const Torus torus(params.d, params.side);
  const SpinField init = SpinField::all_ones(torus.size());
  const std::size_t m = sample_times.size();

  struct Partial {
    std::vector<std::uint64_t> hits;
    std::vector<MeanAccumulator> density;
  };
  std::vector<Partial> partials(block_count(replicates));
  parallel_blocks(replicates, threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
    Partial p{std::vector<std::uint64_t>(m, 0), std::vector<MeanAccumulator>(m)};
    SimParams local = params;
    for (std::size_t r = begin; r < end; ++r) {
      local.seed = derive_seed(params.seed, r);
      const ForwardSample s = run_forward(local, init, sample_times);
      for (std::size_t i = 0; i < m; ++i) {
        p.hits[i] += s.origin[i];
        p.density[i].add(s.density[i]);
      }
    }
    partials[b] = std::move(p);
  });

  ForwardEstimate est;
  est.times.assign(sample_times.begin(), sample_times.end());
  est.replicates = replicates;
  est.origin_hits.assign(m, 0);
  std::vector<MeanAccumulator> density(m);
  for (const auto& p : partials)
    for (std::size_t i = 0; i < m; ++i) {
      est.origin_hits[i] += p.hits[i];
      density[i].merge(p.density[i]);
    }
  for (const auto& acc : density) {
    est.density_mean.push_back(acc.mean());
    est.density_se.push_back(acc.standard_error());
  }
  return est;
}

}  // namespace contact_decay
