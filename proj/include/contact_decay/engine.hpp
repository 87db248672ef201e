#pragma once

// Forward dynamics on a finite torus, all driven by one graphical
// representation: a merged stream of death (N) and infection (Y) clock rings.
//
//   threshold-one:  N_x rate 1, Y_x rate lambda; at a Y ring x becomes
//                   infected iff it already is or some neighbor is.
//   classic:        N_x rate 1, Y_x rate 2 d lambda with a uniformly chosen
//                   neighbor slot; x becomes infected iff that neighbor is.
//
// The weighted processes zeta (threshold) and alpha (classic) consume the same
// stream, so their positivity sets coincide with the spin processes started
// from all ones.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "contact_decay/lattice.hpp"
#include "contact_decay/rng.hpp"

namespace contact_decay {

enum class Model { threshold, classic };

std::string_view to_string(Model m);
Model parse_model(std::string_view name);  // "threshold" | "classic"

struct SimParams {
  int d = 1;
  double lambda = 0.0;
  Model model = Model::threshold;
  int side = 64;
  double t_max = 0.0;
  std::uint64_t seed = 0;

  // lambda >= 0, t_max >= 0, side even and >= 4.
  void validate() const;
};

enum class EventKind : std::uint8_t { death, infection };

struct Event {
  double time = 0.0;
  std::size_t site = 0;
  EventKind kind = EventKind::death;
  int slot = -1;  // selected neighbor slot (classic infections only)
};

// Merged Poisson clocks over all torus sites. Inter-event times are
// exponential with rate (1 + r) n where r is the per-site infection rate
// (lambda, or 2 d lambda for the classic model); the ringing site is uniform
// and the kind is N with probability 1 / (1 + r).
class EventStream {
 public:
  EventStream(const Torus& torus, double lambda, Model model, std::uint64_t seed);

  Event next();
  double now() const { return now_; }
  double infection_rate_per_site() const { return infection_rate_; }
  double total_rate() const { return total_rate_; }

 private:
  std::size_t sites_;
  int degree_;
  Model model_;
  double infection_rate_;
  double total_rate_;
  double death_probability_;
  double now_ = 0.0;
  Rng rng_;
};

class SpinField {
 public:
  SpinField() = default;
  explicit SpinField(std::vector<std::uint8_t> bits);

  static SpinField all_ones(std::size_t n);   // delta_1
  static SpinField all_zeros(std::size_t n);  // delta_0

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t x) const { return bits_[x] != 0; }
  void set(std::size_t x, bool v) { bits_[x] = v ? 1 : 0; }
  std::size_t count() const;
  std::span<const std::uint8_t> bits() const { return bits_; }

  friend bool operator==(const SpinField&, const SpinField&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

void step_threshold(SpinField& field, const Torus& torus, const Event& event);
void step_classic(SpinField& field, const Torus& torus, const Event& event);
void step_spin(SpinField& field, const Torus& torus, const Event& event, Model model);

// Nonnegative field with a common exponential drift exp{(1 - 2 lambda d) t}
// applied lazily: each site keeps (base, last-touch time). When a stored
// value exceeds kRescaleAbove every site is divided by that factor and the
// factor is accumulated in log_scale(); value() keeps ratios and signs exact.
class WeightField {
 public:
  static constexpr double kRescaleAbove = 1e250;

  WeightField(std::vector<double> init, double drift_rate, double t0 = 0.0);

  std::size_t size() const { return base_.size(); }
  double drift_rate() const { return drift_rate_; }
  double log_scale() const { return log_scale_; }

  double value(std::size_t x, double t) const;
  double absolute_value(std::size_t x, double t) const;
  void set(std::size_t x, double v, double t);
  std::vector<double> values(double t) const;

 private:
  void rescale(double t);

  std::vector<double> base_;
  std::vector<double> stamp_;
  double drift_rate_;
  double log_scale_ = 0.0;
};

// Death zeroes the site; a threshold infection sets
// zeta(x) <- zeta(x) + sum_{y ~ x} zeta(y), a classic infection with
// neighbor slot k sets alpha(x) <- alpha(x) + alpha(y_k). Throws
// std::logic_error if a reconstructed value is negative or not finite.
void step_weighted(WeightField& field, const Torus& torus, const Event& event, Model model);

struct CoupledTrace {
  std::vector<double> times;
  std::vector<SpinField> spins;
  std::vector<std::vector<double>> weights;

  // Number of sampled (t, x) with (weight > 0) != spin.
  std::size_t mismatches() const;
};

// Spin process from delta_1 and the weighted process from `init` (all
// entries > 0) driven by one stream seeded with params.seed.
CoupledTrace run_coupled(const SimParams& params, std::vector<double> init,
                         std::span<const double> sample_times);

struct ForwardSample {
  std::vector<std::uint8_t> origin;  // eta_t(O) per sample time
  std::vector<double> density;       // fraction of infected sites per sample time
};

// One replicate of the spin process seeded with params.seed.
ForwardSample run_forward(const SimParams& params, const SpinField& init,
                          std::span<const double> sample_times);

struct ForwardEstimate {
  std::vector<double> times;
  std::uint64_t replicates = 0;
  std::vector<std::uint64_t> origin_hits;
  std::vector<double> density_mean;  // translation-averaged estimate
  std::vector<double> density_se;    // replicate-level standard error
};

// Replicates r = 0..n-1 of run_forward from delta_1 with seeds
// derive_seed(params.seed, r); threads <= 0 uses default_thread_count().
ForwardEstimate forward_estimate(const SimParams& params, std::span<const double> sample_times,
                                 std::uint64_t replicates, int threads = 0);

// Checks 0 <= t_0 <= t_1 <= ... <= t_max.
void validate_sample_times(std::span<const double> times, double t_max);

}  // namespace contact_decay
