#pragma once

// Set-valued dual processes on the unbounded lattice. Started from {O},
// P(front nonempty at t) equals P(origin infected at t) for the forward
// process started from all ones, with no finite-volume truncation.
//
//   threshold dual A_t: each x in A dies at rate 1 (A <- A \ {x}) and
//                       branches at rate lambda (A <- A u {y : y ~ x}).
//   classic dual   C_t: each x in C dies at rate 1 and, at rate 2 d lambda,
//                       adds one uniformly chosen neighbor.

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "contact_decay/engine.hpp"
#include "contact_decay/estimate.hpp"
#include "contact_decay/lattice.hpp"
#include "contact_decay/rng.hpp"

namespace contact_decay {

class DualFront {
 public:
  using Key = SiteCodec::Key;

  explicit DualFront(int d);  // {O} at time 0
  DualFront(int d, std::span<const Site> sites);

  int dim() const { return codec_.dim(); }
  const SiteCodec& codec() const { return codec_; }
  double time() const { return time_; }
  void advance(double dt) { time_ += dt; }

  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(const Site& x) const { return contains_key(codec_.encode(x)); }
  bool contains_key(Key k) const { return pos_.contains(k); }
  Key key_at(std::size_t i) const { return members_[i]; }
  std::vector<Site> sites() const;  // sorted

  bool insert(Key k);  // false when already present
  bool erase(Key k);   // false when absent

 private:
  SiteCodec codec_;
  std::vector<Key> members_;
  std::unordered_map<Key, std::size_t, KeyHash> pos_;
  double time_ = 0.0;
};

// Elementary moves (time is not advanced).
void dual_death(DualFront& front, const Site& x);
void dual_branch_threshold(DualFront& front, const Site& x);          // add all neighbors
void dual_birth_classic(DualFront& front, const Site& x, int slot);   // add neighbor in slot

// One Gillespie step. Throws std::logic_error on an empty front.
void step_dual_threshold(DualFront& front, double lambda, Rng& rng);
void step_dual_classic(DualFront& front, double lambda, Rng& rng);
void step_dual(DualFront& front, double lambda, Model model, Rng& rng);

struct DualParams {
  int d = 1;
  double lambda = 0.0;
  Model model = Model::threshold;
  std::uint64_t seed = 0;
  std::size_t max_front = 1'000'000;  // NumericalError beyond this size

  void validate() const;
};

// Front sizes |A_t| at each sample time for one replicate seeded with
// params.seed, starting from {O}.
std::vector<std::size_t> simulate_dual(const DualParams& params,
                                       std::span<const double> sample_times);

struct FrontSizeCurve {
  std::vector<double> times;
  std::uint64_t replicates = 0;
  std::vector<double> mean;
  std::vector<double> se;
};

struct DualRunResult {
  SurvivalCurve survival;
  FrontSizeCurve front_size;
};

// Replicates r = 0..n-1 with seeds derive_seed(params.seed, r).
DualRunResult run_dual(const DualParams& params, std::span<const double> sample_times,
                       std::uint64_t replicates, int threads = 0);

SurvivalCurve survival_probability(const DualParams& params,
                                   std::span<const double> sample_times,
                                   std::uint64_t replicates, int threads = 0);

FrontSizeCurve mean_front_size(const DualParams& params, std::span<const double> sample_times,
                               std::uint64_t replicates, int threads = 0);

// Dual driven by per-site Poisson clocks: the k-th ring of site x is a fixed
// function of (seed, x). Runs from different initial sets with the same seed
// are coupled, and A subset of B implies A_t subset of B_t.
DualFront simulate_dual_graphical(const DualParams& params, std::span<const Site> initial,
                                  double t_max);

}  // namespace contact_decay
