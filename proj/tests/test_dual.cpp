#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "contact_decay/dual.hpp"
#include "contact_decay/errors.hpp"

using namespace contact_decay;

TEST_CASE("threshold dual moves") {
  DualFront front(1);
  dual_branch_threshold(front, Site::origin(1));
  CHECK(front.sites() == std::vector<Site>{Site({-1}), Site({0}), Site({1})});
  dual_branch_threshold(front, Site({1}));
  CHECK(front.size() == 4);  // only +2 is new
  DualFront single(1);
  dual_death(single, Site::origin(1));
  CHECK(single.empty());
  CHECK_THROWS_AS(dual_branch_threshold(single, Site({5})), std::invalid_argument);
}

TEST_CASE("classic dual moves") {
  DualFront front(1);
  dual_birth_classic(front, Site::origin(1), 0);
  CHECK(front.sites() == std::vector<Site>{Site({0}), Site({1})});
  dual_birth_classic(front, Site({1}), 1);  // back onto O: no change
  CHECK(front.size() == 2);
  dual_death(front, Site::origin(1));
  dual_death(front, Site({1}));
  CHECK(front.empty());
}

TEST_CASE("stepping an empty front throws") {
  DualFront front(2);
  dual_death(front, Site::origin(2));
  Rng rng(1);
  CHECK_THROWS_AS(step_dual_threshold(front, 0.1, rng), std::logic_error);
  CHECK_THROWS_AS(step_dual_classic(front, 0.1, rng), std::logic_error);
}

TEST_CASE("fronts never hold duplicates and time increases") {
  for (Model model : {Model::threshold, Model::classic}) {
    DualFront front(2);
    Rng rng(17);
    double last = 0.0;
    for (int i = 0; i < 2000 && !front.empty() && front.size() < 5000; ++i) {
      step_dual(front, 0.4, model, rng);
      const auto s = front.sites();
      REQUIRE(std::set<Site>(s.begin(), s.end()).size() == front.size());
      REQUIRE(front.time() > last);
      last = front.time();
    }
  }
}

TEST_CASE("pure death dual: extinction time is exponential with rate 1") {
  DualParams p;
  p.d = 3;
  p.lambda = 0.0;
  p.seed = 4;
  const std::vector<double> times{0.0, 0.5, 1.0, 2.0, 3.0};
  const std::uint64_t n = 20'000;
  const auto run = run_dual(p, times, n, 2);
  CHECK(run.survival.p_hat(0) == 1.0);
  CHECK(run.front_size.mean[0] == 1.0);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double want = std::exp(-times[i]);
    const double se = binomial_se(want, n);
    CHECK(std::abs(run.survival.p_hat(i) - want) < 3.0 * se);
    CHECK(std::abs(run.front_size.mean[i] - want) < 3.0 * se);
  }
}

TEST_CASE("front size obeys the branching bound") {
  DualParams p;
  p.d = 2;
  p.lambda = 0.1;
  p.seed = 9;
  const std::vector<double> times{1.0, 2.0, 3.0};
  const auto curve = mean_front_size(p, times, 20'000, 2);
  for (std::size_t i = 0; i < times.size(); ++i)
    CHECK(curve.mean[i] <= std::exp((2 * 0.1 * 2 - 1) * times[i]) + 3.0 * curve.se[i]);
}

TEST_CASE("removing initial sites cannot grow the graphical dual") {
  for (Model model : {Model::threshold, Model::classic}) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      DualParams p;
      p.d = 2;
      p.lambda = 0.3;
      p.model = model;
      p.seed = seed;
      const std::vector<Site> big{Site({0, 0}), Site({1, 0}), Site({0, 3}), Site({-2, -2})};
      const std::vector<Site> small{Site({0, 0}), Site({0, 3})};
      for (double t : {0.5, 1.5, 3.0}) {
        const auto a = simulate_dual_graphical(p, small, t).sites();
        const auto b = simulate_dual_graphical(p, big, t).sites();
        CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
      }
    }
  }
}

TEST_CASE("graphical dual is reproducible and absorbs at the empty set") {
  DualParams p;
  p.d = 1;
  p.lambda = 0.2;
  p.seed = 3;
  const std::vector<Site> start{Site::origin(1)};
  CHECK(simulate_dual_graphical(p, start, 2.0).sites() ==
        simulate_dual_graphical(p, start, 2.0).sites());
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    p.seed = seed;
    if (simulate_dual_graphical(p, start, 2.0).empty())
      CHECK(simulate_dual_graphical(p, start, 6.0).empty());
  }
}

TEST_CASE("dual estimates do not depend on the thread count") {
  DualParams p;
  p.d = 2;
  p.lambda = 0.05;
  p.seed = 12;
  const std::vector<double> times{0.0, 1.0, 2.0, 4.0};
  const auto a = run_dual(p, times, 5000, 1);
  const auto b = run_dual(p, times, 5000, 4);
  CHECK(std::equal(a.survival.survivors().begin(), a.survival.survivors().end(),
                   b.survival.survivors().begin()));
  CHECK(a.front_size.mean == b.front_size.mean);
  CHECK(a.front_size.se == b.front_size.se);
}

TEST_CASE("dual rejects bad input and runaway fronts") {
  DualParams p;
  p.d = 1;
  p.lambda = 0.2;
  const std::vector<double> times{1.0};
  CHECK_THROWS_AS(run_dual(p, times, 0), std::invalid_argument);
  p.lambda = -1.0;
  CHECK_THROWS_AS(run_dual(p, times, 10), std::invalid_argument);
  p.lambda = 5.0;
  p.d = 3;
  p.max_front = 200;
  const std::vector<double> long_times{50.0};
  int threw = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    p.seed = seed;
    try {
      simulate_dual(p, long_times);
    } catch (const NumericalError&) {
      ++threw;
    }
  }
  CHECK(threw > 0);
}
