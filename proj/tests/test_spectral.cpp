#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "contact_decay/errors.hpp"
#include "contact_decay/spectral.hpp"
#include "oracles.hpp"

using namespace contact_decay;

namespace {

RProvider closed_form_1d() {
  return RProvider("closed_form", true,
                   [](double p, double) { return HittingValue{oracle::r1(p), 0.0}; });
}

std::vector<double> unit_field(const Box& box, const Site& x) {
  std::vector<double> f(box.size(), 0.0);
  f[box.index(x)] = 1.0;
  return f;
}

}  // namespace

TEST_CASE("operator rows on unit vectors") {
  const double lambda = 0.1;
  const int d = 2;
  const Box box(d, 3);
  const MomentOperator g(Model::threshold, lambda, d);
  const MomentOperator gc(Model::classic, lambda, d);
  const std::size_t o = box.origin();
  const Site e1({1, 0}), e2({0, 1});

  CHECK(g.apply_row(box, unit_field(box, Site::origin(d)), o) == doctest::Approx(1 - 2 * lambda * d));
  CHECK(g.apply_row(box, unit_field(box, e1), o) == doctest::Approx(2 * lambda * d));
  CHECK(g.apply_row(box, unit_field(box, Site({2, 0})), o) == doctest::Approx(2 * lambda * d));
  CHECK(g.apply_row(box, unit_field(box, Site({1, 1})), o) == doctest::Approx(2 * lambda * d));
  CHECK(g.apply_row(box, unit_field(box, e2), o) == 0.0);

  CHECK(gc.apply_row(box, unit_field(box, Site::origin(d)), o) == doctest::Approx(1 - 2 * lambda * d));
  CHECK(gc.apply_row(box, unit_field(box, e1), o) == doctest::Approx(4 * lambda * d));
  CHECK(gc.apply_row(box, unit_field(box, Site({2, 0})), o) == 0.0);

  for (const auto* op : {&g, &gc}) {
    const std::size_t x = box.index(e2);
    CHECK(op->apply_row(box, unit_field(box, e2), x) == doctest::Approx(-4 * lambda * d));
    CHECK(op->apply_row(box, unit_field(box, Site::origin(d)), x) == doctest::Approx(2 * lambda));
    CHECK(op->apply_row(box, unit_field(box, Site({0, 2})), x) == doctest::Approx(2 * lambda));
    CHECK(op->apply_row(box, unit_field(box, Site({1, 0})), x) == 0.0);
  }

  std::vector<double> out(box.size());
  const auto in = unit_field(box, e1);
  g.apply(box, in, out);
  for (std::size_t i = 0; i < box.size(); ++i) CHECK(out[i] == doctest::Approx(g.apply_row(box, in, i)));
}

TEST_CASE("sup-norm Lipschitz bound on random vectors") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Model model : {Model::threshold, Model::classic}) {
    for (int d : {1, 2, 3}) {
      const double lambda = 0.3 / d;
      const Box box(d, d == 3 ? 4 : 6);
      const MomentOperator op(model, lambda, d);
      CHECK(op.lipschitz_bound() == doctest::Approx(1 + 8 * lambda * d + 4 * lambda * d * d));
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a(box.size()), b(box.size()), ga(box.size()), gb(box.size());
        double diff = 0.0;
        for (std::size_t i = 0; i < box.size(); ++i) {
          a[i] = u(rng);
          b[i] = u(rng);
          diff = std::max(diff, std::abs(a[i] - b[i]));
        }
        op.apply(box, a, ga);
        op.apply(box, b, gb);
        double out = 0.0;
        for (std::size_t i = 0; i < box.size(); ++i) out = std::max(out, std::abs(ga[i] - gb[i]));
        CHECK(out <= op.lipschitz_bound() * diff * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("K examples") {
  const auto cf = closed_form_1d();
  const auto k = k_function(Model::threshold, 0.2, 1, 0.5, cf);
  CHECK(k.k_mid == doctest::Approx(oracle::k1(0.2, 0.5)).epsilon(1e-12));
  CHECK(k.k_mid == doctest::Approx(0.064).epsilon(0.02));
  CHECK(k_function(Model::threshold, 0.2, 1, 1e-6, cf).k_mid > 1e5);

  const double r = oracle::r1(0.5);
  const double classic = 0.8 / 0.5 - 0.4 - 1 - 0.8 * r;
  CHECK(k_function(Model::classic, 0.2, 1, 0.5, cf).k_mid == doctest::Approx(classic).epsilon(1e-12));

  // K(1) < 0 for lambda < 1/(2d) using only R(e1, d, 1) >= 1/(2d)
  for (int d : {1, 2, 3, 10}) {
    const RProvider worst("one_step", false, [d](double, double) {
      return HittingValue{1.0 / (2 * d), 0.0};
    });
    for (double frac : {0.1, 0.5, 0.99}) {
      const double lambda = frac / (2 * d);
      CHECK(k_function(Model::threshold, lambda, d, 1.0, worst).k.hi < 0.0);
      CHECK(k_function(Model::classic, lambda, d, 1.0, worst).k.hi < 0.0);
    }
  }
  CHECK_THROWS_AS(k_function(Model::threshold, 0.2, 1, 0.0, cf), std::invalid_argument);
}

TEST_CASE("K is strictly decreasing with a single sign change") {
  for (int d : {1, 2}) {
    const double lambda = 0.2 / d;
    const auto provider = solver_provider(d);
    for (Model model : {Model::threshold, Model::classic}) {
      double prev = std::numeric_limits<double>::infinity();
      int sign_changes = 0;
      for (int i = 1; i <= 18; ++i) {
        const double k = k_function(model, lambda, d, 0.05 * i, provider, 1e-8).k_mid;
        CHECK(k < prev);
        if (i > 1 && (k < 0) != (prev < 0)) ++sign_changes;
        prev = k;
      }
      CHECK(sign_changes == 1);
    }
  }
}

TEST_CASE("fixed points match the reference values") {
  const auto cf = closed_form_1d();
  const double want = oracle::bisect([](double p) { return oracle::k1(0.2, p); }, 1e-9, 1.0);
  const auto r1 = solve_fixed_point(Model::threshold, 0.2, 1, cf);
  CHECK(std::abs(r1.p_star - want) < 1e-6);
  CHECK(r1.bracket.width() <= 1e-6);
  CHECK(r1.k_at_root.lo <= 0.0);
  CHECK(r1.k_at_root.hi >= 0.0);

  for (const auto& fp : oracle::kFixedPoint) {
    const auto res = solve_fixed_point(Model::threshold, 0.2 / fp.d, fp.d, solver_provider(fp.d));
    CHECK(std::abs(res.p_star - fp.p_star) < 1e-6);
    CHECK(std::abs(res.mu - fp.mu) < 1e-5);
    CHECK(res.mu == doctest::Approx(4 * res.lambda * fp.d * (1 / res.p_star - 1)));
    CHECK(res.bracket.width() <= 1e-6);
    CHECK(res.k_at_root.contains(0.0));
    CHECK(res.r_method == "solver");
  }
}

TEST_CASE("fixed point preconditions") {
  const auto cf = closed_form_1d();
  CHECK_THROWS_AS(solve_fixed_point(Model::threshold, 0.5, 1, cf), std::domain_error);
  CHECK_THROWS_AS(solve_fixed_point(Model::threshold, 0.0, 1, cf), std::domain_error);
  CHECK_THROWS_AS(solve_fixed_point(Model::classic, 0.3, 2, solver_provider(2)), std::domain_error);
}

TEST_CASE("rate bounds examples") {
  const auto cf = closed_form_1d();
  const auto zero = rate_bounds(Model::threshold, 0.0, 3, solver_provider(3));
  REQUIRE(zero.lower.has_value());
  CHECK(*zero.lower == -1.0);
  CHECK(zero.upper == -1.0);

  const auto b = rate_bounds(Model::threshold, 0.2, 1, cf);
  REQUIRE(b.lower.has_value());
  CHECK(*b.lower == doctest::Approx(-0.743).epsilon(1e-3));
  CHECK(b.upper == doctest::Approx(-0.6));
  CHECK(*b.lower <= b.upper);

  const auto super = rate_bounds(Model::threshold, 0.3, 2, solver_provider(2));
  CHECK_FALSE(super.lower.has_value());
  CHECK(super.upper == doctest::Approx(0.2));
  CHECK_FALSE(super.warning.empty());
}

TEST_CASE("sandwich ordering across subcritical parameters") {
  for (int d : {1, 2, 3}) {
    for (double frac : {0.2, 0.5, 0.9}) {
      const double lambda = frac / (2 * d);
      for (Model model : {Model::threshold, Model::classic}) {
        const auto b = rate_bounds(model, lambda, d, solver_provider(d));
        REQUIRE(b.lower.has_value());
        CHECK(*b.lower <= b.upper);
        CHECK(b.fixed_point->mu > 0.0);
      }
    }
  }
}

TEST_CASE("eigen identity holds at the root and fails off it") {
  for (int d : {1, 2, 3}) {
    const auto res = solve_fixed_point(Model::threshold, 0.2 / d, d, solver_provider(d));
    const auto rep = eigencheck(res);
    CHECK(rep.passed);
    CHECK(rep.max_residual <= rep.bound);
    CHECK(rep.max_residual <= 1e-5);
    CHECK(rep.rows_checked > 1);
    const auto off = eigencheck(res, 1e-9, 0.05);
    CHECK_FALSE(off.passed);
    CHECK(off.origin_residual > 100 * off.bound);
  }
}

TEST_CASE("eigencheck bound tracks the R tolerance") {
  const auto res = solve_fixed_point(Model::classic, 0.1, 2, solver_provider(2));
  const auto coarse = eigencheck(res, 1e-6);
  const auto fine = eigencheck(res, 1e-8);
  CHECK(coarse.passed);
  CHECK(fine.passed);
  CHECK(fine.off_origin_residual <= coarse.bound);
  CHECK(fine.bound < coarse.bound);
}

TEST_CASE("moment flow basics") {
  const Box box(1, 10);
  const MomentOperator op(Model::threshold, 0.2, 1);
  const std::vector<double> times{0.5, 1.0};
  const auto zero = moment_flow(op, box, std::vector<double>(box.size(), 0.0), times);
  for (double v : zero.final_state) CHECK(v == 0.0);

  const double h = 1e-5;
  const std::vector<double> tiny{h};
  const auto delta = moment_flow(op, box, unit_field(box, Site::origin(1)), tiny, 1e-12, 1e-15);
  CHECK((delta.origin.back() - 1.0) / h == doctest::Approx(1 - 2 * 0.2).epsilon(1e-4));

  std::vector<double> bad(box.size(), 0.0);
  bad[box.origin()] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(moment_flow(op, box, bad, times), NumericalError);
  const std::vector<double> unsorted{1.0, 0.5};
  CHECK_THROWS_AS(moment_flow(op, box, unit_field(box, Site::origin(1)), unsorted),
                  std::invalid_argument);
}

TEST_CASE("eigenflow follows e^{mu t}") {
  const auto res = solve_fixed_point(Model::threshold, 0.2, 1, solver_provider(1));
  std::vector<double> times;
  for (int i = 1; i <= 50; ++i) times.push_back(0.1 * i);
  const auto rep = eigenflow_check(res, times);
  CHECK(rep.mu == doctest::Approx(res.mu));
  CHECK(rep.max_relative_deviation <= 1e-4);
}

TEST_CASE("heat kernel against the standard library Bessel function") {
  for (double x : {0.0, 0.1, 1.0, 7.5, 40.0, 300.0})
    CHECK(scaled_bessel_i0_series(x) == doctest::Approx(oracle::scaled_i0(x)).epsilon(1e-12));
  CHECK_THROWS_AS(scaled_bessel_i0_series(800.0), NumericalError);

  const auto one = heat_kernel_check(0.5, 1, 1.0);
  CHECK(one.series == doctest::Approx(0.4658).epsilon(1e-4));
  CHECK(one.series == doctest::Approx(oracle::scaled_i0(1.0)).epsilon(1e-12));
  CHECK(one.matrix_exp == doctest::Approx(one.series).epsilon(1e-7));
  CHECK(heat_kernel_check(0.5, 3, 0.0).series == 1.0);
  const auto three = heat_kernel_check(0.3, 3, 2.0);
  CHECK(three.matrix_exp == doctest::Approx(three.series).epsilon(1e-7));
  CHECK(three.series == doctest::Approx(std::pow(oracle::scaled_i0(1.2), 3)).epsilon(1e-12));
}

TEST_CASE("return probability decays like t^{-d/2}") {
  for (int d : {1, 2, 3}) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double t = 1.0; t <= 50.0; t += 0.5) {
      const double scaled = std::pow(scaled_bessel_i0_series(t), d) * std::pow(t, d / 2.0);
      lo = std::min(lo, scaled);
      hi = std::max(hi, scaled);
    }
    CHECK(lo > 0.05);
    CHECK(hi < 1.0);
  }
}

TEST_CASE("limit scan in low dimensions") {
  const double lambda = 0.25;
  const std::vector<int> dims{1, 2, 3};
  for (Model model : {Model::threshold, Model::classic}) {
    const auto rows = limit_scan(model, lambda, dims);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& want = oracle::kLimit[i];
      const double p = model == Model::threshold ? want.p_threshold : want.p_classic;
      CHECK(rows[i].d == want.d);
      CHECK(std::abs(rows[i].p_star - p) < 2e-6);
      CHECK(rows[i].upper == 2 * lambda - 1);
      CHECK(rows[i].gap_p == doctest::Approx(std::abs(rows[i].p_star - 2.0 / 3.0)));
      CHECK(rows[i].gap_p > 0.0);
      CHECK(rows[i].lower <= rows[i].upper);
    }
  }
  CHECK(limit_fixed_point(0.25) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(limit_scan(Model::threshold, 0.5, dims), std::domain_error);
  CHECK_THROWS_AS(limit_scan(Model::threshold, 0.25, std::vector<int>{}), std::invalid_argument);
}
