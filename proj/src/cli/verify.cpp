#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>

#include "contact_decay/cli.hpp"
#include "contact_decay/dual.hpp"
#include "contact_decay/errors.hpp"
#include "contact_decay/estimate.hpp"
#include "contact_decay/killed_walk.hpp"
#include "contact_decay/spectral.hpp"
#include "internal.hpp"

namespace contact_decay::cli {

namespace {

struct SuiteResult {
  bool passed = false;
  json details;
};

struct Context {
  const RunConfig& cfg;
  double scale;  // budget / 60 s, clamped

  std::uint64_t reps(std::uint64_t base, std::uint64_t floor = 1000) const {
    return std::max<std::uint64_t>(floor, static_cast<std::uint64_t>(base * scale));
  }
};

SuiteResult suite_coupling(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  SimParams params{cfg.d, cfg.lambda, Model::threshold, cfg.side, cfg.t_max, 0};
  params.validate();
  const auto times = parse_time_grid("0:" + format_double(cfg.t_max) + ":" +
                                     format_double(cfg.t_max / 20.0));
  const Torus torus(cfg.d, cfg.side);
  const int runs = 100;
  std::size_t mismatches = 0, samples = 0;
  for (int r = 0; r < runs; ++r) {
    params.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
    const auto trace = run_coupled(params, std::vector<double>(torus.size(), 1.0), times);
    mismatches += trace.mismatches();
    samples += trace.times.size() * torus.size();
  }
  return {mismatches == 0,
          {{"runs", runs}, {"sampled_pairs", samples}, {"mismatches", mismatches}}};
}

SuiteResult suite_duality(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const std::vector<double> times{1.0, 2.0, 4.0};
  const double lambda = 0.2;
  const DualParams dp{1, lambda, Model::threshold, cfg.seed};
  const auto dual = survival_probability(dp, times, ctx.reps(20'000), cfg.threads);
  SimParams sp{1, lambda, Model::threshold, 64, times.back(), derive_seed(cfg.seed, 1)};
  const auto fwd = forward_estimate(sp, times, ctx.reps(2'000, 200), cfg.threads);
  bool ok = true;
  json rows = json::array();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double pd = dual.p_hat(i);
    const double sd = binomial_se(pd, dual.replicates());
    const double z = std::abs(pd - fwd.density_mean[i]) /
                     std::max(std::hypot(sd, fwd.density_se[i]), 1e-300);
    ok = ok && z <= 3.0;
    rows.push_back({{"t", times[i]},
                    {"dual", pd},
                    {"dual_se", sd},
                    {"forward", fwd.density_mean[i]},
                    {"forward_se", fwd.density_se[i]},
                    {"z", z}});
  }
  return {ok, {{"d", 1}, {"lambda", lambda}, {"rows", rows}}};
}

SuiteResult suite_eigencheck(const Context& ctx) {
  bool ok = true;
  json rows = json::array();
  for (int d = 1; d <= 3; ++d) {
    const double lambda = 0.2 / d;
    const auto fp = solve_fixed_point(Model::threshold, lambda, d, solver_provider(d));
    const auto main = eigencheck(fp, 1e-9, ctx.cfg.force_fail ? 0.05 : 0.0);
    const auto control = eigencheck(fp, 1e-9, 0.05);
    const bool row_ok = main.passed && main.max_residual <= 1e-5 && !control.passed;
    ok = ok && row_ok;
    rows.push_back({{"d", d},
                    {"lambda", lambda},
                    {"p_star", fp.p_star},
                    {"bracket_width", fp.bracket.width()},
                    {"residual", main.max_residual},
                    {"bound", main.bound},
                    {"control_residual", control.max_residual},
                    {"passed", row_ok}});
  }
  return {ok, {{"forced_failure", ctx.cfg.force_fail}, {"rows", rows}}};
}

SuiteResult suite_harmonicity(const Context& ctx) {
  bool ok = true;
  json rows = json::array();
  for (int d = 1; d <= 3; ++d) {
    for (double p : {0.3, 0.6, 0.8}) {
      const auto sol = hitting_solve({d, p}, 1e-8);
      const Site e1 = Site::unit(d);
      const double residual = sol.harmonic_residual();
      const auto mc = hitting_mc({d, p}, e1, ctx.reps(100'000),
                                 derive_seed(ctx.cfg.seed, static_cast<std::uint64_t>(10 * d)),
                                 ctx.cfg.threads);
      const double z = std::abs(sol.value(e1) - mc.value) / std::max(mc.se, 1e-300);
      const bool row_ok = residual <= 1e-6 && z <= 3.0;
      ok = ok && row_ok;
      rows.push_back({{"d", d},
                      {"p", p},
                      {"r_e1", sol.value(e1)},
                      {"r_error", sol.error(e1)},
                      {"harmonic_residual", residual},
                      {"mc", mc.value},
                      {"mc_se", mc.se},
                      {"passed", row_ok}});
    }
  }
  return {ok, {{"rows", rows}}};
}

SuiteResult suite_supermultiplicativity(const Context& ctx) {
  const auto times = parse_time_grid("0:6:0.5");
  const DualParams dp{1, 0.2, Model::threshold, derive_seed(ctx.cfg.seed, 2)};
  const auto curve = survival_probability(dp, times, ctx.reps(20'000), ctx.cfg.threads);
  const auto v = supermultiplicativity_violations(curve);
  json bad = json::array();
  for (const auto& x : v)
    bad.push_back({{"t", x.t}, {"s", x.s}, {"deficit", x.deficit}, {"slack", x.slack}});
  return {v.empty(), {{"replicates", curve.replicates()}, {"violations", bad}}};
}

SuiteResult suite_heat_kernel(const Context&) {
  bool ok = true;
  json rows = json::array();
  const struct {
    double lambda;
    int d;
    double t;
  } cases[] = {{0.5, 1, 1.0}, {0.2, 2, 3.0}, {0.1, 3, 5.0}, {0.25, 2, 20.0}};
  for (const auto& c : cases) {
    const auto r = heat_kernel_check(c.lambda, c.d, c.t);
    const double diff = std::abs(r.series - r.matrix_exp);
    const bool row_ok = diff <= 1e-8;
    ok = ok && row_ok;
    rows.push_back({{"lambda", c.lambda},
                    {"d", c.d},
                    {"t", c.t},
                    {"series", r.series},
                    {"matrix_exp", r.matrix_exp},
                    {"product_form", r.product_form},
                    {"passed", row_ok}});
  }
  return {ok, {{"rows", rows}}};
}

SuiteResult suite_branching(const Context& ctx) {
  const std::vector<double> times{1.0, 2.0, 3.0};
  const double lambda = 0.1;
  const int d = 2;
  const DualParams dp{d, lambda, Model::threshold, derive_seed(ctx.cfg.seed, 3)};
  const auto fs = mean_front_size(dp, times, ctx.reps(20'000), ctx.cfg.threads);
  bool ok = true;
  json rows = json::array();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double bound = std::exp((2.0 * lambda * d - 1.0) * times[i]);
    const bool row_ok = fs.mean[i] <= bound + 3.0 * fs.se[i];
    ok = ok && row_ok;
    rows.push_back({{"t", times[i]}, {"mean", fs.mean[i]}, {"se", fs.se[i]}, {"bound", bound}});
  }
  return {ok, {{"rows", rows}}};
}

using Suite = std::function<SuiteResult(const Context&)>;

const std::vector<std::pair<std::string, Suite>>& all_suites() {
  static const std::vector<std::pair<std::string, Suite>> suites{
      {"coupling", suite_coupling},
      {"duality", suite_duality},
      {"eigencheck", suite_eigencheck},
      {"harmonicity", suite_harmonicity},
      {"supermultiplicativity", suite_supermultiplicativity},
      {"heat_kernel", suite_heat_kernel},
      {"branching", suite_branching},
  };
  return suites;
}

}  // namespace

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  for (const auto& name : cfg.suites) {
    const auto& s = all_suites();
    if (std::none_of(s.begin(), s.end(), [&](const auto& e) { return e.first == name; }))
      throw std::invalid_argument("unknown suite '" + name + "'");
  }
  const Context ctx{cfg, std::clamp(cfg.budget / 60.0, 0.05, 20.0)};
  bool any_violation = false, any_error = false;
  json results = json::array();
  for (const auto& [name, fn] : all_suites()) {
    if (!cfg.suites.empty() &&
        std::find(cfg.suites.begin(), cfg.suites.end(), name) == cfg.suites.end())
      continue;
    json entry;
    entry["name"] = name;
    try {
      auto r = fn(ctx);
      entry["passed"] = r.passed;
      entry["details"] = std::move(r.details);
      any_violation = any_violation || !r.passed;
      err << (r.passed ? "PASS " : "FAIL ") << name << "\n";
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const std::invalid_argument*>(&e) || dynamic_cast<const std::domain_error*>(&e))
        throw;
      entry["passed"] = false;
      entry["error"] = e.what();
      any_violation = true;
      err << "FAIL " << name << ": " << e.what() << "\n";
    } catch (const std::exception& e) {
      entry["passed"] = false;
      entry["error"] = e.what();
      any_error = true;
      err << "ERROR " << name << ": " << e.what() << "\n";
    }
    results.push_back(std::move(entry));
  }
  json j;
  j["config"] = config_json(cfg);
  j["passed"] = !any_violation && !any_error;
  j["suites"] = std::move(results);
  emit(cfg, dump(j) + "\n", out);
  if (any_violation) return kExitViolation;
  return any_error ? kExitNumerical : kExitPass;
}

}  // namespace contact_decay::cli
