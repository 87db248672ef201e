#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "contact_decay/cli.hpp"
#include "contact_decay/dual.hpp"
#include "contact_decay/errors.hpp"
#include "contact_decay/estimate.hpp"
#include "contact_decay/spectral.hpp"
#include "internal.hpp"

namespace contact_decay::cli {

namespace {

json estimate_json(const DecayEstimate& e) {
  json j;
  j["method"] = std::string(to_string(e.method));
  j["rate"] = e.rate;
  j["se"] = e.se;
  j["ci_lo"] = e.ci.lo;
  j["ci_hi"] = e.ci.hi;
  j["t_lo"] = e.window.t_lo;
  j["t_hi"] = e.window.t_hi;
  j["points"] = e.points;
  return j;
}

// Estimator output, or {"error": ...} when the curve cannot support it.
template <class Fn>
json try_estimate(Fn&& fn) {
  try {
    return estimate_json(fn());
  } catch (const NumericalError& e) {
    return json{{"error", e.what()}};
  }
}

std::string header_lines(const RunConfig& cfg) {
  return "# contact-decay " + std::string(CONTACT_DECAY_VERSION) + "\n# config: " +
         dump(config_json(cfg), -1) + "\n";
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    int v = 0;
    const auto* end = item.data() + item.size();
    const auto [ptr, ec] = std::from_chars(item.data(), end, v);
    if (ec != std::errc() || ptr != end) throw std::invalid_argument("bad integer '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

int cmd_survive(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.reps == 0) throw std::invalid_argument("--reps must be >= 1");
  const auto times = parse_time_grid(cfg.t_grid);
  const DualParams params{cfg.d, cfg.lambda, cfg.model, cfg.seed};
  const auto run = run_dual(params, times, cfg.reps, cfg.threads);
  const auto& curve = run.survival;

  json summary;
  summary["config"] = config_json(cfg);
  summary["fekete"] = try_estimate([&] { return fekete_lower(curve); });
  summary["regression"] = try_estimate([&] { return tail_regression(curve); });
  summary["supermultiplicativity_violations"] = supermultiplicativity_violations(curve).size();

  if (cfg.format == Format::csv) {
    std::string text = header_lines(cfg) + "t,n,k,p_hat,ci_lo,ci_hi\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const auto ci = curve.ci(i);
      text += format_double(curve.times()[i]) + "," + std::to_string(curve.replicates()) + "," +
              std::to_string(curve.survivors()[i]) + "," + format_double(curve.p_hat(i)) + "," +
              format_double(ci.lo) + "," + format_double(ci.hi) + "\n";
    }
    emit(cfg, text, out);
    if (!cfg.summary.empty()) {
      std::ofstream f(cfg.summary);
      if (!f) throw std::runtime_error("cannot write " + cfg.summary);
      f << dump(summary) << "\n";
    }
    return kExitPass;
  }

  json rows = json::array();
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto ci = curve.ci(i);
    rows.push_back({{"t", curve.times()[i]},
                    {"n", curve.replicates()},
                    {"k", curve.survivors()[i]},
                    {"p_hat", curve.p_hat(i)},
                    {"ci_lo", ci.lo},
                    {"ci_hi", ci.hi}});
  }
  summary["curve"] = std::move(rows);
  emit(cfg, dump(summary) + "\n", out);
  return kExitPass;
}

int cmd_bounds(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto provider = default_provider(cfg.d, cfg.mc_half_width, cfg.seed, cfg.threads);
  FixedPointOptions opt;
  opt.tol = cfg.tol;
  opt.r_tol = cfg.r_tol;
  const RateBounds b = rate_bounds(cfg.model, cfg.lambda, cfg.d, provider, opt);
  const auto& fp = b.fixed_point;

  json j;
  j["lambda"] = cfg.lambda;
  j["d"] = cfg.d;
  j["model"] = std::string(to_string(cfg.model));
  j["lower"] = null_or(b.lower.value_or(0.0), b.lower.has_value());
  j["upper"] = b.upper;
  j["p_star"] = null_or(fp ? fp->p_star : 0.0, fp.has_value());
  j["mu"] = null_or(fp ? fp->mu : 0.0, fp.has_value());
  j["r_e1"] = null_or(fp ? fp->r_e1 : 0.0, fp.has_value());
  j["r_error"] = null_or(fp ? fp->r_error : 0.0, fp.has_value());
  if (fp) {
    j["bracket"] = {fp->bracket.lo, fp->bracket.hi};
    j["r_method"] = fp->r_method;
  }
  j["warning"] = b.warning.empty() ? json(nullptr) : json(b.warning);
  j["config"] = config_json(cfg);
  if (!b.warning.empty()) err << "warning: " << b.warning << "\n";

  if (cfg.format == Format::csv) {
    std::string text = header_lines(cfg) + "lambda,d,model,lower,upper,p_star,mu,r_e1,r_error\n";
    auto cell = [](const json& v) {
      return v.is_null() ? std::string() : format_double(v.get<double>());
    };
    text += format_double(cfg.lambda) + "," + std::to_string(cfg.d) + "," +
            std::string(to_string(cfg.model)) + "," + cell(j["lower"]) + "," + cell(j["upper"]) +
            "," + cell(j["p_star"]) + "," + cell(j["mu"]) + "," + cell(j["r_e1"]) + "," +
            cell(j["r_error"]) + "\n";
    emit(cfg, text, out);
  } else {
    emit(cfg, dump(j) + "\n", out);
  }
  if (b.lower && *b.lower > b.upper) return kExitViolation;
  return kExitPass;
}

int cmd_theorem22(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.d_list.empty()) throw std::invalid_argument("--d-list must name at least one dimension");
  LimitScanOptions opt;
  opt.mc_half_width = cfg.mc_half_width;
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  opt.fixed_point.tol = cfg.tol;
  opt.fixed_point.r_tol = cfg.r_tol;
  const auto rows = limit_scan(cfg.model, cfg.lambda, cfg.d_list, opt);
  const auto times = cfg.mc_reps > 0 ? parse_time_grid(cfg.t_grid) : std::vector<double>{};

  bool violated = false;
  json table = json::array();
  for (const auto& r : rows) {
    json row;
    row["d"] = r.d;
    row["rate"] = r.rate;
    row["p_star"] = r.p_star;
    row["mu"] = r.mu;
    row["lower"] = r.lower;
    row["upper"] = r.upper;
    row["gap_p"] = r.gap_p;
    row["gap_lower"] = r.gap_lower;
    row["r_e1"] = r.r_e1;
    row["r_error"] = r.r_error;
    row["r_method"] = r.r_method;
    bool ok = r.lower <= r.upper;
    row["i_hat"] = nullptr;
    row["i_se"] = nullptr;
    if (cfg.mc_reps > 0) {
      const DualParams params{r.d, r.rate, cfg.model, derive_seed(cfg.seed, static_cast<std::uint64_t>(r.d))};
      const auto curve = survival_probability(params, times, cfg.mc_reps, cfg.threads);
      const auto est = tail_regression(curve);
      row["i_hat"] = est.rate;
      row["i_se"] = est.se;
      ok = ok && est.rate >= r.lower - 3.0 * est.se && est.rate <= r.upper + 3.0 * est.se;
    }
    row["sandwich_ok"] = ok;
    if (!ok) {
      violated = true;
      err << "sandwich violated at d=" << r.d << "\n";
    }
    table.push_back(std::move(row));
  }

  if (cfg.format == Format::csv) {
    std::string text = header_lines(cfg) + "d,rate,p_star,mu,lower,upper,gap_p,gap_lower,r_e1,"
                                           "r_error,r_method,i_hat,i_se,sandwich_ok\n";
    auto cell = [](const json& v) {
      if (v.is_null()) return std::string();
      if (v.is_number_float()) return format_double(v.get<double>());
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    for (const auto& row : table) {
      std::string line;
      for (const auto& [k, v] : row.items()) line += (line.empty() ? "" : ",") + cell(v);
      text += line + "\n";
    }
    emit(cfg, text, out);
  } else {
    json j;
    j["config"] = config_json(cfg);
    j["limit_p"] = limit_fixed_point(cfg.lambda);
    j["limit_rate"] = 2.0 * cfg.lambda - 1.0;
    j["rows"] = std::move(table);
    j["passed"] = !violated;
    emit(cfg, dump(j) + "\n", out);
  }
  return violated ? kExitViolation : kExitPass;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::string model = "threshold";
  std::string format;
  std::string d_list;
  std::string suites;
  int verify_d = 2;
  double verify_lambda = 0.1;

  CLI::App app{"Decay-rate estimation and bounds for threshold-one contact processes",
               "contact-decay"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CONTACT_DECAY_VERSION);

  auto last = [](CLI::Option* o) { return o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast); };
  auto common = [&](CLI::App* s) {
    last(s->add_option("--model", model, "threshold or classic"))
        ->check(CLI::IsMember({"threshold", "classic"}));
    last(s->add_option("--seed", cfg.seed, "master seed"));
    last(s->add_option("--threads", cfg.threads, "worker threads (0: CONTACT_DECAY_THREADS or all cores)"));
    last(s->add_option("--out", cfg.out, "output path (default stdout)"));
    last(s->add_option("--format", format, "csv or json"))->check(CLI::IsMember({"csv", "json"}));
  };
  auto solver_opts = [&](CLI::App* s) {
    last(s->add_option("--tol", cfg.tol, "fixed-point bracket width"))->check(CLI::PositiveNumber);
    last(s->add_option("--r-tol", cfg.r_tol, "certified error on R"))->check(CLI::PositiveNumber);
    last(s->add_option("--mc-half-width", cfg.mc_half_width, "Monte Carlo R half-width (d >= 4)"))
        ->check(CLI::PositiveNumber);
  };

  auto* survive = app.add_subcommand("survive", "survival curve of the dual from {O}");
  common(survive);
  last(survive->add_option("--d", cfg.d, "dimension"))->check(CLI::PositiveNumber);
  last(survive->add_option("--lambda", cfg.lambda, "infection rate"))->required()->check(CLI::NonNegativeNumber);
  last(survive->add_option("--reps", cfg.reps, "replicates"));
  last(survive->add_option("--t-grid", cfg.t_grid, "sample times start:stop:step"));
  last(survive->add_option("--summary", cfg.summary, "JSON summary path (csv format)"));

  auto* bounds = app.add_subcommand("bounds", "two-sided bounds on the decay rate");
  common(bounds);
  solver_opts(bounds);
  last(bounds->add_option("--d", cfg.d, "dimension"))->check(CLI::PositiveNumber);
  last(bounds->add_option("--lambda", cfg.lambda, "infection rate"))->required()->check(CLI::NonNegativeNumber);

  auto* theorem = app.add_subcommand("theorem22", "scaled bounds at rate lambda/d over a dimension list");
  common(theorem);
  solver_opts(theorem);
  last(theorem->add_option("--lambda", cfg.lambda, "lambda in (0, 1/2)"))->required();
  last(theorem->add_option("--d-list", d_list, "comma-separated dimensions"))->required();
  last(theorem->add_option("--mc-reps", cfg.mc_reps, "dual replicates for the Monte Carlo rate (0: skip)"));
  last(theorem->add_option("--t-grid", cfg.t_grid, "sample times for the Monte Carlo rate"));

  auto* verify = app.add_subcommand("verify", "run the property suites");
  common(verify);
  last(verify->add_option("--suite", suites, "comma-separated suites (default all)"));
  last(verify->add_option("--d", verify_d, "dimension for the coupling suite"))->check(CLI::PositiveNumber);
  last(verify->add_option("--lambda", verify_lambda, "infection rate for the coupling suite"))
      ->check(CLI::NonNegativeNumber);
  last(verify->add_option("--L", cfg.side, "torus side for the coupling suite"));
  last(verify->add_option("--t-max", cfg.t_max, "horizon for the coupling suite"));
  last(verify->add_option("--budget", cfg.budget, "wall-clock budget in seconds; scales replicates"))
      ->check(CLI::PositiveNumber);
  verify->add_flag("--force-fail", cfg.force_fail, "perturb p* so the eigencheck suite fails");

  try {
    const auto args = expand_config(raw_args);
    std::vector<const char*> argv{"contact-decay"};
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    cfg.model = parse_model(model);
    if (survive->parsed()) {
      cfg.subcommand = "survive";
      cfg.format = format == "json" ? Format::json : Format::csv;
      return cmd_survive(cfg, out, err);
    }
    cfg.format = format == "csv" ? Format::csv : Format::json;
    if (bounds->parsed()) {
      cfg.subcommand = "bounds";
      return cmd_bounds(cfg, out, err);
    }
    if (theorem->parsed()) {
      cfg.subcommand = "theorem22";
      cfg.d_list = parse_int_list(d_list);
      return cmd_theorem22(cfg, out, err);
    }
    cfg.subcommand = "verify";
    cfg.d = verify_d;
    cfg.lambda = verify_lambda;
    std::stringstream in(suites);
    for (std::string s; std::getline(in, s, ',');)
      if (!s.empty()) cfg.suites.push_back(s);
    return cmd_verify(cfg, out, err);
  } catch (const PropertyViolation& e) {
    err << "property violation: " << e.what() << "\n";
    return kExitViolation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace contact_decay::cli
