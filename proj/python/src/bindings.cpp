#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "contact_decay/dual.hpp"
#include "contact_decay/errors.hpp"
#include "contact_decay/estimate.hpp"
#include "contact_decay/killed_walk.hpp"
#include "contact_decay/spectral.hpp"

namespace py = pybind11;
namespace cd = contact_decay;

namespace {

py::dict estimate_dict(const cd::DecayEstimate& e) {
  py::dict d;
  d["method"] = std::string(cd::to_string(e.method));
  d["rate"] = e.rate;
  d["se"] = e.se;
  d["ci"] = py::make_tuple(e.ci.lo, e.ci.hi);
  d["window"] = py::make_tuple(e.window.t_lo, e.window.t_hi);
  d["points"] = e.points;
  return d;
}

py::dict fixed_point_dict(const cd::FixedPointResult& r) {
  py::dict d;
  d["model"] = std::string(cd::to_string(r.model));
  d["lambda"] = r.lambda;
  d["d"] = r.d;
  d["p_star"] = r.p_star;
  d["bracket"] = py::make_tuple(r.bracket.lo, r.bracket.hi);
  d["mu"] = r.mu;
  d["r_e1"] = r.r_e1;
  d["r_error"] = r.r_error;
  d["k_at_root"] = py::make_tuple(r.k_at_root.lo, r.k_at_root.hi);
  d["r_method"] = r.r_method;
  return d;
}

cd::Model model_of(const std::string& name) { return cd::parse_model(name); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Decay-rate bounds and estimators for threshold-one contact processes.";
  py::register_exception<cd::NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<cd::PropertyViolation>(m, "PropertyViolation", PyExc_RuntimeError);

  m.attr("__version__") = CONTACT_DECAY_VERSION;

  m.def(
      "survival_curve",
      [](int d, double lambda, const std::string& model, const std::vector<double>& times,
         std::uint64_t reps, std::uint64_t seed, int threads) {
        cd::SurvivalCurve curve;
        {
          py::gil_scoped_release release;
          curve = cd::survival_probability({d, lambda, model_of(model), seed}, times, reps, threads);
        }
        std::vector<double> p;
        std::vector<std::uint64_t> k(curve.survivors().begin(), curve.survivors().end());
        for (std::size_t i = 0; i < curve.size(); ++i) p.push_back(curve.p_hat(i));
        py::dict out;
        out["t"] = times;
        out["n"] = curve.replicates();
        out["k"] = k;
        out["p_hat"] = p;
        out["fekete"] = estimate_dict(cd::fekete_lower(curve));
        out["regression"] = estimate_dict(cd::tail_regression(curve));
        return out;
      },
      py::arg("d"), py::arg("lam"), py::arg("model") = "threshold", py::arg("times"),
      py::arg("reps"), py::arg("seed") = 1, py::arg("threads") = 0,
      "Dual survival curve from {O} with both decay estimates.");

  m.def(
      "hitting_probability",
      [](int d, double p, double tol) {
        const auto sol = cd::hitting_solve({d, p}, tol);
        const auto e1 = cd::Site::unit(d);
        return py::make_tuple(sol.value(e1), sol.error(e1));
      },
      py::arg("d"), py::arg("p"), py::arg("tol") = 1e-8,
      "R(e1, d, p) and its certified error from the two-sided box solver.");

  m.def(
      "hitting_probability_mc",
      [](int d, double p, std::uint64_t reps, std::uint64_t seed, int threads) {
        cd::HittingEstimate e;
        {
          py::gil_scoped_release release;
          e = cd::hitting_mc({d, p}, cd::Site::unit(d), reps, seed, threads);
        }
        return py::make_tuple(e.value, e.se);
      },
      py::arg("d"), py::arg("p"), py::arg("reps"), py::arg("seed") = 1, py::arg("threads") = 0,
      "Monte Carlo R(e1, d, p) and its standard error.");

  m.def(
      "fixed_point",
      [](double lambda, int d, const std::string& model, double tol) {
        cd::FixedPointOptions opt;
        opt.tol = tol;
        return fixed_point_dict(
            cd::solve_fixed_point(model_of(model), lambda, d, cd::default_provider(d), opt));
      },
      py::arg("lam"), py::arg("d"), py::arg("model") = "threshold", py::arg("tol") = 1e-6);

  m.def(
      "rate_bounds",
      [](double lambda, int d, const std::string& model) {
        const auto b = cd::rate_bounds(model_of(model), lambda, d, cd::default_provider(d));
        py::dict out;
        out["lower"] = b.lower ? py::cast(*b.lower) : py::none();
        out["upper"] = b.upper;
        out["warning"] = b.warning;
        out["fixed_point"] = b.fixed_point ? py::object(fixed_point_dict(*b.fixed_point)) : py::none();
        return out;
      },
      py::arg("lam"), py::arg("d"), py::arg("model") = "threshold");

  m.def(
      "eigencheck",
      [](double lambda, int d, const std::string& model, double p_shift) {
        const auto fp = cd::solve_fixed_point(model_of(model), lambda, d, cd::solver_provider(d));
        const auto r = cd::eigencheck(fp, 1e-9, p_shift);
        py::dict out;
        out["p"] = r.p;
        out["mu"] = r.mu;
        out["origin_residual"] = r.origin_residual;
        out["off_origin_residual"] = r.off_origin_residual;
        out["max_residual"] = r.max_residual;
        out["bound"] = r.bound;
        out["passed"] = r.passed;
        return out;
      },
      py::arg("lam"), py::arg("d"), py::arg("model") = "threshold", py::arg("p_shift") = 0.0);

  m.def(
      "heat_kernel",
      [](double lambda, int d, double t) {
        const auto r = cd::heat_kernel_check(lambda, d, t);
        return py::make_tuple(r.series, r.matrix_exp);
      },
      py::arg("lam"), py::arg("d"), py::arg("t"),
      "Return probability by Bessel series and by a truncated-box ODE.");

  m.def(
      "limit_scan",
      [](double lambda, const std::vector<int>& dims, const std::string& model, std::uint64_t seed) {
        cd::LimitScanOptions opt;
        opt.seed = seed;
        std::vector<cd::LimitRow> rows;
        {
          py::gil_scoped_release release;
          rows = cd::limit_scan(model_of(model), lambda, dims, opt);
        }
        py::list out;
        for (const auto& r : rows) {
          py::dict row;
          row["d"] = r.d;
          row["rate"] = r.rate;
          row["p_star"] = r.p_star;
          row["lower"] = r.lower;
          row["upper"] = r.upper;
          row["gap_p"] = r.gap_p;
          row["gap_lower"] = r.gap_lower;
          row["r_method"] = r.r_method;
          out.append(row);
        }
        return out;
      },
      py::arg("lam"), py::arg("dims"), py::arg("model") = "threshold", py::arg("seed") = 1);
}
