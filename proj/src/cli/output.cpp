#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "contact_decay/cli.hpp"
#include "internal.hpp"

namespace contact_decay::cli {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json null_or(double v, bool present) { return present ? json(v) : json(nullptr); }

json config_json(const RunConfig& cfg) {
  json j;
  j["subcommand"] = cfg.subcommand;
  j["model"] = std::string(to_string(cfg.model));
  if (cfg.subcommand != "theorem22") j["d"] = cfg.d;
  j["lambda"] = cfg.lambda;
  j["seed"] = cfg.seed;
  if (cfg.subcommand == "survive" || cfg.subcommand == "theorem22") {
    j["reps"] = cfg.subcommand == "survive" ? cfg.reps : cfg.mc_reps;
    j["t_grid"] = cfg.t_grid;
  }
  if (cfg.subcommand != "survive") {
    j["tol"] = cfg.tol;
    j["r_tol"] = cfg.r_tol;
    j["mc_half_width"] = cfg.mc_half_width;
  }
  if (cfg.subcommand == "theorem22") j["d_list"] = cfg.d_list;
  if (cfg.subcommand == "verify") {
    j["L"] = cfg.side;
    j["t_max"] = cfg.t_max;
    j["budget"] = cfg.budget;
    j["suites"] = cfg.suites;
    j["force_fail"] = cfg.force_fail;
  }
  j["version"] = CONTACT_DECAY_VERSION;
  return j;
}

namespace {

void write(const json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent >= 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = indent >= 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent >= 0 ? "\n" : "";
  const char* sep = indent >= 0 ? ": " : ":";
  switch (j.type()) {
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad + json(k).dump() + sep;
        write(v, indent, depth + 1, out);
      }
      out += nl + close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        write(v, indent, depth + 1, out);
      }
      out += nl + close_pad + "]";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump(const json& j, int indent) {
  std::string out;
  write(j, indent, 0, out);
  return out;
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& fallback) {
  if (cfg.out.empty()) {
    fallback << text;
    return;
  }
  std::ofstream f(cfg.out);
  if (!f) throw std::runtime_error("cannot write " + cfg.out);
  f << text;
}

}  // namespace contact_decay::cli
