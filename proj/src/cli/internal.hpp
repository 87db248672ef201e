#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "contact_decay/engine.hpp"

namespace contact_decay::cli {

using json = nlohmann::ordered_json;

enum class Format { csv, json };

// Everything a run depends on; serialized into every output header.
struct RunConfig {
  std::string subcommand;
  Model model = Model::threshold;
  int d = 1;
  double lambda = 0.0;
  int side = 8;
  double t_max = 5.0;
  std::uint64_t seed = 1;
  std::uint64_t reps = 10'000;
  std::string t_grid = "0:10:0.5";
  std::string out;      // empty: stdout
  std::string summary;  // survive: JSON summary path (csv format)
  Format format = Format::json;
  int threads = 0;
  double tol = 1e-6;
  double r_tol = 1e-6;
  double mc_half_width = 2e-4;
  std::vector<int> d_list;
  std::uint64_t mc_reps = 0;
  double budget = 60.0;
  std::vector<std::string> suites;
  bool force_fail = false;
};

json config_json(const RunConfig& cfg);

// JSON text with every double printed by format_double.
std::string dump(const json& j, int indent = 2);

// Writes to cfg.out, or `fallback` when cfg.out is empty.
void emit(const RunConfig& cfg, const std::string& text, std::ostream& fallback);

json null_or(double v, bool present);

int cmd_survive(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_bounds(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_theorem22(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace contact_decay::cli
