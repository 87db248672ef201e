#pragma once

// Batch front-end: survive, bounds, theorem22 and verify subcommands.
//
// Exit status: 0 pass, 1 usage error, 2 numerical failure, 3 property
// violation.

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace contact_decay::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitViolation = 3;

// Flat key=value configuration; '#' starts a comment, blank lines are
// skipped, keys may use '_' or '-'. Throws std::runtime_error with the line
// number on malformed input.
std::map<std::string, std::string> parse_config_text(std::string_view text);
std::map<std::string, std::string> read_config_file(const std::string& path);

// Removes --config PATH from args and splices the file's entries in as
// --key=value right after the subcommand, so explicit flags (which come
// later) override them.
std::vector<std::string> expand_config(std::vector<std::string> args);

// %.17g
std::string format_double(double v);

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace contact_decay::cli
