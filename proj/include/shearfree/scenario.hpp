#pragma once

// Scenario files: line-oriented `key = value` with `[section]` headers and
// `#` comments. Each scenario names a pipeline (`kind`) whose knobs are read,
// echoed into summary.json and checked for unknown keys before anything runs.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "shearfree/error.hpp"

namespace shearfree::scenario {

enum class Kind { BurgersFlat, BurgersForced, Caustic, DualOde, CircleExample, Congruence };

std::string_view to_string(Kind k);
std::optional<Kind> kind_from_string(std::string_view s);

/// 1-based line and column of a key or value in the scenario text.
struct Location {
  std::size_t line = 0;
  std::size_t column = 0;
};

class ScenarioError : public Error {
 public:
  ScenarioError(Location where, const std::string& what);
  Location where() const noexcept { return where_; }

 private:
  Location where_;
};

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  Location key_at;
  Location value_at;
};

struct Document {
  std::vector<Entry> entries;
};

/// Syntax only; throws ScenarioError.
Document parse_document(std::string_view text);

enum ExitCode : int {
  kPass = 0,
  kChecksFailed = 1,
  kParseError = 2,
  kPreconditionViolation = 3,
  kNumericFailure = 4,
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  ///< no files written when empty
  int threads = 0;                               ///< <= 0: runtime default
  /// When set, the scenario kind must be one of these (subcommand routing).
  std::vector<Kind> allowed_kinds;
};

struct Outcome {
  int exit_code = kPass;
  nlohmann::json summary;
  std::string message;
};

Outcome run_text(std::string_view text, const std::string& origin, const RunOptions& opts);
Outcome run_file(const std::filesystem::path& path, const RunOptions& opts);

}  // namespace shearfree::scenario
