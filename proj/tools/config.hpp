#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace risd2d::runner {

/// Raised for malformed or unknown configuration entries. `key()` is the
/// dotted key path the error refers to (empty for syntax errors).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message),
        key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Ordered `key = value` entries; later entries override earlier ones.
struct KeyValues {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(std::string key, std::string value);
};

/// Parses flat dotted-key text:
///
///   # comment
///   ris.n_h = 8
///   sweep.values = 10, 20, 30
///
/// Throws ConfigError with the line number on malformed lines.
KeyValues parse_key_values(std::string_view text);

/// Parses a `key=value` command-line override.
std::pair<std::string, std::string> parse_override(std::string_view text);

// Typed value parsing. All throw ConfigError tagged with `key`.
double parse_double(const std::string& key, std::string_view value);
long long parse_int(const std::string& key, std::string_view value);
bool parse_bool(const std::string& key, std::string_view value);
std::vector<double> parse_double_list(const std::string& key, std::string_view value);
std::vector<std::string> parse_string_list(std::string_view value);

std::string trim(std::string_view s);

}  // namespace risd2d::runner
