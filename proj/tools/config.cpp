#include "config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace risd2d::runner {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

void KeyValues::set(std::string key, std::string value) {
  entries.emplace_back(std::move(key), std::move(value));
}

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError({}, "line " + std::to_string(line_no) +
                                ": expected 'key = value', got '" + body + "'");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) {
      throw ConfigError({}, "line " + std::to_string(line_no) + ": empty key");
    }
    kv.set(std::move(key), std::move(value));
  }
  return kv;
}

std::pair<std::string, std::string> parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError({}, "override '" + std::string(text) + "' is not key=value");
  }
  std::string key = trim(text.substr(0, eq));
  if (key.empty()) throw ConfigError({}, "override has an empty key");
  return {std::move(key), trim(text.substr(eq + 1))};
}

double parse_double(const std::string& key, std::string_view value) {
  const std::string v = trim(value);
  if (v == "inf" || v == "+inf" || v == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  if (v == "-inf") return -std::numeric_limits<double>::infinity();
  errno = 0;
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || std::isnan(out)) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
  return out;
}

long long parse_int(const std::string& key, std::string_view value) {
  const std::string v = trim(value);
  errno = 0;
  char* end = nullptr;
  const long long out = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, std::string_view value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key, "expected a boolean, got '" + v + "'");
}

std::vector<std::string> parse_string_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto piece =
        value.substr(start, comma == std::string_view::npos ? value.npos : comma - start);
    std::string t = trim(piece);
    if (!t.empty()) out.push_back(std::move(t));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& key, std::string_view value) {
  std::vector<double> out;
  for (const auto& piece : parse_string_list(value)) out.push_back(parse_double(key, piece));
  return out;
}

}  // namespace risd2d::runner
