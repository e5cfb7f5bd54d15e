#include "msic/core/kvconfig.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "msic/core/errors.hpp"

namespace msic {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void bad_value(const KvConfig::Entry& e, const char* want) {
  throw ConfigError("config key '" + e.key + "': expected " + want +
                    ", got '" + e.value + "'");
}

}  // namespace

KvConfig KvConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

KvConfig KvConfig::parse_string(const std::string& text,
                                const std::string& origin) {
  KvConfig out;
  out.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string stripped = trim(line);
    if (stripped.empty()) continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    Entry e;
    e.key = trim(stripped.substr(0, eq));
    e.value = trim(stripped.substr(eq + 1));
    e.line = line_no;
    if (e.key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": empty config key");
    }
    out.entries_.push_back(std::move(e));
  }
  return out;
}

void KvConfig::set(const std::string& key, const std::string& value) {
  entries_.push_back(Entry{key, value, 0});
}

double KvConfig::to_double(const Entry& e) {
  const char* s = e.value.c_str();
  char* end = nullptr;
  double v = std::strtod(s, &end);
  if (end == s || *end != '\0') bad_value(e, "a number");
  return v;
}

int KvConfig::to_int(const Entry& e) {
  const char* s = e.value.c_str();
  char* end = nullptr;
  long v = std::strtol(s, &end, 10);
  if (end == s || *end != '\0') bad_value(e, "an integer");
  return static_cast<int>(v);
}

std::uint64_t KvConfig::to_uint64(const Entry& e) {
  const char* s = e.value.c_str();
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (end == s || *end != '\0' || e.value.front() == '-') {
    bad_value(e, "a non-negative integer");
  }
  return static_cast<std::uint64_t>(v);
}

bool KvConfig::to_bool(const Entry& e) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  bad_value(e, "true or false");
}

std::vector<int> KvConfig::to_int_list(const Entry& e) {
  std::vector<int> out;
  if (trim(e.value).empty()) return out;
  std::istringstream in(e.value);
  std::string part;
  while (std::getline(in, part, ',')) {
    std::string p = trim(part);
    const char* s = p.c_str();
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0') bad_value(e, "comma-separated integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::string format_double(double v) {
  for (int precision = 1; precision <= 17; ++precision) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    if (std::strtod(s.str().c_str(), nullptr) == v) return s.str();
  }
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace msic
