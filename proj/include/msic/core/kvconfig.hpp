#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace msic {

/// Flat "key = value" configuration text: one assignment per line,
/// '#' starts a comment, blank lines are ignored. Keys use dotted
/// section prefixes (model.*, train.*, ...). Entries preserve file
/// order; duplicate keys keep the last value but are reported in
/// order so appliers can reject unknowns with a line number.
class KvConfig {
 public:
  struct Entry {
    std::string key;
    std::string value;
    std::size_t line = 0;
  };

  static KvConfig parse_file(const std::string& path);
  static KvConfig parse_string(const std::string& text,
                               const std::string& origin = "<string>");

  const std::vector<Entry>& entries() const { return entries_; }
  const std::string& origin() const { return origin_; }

  void set(const std::string& key, const std::string& value);

  /// Value coercions; throw ConfigError naming the key on bad syntax.
  static double to_double(const Entry& e);
  static int to_int(const Entry& e);
  static std::uint64_t to_uint64(const Entry& e);
  static bool to_bool(const Entry& e);
  static std::vector<int> to_int_list(const Entry& e);  // comma separated

 private:
  std::vector<Entry> entries_;
  std::string origin_;
};

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace msic
