#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rcbf::kv {

/// Sectioned key-value text:
///
///   # comment
///   [section]
///   key = value
///
/// Keys outside any section belong to section "". Later duplicates are an
/// error.
class Document {
 public:
  static Document parse(std::string_view text);

  bool has(const std::string& section, const std::string& key) const;
  const std::string& get(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key, std::string value);
  bool erase(const std::string& section, const std::string& key);

  /// Applies "section.key=value".
  void apply_override(std::string_view assignment);

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

  std::string serialize() const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

double parse_double(std::string_view text);
long long parse_int(std::string_view text);
bool parse_bool(std::string_view text);
/// Comma-separated list of doubles.
std::vector<double> parse_double_list(std::string_view text);
std::string format_double_list(const std::vector<double>& values);

std::string_view trim(std::string_view s);

}  // namespace rcbf::kv
