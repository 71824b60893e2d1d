#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace inrep {

// Flat key-value config file: one `key = value` per line, `#` comments.
// The schema is closed: unknown keys are hard errors.
class KvConfig {
public:
  static KvConfig parse_file(const std::string& path);
  static KvConfig parse_text(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<std::uint64_t> get_u64s(const std::string& key,
                                      const std::vector<std::uint64_t>& fallback) const;

  // Throws config_error listing any key outside the allowed set.
  void enforce_schema(const std::vector<std::string>& allowed) const;

  const std::map<std::string, std::string>& values() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

}  // namespace inrep
