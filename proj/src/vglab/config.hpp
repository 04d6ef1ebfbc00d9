#pragma once
#include <map>
#include <set>
#include <string>
#include <vector>

namespace vglab {

// Flat key=value configuration: one pair per line, '#' starts a comment,
// whitespace around keys and values is trimmed. Every key must be consumed
// by a typed getter; reject_unknown() turns leftovers (typos, stale keys)
// into a config error. Overrides applied after parsing win over file values.
class Config {
 public:
  Config() = default;
  static Config from_file(const std::string& path);   // io/config errors
  static Config from_string(const std::string& text); // config errors

  void set(const std::string& key, const std::string& value);
  void apply_override(const std::string& keyval);  // "key=value"

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key);
  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key);
  double get_double(const std::string& key, double fallback);
  long long get_int(const std::string& key);
  long long get_int(const std::string& key, long long fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<double> get_double_list(const std::string& key);
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback);
  std::vector<long long> get_int_list(const std::string& key,
                                      const std::vector<long long>& fallback);

  // Throws config_error naming every key no getter consumed.
  void reject_unknown() const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::string fetch(const std::string& key);  // marks consumed
  std::map<std::string, std::string> kv_;
  std::set<std::string> consumed_;
};

}  // namespace vglab
