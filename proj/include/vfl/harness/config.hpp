#pragma once

#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace vfl::harness {

// Flat key = value file. Keys carry dotted sections (protocol.epochs,
// attack.k, sweep.values). '#' starts a comment; blank lines are skipped.
class Config {
 public:
  // Throws ConfigError with the offending line number.
  static Config parse(std::istream& in, const std::string& source = "<config>");
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma separated; empty items are rejected.
  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;

  // Throws ConfigError naming the first key not in allowed.
  void require_known(const std::set<std::string>& allowed) const;

 private:
  std::map<std::string, std::string> values_;
  std::string source_ = "<config>";
};

std::string trim(const std::string& s);

}  // namespace vfl::harness
