#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace expmix::cli {

// Flat key = value configuration with [section] prefixes; keys are stored
// as "section.key". Values may be numbers, fractions like 8/3, or comma
// separated lists.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_str(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& def) const;

  const std::map<std::string, std::string>& items() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

// Runs one subcommand end to end, writing CSV/JSON artifacts under the
// configured output directory. Exit codes: 0 success, 1 a check or
// assertion failed (details in the JSON), 2 invalid configuration.
int run(const std::string& subcommand, Config cfg);

}  // namespace expmix::cli
