#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "phaseglm/glm.hpp"
#include "phaseglm/radial.hpp"

namespace phaseglm {

// Configuration problems: unreadable file, malformed line, bad value,
// missing required key. The CLI maps these to exit code 2; messages always
// name the offending key or line.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat dotted-key configuration (model.alpha0, sweep.n, radial.family, ...):
// one `key = value` per line, '#' comments, blank lines ignored. Values keep
// their text form; typed access parses on demand. Three layers share the
// store with flag > file > profile/built-in precedence.
class Config {
 public:
  // Lowest-precedence layer: set only if the key is still absent.
  void set_default(const std::string& key, const std::string& value);
  // File/flag layers: unconditional overwrite.
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
  std::string require(const std::string& key) const;

  // Comma/space separated list of reals.
  std::vector<double> get_list(const std::string& key) const;

  // Grid described either by `prefix.list` or by `prefix.lo/.hi/.step`.
  // Returns `fallback` when none of the keys are present.
  std::vector<double> get_grid(const std::string& prefix,
                               const std::vector<double>& fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

  // Keys ever read through the typed getters; unknown-key detection compares
  // against this set after a command finishes assembling its inputs.
  const std::set<std::string>& touched() const { return touched_; }

  // Keys set explicitly by the user (file or flag layer, not defaults); only
  // these are candidates for unknown-key errors.
  const std::set<std::string>& user_keys() const { return user_; }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> user_;
  mutable std::set<std::string> touched_;
};

// Parses `key = value` lines into the file layer of `cfg`.
void load_config_file(Config& cfg, const std::string& path);

// Parses a single command-line `key=value` override.
void apply_override(Config& cfg, const std::string& assignment);

// Enum spellings used in config files and CSV output.
Link link_from_string(const std::string& s);
const char* link_name(Link link);
RadialFamily family_from_string(const std::string& s);
const char* family_name(RadialFamily family);

}  // namespace phaseglm
