#include "phaseglm/config.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "phaseglm/sweep.hpp"

namespace phaseglm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* want) {
  throw ConfigError("config key '" + key + "': cannot parse '" + value +
                    "' as " + want);
}

}  // namespace

void Config::set_default(const std::string& key, const std::string& value) {
  values_.emplace(key, value);
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
  user_.insert(key);
}

bool Config::has(const std::string& key) const {
  touched_.insert(key);
  return values_.count(key) != 0;
}

std::string Config::get_string(const std::string& key,
                               const std::string& def) const {
  touched_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

double Config::get_double(const std::string& key, double def) const {
  touched_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) bad_value(key, it->second, "a real number");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, it->second, "a real number");
  }
}

int Config::get_int(const std::string& key, int def) const {
  touched_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    std::size_t pos = 0;
    const long v = std::stol(it->second, &pos, 10);
    if (pos != it->second.size() || v < INT_MIN || v > INT_MAX)
      bad_value(key, it->second, "an integer");
    return static_cast<int>(v);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, it->second, "an integer");
  }
}

bool Config::get_bool(const std::string& key, bool def) const {
  touched_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return def;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  bad_value(key, it->second, "a boolean");
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t def) const {
  touched_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(it->second, &pos, 10);
    if (pos != it->second.size()) bad_value(key, it->second, "a 64-bit seed");
    return static_cast<std::uint64_t>(v);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, it->second, "a 64-bit seed");
  }
}

std::string Config::require(const std::string& key) const {
  touched_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError("missing required config key '" + key + "'");
  return it->second;
}

std::vector<double> Config::get_list(const std::string& key) const {
  touched_.insert(key);
  const auto it = values_.find(key);
  std::vector<double> out;
  if (it == values_.end()) return out;
  std::string text = it->second;
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) bad_value(key, tok, "a list of reals");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      bad_value(key, tok, "a list of reals");
    }
  }
  if (out.empty()) bad_value(key, it->second, "a nonempty list of reals");
  return out;
}

std::vector<double> Config::get_grid(const std::string& prefix,
                                     const std::vector<double>& fallback) const {
  if (has(prefix + ".list")) return get_list(prefix + ".list");
  const bool any = has(prefix + ".lo") || has(prefix + ".hi") ||
                   has(prefix + ".step");
  if (!any) return fallback;
  const double lo = get_double(prefix + ".lo", 0.0);
  const double hi = get_double(prefix + ".hi", 0.0);
  const double step = get_double(prefix + ".step", 0.0);
  if (!has(prefix + ".lo") || !has(prefix + ".hi") || !has(prefix + ".step"))
    throw ConfigError("config keys '" + prefix +
                      ".lo/.hi/.step' must be given together");
  try {
    return grid_range(lo, hi, step);
  } catch (const std::exception& e) {
    throw ConfigError("config key '" + prefix + ".step': " + e.what());
  }
}

void load_config_file(Config& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    cfg.set(key, value);
  }
}

void apply_override(Config& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key=value, got '" + assignment +
                      "'");
  cfg.set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

Link link_from_string(const std::string& s) {
  if (s == "logit") return Link::Logit;
  if (s == "probit") return Link::Probit;
  if (s == "cloglog") return Link::Cloglog;
  throw ConfigError("config key 'model.link': unknown link '" + s +
                    "' (want logit, probit, or cloglog)");
}

const char* link_name(Link link) {
  switch (link) {
    case Link::Logit: return "logit";
    case Link::Probit: return "probit";
    case Link::Cloglog: return "cloglog";
  }
  return "?";
}

RadialFamily family_from_string(const std::string& s) {
  if (s == "chi") return RadialFamily::ChiDF;
  if (s == "gamma") return RadialFamily::Gamma;
  if (s == "pareto") return RadialFamily::ParetoI;
  if (s == "halfnormal") return RadialFamily::HalfNormal;
  if (s == "lognormal") return RadialFamily::LogNormal;
  throw ConfigError(
      "config key 'radial.family': unknown family '" + s +
      "' (want chi, gamma, pareto, halfnormal, or lognormal)");
}

const char* family_name(RadialFamily family) {
  switch (family) {
    case RadialFamily::ChiDF: return "chi";
    case RadialFamily::Gamma: return "gamma";
    case RadialFamily::ParetoI: return "pareto";
    case RadialFamily::HalfNormal: return "halfnormal";
    case RadialFamily::LogNormal: return "lognormal";
  }
  return "?";
}

}  // namespace phaseglm
