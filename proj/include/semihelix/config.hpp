#pragma once

#include <charconv>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "semihelix/construct.hpp"
#include "semihelix/presets.hpp"

namespace semihelix {

/// Parsed and validated run configuration (flat key=value text).
struct RunConfig {
  int n = 0;
  std::string base_name;             // construction mode: base hypersurface preset
  std::vector<double> base_params;
  std::string surface_name;          // direct mode: preset surface itself
  std::vector<double> surface_params;
  double r = 1.0;
  double theta0 = 0.0;
  double epsilon = -1.0;
  Vec d;                             // defaults to the last coordinate axis
  std::vector<int> grid;             // optional; commands pick defaults
  std::string out_dir = ".";
  unsigned long long seed = 0;

  bool has_base() const { return !base_name.empty(); }
  bool has_surface() const { return !surface_name.empty(); }

  AngleWindow window() const { return AngleWindow(theta0, epsilon); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

inline double parse_double(const std::string& text, int line_no, const std::string& key) {
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    std::ostringstream msg;
    msg << "line " << line_no << ": key '" << key << "': cannot parse number '" << text << "'";
    throw ParseError(msg.str());
  }
}

inline std::vector<double> parse_double_list(const std::string& text, int line_no,
                                             const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), line_no, key));
  return out;
}

/// Splits "name(p1,p2)" into a preset name and numeric parameters.
inline void parse_preset_ref(const std::string& text, int line_no, const std::string& key,
                             std::string& name, std::vector<double>& params) {
  const auto open = text.find('(');
  if (open == std::string::npos) {
    name = trim(text);
    params.clear();
    return;
  }
  if (text.back() != ')') {
    std::ostringstream msg;
    msg << "line " << line_no << ": key '" << key << "': expected 'name(params)' in '" << text
        << "'";
    throw ParseError(msg.str());
  }
  name = trim(text.substr(0, open));
  const std::string inner = text.substr(open + 1, text.size() - open - 2);
  params = inner.empty() ? std::vector<double>{} : parse_double_list(inner, line_no, key);
}

}  // namespace detail

/// Parses the flat key=value config format. Unknown keys are rejected with
/// line diagnostics; validation errors name the violated constraint.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, bool> seen;

  std::istringstream stream(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << "line " << line_no << ": expected 'key = value', got '" << line << "'";
      throw ParseError(msg.str());
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      std::ostringstream msg;
      msg << "line " << line_no << ": empty key or value";
      throw ParseError(msg.str());
    }
    if (seen[key]) {
      std::ostringstream msg;
      msg << "line " << line_no << ": duplicate key '" << key << "'";
      throw ParseError(msg.str());
    }
    seen[key] = true;

    if (key == "n") {
      cfg.n = static_cast<int>(detail::parse_double(value, line_no, key));
    } else if (key == "base") {
      detail::parse_preset_ref(value, line_no, key, cfg.base_name, cfg.base_params);
    } else if (key == "surface") {
      detail::parse_preset_ref(value, line_no, key, cfg.surface_name, cfg.surface_params);
    } else if (key == "r") {
      cfg.r = detail::parse_double(value, line_no, key);
    } else if (key == "theta0") {
      cfg.theta0 = detail::parse_double(value, line_no, key);
    } else if (key == "epsilon") {
      cfg.epsilon = detail::parse_double(value, line_no, key);
    } else if (key == "d") {
      const auto values = detail::parse_double_list(value, line_no, key);
      cfg.d = Vec(static_cast<Eigen::Index>(values.size()));
      for (size_t i = 0; i < values.size(); ++i) cfg.d(static_cast<Eigen::Index>(i)) = values[i];
    } else if (key == "grid") {
      for (double v : detail::parse_double_list(value, line_no, key)) {
        cfg.grid.push_back(static_cast<int>(v));
      }
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "seed") {
      cfg.seed = static_cast<unsigned long long>(detail::parse_double(value, line_no, key));
    } else {
      std::ostringstream msg;
      msg << "line " << line_no << ": unknown key '" << key << "'";
      throw ParseError(msg.str());
    }
  }

  // Validation against the domain constraints.
  if (cfg.n < 2) throw ValidationError("config: ambient dimension n must be >= 2");
  if (cfg.has_base() == cfg.has_surface()) {
    throw ValidationError("config: exactly one of 'base' or 'surface' is required");
  }
  if (cfg.epsilon < 0) throw ValidationError("config: epsilon is required and must be >= 0");
  cfg.window();  // throws ValidationError when the window bounds fail
  if (cfg.has_base() && !(cfg.r > 0)) {
    throw ValidationError("config: sweep radius r must be positive");
  }
  if (cfg.d.size() == 0) {
    cfg.d = Vec::Unit(cfg.n, cfg.n - 1);
  } else {
    if (cfg.d.size() != cfg.n) {
      throw ValidationError("config: direction d must have n coordinates");
    }
    const double norm = cfg.d.norm();
    if (std::abs(norm - 1.0) > 1e-6) {
      throw ValidationError("config: direction d must be unit within 1e-6");
    }
    cfg.d /= norm;
  }
  for (int c : cfg.grid) {
    if (c < 2) throw ValidationError("config: grid counts must be >= 2");
  }
  return cfg;
}

/// Instantiates the configured base preset and checks dimensions: a base
/// hypersurface of R^{n-1} has chart dimension n-2.
inline OrientedSurface make_base(const RunConfig& cfg) {
  if (!cfg.has_base()) throw ValidationError("config: this command requires a 'base' preset");
  OrientedSurface base = make_preset(cfg.base_name, cfg.base_params, cfg.n - 2);
  if (base.immersion.ambient_dim != cfg.n - 1) {
    std::ostringstream msg;
    msg << "config: base '" << cfg.base_name << "' lives in R^" << base.immersion.ambient_dim
        << ", expected R^" << cfg.n - 1 << " for n = " << cfg.n;
    throw ValidationError(msg.str());
  }
  return base;
}

/// Instantiates the configured surface preset (direct-surface mode).
inline OrientedSurface make_surface(const RunConfig& cfg) {
  if (!cfg.has_surface()) {
    throw ValidationError("config: this command requires a 'surface' preset");
  }
  OrientedSurface s = make_preset(cfg.surface_name, cfg.surface_params, cfg.n - 1);
  if (s.immersion.ambient_dim != cfg.n) {
    std::ostringstream msg;
    msg << "config: surface '" << cfg.surface_name << "' lives in R^" << s.immersion.ambient_dim
        << ", expected R^" << cfg.n;
    throw ValidationError(msg.str());
  }
  return s;
}

inline SemiHelixSpec make_spec(const RunConfig& cfg) {
  return SemiHelixSpec(make_base(cfg), cfg.r, cfg.window(), Direction(cfg.d, 1e-9));
}

}  // namespace semihelix
