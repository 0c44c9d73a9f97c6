#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tecopt/errors.hpp"
#include "tecopt/params.hpp"

namespace tecopt {

/// Flat sectioned key-value configuration ([section] lines, key = value pairs,
/// '#' comments).
class Config {
 public:
  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str(), path);
  }

  static Config from_string(const std::string& text, const std::string& origin = "<string>") {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      cfg.values_[section + "." + key] = val;
    }
    return cfg;
  }

  bool has(const std::string& section, const std::string& key) const {
    return values_.count(section + "." + key) > 0;
  }

  std::string get_str(const std::string& section, const std::string& key,
                      const std::string& fallback) const {
    auto it = values_.find(section + "." + key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& section, const std::string& key, double fallback) const {
    auto it = values_.find(section + "." + key);
    if (it == values_.end()) return fallback;
    return parse_double(section + "." + key, it->second);
  }

  int get_int(const std::string& section, const std::string& key, int fallback) const {
    const double v = get_double(section, key, fallback);
    return static_cast<int>(v);
  }

  std::vector<double> get_list(const std::string& section, const std::string& key) const {
    auto it = values_.find(section + "." + key);
    std::vector<double> out;
    if (it == values_.end()) return out;
    std::istringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_double(section + "." + key, trim(tok)));
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }
  static double parse_double(const std::string& what, const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config value " + what + " is not a number: '" + s + "'");
    }
  }

  std::map<std::string, std::string> values_;
};

/// Reads SystemParams from the [model] section (every key optional, §-free
/// defaults are the built-in experimental set).
inline SystemParams params_from_config(const Config& cfg) {
  SystemParams p;
  p.lambda_a = cfg.get_double("model", "lambda_a", p.lambda_a);
  p.lambda_p = cfg.get_double("model", "lambda_p", p.lambda_p);
  p.rho_a = cfg.get_double("model", "rho_a", p.rho_a);
  p.rho_p = cfg.get_double("model", "rho_p", p.rho_p);
  p.c_a = cfg.get_double("model", "c_a", p.c_a);
  p.c_p = cfg.get_double("model", "c_p", p.c_p);
  p.alpha = cfg.get_double("model", "alpha", p.alpha);
  p.r1 = cfg.get_double("model", "r1", p.r1);
  p.z0 = cfg.get_double("model", "z0", p.z0);
  p.z1 = cfg.get_double("model", "z1", p.z1);
  p.seebeck = cfg.get_double("model", "seebeck", p.seebeck);
  p.resistance = cfg.get_double("model", "resistance", p.resistance);
  p.u_plus = cfg.get_double("model", "u_plus", p.u_plus);
  p.u_minus = cfg.get_double("model", "u_minus", p.u_minus);
  p.theta_A = cfg.get_double("model", "theta_A", p.theta_A);
  p.theta0 = cfg.get_double("model", "theta0", p.theta0);
  try {
    validate_params(p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid [model] block: ") + e.what());
  }
  return p;
}

/// Formats a double with 12 significant digits (regression-diff friendly).
inline std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

/// CSV emitter: one units-annotation comment line, a header row, then rows of
/// 12-significant-digit values. Tracks the row count for the manifest.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& units_comment,
            const std::vector<std::string>& columns)
      : path_(path), out_(path) {
    if (!out_) throw ConfigError("cannot open output file: " + path);
    out_ << "# " << units_comment << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
  }

  void row(const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i)
      out_ << fmt12(vals[i]) << (i + 1 < vals.size() ? "," : "\n");
    ++rows_;
  }

  const std::string& path() const { return path_; }
  long rows() const { return rows_; }

 private:
  std::string path_;
  std::ofstream out_;
  long rows_ = 0;
};

/// Collects emitted files and writes the run manifest (one "file,rows" line
/// per CSV).
class Manifest {
 public:
  void add(const CsvWriter& w) { entries_.emplace_back(w.path(), w.rows()); }
  void add(const std::string& path, long rows) { entries_.emplace_back(path, rows); }

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open manifest file: " + path);
    out << "# file,rows\n";
    for (const auto& [f, n] : entries_) out << f << "," << n << "\n";
  }

 private:
  std::vector<std::pair<std::string, long>> entries_;
};

/// Control file: CSV rows "t_start,u" (header and comment lines ignored).
/// The horizon closes the last piece.
inline PiecewiseControl read_control_file(const std::string& path, double horizon) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open control file: " + path);
  std::vector<double> starts, vals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    try {
      const double t = std::stod(line.substr(0, comma));
      const double u = std::stod(line.substr(comma + 1));
      starts.push_back(t);
      vals.push_back(u);
    } catch (const std::exception&) {
      continue;  // header row
    }
  }
  if (vals.empty()) throw ConfigError("control file has no rows: " + path);
  PiecewiseControl c;
  c.values = vals;
  c.breakpoints = starts;
  c.breakpoints.push_back(horizon);
  c.validate();
  return c;
}

}  // namespace tecopt
