#pragma once

// Run configuration in a sectioned key = value format:
//
//   [algebra]
//   n = 2
//   theta = 0 0.618 -0.618 0      # row-major
//   [depths]
//   compose = 2
//   ...
//
// Unknown sections or keys, malformed values and failed validation raise
// ConfigError with the line number and the section.key name.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "nctorus/error.hpp"
#include "nctorus/io.hpp"
#include "nctorus/theta.hpp"

namespace nctorus {

struct RunConfig {
  // [algebra]
  int n = 2;
  std::vector<double> theta = {0.0, 0.6180339887498949, -0.6180339887498949, 0.0};

  // [truncation]
  int operator_box = 10;      // |k|_inf for exact operator identities
  int element_terms = 20;     // terms per random element
  int element_box = 4;        // support box of random coefficients
  int telescope_box = 20;     // witness telescoping check
  int presentation_box = 8;   // witness commutator presentation check
  int symbolize_box = 24;     // lattice remainder box for commutator traces

  // [depths]
  int compose = 2;            // J in the composition check
  int difference = 4;         // L in the difference series check
  int decompose = 6;          // N for derivative-to-difference

  // [quadrature]
  int axis_order = 200;
  int radial_order = 200;
  int angular = 512;
  int chi_box = 60;
  int rho_box = 24;
  int sphere_angular = 256;   // nodes per angular axis for sphere moments

  // [tolerances]
  double tol_algebra = 1e-13;
  double tol_identity = 1e-13;
  double tol_tau_split = 1e-13;
  double tol_slope = 0.3;
  double tol_trace = 1e-3;
  double tol_pole = 1e-10;
  double tol_res_commutator = 1e-8;
  double tol_tr_commutator = 1e-6;
  double tol_normalization = 1e-8;
  double tol_telescoping = 1e-6;
  double tol_presentation = 1e-6;
  double tol_base = 1e-8;
  double tol_sphere = 1e-10;
  double tol_series = 1e-8;

  // [run]
  std::uint64_t seed = 20240601;
  int random_elements = 100;
  int random_symbols = 20;
  int symbol_pairs = 5;

  ThetaPtr make_theta_ptr() const { return make_theta(ThetaMatrix(n, theta)); }
  bool operator==(const RunConfig&) const = default;
};

namespace detail {

using FieldRef = std::variant<int*, double*, std::uint64_t*>;

struct FieldEntry {
  const char* section;
  const char* key;
  FieldRef ref;
};

inline std::vector<FieldEntry> config_fields(RunConfig& c) {
  return {
      {"algebra", "n", &c.n},
      {"truncation", "operator_box", &c.operator_box},
      {"truncation", "element_terms", &c.element_terms},
      {"truncation", "element_box", &c.element_box},
      {"truncation", "telescope_box", &c.telescope_box},
      {"truncation", "presentation_box", &c.presentation_box},
      {"truncation", "symbolize_box", &c.symbolize_box},
      {"depths", "compose", &c.compose},
      {"depths", "difference", &c.difference},
      {"depths", "decompose", &c.decompose},
      {"quadrature", "axis_order", &c.axis_order},
      {"quadrature", "radial_order", &c.radial_order},
      {"quadrature", "angular", &c.angular},
      {"quadrature", "chi_box", &c.chi_box},
      {"quadrature", "rho_box", &c.rho_box},
      {"quadrature", "sphere_angular", &c.sphere_angular},
      {"tolerances", "algebra", &c.tol_algebra},
      {"tolerances", "identity", &c.tol_identity},
      {"tolerances", "tau_split", &c.tol_tau_split},
      {"tolerances", "slope", &c.tol_slope},
      {"tolerances", "trace", &c.tol_trace},
      {"tolerances", "pole", &c.tol_pole},
      {"tolerances", "res_commutator", &c.tol_res_commutator},
      {"tolerances", "tr_commutator", &c.tol_tr_commutator},
      {"tolerances", "normalization", &c.tol_normalization},
      {"tolerances", "telescoping", &c.tol_telescoping},
      {"tolerances", "presentation", &c.tol_presentation},
      {"tolerances", "base", &c.tol_base},
      {"tolerances", "sphere", &c.tol_sphere},
      {"tolerances", "series", &c.tol_series},
      {"run", "seed", &c.seed},
      {"run", "random_elements", &c.random_elements},
      {"run", "random_symbols", &c.random_symbols},
      {"run", "symbol_pairs", &c.symbol_pairs},
  };
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <class T>
T parse_value(const std::string& v, int line, const std::string& field) {
  T out{};
  auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError("bad value '" + v + "'", line, field);
  return out;
}

}  // namespace detail

// Throws ConfigError naming the first invalid field.
inline void validate(const RunConfig& c) {
  if (c.n < 1 || c.n > kMaxDim) throw ConfigError("dimension out of range", 0, "algebra.n");
  if (c.theta.size() != static_cast<size_t>(c.n * c.n)) throw ConfigError("theta needs n*n entries", 0, "algebra.theta");
  try {
    ThetaMatrix(c.n, c.theta);
  } catch (const Error& e) {
    throw ConfigError(e.what(), 0, "algebra.theta");
  }
  RunConfig copy = c;
  for (auto& f : detail::config_fields(copy)) {
    const std::string name = std::string(f.section) + "." + f.key;
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, double>) {
            if (!(*p > 0) || !std::isfinite(*p)) throw ConfigError("tolerance must be positive", 0, name);
          } else if constexpr (std::is_same_v<T, int>) {
            if (*p < 1) throw ConfigError("must be >= 1", 0, name);
          }
        },
        f.ref);
  }
}

inline RunConfig parse_config(std::istream& in) {
  RunConfig c;
  auto fields = detail::config_fields(c);
  std::string section, line;
  int ln = 0;
  std::vector<std::string> seen;
  std::vector<int> seen_line;
  while (std::getline(in, line)) {
    ++ln;
    if (auto p = line.find('#'); p != std::string::npos) line.resize(p);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", ln);
      section = detail::trim(line.substr(1, line.size() - 2));
      bool known = section == "algebra";
      for (auto& f : fields) known = known || section == f.section;
      if (!known) throw ConfigError("unknown section [" + section + "]", ln);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", ln);
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError("key outside any section", ln, key);
    const std::string name = section + "." + key;
    for (auto& s : seen)
      if (s == name) throw ConfigError("duplicate key", ln, name);
    seen.push_back(name);
    seen_line.push_back(ln);
    if (val.empty()) throw ConfigError("missing value", ln, name);
    if (name == "algebra.theta") {
      std::istringstream ss(val);
      c.theta.clear();
      for (std::string t; ss >> t;) c.theta.push_back(detail::parse_value<double>(t, ln, name));
      continue;
    }
    bool found = false;
    for (auto& f : fields) {
      if (section != f.section || key != f.key) continue;
      found = true;
      std::visit([&](auto* p) { *p = detail::parse_value<std::remove_pointer_t<decltype(p)>>(val, ln, name); }, f.ref);
    }
    if (!found) throw ConfigError("unknown key", ln, name);
  }
  // A config that changes n without giving theta gets the zero matrix.
  if (c.theta.size() != static_cast<size_t>(c.n * c.n) && c.n >= 1 && c.n <= kMaxDim) {
    bool theta_given = false;
    for (auto& s : seen) theta_given = theta_given || s == "algebra.theta";
    if (!theta_given) c.theta.assign(static_cast<size_t>(c.n * c.n), 0.0);
  }
  try {
    validate(c);
  } catch (const ConfigError& e) {
    for (size_t i = 0; i < seen.size(); ++i)
      if (seen[i] == e.field() && e.line() == 0) {
        const std::string msg = e.what();
        throw ConfigError(msg.substr(e.field().size() + 2), seen_line[i], e.field());
      }
    throw;
  }
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline void write_config(std::ostream& out, const RunConfig& c) {
  RunConfig copy = c;
  const auto fields = detail::config_fields(copy);
  std::string section;
  for (auto& f : fields) {
    if (section != f.section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = ";
    std::visit(
        [&](auto* p) {
          if constexpr (std::is_same_v<std::remove_pointer_t<decltype(p)>, double>)
            out << fmt_double(*p);
          else
            out << *p;
        },
        f.ref);
    out << '\n';
    if (std::string(f.key) == "n" && section == "algebra") {
      out << "theta =";
      for (double v : c.theta) out << ' ' << fmt_double(v);
      out << '\n';
    }
  }
}

inline std::string config_text(const RunConfig& c) {
  std::ostringstream o;
  write_config(o, c);
  return o.str();
}

}  // namespace nctorus
