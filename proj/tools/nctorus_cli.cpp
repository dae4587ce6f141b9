// nctorus: verification suite and symbol computations on the command line.
//
// Exit status: 0 all checks pass, 1 some check failed, 2 usage, config,
// parse or precondition error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "nctorus/nctorus.hpp"

using namespace nctorus;
using json = nlohmann::ordered_json;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
};

RunConfig load_config(const Common& c) {
  RunConfig cfg;
  if (!c.config_path.empty()) {
    std::ifstream in(c.config_path);
    if (!in) throw ConfigError("cannot open config file '" + c.config_path + "'");
    cfg = parse_config(in);
  }
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ClassicalSymbol load_symbol(const std::string& path) {
  std::istringstream in(slurp(path));
  try {
    return read_symbol(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

json lattice_json(const Lattice& k) {
  json a = json::array();
  for (int i = 0; i < k.size(); ++i) a.push_back(k[i]);
  return a;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ConfigError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void record(const json& j) { stream() << j.dump() << '\n'; }

 private:
  std::ofstream file_;
};

json symbol_meta(const ClassicalSymbol& s) {
  json j;
  j["order"] = cjson(s.order());
  j["n"] = s.n();
  j["depth"] = s.depth();
  if (s.remainder()) {
    j["remainder_box"] = s.remainder()->box;
    j["remainder_tail_bound"] = remainder_tail_bound(s);
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudodifferential calculus on noncommutative tori"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "run configuration file");
  app.add_option("--seed", common.seed, "random seed (overrides the config)");
  app.add_option("--out", common.out_path, "write records to this file instead of stdout");

  std::string select;
  bool with_runtime = false;
  auto* verify = app.add_subcommand("verify", "run the verification suite");
  verify->add_option("--select", select, "comma-separated check ids or id prefixes");
  verify->add_flag("--runtime", with_runtime, "include per-check runtime in the records");

  std::string sym_path, sym2_path, pivot_path, any_path;
  std::vector<int> levels;
  int depth = -1;

  auto* residue = app.add_subcommand("residue", "noncommutative residue of a symbol");
  residue->add_option("symbol", sym_path)->required();
  auto* trace = app.add_subcommand("trace", "extrapolated lattice trace sum_k tau[rho(k)]");
  trace->add_option("symbol", sym_path)->required();
  trace->add_option("--levels", levels, "box radii for the extrapolation");
  auto* ctrace = app.add_subcommand("canonical-trace", "canonical trace (non-integer order)");
  ctrace->add_option("symbol", sym_path)->required();
  auto* gtrace = app.add_subcommand("gauged-trace", "pole and finite part of the gauged trace at z = 0");
  gtrace->add_option("symbol", sym_path)->required();
  auto* compose = app.add_subcommand("compose", "composition residual of two symbols");
  compose->add_option("left", sym_path)->required();
  compose->add_option("right", sym2_path)->required();
  compose->add_option("--depth", depth, "expansion depth J (default from config)");
  std::string product_out;
  compose->add_option("--product", product_out, "write the truncated product symbol to this file");
  auto* decomp = app.add_subcommand("decompose", "split an operator into base, commutators and residual");
  decomp->add_option("symbol", sym_path)->required();
  decomp->add_option("--pivot", pivot_path, "pivot symbol (default: residue pivot or smoothing witness)");
  decomp->add_option("--depth", depth, "difference depth N (default from config)");
  auto* fmt = app.add_subcommand("fmt", "reprint an element, symbol, operator or config file");
  fmt->add_option("file", any_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = load_config(common);
    Output out(common.out_path);

    if (*verify) {
      const auto reports = run_suite(cfg, select);
      if (reports.empty()) throw ConfigError("selection matches no check", 0, "--select");
      write_reports(out.stream(), reports, with_runtime);
      return all_pass(reports) ? 0 : 1;
    }
    if (*residue) {
      const ClassicalSymbol s = load_symbol(sym_path);
      json j{{"command", "residue"}, {"input", sym_path}, {"value", cjson(nc_residue(s))}};
      j["symbol"] = symbol_meta(s);
      out.record(j);
      return 0;
    }
    if (*trace) {
      const ClassicalSymbol s = load_symbol(sym_path);
      const TraceEstimate t = lattice_trace(s, levels);
      json j{{"command", "trace"}, {"input", sym_path}, {"value", cjson(t.value)}, {"error_estimate", t.error}};
      j["levels"] = t.levels;
      j["symbol"] = symbol_meta(s);
      out.record(j);
      return 0;
    }
    if (*ctrace) {
      const ClassicalSymbol s = load_symbol(sym_path);
      json j{{"command", "canonical-trace"}, {"input", sym_path}, {"value", cjson(canonical_trace(s))}};
      j["symbol"] = symbol_meta(s);
      out.record(j);
      return 0;
    }
    if (*gtrace) {
      const ClassicalSymbol s = load_symbol(sym_path);
      const MeromorphicValue m = gauged_trace(s);
      json j{{"command", "gauged-trace"}, {"input", sym_path}, {"pole", cjson(m.pole)}, {"finite", cjson(m.finite)}};
      j["symbol"] = symbol_meta(s);
      out.record(j);
      return 0;
    }
    if (*compose) {
      const ClassicalSymbol a = load_symbol(sym_path);
      ClassicalSymbol b = load_symbol(sym2_path);
      if (!same_theta(a.theta(), b.theta())) throw DimensionMismatch("symbols use different theta");
      const int J = depth >= 0 ? depth : cfg.compose;
      json rows = json::array();
      std::vector<double> x, y;
      double worst = 0;
      for (double r : {8.0, 16.0, 32.0, 64.0}) {
        const Lattice k = probe_point(a.n(), r);
        const double res = compose_check(a, b, J, k);
        worst = std::max(worst, res);
        rows.push_back({{"k", lattice_json(k)}, {"residual", res}});
        x.push_back(k.norm2());
        y.push_back(res);
      }
      json j{{"command", "compose"}, {"left", sym_path}, {"right", sym2_path}, {"J", J}};
      j["residuals"] = rows;
      j["max_residual"] = worst;
      if (worst > 0) {
        j["slope"] = loglog_slope(x, y);
        j["expected_slope"] = (a.order() + b.order()).real() - J - 1;
      }
      if (!product_out.empty()) {
        std::ofstream f(product_out);
        if (!f) throw ConfigError("cannot open '" + product_out + "'");
        write_symbol(f, sharp(a, b, J));
        j["product"] = product_out;
      }
      out.record(j);
      return 0;
    }
    if (*decomp) {
      const ClassicalSymbol s = load_symbol(sym_path);
      DecomposeOptions opt;
      opt.depth = depth >= 1 ? depth : cfg.decompose;
      ClassicalSymbol pivot(s.theta(), 0.0);
      if (!pivot_path.empty()) {
        pivot = load_symbol(pivot_path);
      } else if (is_integer(s.order())) {
        pivot = default_residue_pivot(s.theta());
      } else {
        BumpParams p;
        p.chi_box = cfg.chi_box;
        p.rho_box = cfg.rho_box;
        p.axis_order = cfg.axis_order;
        p.radial_order = cfg.radial_order;
        p.angular = cfg.angular;
        pivot = build_smoothing_witness(s.theta(), p).r0_symbol();
      }
      const CommutatorDecomposition d = decompose(s, pivot, opt);
      const ThetaPtr& th = s.theta();
      const int n = s.n();
      out.record({{"part", "base"},
                  {"operator", "P0"},
                  {"coefficient", cjson(d.base->first)},
                  {"pivot", pivot_path.empty() ? (is_integer(s.order()) ? "residue_pivot" : "smoothing_witness")
                                               : pivot_path}});
      for (auto& u : d.u_parts) {
        const ClassicalSymbol uj = monomial_symbol(TorusElement::generator(th, u.axis), Lattice(n), 0.0);
        out.record({{"part", "unitary_commutator"},
                    {"operator", "[P_" + std::to_string(u.axis + 1) + ", U_" + std::to_string(u.axis + 1) + "]"},
                    {"axis", u.axis},
                    {"order", cjson(u.symbol.order())},
                    {"residue", std::abs(commutator_residue(u.symbol, uj))}});
      }
      for (auto& p : d.delta_parts) {
        const ClassicalSymbol xj = monomial_symbol(TorusElement::scalar(th, 1.0), Lattice::unit(n, p.axis), 0.0);
        out.record({{"part", "derivation_commutator"},
                    {"operator", "[delta_" + std::to_string(p.axis + 1) + ", Q_" + std::to_string(p.axis + 1) + "]"},
                    {"axis", p.axis},
                    {"order", cjson(p.symbol.order())},
                    {"residue", std::abs(commutator_residue(xj, p.symbol))}});
      }
      const DecayFit fit = residual_decay(d.residual, {4, 8, 16, 32});
      json r{{"part", "residual"}, {"operator", "R"}, {"depth", opt.depth}};
      r["norms"] = fit.norms;
      if (fit.exact)
        r["decay_exponent"] = "exact";
      else
        r["decay_exponent"] = fit.exponent;
      out.record(r);
      return 0;
    }
    if (*fmt) {
      const std::string text = slurp(any_path);
      std::istringstream in(text);
      std::istringstream probe(text);
      std::string kind = detail::kind_of(probe);
      if (kind.front() == '[') kind = "config";
      if (kind == "element")
        write_element(out.stream(), read_element(in));
      else if (kind == "symbol")
        write_symbol(out.stream(), read_symbol(in));
      else if (kind == "psido")
        write_psido(out.stream(), read_psido(in));
      else if (kind == "config")
        write_config(out.stream(), parse_config(in));
      else
        throw ParseError("unknown file kind '" + kind + "'", 1);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "nctorus: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
