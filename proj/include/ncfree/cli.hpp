#pragma once

#include <charconv>
#include <cmath>
#include <functional>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "io.hpp"

namespace ncfree::cli {

enum Exit { kOk = 0, kUsage = 1, kHypothesis = 2, kNumerical = 3 };

inline int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::HypothesisViolation:
      return kHypothesis;
    case ErrorCode::BadInput:
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::NonPositiveLambda:
    case ErrorCode::EmptyContext:
    case ErrorCode::VarCountMismatch:
    case ErrorCode::DimMismatch:
    case ErrorCode::BadGamma:
    case ErrorCode::LevelTooLarge:
      return kUsage;
    default:
      return kNumerical;
  }
}

// Shortest text that reads back to the same double.
inline std::string shortest(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string format_value(cplx v) {
  if (v.imag() == 0.0 || std::abs(v.imag()) <= 1e-15 * std::max(1.0, std::abs(v.real()))) return shortest(v.real());
  return shortest(v.real()) + (v.imag() < 0 ? "-" : "+") + shortest(std::abs(v.imag())) + "i";
}

inline Word parse_word(const std::string& s, int num_vars) {
  Word w;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    int j = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), j);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw Error(ErrorCode::BadInput, "bad index \"" + tok + "\" in --word");
    if (j < 1 || j > num_vars) throw Error(ErrorCode::IndexOutOfRange, "--word index " + tok);
    w.push_back(to_letter(j - 1));
  }
  return w;
}

struct Options {
  std::string config, report, word, potential;
  int degree = -1;
  int threads = 1;
  bool quiet = false;
};

class Runner {
 public:
  Runner(Options opt, std::ostream& out, std::ostream& err) : o_(std::move(opt)), out_(out), err_(err) {}

  RunConfig config() const {
    if (o_.config.empty()) return config_from_json(Json::object());
    return config_from_json(read_json_file(o_.config));
  }

  void emit(const Json& report) const {
    const std::string text = dump_json(report);
    if (o_.report.empty()) {
      out_ << text;
      return;
    }
    std::ofstream f(o_.report);
    if (!f) throw Error(ErrorCode::BadInput, "cannot write " + o_.report);
    f << text;
  }

  void note(const std::string& s) const {
    if (!o_.quiet) err_ << s << "\n";
  }

  NCPoly potential(const ModularContext& ctx, bool allow_v0) const {
    if (o_.potential.empty()) throw Error(ErrorCode::BadInput, "--potential is required");
    if (o_.potential == "v0") {
      if (!allow_v0) throw Error(ErrorCode::BadInput, "--potential v0 is not a perturbation here; give a file");
      return quadratic_potential(ctx);
    }
    return poly_from_json(read_json_file(o_.potential), ctx.num_vars);
  }

  int moments() const {
    const RunConfig c = config();
    const ModularContext ctx = c.context();
    const MomentOracle o(ctx, c.q);
    if (!o_.word.empty()) {
      out_ << format_value(o.moment(parse_word(o_.word, ctx.num_vars))) << "\n";
      return kOk;
    }
    if (o_.degree < 0) throw Error(ErrorCode::BadInput, "moments needs --word or --degree");
    Json rep;
    rep["q"] = c.q;
    rep["num_vars"] = ctx.num_vars;
    Json arr = Json::array();
    for (const auto& w : words_up_to(ctx.num_vars, o_.degree)) {
      Json t;
      t["indices"] = indices_json(w);
      const cplx v = o.moment(w);
      t["re"] = v.real();
      t["im"] = v.imag();
      arr.push_back(t);
    }
    rep["moments"] = arr;
    emit(rep);
    return kOk;
  }

  int verify_sd() const {
    const RunConfig c = config();
    const ModularContext ctx = c.context();
    const MomentOracle o(ctx, c.q);
    const NCPoly v = potential(ctx, true);
    const int d = o_.degree >= 0 ? o_.degree : c.transport.sd_degree;
    const double res = sd_residual(oracle_law(o), ctx, v, d);
    Json rep;
    rep["q"] = c.q;
    rep["degree"] = d;
    rep["residual"] = res;
    rep["pass"] = res < c.transport.tolerance;
    emit(rep);
    note("sd residual " + shortest(res));
    return res < c.transport.tolerance ? kOk : kNumerical;
  }

  TransportSolution transport(const RunConfig& c, const ModularContext& ctx) const {
    const NCPoly w = potential(ctx, false);
    TransportConfig tc = c.transport;
    if (o_.degree >= 0) tc.sd_degree = o_.degree;
    return solve_transport(ctx, MomentOracle(ctx, 0.0), w, tc);
  }

  int solve() const {
    const RunConfig c = config();
    const ModularContext ctx = c.context();
    const TransportSolution s = transport(c, ctx);
    Json rep;
    rep["config"] = to_json(c);
    rep["hypotheses"] = to_json(s.hypotheses);
    rep["transport"] = to_json(s);
    emit(rep);
    note("converged in " + std::to_string(s.iterations) + " iterations, sd residual " + shortest(s.sd_residual));
    return kOk;
  }

  int invert() const {
    const RunConfig c = config();
    const ModularContext ctx = c.context();
    std::vector<NCPoly> y;
    Json rep;
    rep["config"] = to_json(c);
    const Json src = o_.potential.empty() || o_.potential == "v0" ? Json() : read_json_file(o_.potential);
    if (src.is_array() && !src.empty() && src[0].is_array()) {
      // a tuple Y = (Y_1, ..., Y_N) given directly
      if (static_cast<int>(src.size()) != ctx.num_vars) throw Error(ErrorCode::DimMismatch, "need one Y_j per variable");
      for (const auto& p : src) y.push_back(poly_from_json(p, ctx.num_vars));
    } else {
      const TransportSolution s = transport(c, ctx);
      rep["transport"] = to_json(s);
      y = s.Y;
    }
    const InversionResult r = invert_series(y, c.transport);
    rep["inversion"] = to_json(r);
    emit(rep);
    note("inversion residual " + shortest(r.residual));
    return r.residual < 1e-8 ? kOk : kNumerical;
  }

  int q_isomorphism() const {
    const RunConfig c = config();
    const ModularContext ctx = c.context();
    const PipelineReport r = q_isomorphism_pipeline(ctx, c.pipeline());
    Json rep;
    rep["config"] = to_json(c);
    const Json body = to_json(r);
    for (const auto& [k, v] : body.items()) rep[k] = v;
    emit(rep);
    if (r.pass()) return kOk;
    note(r.st_hypotheses.pass ? "pipeline failed" : "hypotheses failed: " + r.st_hypotheses.error);
    return r.st_hypotheses.ran && !r.st_hypotheses.pass ? kHypothesis : kNumerical;
  }

  int selftest() const;

 private:
  Options o_;
  std::ostream& out_;
  std::ostream& err_;
};

// Quick headless checks; the full property suite lives in the test binaries.
inline int Runner::selftest() const {
  struct Check {
    std::string name;
    std::function<double()> err;
    double tol;
  };
  const ModularContext one = build_context({}, 1), two = build_context({2.0}, 0);
  std::vector<Check> checks{
      {"catalan moments", [&] {
         const MomentOracle o(one, 0.0);
         const double cat[] = {1, 1, 2, 5, 14, 42};
         double e = 0.0;
         for (int n = 0; n <= 5; ++n) e = std::max(e, std::abs(o.moment(Word(2 * n, to_letter(0))) - cat[n]));
         return e;
       }, 1e-12},
      {"q four-point", [&] {
         double e = 0.0;
         for (double q : {-0.3, 0.3}) e = std::max(e, std::abs(MomentOracle(one, q).moment(Word(4, 0)) - (2.0 + q)));
         return e;
       }, 1e-12},
      {"free Gibbs state of V0", [&] {
         return sd_residual(oracle_law(MomentOracle(two, 0.0)), two, quadratic_potential(two), 4);
       }, 1e-9},
      {"conjugate variables q=0.01", [&] {
         XiData x = build_xi(one, 0.01, 6);
         invert_xi(one, x, pi_bound_R(0.01, 1.0), 1e-14, 1.0);
         const MomentOracle oq(one, 0.01);
         return conjugate_check(oq, one, conjugate_vars(one, x, oq, 5), 4);
       }, 1e-6},
      {"transport eps X^4", [&] {
         TransportConfig tc;
         tc.degree_cap = 6;
         const auto s = solve_transport(one, MomentOracle(one, 0.0), 1e-4 * NCPoly::monomial(1, Word(4, 0)), tc);
         return s.sd_residual;
       }, 1e-6},
  };
  bool ok = true;
  for (const auto& c : checks) {
    double e = 0.0;
    std::string extra;
    try {
      e = c.err();
    } catch (const std::exception& ex) {
      e = INFINITY;
      extra = std::string(" (") + ex.what() + ")";
    }
    const bool pass = e < c.tol;
    ok = ok && pass;
    out_ << (pass ? "PASS " : "FAIL ") << c.name << "  err " << shortest(e) << " tol " << shortest(c.tol) << extra
         << "\n";
  }
  return ok ? kOk : kNumerical;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"non-tracial free transport toolkit"};
  app.require_subcommand(1);
  Options opt;
  auto common = [&](CLI::App* s) {
    s->add_option("--config", opt.config, "run configuration (JSON)");
    s->add_option("--report", opt.report, "write the JSON report here instead of stdout");
    s->add_option("--threads", opt.threads, "worker cap")->check(CLI::PositiveNumber);
    s->add_flag("--quiet", opt.quiet, "no progress notes on stderr");
  };
  auto* moments = app.add_subcommand("moments", "moments of the q-quasi-free state");
  common(moments);
  moments->add_option("--word", opt.word, "1-based indices, e.g. 1,2,1,2");
  moments->add_option("--degree", opt.degree, "all words up to this length");
  auto* verify = app.add_subcommand("verify-sd", "Schwinger-Dyson residual of the configured state");
  common(verify);
  verify->add_option("--potential", opt.potential, "v0 or a polynomial file");
  verify->add_option("--degree", opt.degree, "test monomials up to this degree");
  auto* solve = app.add_subcommand("solve-transport", "monotone transport to the free Gibbs state of V0 + W");
  common(solve);
  solve->add_option("--potential", opt.potential, "polynomial file holding W")->required();
  solve->add_option("--degree", opt.degree, "degree of the S-D scan");
  auto* inv = app.add_subcommand("invert", "compositional inverse of the transport map");
  common(inv);
  inv->add_option("--potential", opt.potential, "W file, or a tuple file [Y_1, ..., Y_N]")->required();
  inv->add_option("--degree", opt.degree, "degree of the S-D scan");
  auto* qiso = app.add_subcommand("q-isomorphism", "full q to 0 pipeline");
  common(qiso);
  auto* self = app.add_subcommand("selftest", "quick headless checks");
  common(self);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kUsage;
  }
  set_threads(opt.threads);
  Runner r(opt, out, err);
  try {
    if (*moments) return r.moments();
    if (*verify) return r.verify_sd();
    if (*solve) return r.solve();
    if (*inv) return r.invert();
    if (*qiso) return r.q_isomorphism();
    if (*self) return r.selftest();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace ncfree::cli
