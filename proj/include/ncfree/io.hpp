#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pipeline.hpp"

namespace ncfree {

using Json = nlohmann::ordered_json;

// ---- polynomial files: [{"indices":[1,2,1],"re":0.5,"im":0.0}, ...], indices 1-based

inline Json indices_json(const Word& w) {
  Json a = Json::array();
  for (std::size_t i = 0; i < w.size(); ++i) a.push_back(letter(w, i) + 1);
  return a;
}

inline Word indices_word(const Json& a, int num_vars) {
  if (!a.is_array()) throw Error(ErrorCode::BadInput, "indices must be an array");
  Word w;
  for (const auto& v : a) {
    if (!v.is_number_integer()) throw Error(ErrorCode::BadInput, "indices must be integers");
    const int j = v.get<int>();
    if (j < 1 || j > num_vars) throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(j));
    w.push_back(to_letter(j - 1));
  }
  return w;
}

inline double number_or(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw Error(ErrorCode::BadInput, std::string(key) + " must be a number");
  return j.at(key).get<double>();
}

inline Json to_json(const NCPoly& p) {
  Json a = Json::array();
  for (const auto& [w, c] : p.terms()) {
    Json t;
    t["indices"] = indices_json(w);
    t["re"] = c.real();
    t["im"] = c.imag();
    a.push_back(t);
  }
  return a;
}

inline NCPoly poly_from_json(const Json& a, int num_vars) {
  if (!a.is_array()) throw Error(ErrorCode::BadInput, "polynomial must be a JSON array of terms");
  NCPoly p(num_vars);
  for (const auto& t : a) {
    if (!t.is_object() || !t.contains("indices")) throw Error(ErrorCode::BadInput, "term needs \"indices\"");
    p.add_term(indices_word(t.at("indices"), num_vars), cplx(number_or(t, "re", 0.0), number_or(t, "im", 0.0)));
  }
  p.prune();
  return p;
}

inline Json to_json(const TensorPoly& s) {
  Json a = Json::array();
  for (const auto& [k, c] : s.terms()) {
    Json t;
    t["left"] = indices_json(k.first);
    t["right"] = indices_json(k.second);
    t["re"] = c.real();
    t["im"] = c.imag();
    a.push_back(t);
  }
  return a;
}

inline TensorPoly tensor_from_json(const Json& a, int num_vars) {
  if (!a.is_array()) throw Error(ErrorCode::BadInput, "tensor must be a JSON array of terms");
  TensorPoly s(num_vars);
  for (const auto& t : a) {
    if (!t.is_object() || !t.contains("left") || !t.contains("right"))
      throw Error(ErrorCode::BadInput, "tensor term needs \"left\" and \"right\"");
    s.add_term(indices_word(t.at("left"), num_vars), indices_word(t.at("right"), num_vars),
               cplx(number_or(t, "re", 0.0), number_or(t, "im", 0.0)));
  }
  s.prune();
  return s;
}

inline Json to_json(const std::vector<NCPoly>& v) {
  Json a = Json::array();
  for (const auto& p : v) a.push_back(to_json(p));
  return a;
}

inline Json to_json(cplx c) {
  Json j;
  j["re"] = c.real();
  j["im"] = c.imag();
  return j;
}

// ---- deterministic writer: fixed key order (insertion), doubles at 17 significant digits

inline void write_double(std::ostream& os, double x) {
  if (!std::isfinite(x)) {
    os << "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  os << s;
}

inline void write_json(std::ostream& os, const Json& j, int indent = 0) {
  const std::string pad(indent + 2, ' '), close(indent, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << Json(it.key()).dump() << ": ";
        write_json(os, it.value(), indent + 2);
      }
      os << "\n" << close << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // short arrays of scalars stay on one line
      bool flat = j.size() <= 16;
      for (const auto& v : j) flat = flat && !v.is_structured();
      if (flat) {
        os << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          write_json(os, j[i], indent);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        write_json(os, j[i], indent + 2);
      }
      os << "\n" << close << "]";
      return;
    }
    case Json::value_t::number_float:
      write_double(os, j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

inline std::string dump_json(const Json& j) {
  std::ostringstream os;
  write_json(os, j);
  os << "\n";
  return os.str();
}

// ---- run configuration

struct RunConfig {
  int num_vars = 1;
  std::vector<double> lambdas;
  int num_trivial = 1;
  double q = 0.0;
  double c = 1.0;
  int level_cap = -1;
  TransportConfig transport;

  ModularContext context() const { return build_context(lambdas, num_trivial); }
  PipelineConfig pipeline() const {
    PipelineConfig p;
    p.q = q;
    p.c = c;
    p.level_cap = level_cap;
    p.transport = transport;
    return p;
  }
};

inline RunConfig config_from_json(const Json& j) {
  static const std::set<std::string> known{"num_vars", "lambdas",     "num_trivial", "q",          "R",
                                           "R_prime",  "rho",         "degree_cap",  "tolerance",  "max_iterations",
                                           "gamma",    "level_cap",   "c",           "sd_degree",  "tensor_cap",
                                           "law_degree"};
  if (!j.is_object()) throw Error(ErrorCode::BadInput, "config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw Error(ErrorCode::BadInput, "unknown config key \"" + it.key() + "\"");

  auto get_int = [&](const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) throw Error(ErrorCode::BadInput, std::string(key) + " must be an integer");
    return j.at(key).get<int>();
  };

  RunConfig c;
  if (j.contains("lambdas")) {
    if (!j.at("lambdas").is_array()) throw Error(ErrorCode::BadInput, "lambdas must be an array");
    for (const auto& v : j.at("lambdas")) {
      if (!v.is_number()) throw Error(ErrorCode::BadInput, "lambdas must be numbers");
      c.lambdas.push_back(v.get<double>());
    }
  }
  const int l2 = 2 * static_cast<int>(c.lambdas.size());
  if (j.contains("num_trivial")) {
    c.num_trivial = get_int("num_trivial", 0);
  } else {
    c.num_trivial = j.contains("num_vars") ? get_int("num_vars", 1) - l2 : (l2 > 0 ? 0 : 1);
  }
  c.num_vars = get_int("num_vars", l2 + c.num_trivial);
  if (c.num_trivial < 0 || c.num_vars != l2 + c.num_trivial)
    throw Error(ErrorCode::BadInput, "num_vars must equal 2 * len(lambdas) + num_trivial");

  c.q = number_or(j, "q", 0.0);
  c.c = number_or(j, "c", 1.0);
  c.level_cap = get_int("level_cap", -1);
  TransportConfig& t = c.transport;
  t.R = number_or(j, "R", t.R);
  t.R_prime = number_or(j, "R_prime", t.R_prime);
  t.rho = number_or(j, "rho", t.rho);
  t.degree_cap = get_int("degree_cap", t.degree_cap);
  t.tolerance = number_or(j, "tolerance", t.tolerance);
  t.max_iterations = get_int("max_iterations", t.max_iterations);
  t.gamma = number_or(j, "gamma", t.gamma);
  t.sd_degree = get_int("sd_degree", t.sd_degree);
  t.tensor_cap = get_int("tensor_cap", t.tensor_cap);
  t.law_degree = get_int("law_degree", t.law_degree);

  if (!(c.q > -1.0 && c.q < 1.0)) throw Error(ErrorCode::BadInput, "q must lie in (-1, 1)");
  if (!(c.c > 0.0)) throw Error(ErrorCode::BadInput, "c must be positive");
  if (!(t.R > 0.0 && t.R_prime > t.R)) throw Error(ErrorCode::BadInput, "need 0 < R < R_prime");
  if (!(t.rho > 0.0)) throw Error(ErrorCode::BadInput, "rho must be positive");
  if (t.degree_cap < 2) throw Error(ErrorCode::BadInput, "degree_cap must be at least 2");
  if (!(t.tolerance > 0.0)) throw Error(ErrorCode::BadInput, "tolerance must be positive");
  if (t.max_iterations < 1) throw Error(ErrorCode::BadInput, "max_iterations must be positive");
  if (!(t.gamma > 0.0 && t.gamma < 1.0 / 3.0)) throw Error(ErrorCode::BadGamma, "gamma must lie in (0, 1/3)");
  if (t.sd_degree < 0) throw Error(ErrorCode::BadInput, "sd_degree must be nonnegative");
  for (double l : c.lambdas)
    if (!(l > 0.0)) throw Error(ErrorCode::NonPositiveLambda, "lambdas must be positive");
  return c;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadInput, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::BadInput, path + ": " + e.what());
  }
}

inline Json to_json(const RunConfig& c) {
  Json j;
  j["num_vars"] = c.num_vars;
  j["lambdas"] = c.lambdas;
  j["num_trivial"] = c.num_trivial;
  j["q"] = c.q;
  j["R"] = c.transport.R;
  j["R_prime"] = c.transport.R_prime;
  j["rho"] = c.transport.rho;
  j["degree_cap"] = c.transport.degree_cap;
  j["tolerance"] = c.transport.tolerance;
  j["max_iterations"] = c.transport.max_iterations;
  j["gamma"] = c.transport.gamma;
  j["level_cap"] = c.level_cap;
  j["c"] = c.c;
  j["sd_degree"] = c.transport.sd_degree;
  j["tensor_cap"] = c.transport.tensor_cap;
  j["law_degree"] = c.transport.law_degree;
  return j;
}

// ---- reports

inline const char* kTaintNote = "exact modulo degree > d_max";

inline Json to_json(const HypothesisReport& h) {
  Json j;
  j["pass"] = h.pass;
  j["norm_W_Rsigma"] = h.norm_W_Rsigma;
  j["norm_W_exact"] = h.norm_W_exact;
  j["bound_W"] = h.bound_W;
  j["sum_delta_pi_norm"] = h.sum_delta_pi_norm;
  j["bound_delta"] = h.bound_delta;
  j["R_ok"] = h.R_ok;
  j["failures"] = h.failures();
  return j;
}

inline Json to_json(const MonotoneCertificate& m) {
  Json j;
  j["bound"] = m.bound;
  j["lambda_min"] = m.lambda_min;
  j["certified"] = m.certified;
  return j;
}

inline Json to_json(const TransportSolution& s) {
  Json j;
  j["converged"] = s.converged;
  j["iterations"] = s.iterations;
  j["delta_history"] = s.delta_history;
  j["contraction_ratios"] = s.contraction_ratios;
  j["ratio_warnings"] = s.ratio_warnings;
  j["fixed_point_residual"] = s.fixed_point_residual;
  j["norm_ghat"] = s.norm_ghat;
  j["ghat_bound_ok"] = s.ghat_bound_ok;
  j["ghat_self_adjoint"] = s.ghat_self_adjoint;
  if (s.sd_computed) j["sd_residual"] = s.sd_residual;
  j["monotone"] = to_json(s.monotone);
  j["truncated"] = s.truncated;
  if (s.truncated) j["note"] = kTaintNote;
  j["ghat"] = to_json(s.ghat);
  j["g"] = to_json(s.g);
  j["f"] = to_json(s.f);
  j["Y"] = to_json(s.Y);
  return j;
}

inline Json to_json(const InversionResult& r) {
  Json j;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["S"] = r.S;
  j["S_prime"] = r.S_prime;
  j["norm_Y_R"] = r.norm_Y;
  j["norm_f_S"] = r.norm_f_S;
  j["C"] = r.C_value;
  j["residual"] = r.residual;
  j["H"] = to_json(r.H);
  return j;
}

inline Json to_json(const StageResult& s) {
  Json j;
  j["ran"] = s.ran;
  j["pass"] = s.pass;
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

inline Json to_json(const PipelineReport& r) {
  Json j;
  j["q"] = r.q;
  j["pass"] = r.pass();
  j["pi_bound"] = r.pi_bound;
  j["R_pi"] = r.R_pi;
  j["norm_W_Rsigma"] = r.norm_W_Rsigma;
  j["hypotheses"] = to_json(r.hypotheses);
  if (r.passing_q >= 0.0) j["passing_q"] = r.passing_q;
  Json xi;
  xi["levels"] = r.levels;
  xi["neumann_terms"] = r.neumann_terms;
  xi["neumann_tail"] = r.neumann_tail;
  xi["inverse_residual"] = r.xi_inverse_residual;
  xi["conjugate_residual"] = r.conjugate_residual;
  xi["conjugate_deviation"] = r.xi_deviation;
  xi["conjugate_deviation_bound"] = r.xi_deviation_bound;
  j["xi"] = xi;
  Json pot;
  pot["symmetry_defect"] = r.potential.symmetry_defect;
  pot["grad_residual"] = r.potential.grad_residual;
  pot["W"] = to_json(r.potential.W);
  j["potential"] = pot;
  j["transport"] = to_json(r.transport);
  j["sd_residual"] = r.transport.sd_residual;
  j["monotone_certified"] = r.transport.monotone_certified;
  j["inverse_residual"] = r.inversion.residual;
  j["inversion"] = to_json(r.inversion);
  Json st;
  st["xi"] = to_json(r.st_xi);
  st["conjugate"] = to_json(r.st_conjugate);
  st["hypotheses"] = to_json(r.st_hypotheses);
  st["contraction"] = to_json(r.st_contraction);
  st["sd"] = to_json(r.st_sd);
  st["monotone"] = to_json(r.st_monotone);
  st["inversion"] = to_json(r.st_inversion);
  j["stages"] = st;
  j["truncated"] = r.truncated;
  if (r.truncated) j["note"] = kTaintNote;
  return j;
}

}  // namespace ncfree
