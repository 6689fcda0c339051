#pragma once

#include <functional>
#include <string>
#include <vector>

#include "arakiwoods.hpp"
#include "transport.hpp"

namespace ncfree {

struct PipelineConfig {
  double q = 0.0;
  double c = 1.0;          // R_pi = (1 + c/2) 2/(1 - |q|)
  int level_cap = -1;      // -1: the degree cap
  double neumann_tol = 1e-14;
  double sd_threshold = 1e-5;
  double inverse_threshold = 1e-8;
  bool continue_on_violation = true;  // still run the later stages when the hypotheses fail
  int bisect_steps = 30;              // 0 disables the search for a passing q
  TransportConfig transport;

  int effective_level_cap() const { return level_cap > 0 ? level_cap : transport.degree_cap; }
};

struct StageResult {
  bool ran = false;
  bool pass = false;
  std::string error;
};

struct PipelineReport {
  double q = 0.0;
  double pi_bound = 0.0, R_pi = 0.0;
  int levels = 0, neumann_terms = 0;
  double neumann_tail = 0.0, xi_inverse_residual = 0.0;
  double conjugate_residual = 0.0;
  double xi_deviation = 0.0, xi_deviation_bound = 0.0;
  Potential potential;
  double norm_W_Rsigma = 0.0;
  HypothesisReport hypotheses;
  double passing_q = -1.0;  // largest q found by bisection with passing hypotheses, -1 if not searched
  TransportSolution transport;
  InversionResult inversion;
  StageResult st_xi, st_conjugate, st_hypotheses, st_contraction, st_sd, st_monotone, st_inversion;
  bool truncated = false;

  bool pass() const {
    return st_xi.pass && st_conjugate.pass && st_hypotheses.pass && st_contraction.pass && st_sd.pass &&
           st_monotone.pass && st_inversion.pass;
  }
};

// W for a given q: Xi, its inverse, conjugate variables, potential.
struct PerturbationData {
  XiData xi;
  std::vector<NCPoly> conj;
  Potential potential;
};

inline PerturbationData perturbation(const ModularContext& ctx, double q, const PipelineConfig& cfg) {
  PerturbationData d;
  const int cap = cfg.transport.degree_cap;
  d.xi = build_xi(ctx, q, cfg.effective_level_cap(), 2 * cap);
  invert_xi(ctx, d.xi, pi_bound_R(q, cfg.c), cfg.neumann_tol, cfg.c);
  const MomentOracle oq(ctx, q);
  d.conj = conjugate_vars(ctx, d.xi, oq, cap - 1);
  d.potential = potential_W(ctx, d.conj, cap);
  return d;
}

// Largest q in (0, q_max] whose W passes the hypotheses, assuming the failure set is an interval [q*, q_max].
inline double bisect_passing_q(const ModularContext& ctx, double q_max, const PipelineConfig& cfg) {
  auto passes = [&](double q) {
    try {
      return check_hypotheses(ctx, perturbation(ctx, q, cfg).potential.W, cfg.transport).pass;
    } catch (const Error&) {
      return false;
    }
  };
  const double sgn = q_max < 0 ? -1.0 : 1.0;
  double lo = 0.0, hi = std::abs(q_max);
  for (int k = 0; k < cfg.bisect_steps; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (passes(sgn * mid))
      lo = mid;
    else
      hi = mid;
  }
  return sgn * lo;
}

inline PipelineReport q_isomorphism_pipeline(const ModularContext& ctx, const PipelineConfig& cfg) {
  PipelineReport r;
  r.q = cfg.q;
  const int n = ctx.num_vars;
  const TransportConfig& tc = cfg.transport;

  auto stage = [](StageResult& st, const std::function<bool()>& body) {
    st.ran = true;
    try {
      st.pass = body();
    } catch (const Error& e) {
      st.pass = false;
      st.error = e.what();
    }
    return st.pass;
  };

  PerturbationData pd;
  if (!stage(r.st_xi, [&] {
        pd.xi = build_xi(ctx, cfg.q, cfg.effective_level_cap(), 2 * tc.degree_cap);
        r.levels = static_cast<int>(pd.xi.levels.size()) - 1;
        invert_xi(ctx, pd.xi, pi_bound_R(cfg.q, cfg.c), cfg.neumann_tol, cfg.c);
        r.pi_bound = pd.xi.pi_bound_value;
        r.R_pi = pd.xi.R_pi;
        r.neumann_terms = pd.xi.neumann_terms;
        r.neumann_tail = pd.xi.neumann_tail;
        r.xi_inverse_residual = pd.xi.inverse_residual;
        return r.xi_inverse_residual < cfg.inverse_threshold;
      }))
    return r;

  if (!stage(r.st_conjugate, [&] {
        const MomentOracle oq(ctx, cfg.q);
        pd.conj = conjugate_vars(ctx, pd.xi, oq, tc.degree_cap - 1);
        r.conjugate_residual = conjugate_check(oq, ctx, pd.conj, std::min(4, tc.degree_cap - 2));
        const auto x = variables(n);
        for (int k = 0; k < n; ++k) r.xi_deviation = std::max(r.xi_deviation, norm_R(pd.conj[k] - x[k], r.R_pi));
        const TensorPoly one = TensorPoly::unit(n, 1.0, pd.xi.tensor_cap);
        r.xi_deviation_bound = pi_norm_bound(t_sigma(ctx, pd.xi.xi_inv, 1.0, 0.0) - one, r.R_pi) *
                               (r.R_pi + 2.0 * (1.0 - std::abs(cfg.q)) / cfg.c * pi_norm_bound(pd.xi.xi, r.R_pi));
        pd.potential = potential_W(ctx, pd.conj, tc.degree_cap);
        r.potential = pd.potential;
        return r.conjugate_residual < cfg.sd_threshold;
      }))
    return r;

  const NCPoly& w = pd.potential.W;
  stage(r.st_hypotheses, [&] {
    r.hypotheses = check_hypotheses(ctx, w, tc);
    r.norm_W_Rsigma = r.hypotheses.norm_W_Rsigma;
    if (!r.hypotheses.pass) r.st_hypotheses.error = r.hypotheses.failures();
    return r.hypotheses.pass;
  });
  if (!r.st_hypotheses.pass) {
    if (cfg.bisect_steps > 0 && cfg.q != 0.0 && r.hypotheses.R_ok) r.passing_q = bisect_passing_q(ctx, cfg.q, cfg);
    if (!cfg.continue_on_violation) return r;
  }

  const MomentOracle o0(ctx, 0.0);
  if (!stage(r.st_contraction, [&] {
        r.transport = solve_transport(ctx, o0, w, tc, false, false);
        bool ok = r.transport.converged && r.transport.fixed_point_residual < tc.tolerance;
        for (double x : r.transport.contraction_ratios) ok = ok && x <= tc.ratio_warn;
        return ok;
      }))
    return r;
  r.truncated = r.transport.truncated;

  stage(r.st_sd, [&] {
    const NCPoly v = quadratic_potential(ctx) + recapped(w, kUnbounded);
    r.transport.sd_residual = sd_residual(law_of(o0, r.transport.Y, tc.effective_law_degree()), ctx, v, tc.sd_degree);
    r.transport.sd_computed = true;
    return r.transport.sd_residual < cfg.sd_threshold;
  });
  stage(r.st_monotone, [&] { return r.transport.monotone_certified; });
  stage(r.st_inversion, [&] {
    r.inversion = invert_series(r.transport.Y, tc);
    return r.inversion.residual < cfg.inverse_threshold;
  });
  return r;
}

}  // namespace ncfree
