#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "schwinger.hpp"

namespace ncfree {

struct TransportConfig {
  double R = 4.0;
  double R_prime = 5.0;
  double rho = 1.0;
  int degree_cap = 8;
  int tensor_cap = -1;  // cap for the Jacobian powers in the log term; -1 means 2 * degree_cap
  double tolerance = 1e-9;
  int max_iterations = 200;
  double gamma = 0.25;
  int sd_degree = 4;
  int law_degree = -1;  // truncation of phi(P(Y)) products; -1 means exact
  double ratio_warn = 0.55;

  int effective_tensor_cap() const { return tensor_cap > 0 ? tensor_cap : 2 * degree_cap; }
  int effective_law_degree() const { return law_degree > 0 ? law_degree : kUnbounded; }
};

inline double min_R(const ModularContext& ctx) { return 4.0 * std::sqrt(ctx.norm_A); }

struct HypothesisReport {
  double norm_W_Rsigma = 0.0;
  bool norm_W_exact = true;
  double sum_delta_pi_norm = 0.0;
  double bound_W = 0.0;      // rho / 2N
  double bound_delta = 0.125;
  bool R_ok = true, W_ok = true, delta_ok = true;
  bool pass = true;

  std::string failures() const {
    std::ostringstream os;
    if (!R_ok) os << "R < 4 sqrt(||A||); ";
    if (!W_ok) os << "||W||_{R,sigma} = " << norm_W_Rsigma << " >= rho/2N = " << bound_W << "; ";
    if (!delta_ok) os << "sum_j ||delta_j W||_{(R+rho) pi} = " << sum_delta_pi_norm << " >= 1/8; ";
    return os.str();
  }
};

inline HypothesisReport check_hypotheses(const ModularContext& ctx, const NCPoly& w, const TransportConfig& cfg) {
  if (!is_cyclically_symmetric(ctx, w)) throw Error(ErrorCode::NotCyclicallySymmetric, "check_hypotheses: W");
  HypothesisReport h;
  const auto nr = norm_R_sigma(ctx, w, cfg.R);
  h.norm_W_Rsigma = nr.value;
  h.norm_W_exact = nr.exact;
  for (int j = 0; j < ctx.num_vars; ++j) h.sum_delta_pi_norm += pi_norm_bound(delta(j, w), cfg.R + cfg.rho);
  h.bound_W = cfg.rho / (2.0 * ctx.num_vars);
  h.R_ok = cfg.R >= min_R(ctx) && cfg.rho > 0.0 && cfg.rho <= 1.0;
  h.W_ok = h.norm_W_Rsigma < h.bound_W;
  h.delta_ok = h.sum_delta_pi_norm < h.bound_delta;
  h.pass = h.R_ok && h.W_ok && h.delta_ok;
  return h;
}

inline double vec_norm_R(const std::vector<NCPoly>& f, double r) {
  double m = 0.0;
  for (const auto& p : f) m = std::max(m, norm_R(p, r));
  return m;
}

inline std::vector<NCPoly> vec_add(const std::vector<NCPoly>& a, const std::vector<NCPoly>& b) {
  std::vector<NCPoly> out;
  for (std::size_t j = 0; j < a.size(); ++j) out.push_back(a[j] + b[j]);
  return out;
}

inline std::vector<NCPoly> vec_sub(const std::vector<NCPoly>& a, const std::vector<NCPoly>& b) {
  std::vector<NCPoly> out;
  for (std::size_t j = 0; j < a.size(); ++j) out.push_back(a[j] - b[j]);
  return out;
}

// [(1 (x) phi) o Tr_A + (phi (x) 1) o Tr_{A^{-1}}](Q)
inline NCPoly trace_contraction(const ModularContext& ctx, const MomentOracle& o, const TensorMatrix& q, int cap) {
  NCPoly out = o.contract_right(trace_A(ctx, q), cap);
  out += o.contract_left(trace_Ainv(ctx, q), cap);
  return with_cap(out, cap);
}

// sum_{m>=0} (-1)^m/(m+2) Q_{m+2}(Sigma g), Q_k = trace_contraction((J D Sigma g)^{#k}).
inline NCPoly q_series(const ModularContext& ctx, const MomentOracle& o, const NCPoly& g, double r, double tol,
                       int degree_cap, int tensor_cap) {
  const double gn = norm_R_sigma(ctx, g, r).value;
  const double ratio = 2.0 * gn / (r * r);
  if (ratio >= 1.0) throw Error(ErrorCode::NormTooLarge, "q_series: ||g||_{R,sigma} >= R^2/2");
  NCPoly out(ctx.num_vars, degree_cap);
  if (g.is_zero()) return out;
  const auto f = grad_D(ctx, sigma_inv_op(recapped(g, tensor_cap + 2)));
  const TensorMatrix b = mat_with_cap(jac_J(ctx, f), tensor_cap);
  TensorMatrix power = mat_mul(b, b);
  for (int m = 0; m < 500; ++m) {
    const double weight = (m % 2 == 0 ? 1.0 : -1.0) / (m + 2);
    out += weight * trace_contraction(ctx, o, power, degree_cap);
    const double tail = 2.0 * ctx.norm_A * std::pow(ratio, m + 3) / (1.0 - ratio);
    if (tail < tol) break;
    power = mat_mul(power, b);
    bool zero = true;
    for (int i = 0; i < power.dim() && zero; ++i)
      for (int j = 0; j < power.dim() && zero; ++j) zero = power(i, j).is_zero();
    if (zero) {
      out.mark_truncated(power.truncated());
      break;
    }
  }
  return out;
}

// F(g) = -W(X + D Sigma g) - 1/4 {(1+A) # D Sigma g} # D Sigma g + [Tr](J D Sigma g) - Q(Sigma g)
inline NCPoly F_map(const ModularContext& ctx, const MomentOracle& o, const NCPoly& w, const NCPoly& ghat,
                    const TransportConfig& cfg) {
  if (!is_cyclically_symmetric(ctx, ghat)) throw Error(ErrorCode::NotCyclicallySymmetric, "F_map: ghat");
  const int n = ctx.num_vars, cap = cfg.degree_cap, tcap = cfg.effective_tensor_cap();
  const auto f = grad_D(ctx, sigma_inv_op(recapped(ghat, cap)));
  const auto x = variables(n, cap);

  NCPoly out = -substitute(w, vec_add(x, f));
  const CMatrix one_plus_A = CMatrix::Identity(n, n) + ctx.A;
  out -= 0.25 * vec_dot(scalar_mat_vec(one_plus_A, f), f);
  // linear part of the log term
  const TensorMatrix b = mat_with_cap(jac_J(ctx, recapped_vec(f, tcap)), tcap);
  out += trace_contraction(ctx, o, b, cap);
  out -= q_series(ctx, o, ghat, cfg.R, cfg.tolerance * 1e-3, cap, tcap);
  return with_cap(out, cap);
}

inline NCPoly transport_step(const ModularContext& ctx, const MomentOracle& o, const NCPoly& w, const NCPoly& ghat,
                             const TransportConfig& cfg) {
  return symmetrize_S(ctx, pi_op(F_map(ctx, o, w, ghat, cfg)));
}

struct MonotoneCertificate {
  double bound = 0.0;
  double lambda_min = 1.0;
  bool certified = true;
};

// Sufficient condition for (sigma_{i/2} (x) 1)(J_sigma Y) >= 0.
inline MonotoneCertificate monotonicity_certificate(const ModularContext& ctx, const std::vector<NCPoly>& f,
                                                    double r) {
  const TensorMatrix j = jac_J_sigma(ctx, f);
  double mismatch = 0.0, scale = 1.0;
  for (int a = 0; a < j.dim(); ++a)
    for (int b = 0; b < j.dim(); ++b) {
      mismatch = std::max(mismatch, max_coeff_diff(t_star(j(b, a)), t_sigma(ctx, j(a, b), 1.0, 0.0)));
      for (const auto& [k, c] : j(a, b).terms()) scale = std::max(scale, std::abs(c));
    }
  if (mismatch > 1e-8 * scale) throw Error(ErrorCode::NotGradient, "monotonicity_certificate: f is not a sigma-gradient");
  MonotoneCertificate m;
  m.bound = pi_norm_bound_mat(mat_sigma(ctx, j, 0.5, 0.0), r);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(ctx.alpha);
  m.lambda_min = es.eigenvalues().minCoeff();
  m.certified = m.bound < m.lambda_min;
  return m;
}

struct TransportSolution {
  NCPoly ghat, g;
  std::vector<NCPoly> f, Y;
  int iterations = 0;
  bool converged = false;
  std::vector<double> delta_history;
  std::vector<double> contraction_ratios;
  int ratio_warnings = 0;
  double fixed_point_residual = 0.0;
  double sd_residual = 0.0;
  bool sd_computed = false;
  MonotoneCertificate monotone;
  bool monotone_certified = false;
  bool ghat_bound_ok = true;  // ||ghat|| <= 6 ||W||
  double norm_ghat = 0.0;
  bool ghat_self_adjoint = true;
  HypothesisReport hypotheses;
  bool truncated = false;
};

// Differences below this are treated as rounding noise when judging ratios.
inline double noise_floor(const TransportConfig& cfg) {
  return 1e-14 * std::pow(cfg.R, cfg.degree_cap);
}

inline TransportSolution solve_transport(const ModularContext& ctx, const MomentOracle& o, const NCPoly& w,
                                         const TransportConfig& cfg, bool enforce_hypotheses = true,
                                         bool with_sd = true) {
  if (o.q() != 0.0) throw Error(ErrorCode::BadInput, "solve_transport needs the q = 0 oracle");
  TransportSolution s;
  s.hypotheses = check_hypotheses(ctx, w, cfg);
  if (enforce_hypotheses && !s.hypotheses.pass)
    throw Error(ErrorCode::HypothesisViolation, s.hypotheses.failures());

  const NCPoly wc = with_cap(recapped(w, cfg.degree_cap), cfg.degree_cap);
  NCPoly ghat = wc;
  double prev = -1.0;
  const double floor = noise_floor(cfg);
  for (int k = 0; k < cfg.max_iterations; ++k) {
    NCPoly next = transport_step(ctx, o, wc, ghat, cfg);
    const double diff = norm_R_sigma(ctx, next - ghat, cfg.R).value;
    s.delta_history.push_back(diff);
    s.iterations = k + 1;
    if (prev > floor) {
      const double ratio = diff / prev;
      s.contraction_ratios.push_back(ratio);
      if (ratio > cfg.ratio_warn) ++s.ratio_warnings;
      if (ratio >= 1.0 && diff > floor)
        throw Error(ErrorCode::NoConvergence, "contraction ratio >= 1 at iteration " + std::to_string(k + 1));
    }
    ghat = next;
    prev = diff;
    if (diff < cfg.tolerance) {
      s.converged = true;
      break;
    }
  }
  if (!s.converged) throw Error(ErrorCode::NoConvergence, "no convergence within max_iterations");

  s.ghat = ghat;
  s.fixed_point_residual = norm_R_sigma(ctx, transport_step(ctx, o, wc, ghat, cfg) - ghat, cfg.R).value;
  s.g = sigma_inv_op(ghat);
  s.f = grad_D(ctx, s.g);
  s.Y = vec_add(variables(ctx.num_vars, cfg.degree_cap), s.f);
  s.norm_ghat = norm_R_sigma(ctx, ghat, cfg.R).value;
  s.ghat_bound_ok = s.norm_ghat <= 6.0 * s.hypotheses.norm_W_Rsigma + 1e-12;
  s.ghat_self_adjoint = max_coeff_diff(adjoint(ghat), ghat) <= sym_tol(ghat);
  s.truncated = ghat.truncated();
  s.monotone = monotonicity_certificate(ctx, s.f, cfg.R);
  s.monotone_certified = s.monotone.certified;
  if (with_sd) {
    const NCPoly v = quadratic_potential(ctx) + recapped(w, kUnbounded);
    s.sd_residual = sd_residual(law_of(o, s.Y, cfg.effective_law_degree()), ctx, v, cfg.sd_degree);
    s.sd_computed = true;
  }
  return s;
}

struct InversionResult {
  std::vector<NCPoly> H;
  int iterations = 0;
  double C_value = 0.0;   // C(S')
  double S = 0.0, S_prime = 0.0, norm_Y = 0.0, norm_f_S = 0.0;
  double residual = 0.0;  // max coefficient error of H(Y) - X
  bool converged = false;
};

// Solve X = H(Y) for Y = X + f by H_k = Y - f(H_{k-1}), H_0 = Y, in fresh indeterminates.
inline InversionResult invert_series(const std::vector<NCPoly>& y, const TransportConfig& cfg) {
  if (y.empty()) throw Error(ErrorCode::DimMismatch, "invert_series: empty tuple");
  const int n = static_cast<int>(y.size()), cap = cfg.degree_cap;
  const auto x = variables(n, cap);
  std::vector<NCPoly> f;
  for (int j = 0; j < n; ++j) f.push_back(with_cap(recapped(y[j], cap) - x[j], cap));

  InversionResult r;
  r.S = cfg.R_prime;
  r.norm_Y = vec_norm_R(y, cfg.R);
  r.norm_f_S = vec_norm_R(f, r.S);
  if (!(r.norm_Y < r.S)) throw Error(ErrorCode::ContractionFailure, "invert_series: ||Y||_R >= S");
  r.S_prime = 0.5 * (r.norm_Y + r.S);
  int deg = 0;
  for (const auto& p : f) deg = std::max(deg, p.degree());
  double mk = 0.0;
  for (int k = 1; k <= deg; ++k) mk = std::max(mk, k * std::pow(r.S_prime, k - 1) / std::pow(r.S, k));
  r.C_value = r.norm_f_S * mk;
  if (r.C_value >= 1.0) throw Error(ErrorCode::ContractionFailure, "invert_series: C(S') >= 1");

  std::vector<NCPoly> h = x;  // H_0 = Y, written in the Y-indeterminates
  double prev = -1.0;
  const double target = cfg.tolerance * 1e-3;
  for (int k = 0; k < cfg.max_iterations; ++k) {
    std::vector<NCPoly> next = vec_sub(x, [&] {
      std::vector<NCPoly> fh;
      for (const auto& fj : f) fh.push_back(substitute(fj, h));
      return fh;
    }());
    const double diff = vec_norm_R(vec_sub(next, h), cfg.R);
    h = next;
    r.iterations = k + 1;
    if (diff < target || (prev >= 0.0 && diff >= prev && diff < 1e3 * noise_floor(cfg))) {
      r.converged = true;
      break;
    }
    prev = diff;
  }
  if (!r.converged) throw Error(ErrorCode::ContractionFailure, "invert_series: iteration did not settle");
  r.H = h;
  std::vector<NCPoly> ycap;
  for (const auto& yj : y) ycap.push_back(with_cap(recapped(yj, cap), cap));
  for (int j = 0; j < n; ++j) r.residual = std::max(r.residual, max_coeff_diff(substitute(h[j], ycap), x[j]));
  return r;
}

}  // namespace ncfree
