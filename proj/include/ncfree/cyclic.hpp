#pragma once

#include <map>

#include "modular.hpp"

namespace ncfree {

inline constexpr double kSymmetryTol = 1e-9;

// Split p by degree.
inline std::map<int, NCPoly> homogeneous_parts(const NCPoly& p) {
  std::map<int, NCPoly> parts;
  for (const auto& [w, c] : p.terms()) {
    const int n = static_cast<int>(w.size());
    auto it = parts.find(n);
    if (it == parts.end()) it = parts.emplace(n, NCPoly(p.num_vars(), p.cap())).first;
    it->second.add_term(w, c);
  }
  for (auto& [n, q] : parts) q.mark_truncated(p.truncated());
  return parts;
}

// rho^r on a single word of length n, 0 <= r < n: sigma_{-i}(last r letters) * first n-r letters.
inline void rho_word_into(const ModularContext& ctx, const Word& w, cplx c, int r, NCPoly& out) {
  const std::size_t n = w.size();
  if (r == 0 || n == 0) {
    out.add_term(w, c);
    return;
  }
  NCPoly tail = NCPoly::monomial(ctx.num_vars, w.substr(n - r), c);
  NCPoly moved = linear_substitute(tail, ctx.A);
  const Word head = w.substr(0, n - r);
  for (const auto& [u, cu] : moved.terms()) out.add_term(u + head, cu);
}

// rho^k, applied per homogeneous part. On degree n, rho^n = sigma_{-i}.
inline NCPoly rho(const ModularContext& ctx, const NCPoly& p, int k) {
  if (p.num_vars() != ctx.num_vars) throw Error(ErrorCode::VarCountMismatch, "rho");
  NCPoly out(p.num_vars(), p.cap());
  out.mark_truncated(p.truncated());
  for (auto& [n, part] : homogeneous_parts(p)) {
    if (n == 0 || k == 0) {
      out += part;
      continue;
    }
    int wraps = k / n, r = k % n;
    if (r < 0) {
      r += n;
      wraps -= 1;
    }
    NCPoly rotated(p.num_vars(), p.cap());
    for (const auto& [w, c] : part.terms()) rho_word_into(ctx, w, c, r, rotated);
    rotated.prune();
    if (wraps != 0) rotated = apply_sigma(ctx, rotated, -static_cast<double>(wraps));
    out += rotated;
  }
  out.prune();
  return out;
}

inline double sym_tol(const NCPoly& p) { return kSymmetryTol * std::max(1.0, max_coeff(p)); }

// sigma_{-i}-invariance, i.e. membership in the centralizer.
inline bool is_centralizer(const ModularContext& ctx, const NCPoly& p, double tol = -1.0) {
  if (tol < 0) tol = sym_tol(p);
  return max_coeff_diff(apply_sigma(ctx, p, -1.0), p) <= tol;
}

// Spectral projection onto the centralizer. In the eigenvariables Z = U^* X of A,
// sigma_{-i} scales a monomial by the product of its eigenvalues; keep those with product 1.
inline NCPoly centralizer_part(const ModularContext& ctx, const NCPoly& p) {
  const CMatrix& u = ctx.eigvecs;
  const NCPoly z = linear_substitute(p, u);
  NCPoly kept(p.num_vars(), p.cap());
  kept.mark_truncated(p.truncated());
  for (const auto& [w, c] : z.terms()) {
    double logscale = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) logscale += std::log(ctx.eigvals(letter(w, i)));
    if (std::abs(logscale) < 1e-9) kept.add_term(w, c);
  }
  NCPoly out = linear_substitute(kept, u.adjoint());
  out.prune();
  return out;
}

// rho(p) = p
inline bool is_cyclically_symmetric(const ModularContext& ctx, const NCPoly& p, double tol = -1.0) {
  if (tol < 0) tol = sym_tol(p);
  return max_coeff_diff(rho(ctx, p, 1), p) <= tol;
}

struct SigmaNorm {
  double value = 0.0;
  bool exact = true;
};

// ||P||_{R,sigma}: sum over degrees of the max over one rho-period. Outside the
// centralizer the sup is not a finite max, so the bound ||A||^{deg-1} ||P||_R is returned.
inline SigmaNorm norm_R_sigma(const ModularContext& ctx, const NCPoly& p, double r) {
  auto parts = homogeneous_parts(p);
  bool central = true;
  for (auto& [n, part] : parts)
    if (n > 1 && !is_centralizer(ctx, part)) central = false;
  if (!central) {
    const int d = p.degree();
    return {std::pow(ctx.norm_A, std::max(d - 1, 0)) * norm_R(p, r), false};
  }
  double total = 0.0;
  for (auto& [n, part] : parts) {
    double best = norm_R(part, r);
    NCPoly cur = part;
    for (int k = 1; k < n; ++k) {
      cur = rho(ctx, cur, 1);
      best = std::max(best, norm_R(cur, r));
    }
    total += best;
  }
  return {total, true};
}

}  // namespace ncfree
