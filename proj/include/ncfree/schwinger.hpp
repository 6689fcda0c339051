#pragma once

#include <map>
#include <vector>

#include "calculus.hpp"
#include "moments.hpp"
#include "parallel.hpp"

namespace ncfree {

// Adjoint of the q-derivation d_j^{(q)} = d_j(.) # Xi on P (x) Q:
//   P X_j sigma_{-i}(Q) - P sigma_{-i}((phi (x) 1)(dbar_j^{(q)} Q)) - ((1 (x) phi)(dbar_j^{(q)} P)) sigma_{-i}(Q)
inline NCPoly partial_q_star(const MomentOracle& o, const ModularContext& ctx, int j, const TensorPoly& t,
                             const TensorPoly& xi_in) {
  const int n = ctx.num_vars;
  if (t.num_vars() != n || xi_in.num_vars() != n) throw Error(ErrorCode::VarCountMismatch, "partial_q_star");
  check_index(j, n);
  // products with xi are only ever contracted, so they must not be cut at xi's own cap
  const TensorPoly xi = recapped(xi_in, kUnbounded);
  std::map<Word, NCPoly> moved, left_corr, right_corr;
  auto sig = [&](const Word& b) -> const NCPoly& {
    auto it = moved.find(b);
    if (it == moved.end()) it = moved.emplace(b, apply_sigma(ctx, NCPoly::monomial(n, b), -1.0)).first;
    return it->second;
  };
  // sigma_{-i}((phi (x) 1)(dbar_j(b) # xi))
  auto lcorr = [&](const Word& b) -> const NCPoly& {
    auto it = left_corr.find(b);
    if (it == left_corr.end()) {
      NCPoly v = o.contract_left(t_mul(partial_bar(ctx, j, NCPoly::monomial(n, b)), xi));
      it = left_corr.emplace(b, apply_sigma(ctx, v, -1.0)).first;
    }
    return it->second;
  };
  // (1 (x) phi)(dbar_j(a) # xi)
  auto rcorr = [&](const Word& a) -> const NCPoly& {
    auto it = right_corr.find(a);
    if (it == right_corr.end())
      it = right_corr.emplace(a, o.contract_right(t_mul(partial_bar(ctx, j, NCPoly::monomial(n, a)), xi))).first;
    return it->second;
  };

  NCPoly out(n);
  out.mark_truncated(t.truncated() || xi.truncated());
  const Word xj(1, to_letter(j));
  for (const auto& [k, c] : t.terms()) {
    const Word& a = k.first;
    const Word& b = k.second;
    const NCPoly& sb = sig(b);
    for (const auto& [u, cu] : sb.terms()) out.add_term(a + xj + u, c * cu);
    for (const auto& [u, cu] : lcorr(b).terms()) out.add_term(a + u, -c * cu);
    const NCPoly& ra = rcorr(a);
    for (const auto& [u, cu] : ra.terms())
      for (const auto& [v, cv] : sb.terms()) out.add_term(u + v, -c * cu * cv);
  }
  out.prune();
  return out;
}

// J_sigma^*(Q)_j = sum_i d_i^*([Q]_{ji})
inline std::vector<NCPoly> jsigma_star(const MomentOracle& o, const ModularContext& ctx, const TensorMatrix& q,
                                       const TensorPoly& xi) {
  if (q.dim() != ctx.num_vars) throw Error(ErrorCode::DimMismatch, "jsigma_star");
  std::vector<NCPoly> out;
  for (int j = 0; j < q.dim(); ++j) {
    NCPoly acc(ctx.num_vars);
    for (int i = 0; i < q.dim(); ++i)
      if (!q(j, i).is_zero()) acc += partial_q_star(o, ctx, i, q(j, i), xi);
    out.push_back(acc);
  }
  return out;
}

// max_{j, |p| <= d} |phi((D_j V)^* p) - (phi (x) phi)(d_j p)|, both sides through law.
inline double sd_residual(const Law& law, const ModularContext& ctx, const NCPoly& v, int d) {
  if (!is_cyclically_symmetric(ctx, v)) throw Error(ErrorCode::NotCyclicallySymmetric, "sd_residual: potential");
  const int n = ctx.num_vars;
  std::vector<NCPoly> dv_star;
  for (const auto& g : grad_D(ctx, v)) dv_star.push_back(adjoint(g));
  const auto words = words_up_to(n, d);
  std::vector<double> worst(words.size() * n, 0.0);
  parallel_for(worst.size(), [&](std::size_t idx) {
    const int j = static_cast<int>(idx % n);
    const Word& p = words[idx / n];
    cplx lhs = 0.0;
    for (const auto& [u, cu] : dv_star[j].terms()) lhs += cu * law(u + p);
    const cplx rhs = law.state_tensor(partial_sigma(ctx, j, NCPoly::monomial(n, p)));
    worst[idx] = std::abs(lhs - rhs);
  });
  double m = 0.0;
  for (double x : worst) m = std::max(m, x);
  return m;
}

// d_gamma = sum_{l=1}^{L} gamma^l max_{|w|=l} |(phi - phi')(X_w)|
inline double gibbs_distance(const Law& a, const Law& b, double gamma, int max_len) {
  if (!(gamma > 0.0 && gamma < 1.0 / 3.0)) throw Error(ErrorCode::BadGamma, "gamma must lie in (0, 1/3)");
  if (a.num_vars() != b.num_vars()) throw Error(ErrorCode::VarCountMismatch, "gibbs_distance");
  double total = 0.0, gl = 1.0;
  for (int l = 1; l <= max_len; ++l) {
    gl *= gamma;
    double delta = 0.0;
    for (const auto& w : words_of_length(a.num_vars(), l)) delta = std::max(delta, std::abs(a(w) - b(w)));
    total += gl * delta;
  }
  return total;
}

}  // namespace ncfree
