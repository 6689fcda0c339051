#pragma once

#include <vector>

#include "cyclic.hpp"
#include "tensor.hpp"

namespace ncfree {

inline void check_index(int j, int n) {
  if (j < 0 || j >= n) throw Error(ErrorCode::IndexOutOfRange, "variable index out of range");
}

// Sum over occurrences l of letter k in each word, weighted by weight(k):
// w = a X_k b  ->  weight(k) a (x) b.
template <typename Weight>
TensorPoly split_letters(const NCPoly& p, Weight weight) {
  TensorPoly out(p.num_vars(), p.cap());
  out.mark_truncated(p.truncated());
  for (const auto& [w, c] : p.terms())
    for (std::size_t l = 0; l < w.size(); ++l) {
      const cplx wt = weight(letter(w, l));
      if (wt == cplx(0.0)) continue;
      out.add_term(w.substr(0, l), w.substr(l + 1), c * wt);
    }
  out.prune();
  return out;
}

// free difference quotient delta_j
inline TensorPoly delta(int j, const NCPoly& p) {
  check_index(j, p.num_vars());
  return split_letters(p, [j](int k) { return k == j ? cplx(1.0) : cplx(0.0); });
}

// d_j = sum_k alpha_{kj} delta_k
inline TensorPoly partial_sigma(const ModularContext& ctx, int j, const NCPoly& p) {
  check_index(j, p.num_vars());
  return split_letters(p, [&](int k) { return ctx.alpha(k, j); });
}

// dbar_j = sum_k alpha_{jk} delta_k
inline TensorPoly partial_bar(const ModularContext& ctx, int j, const NCPoly& p) {
  check_index(j, p.num_vars());
  return split_letters(p, [&](int k) { return ctx.alpha(j, k); });
}

// dtilde_j = sum_k alpha_{jk} delta_k(.)^diamond
inline TensorPoly partial_tilde(const ModularContext& ctx, int j, const NCPoly& p) {
  return t_diamond(partial_bar(ctx, j, p));
}

// D_j(X_{k1}...X_{kn}) = sum_l alpha_{j k_l} sigma_{-i}(X_{k_{l+1}}...X_{k_n}) X_{k_1}...X_{k_{l-1}}
inline NCPoly cyclic_D(const ModularContext& ctx, int j, const NCPoly& p) {
  check_index(j, p.num_vars());
  const int n = p.num_vars();
  std::map<Word, NCPoly> moved;  // sigma_{-i} of suffixes
  NCPoly out(n, p.cap());
  out.mark_truncated(p.truncated());
  for (const auto& [w, c] : p.terms())
    for (std::size_t l = 0; l < w.size(); ++l) {
      const cplx a = ctx.alpha(j, letter(w, l));
      if (a == cplx(0.0)) continue;
      const Word suffix = w.substr(l + 1), head = w.substr(0, l);
      auto it = moved.find(suffix);
      if (it == moved.end())
        it = moved.emplace(suffix, linear_substitute(NCPoly::monomial(n, suffix), ctx.A)).first;
      for (const auto& [u, cu] : it->second.terms()) out.add_term(u + head, c * a * cu);
    }
  out.prune();
  return out;
}

inline std::vector<NCPoly> grad_D(const ModularContext& ctx, const NCPoly& p) {
  std::vector<NCPoly> out;
  for (int j = 0; j < p.num_vars(); ++j) out.push_back(cyclic_D(ctx, j, p));
  return out;
}

// [J f]_{ij} = delta_j f_i
inline TensorMatrix jac_J(const ModularContext& ctx, const std::vector<NCPoly>& f) {
  const int n = ctx.num_vars;
  if (static_cast<int>(f.size()) != n) throw Error(ErrorCode::DimMismatch, "jac_J");
  TensorMatrix m(n, n, f[0].cap());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = delta(j, f[i]);
  return m;
}

// [J_sigma f]_{ij} = d_j f_i
inline TensorMatrix jac_J_sigma(const ModularContext& ctx, const std::vector<NCPoly>& f) {
  const int n = ctx.num_vars;
  if (static_cast<int>(f.size()) != n) throw Error(ErrorCode::DimMismatch, "jac_J_sigma");
  TensorMatrix m(n, n, f[0].cap());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = partial_sigma(ctx, j, f[i]);
  return m;
}

template <typename Scale>
NCPoly scale_by_degree(const NCPoly& p, Scale scale) {
  NCPoly out(p.num_vars(), p.cap());
  out.mark_truncated(p.truncated());
  for (const auto& [w, c] : p.terms()) out.add_term(w, c * scale(static_cast<int>(w.size())));
  out.prune();
  return out;
}

// N(w) = |w| w
inline NCPoly number_op(const NCPoly& p) {
  return scale_by_degree(p, [](int n) { return static_cast<double>(n); });
}

// Sigma(w) = w / |w|, zero on constants
inline NCPoly sigma_inv_op(const NCPoly& p) {
  return scale_by_degree(p, [](int n) { return n == 0 ? 0.0 : 1.0 / n; });
}

// Pi = 1 - pi_0
inline NCPoly pi_op(const NCPoly& p) {
  return scale_by_degree(p, [](int n) { return n == 0 ? 0.0 : 1.0; });
}

// S(w) = (1/n) sum_{k<n} rho^k(w), constants fixed
inline NCPoly symmetrize_S(const ModularContext& ctx, const NCPoly& p) {
  NCPoly out(p.num_vars(), p.cap());
  out.mark_truncated(p.truncated());
  for (auto& [n, part] : homogeneous_parts(p)) {
    if (n == 0) {
      out += part;
      continue;
    }
    NCPoly acc = part, cur = part;
    for (int k = 1; k < n; ++k) {
      cur = rho(ctx, cur, 1);
      acc += cur;
    }
    out += (1.0 / n) * acc;
  }
  return out;
}

}  // namespace ncfree
