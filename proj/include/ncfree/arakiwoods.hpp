#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

#include "transport.hpp"

namespace ncfree {

// psi_w = X_{w1} psi_{w2..wn} - sum_{k>=2} q^{k-2} <e_{w1}, e_{wk}>_U psi_{w2..^wk..wn}
class WickBuilder {
 public:
  WickBuilder(const ModularContext& ctx, double q) : ctx_(ctx), q_(q) {}

  const NCPoly& operator()(const Word& w) {
    auto it = memo_.find(w);
    if (it != memo_.end()) return it->second;
    const int n = ctx_.num_vars;
    NCPoly out(n);
    if (w.empty()) {
      out = NCPoly::constant(n, 1.0);
    } else {
      const Word rest = w.substr(1);
      out = mul(NCPoly::var(n, letter(w, 0)), NCPoly((*this)(rest)));
      double qk = 1.0;
      for (std::size_t i = 1; i < w.size(); ++i) {
        const cplx pair = ctx_.alpha(letter(w, i), letter(w, 0));
        if (pair != cplx(0.0) && qk != 0.0) {
          Word rem = rest;
          rem.erase(i - 1, 1);
          out -= (qk * pair) * NCPoly((*this)(rem));
        }
        qk *= q_;
      }
    }
    return memo_.emplace(w, out).first->second;
  }

 private:
  const ModularContext& ctx_;
  double q_;
  std::map<Word, NCPoly> memo_;
};

inline NCPoly wick_poly(const ModularContext& ctx, double q, const Word& w) {
  for (std::size_t i = 0; i < w.size(); ++i)
    if (letter(w, i) >= ctx.num_vars) throw Error(ErrorCode::IndexOutOfRange, "wick_poly");
  WickBuilder b(ctx, q);
  return b(w);
}

inline int count_inversions(const std::vector<int>& p) {
  int inv = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) ++inv;
  return inv;
}

inline int word_index(const Word& w, int n_vars) {
  int idx = 0;
  for (std::size_t i = 0; i < w.size(); ++i) idx = idx * n_vars + letter(w, i);
  return idx;
}

inline void check_level(const ModularContext& ctx, int n, int level_cap) {
  if (n < 0 || n > level_cap) throw Error(ErrorCode::LevelTooLarge, "level above cap");
  double size = std::pow(static_cast<double>(ctx.num_vars), n);
  if (size > 4096) throw Error(ErrorCode::LevelTooLarge, "N^n above 4096");
}

// <e_u, e_v>_{U,q} over words of length n, lexicographic order.
inline CMatrix q_gram(const ModularContext& ctx, double q, int n, int level_cap = 6) {
  check_level(ctx, n, level_cap);
  const auto words = words_of_length(ctx.num_vars, n);
  const int dim = static_cast<int>(words.size());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::pair<std::vector<int>, double>> perms;
  do {
    const double w = std::pow(q, count_inversions(perm));
    if (w != 0.0 || count_inversions(perm) == 0) perms.push_back({perm, w});
  } while (std::next_permutation(perm.begin(), perm.end()));
  CMatrix g = CMatrix::Zero(dim, dim);
  for (int u = 0; u < dim; ++u)
    for (int v = 0; v < dim; ++v) {
      cplx s = 0.0;
      for (const auto& [p, w] : perms) {
        cplx prod = w;
        for (int k = 0; k < n && prod != cplx(0.0); ++k)
          prod *= ctx.alpha(letter(words[v], p[k]), letter(words[u], k));
        s += prod;
      }
      g(u, v) = s;
    }
  return g;
}

// Matrix of sum_pi q^{inv(pi)} acting on e_v by permuting tensor legs.
inline CMatrix permutation_operator(const ModularContext& ctx, double q, int n) {
  const auto words = words_of_length(ctx.num_vars, n);
  const int dim = static_cast<int>(words.size());
  CMatrix m = CMatrix::Zero(dim, dim);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    const double w = std::pow(q, count_inversions(perm));
    if (w == 0.0) continue;
    for (int v = 0; v < dim; ++v) {
      Word moved;
      for (int k = 0; k < n; ++k) moved.push_back(words[v][perm[k]]);
      m(word_index(moved, ctx.num_vars), v) += w;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return m;
}

// Hermitian inverse square root with a positivity check.
inline CMatrix inv_sqrt_psd(const CMatrix& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
  if (es.eigenvalues().minCoeff() <= 1e-12) throw Error(ErrorCode::GramNotPositive, what);
  Eigen::VectorXcd d = es.eigenvalues().cwiseSqrt().cwiseInverse().cast<cplx>();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

inline CMatrix kron_power(const CMatrix& a, int n) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int k = 0; k < n; ++k) {
    CMatrix next(out.rows() * a.rows(), out.cols() * a.cols());
    for (int i = 0; i < out.rows(); ++i)
      for (int j = 0; j < out.cols(); ++j) next.block(i * a.rows(), j * a.cols(), a.rows(), a.cols()) = out(i, j) * a;
    out.swap(next);
  }
  return out;
}

// r_i = sum_k D_ik p_k, p_k = sum_j B_kj psi_j, B^2 = (sum_pi q^{inv} pi)^{-1}, D^2 = (alpha^{(x)n})^{-1}.
inline std::vector<NCPoly> orthonormal_basis(const ModularContext& ctx, double q, int n, int level_cap = 6) {
  const int nv = ctx.num_vars;
  if (n == 0) return {NCPoly::constant(nv, 1.0)};
  const CMatrix gram = q_gram(ctx, q, n, level_cap);
  {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (gram + gram.adjoint()));
    if (es.eigenvalues().minCoeff() <= 1e-12) throw Error(ErrorCode::GramNotPositive, "q-Gram not positive");
  }
  const CMatrix b = inv_sqrt_psd(permutation_operator(ctx, q, n), "permutation operator not positive");
  const CMatrix d = inv_sqrt_psd(kron_power(ctx.alpha, n), "alpha tensor power not positive");
  const CMatrix t = d * b;
  const auto words = words_of_length(nv, n);
  WickBuilder psi(ctx, q);
  std::vector<NCPoly> out;
  for (int i = 0; i < t.rows(); ++i) {
    NCPoly r(nv);
    for (int j = 0; j < t.cols(); ++j)
      if (std::abs(t(i, j)) > 1e-15) r += t(i, j) * psi(words[j]);
    out.push_back(r);
  }
  return out;
}

struct XiData {
  double q = 0.0;
  int max_level = 0;
  int tensor_cap = kUnbounded;
  std::vector<std::vector<NCPoly>> levels;
  TensorPoly xi;
  TensorPoly xi_inv;
  bool has_inverse = false;
  int neumann_terms = 0;
  double neumann_tail = 0.0;
  double inverse_residual = 0.0;  // |xi # xi_inv - 1 (x) 1| within the cap
  double pi_bound_value = 0.0;
  double R_pi = 0.0;
};

// Xi_q = sum_{n<=d} q^n sum_i r_i (x) r_i^*
inline XiData build_xi(const ModularContext& ctx, double q, int d, int tensor_cap = -1) {
  XiData x;
  x.q = q;
  x.max_level = d;
  x.tensor_cap = tensor_cap > 0 ? tensor_cap : 2 * d;
  x.xi = TensorPoly::unit(ctx.num_vars, 1.0, x.tensor_cap);
  x.levels.push_back({NCPoly::constant(ctx.num_vars, 1.0)});
  double qn = 1.0;
  for (int n = 1; n <= d; ++n) {
    qn *= q;
    if (qn == 0.0) break;
    check_level(ctx, n, d);
    x.levels.push_back(orthonormal_basis(ctx, q, n, d));
    for (const auto& r : x.levels.back()) x.xi += qn * TensorPoly::elementary(r, adjoint(r), x.tensor_cap);
  }
  return x;
}

inline double pi_bound(double q, int n, double a_norm, double at_norm, double c) {
  const double k = at_norm * (3.0 + c) * (3.0 + c) * (1.0 + a_norm) * n * n;
  const double den = 2.0 - (4.0 + k) * std::abs(q);
  if (den <= 0.0) throw Error(ErrorCode::DenominatorNonpositive, "pi_bound denominator");
  return k * std::abs(q) / den;
}

// R at which the pi bound is stated
inline double pi_bound_R(double q, double c) { return (1.0 + c / 2.0) * 2.0 / (1.0 - std::abs(q)); }

// xi_inv = sum_k (1 (x) 1 - xi)^{#k}
inline void invert_xi(const ModularContext& ctx, XiData& x, double r, double tol, double c) {
  x.R_pi = pi_bound_R(x.q, c);
  x.pi_bound_value = pi_bound(x.q, ctx.num_vars, ctx.norm_A, 1.0, c);
  if (x.pi_bound_value >= 1.0) throw Error(ErrorCode::NeumannDivergence, "pi(q,N,A,0) >= 1");
  const int n = ctx.num_vars;
  const TensorPoly one = TensorPoly::unit(n, 1.0, x.tensor_cap);
  const TensorPoly e = one - x.xi;
  TensorPoly term = one, sum = one;
  x.neumann_terms = 0;
  for (int k = 1; k <= 2000; ++k) {
    term = t_mul(term, e);
    sum += term;
    x.neumann_terms = k;
    x.neumann_tail = pi_norm_bound(term, r);
    if (term.is_zero() || x.neumann_tail < tol) break;
  }
  x.xi_inv = sum;
  x.has_inverse = true;
  x.inverse_residual = max_coeff_diff(low_degree(t_mul(x.xi, x.xi_inv), x.tensor_cap), one);
}

// xi_j = K # X_j - m o (1 (x) phi (x) 1) o (1 (x) d_j^{(q)} + dbar_j^{(q)} (x) 1)(K),
// K = (sigma_{-i} (x) 1)([Xi^{-1}]^*). The middle phi is applied to the new leg on
// each elementary term, so K's legs a (x) b give a (phi (x) 1)(d_j^{(q)} b) and
// ((1 (x) phi)(dbar_j^{(q)} a)) b.
inline std::vector<NCPoly> conjugate_vars(const ModularContext& ctx, const XiData& x, const MomentOracle& oq,
                                          int cap = kUnbounded) {
  if (!x.has_inverse) throw Error(ErrorCode::MissingInverse, "conjugate_vars needs xi_inv");
  const int n = ctx.num_vars;
  const TensorPoly k = t_sigma(ctx, t_star(x.xi_inv), -1.0, 0.0);
  const TensorPoly xi = recapped(x.xi, kUnbounded);
  std::vector<NCPoly> out;
  for (int j = 0; j < n; ++j) {
    std::map<Word, NCPoly> lmap, rmap;
    NCPoly xi_j = t_apply(k, NCPoly::var(n, j));
    NCPoly corr(n);
    for (const auto& [kw, c] : k.terms()) {
      const Word& a = kw.first;
      const Word& b = kw.second;
      auto lt = lmap.find(b);
      if (lt == lmap.end())
        lt = lmap.emplace(b, oq.contract_left(t_mul(partial_sigma(ctx, j, NCPoly::monomial(n, b)), xi))).first;
      auto rt = rmap.find(a);
      if (rt == rmap.end())
        rt = rmap.emplace(a, oq.contract_right(t_mul(partial_bar(ctx, j, NCPoly::monomial(n, a)), xi))).first;
      for (const auto& [u, cu] : lt->second.terms()) corr.add_term(a + u, c * cu);
      for (const auto& [u, cu] : rt->second.terms()) corr.add_term(u + b, c * cu);
    }
    corr.prune();
    xi_j -= corr;
    xi_j.mark_truncated(x.xi_inv.truncated());
    out.push_back(with_cap(xi_j, cap));
  }
  return out;
}

// max_{j, |p| <= d} |<xi_j, p> - (phi (x) phi)(d_j p)| under phi_q
inline double conjugate_check(const MomentOracle& oq, const ModularContext& ctx, const std::vector<NCPoly>& xi,
                              int d) {
  const int n = ctx.num_vars;
  double m = 0.0;
  for (int j = 0; j < n; ++j)
    for (const auto& p : words_up_to(n, d)) {
      const NCPoly pp = NCPoly::monomial(n, p);
      m = std::max(m, std::abs(oq.inner(xi[j], pp) - oq.state_tensor(partial_sigma(ctx, j, pp))));
    }
  return m;
}

struct Potential {
  NCPoly V, W;
  double symmetry_defect = 0.0;  // |rho(V) - V| before symmetrizing
  double grad_residual = 0.0;    // |D V - xi|
};

// V = Sigma(sum_{jk} [(1+A)/2]_{jk} xi_k X_j), W = V - V_0
inline Potential potential_W(const ModularContext& ctx, const std::vector<NCPoly>& xi, int cap,
                             double tol = 1e-8) {
  const int n = ctx.num_vars;
  const CMatrix h = 0.5 * (CMatrix::Identity(n, n) + ctx.A);
  NCPoly s(n, cap);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (std::abs(h(j, k)) > 0) s += h(j, k) * mul(recapped(xi[k], cap), NCPoly::var(n, j, cap));
  Potential p;
  NCPoly v = sigma_inv_op(s);
  p.symmetry_defect = max_coeff_diff(rho(ctx, v, 1), v);
  if (p.symmetry_defect > tol * std::max(1.0, max_coeff(v)))
    throw Error(ErrorCode::NotCyclicallySymmetric, "potential V: truncation too coarse");
  p.V = symmetrize_S(ctx, v);
  const auto g = grad_D(ctx, p.V);
  for (int j = 0; j < n; ++j) p.grad_residual = std::max(p.grad_residual, max_coeff_diff(g[j], with_cap(xi[j], cap - 1)));
  p.W = p.V - quadratic_potential(ctx, cap);
  return p;
}

}  // namespace ncfree
