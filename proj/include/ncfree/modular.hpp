#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "poly.hpp"

namespace ncfree {

using CMatrix = Eigen::MatrixXcd;

struct ModularContext {
  int num_vars = 0;
  std::vector<double> lambdas;
  int num_trivial = 0;
  CMatrix A;
  CMatrix alpha;  // 2 (1 + A)^{-1}
  double norm_A = 1.0;

  // eigenpairs of A, kept for real powers
  Eigen::VectorXd eigvals;
  CMatrix eigvecs;
};

inline constexpr double kEigenFloor = 1e-12;

inline ModularContext build_context(const std::vector<double>& lambdas, int num_trivial) {
  for (double l : lambdas)
    if (!(l > 0.0)) throw Error(ErrorCode::NonPositiveLambda, "every lambda must be positive");
  if (num_trivial < 0) throw Error(ErrorCode::BadInput, "num_trivial must be nonnegative");
  const int n = 2 * static_cast<int>(lambdas.size()) + num_trivial;
  if (n == 0) throw Error(ErrorCode::EmptyContext, "no variables");

  ModularContext ctx;
  ctx.num_vars = n;
  ctx.lambdas = lambdas;
  ctx.num_trivial = num_trivial;
  ctx.A = CMatrix::Identity(n, n);
  const cplx I(0.0, 1.0);
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const double l = lambdas[k], li = 1.0 / l;
    const int o = 2 * static_cast<int>(k);
    ctx.A(o, o) = 0.5 * (l + li);
    ctx.A(o, o + 1) = -0.5 * I * (l - li);
    ctx.A(o + 1, o) = 0.5 * I * (l - li);
    ctx.A(o + 1, o + 1) = 0.5 * (l + li);
    ctx.norm_A = std::max({ctx.norm_A, l, li});
  }
  CMatrix one_plus = CMatrix::Identity(n, n) + ctx.A;
  ctx.alpha = one_plus.ldlt().solve(2.0 * CMatrix::Identity(n, n));

  Eigen::SelfAdjointEigenSolver<CMatrix> es(ctx.A);
  ctx.eigvals = es.eigenvalues();
  ctx.eigvecs = es.eigenvectors();
  return ctx;
}

// A^t by Hermitian eigendecomposition.
inline CMatrix matrix_power(const ModularContext& ctx, double t) {
  if (t == 0.0) return CMatrix::Identity(ctx.num_vars, ctx.num_vars);
  Eigen::VectorXcd d(ctx.num_vars);
  for (int i = 0; i < ctx.num_vars; ++i) d(i) = std::pow(std::max(ctx.eigvals(i), kEigenFloor), t);
  return ctx.eigvecs * d.asDiagonal() * ctx.eigvecs.adjoint();
}

// Operator norm of A^t.
inline double matrix_power_norm(const ModularContext& ctx, double t) {
  double m = 0.0;
  for (int i = 0; i < ctx.num_vars; ++i) m = std::max(m, std::pow(std::max(ctx.eigvals(i), kEigenFloor), t));
  return m;
}

// Letterwise linear substitution X_j -> sum_k M(j,k) X_k.
inline NCPoly linear_substitute(const NCPoly& p, const CMatrix& m) {
  const int n = p.num_vars();
  if (m.rows() != n || m.cols() != n) throw Error(ErrorCode::VarCountMismatch, "matrix size");
  // sparse rows
  std::vector<std::vector<std::pair<int, cplx>>> rows(n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (std::abs(m(j, k)) > 1e-15) rows[j].push_back({k, m(j, k)});

  NCPoly out(n, p.cap());
  out.mark_truncated(p.truncated());
  for (const auto& [w, c] : p.terms()) {
    std::vector<std::pair<Word, cplx>> cur{{Word(), c}};
    for (std::size_t i = 0; i < w.size(); ++i) {
      std::vector<std::pair<Word, cplx>> next;
      next.reserve(cur.size() * rows[letter(w, i)].size());
      for (const auto& [u, cu] : cur)
        for (const auto& [k, mk] : rows[letter(w, i)]) next.push_back({u + to_letter(k), cu * mk});
      cur.swap(next);
    }
    for (const auto& [u, cu] : cur) out.add_term(u, cu);
  }
  out.prune();
  return out;
}

// sigma_{is}: X_j -> sum_k [A^{-s}]_{jk} X_k. s = -1 is sigma_{-i}, X -> A X.
inline NCPoly apply_sigma(const ModularContext& ctx, const NCPoly& p, double s) {
  if (p.num_vars() != ctx.num_vars) throw Error(ErrorCode::VarCountMismatch, "apply_sigma");
  if (s == 0.0) return p;
  return linear_substitute(p, matrix_power(ctx, -s));
}

inline bool is_trivial(const ModularContext& ctx) { return ctx.lambdas.empty(); }

// V_0 = 1/2 sum_{jk} [(1+A)/2]_{jk} X_k X_j
inline NCPoly quadratic_potential(const ModularContext& ctx, int cap = kUnbounded) {
  const int n = ctx.num_vars;
  CMatrix h = 0.5 * (CMatrix::Identity(n, n) + ctx.A);
  NCPoly v(n, cap);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) v.add_term(make_word({k, j}), 0.5 * h(j, k));
  v.prune();
  return v;
}

}  // namespace ncfree
