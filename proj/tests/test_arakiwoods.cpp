#include <gtest/gtest.h>

#include "support.hpp"

using namespace ncfree;
using namespace testing_support;

namespace {

TEST(Wick, OneVariableIsQHermite) {
  const auto ctx = ctx_trivial(1);
  for (double q : {-0.5, 0.0, 0.3, 0.8}) {
    const auto h = q_hermite(6, q);
    for (int n = 0; n <= 6; ++n) {
      const NCPoly p = wick_poly(ctx, q, Word(n, 0));
      for (int k = 0; k <= n; ++k) EXPECT_NEAR(std::abs(p.coeff(Word(k, 0)) - h[n][k]), 0.0, 1e-12) << n << " " << k;
    }
  }
}

TEST(Wick, OrthogonalAcrossLevels) {
  const auto ctx = ctx_lambda2();
  const double q = 0.3;
  const MomentOracle o(ctx, q);
  const auto words = words_up_to(2, 3);
  for (const auto& u : words)
    for (const auto& v : words) {
      if (u.size() == v.size()) continue;
      EXPECT_NEAR(std::abs(o.inner(wick_poly(ctx, q, u), wick_poly(ctx, q, v))), 0.0, 1e-12);
    }
}

TEST(Gram, SmallLevels) {
  const auto ctx = ctx_trivial(1);
  EXPECT_NEAR(std::abs(q_gram(ctx, 0.4, 2)(0, 0) - 1.4), 0.0, 1e-15);
  // [3]_q! = (1+q)(1+q+q^2)
  EXPECT_NEAR(std::abs(q_gram(ctx, 0.4, 3)(0, 0) - 1.4 * 1.56), 0.0, 1e-14);
  const auto g = q_gram(ctx_trivial(2), 0.5, 2);
  EXPECT_EQ(g.rows(), 4);
  EXPECT_NEAR(std::abs(g(1, 2) - 0.5), 0.0, 1e-15);  // <e1 e2, e2 e1>
  EXPECT_THROW(q_gram(ctx, 0.4, 7), Error);
  EXPECT_THROW(q_gram(ctx_trivial(2), 0.4, 13, 20), Error);
}

TEST(Gram, MatchesInnerProductOfWickPolys) {
  const auto ctx = ctx_lambda2();
  const double q = -0.2;
  const MomentOracle o(ctx, q);
  const auto words = words_of_length(2, 2);
  const CMatrix g = q_gram(ctx, q, 2);
  for (std::size_t a = 0; a < words.size(); ++a)
    for (std::size_t b = 0; b < words.size(); ++b)
      EXPECT_NEAR(std::abs(g(a, b) - o.inner(wick_poly(ctx, q, words[a]), wick_poly(ctx, q, words[b]))), 0.0, 1e-12);
}

TEST(Basis, Orthonormal) {
  const auto ctx = ctx_lambda2();
  for (double q : {0.0, 0.2}) {
    const MomentOracle o(ctx, q);
    for (int n = 1; n <= 3; ++n) {
      const auto r = orthonormal_basis(ctx, q, n);
      for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < r.size(); ++j)
          EXPECT_NEAR(std::abs(o.inner(r[i], r[j]) - (i == j ? 1.0 : 0.0)), 0.0, 1e-10);
    }
  }
}

TEST(Xi, TrivialAtZeroAndLowLevels) {
  const auto ctx = ctx_trivial(1);
  const XiData x0 = build_xi(ctx, 0.0, 4);
  EXPECT_LT(max_coeff_diff(x0.xi, TensorPoly::unit(1)), 1e-15);
  // N = 1, A = I: level 1 basis is X, level 2 is (X^2 - 1)/sqrt(1+q)
  const double q = 0.3;
  const XiData x = build_xi(ctx, q, 2, kUnbounded);
  const Word e, w1(1, 0), w2(2, 0);
  EXPECT_NEAR(std::abs(x.xi.coeff(e, e) - (1.0 + q * q / (1 + q))), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(x.xi.coeff(w1, w1) - q), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(x.xi.coeff(w2, w2) - q * q / (1 + q)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(x.xi.coeff(w2, e) + q * q / (1 + q)), 0.0, 1e-14);
}

TEST(Xi, SymmetricAndModularInvariant) {
  const auto ctx = ctx_lambda2();
  const XiData x = build_xi(ctx, 0.2, 3, kUnbounded);
  EXPECT_LT(max_coeff_diff(t_dagger(x.xi), x.xi), 1e-12);
  for (double s : {-1.0, 0.5, 1.0}) EXPECT_LT(max_coeff_diff(t_sigma(ctx, x.xi, s, s), x.xi), 1e-11);
}

TEST(Xi, IntertwinesDerivations) {
  // phi(X_j P) = phi (x) phi(d_j P # xi)
  const auto ctx = ctx_lambda2();
  const double q = 0.2;
  const MomentOracle o(ctx, q);
  const XiData x = build_xi(ctx, q, 4, kUnbounded);
  for (const auto& w : words_up_to(2, 5))
    for (int j = 0; j < 2; ++j) {
      const NCPoly p = NCPoly::monomial(2, w);
      EXPECT_NEAR(std::abs(o.moment(Word(1, to_letter(j)) + w) - o.state_tensor(t_mul(partial_sigma(ctx, j, p), x.xi))),
                  0.0, 1e-10);
    }
}

TEST(Xi, PiBound) {
  EXPECT_NEAR(pi_bound(0.01, 1, 1.0, 1.0, 1.0), 0.195122, 1e-6);
  EXPECT_NEAR(pi_bound(0.02, 1, 1.0, 1.0, 1.0), 0.5, 1e-12);
  EXPECT_EQ(pi_bound(0.0, 3, 2.0, 1.0, 1.0), 0.0);
  EXPECT_THROW(pi_bound(0.2, 1, 1.0, 1.0, 1.0), Error);
  EXPECT_NEAR(pi_bound_R(0.0, 1.0), 3.0, 1e-15);
}

TEST(Xi, NeumannInverse) {
  const auto ctx = ctx_trivial(1);
  for (double q : {0.01, 0.02}) {
    XiData x = build_xi(ctx, q, 6);
    const double r = pi_bound_R(q, 1.0);
    invert_xi(ctx, x, r, 1e-14, 1.0);
    EXPECT_TRUE(x.has_inverse);
    EXPECT_LT(x.inverse_residual, 1e-8);
    EXPECT_LE(pi_norm_bound(x.xi - TensorPoly::unit(1, 1.0, x.tensor_cap), r), x.pi_bound_value);
  }
  XiData big = build_xi(ctx, 0.05, 4);
  EXPECT_THROW(invert_xi(ctx, big, pi_bound_R(0.05, 1.0), 1e-14, 1.0), Error);
}

TEST(Conjugate, QuasiFreeGivesX) {
  const auto ctx = ctx_lambda2();
  XiData x = build_xi(ctx, 0.0, 4);
  invert_xi(ctx, x, pi_bound_R(0.0, 1.0), 1e-14, 1.0);
  const auto xi = conjugate_vars(ctx, x, MomentOracle(ctx, 0.0), 3);
  EXPECT_LT(max_vec_diff(xi, variables(2)), 1e-14);
  const auto p = potential_W(ctx, xi, 4);
  EXPECT_LT(max_coeff(p.W), 1e-14);
}

TEST(Conjugate, SmallQ) {
  const auto ctx = ctx_trivial(1);
  const double q = 0.01;
  const int cap = 6;
  XiData x = build_xi(ctx, q, cap);
  invert_xi(ctx, x, pi_bound_R(q, 1.0), 1e-14, 1.0);
  const MomentOracle oq(ctx, q);
  const auto xi = conjugate_vars(ctx, x, oq, cap - 1);
  EXPECT_LT(conjugate_check(oq, ctx, xi, 3), 1e-8);
  EXPECT_LT(max_coeff_diff(adjoint(xi[0]), xi[0]), 1e-14);
  // <xi, X> = 1 and <xi, X^3> = 2 force xi = (1 + 2q) X - q X^3 + O(q^2)
  EXPECT_NEAR(xi[0].coeff(Word(1, 0)).real(), 1.0 + 2 * q, 5 * q * q);
  EXPECT_NEAR(xi[0].coeff(Word(3, 0)).real(), -q, 5 * q * q);
  const auto p = potential_W(ctx, xi, cap);
  EXPECT_LT(p.grad_residual, 1e-12);
  EXPECT_TRUE(is_cyclically_symmetric(ctx, p.W));
}

TEST(Conjugate, EigenRelationTwoVariables) {
  const auto ctx = ctx_lambda2();
  const double q = 0.002;
  const int cap = 4;
  XiData x = build_xi(ctx, q, cap);
  invert_xi(ctx, x, pi_bound_R(q, 1.0), 1e-14, 1.0);
  const MomentOracle oq(ctx, q);
  const auto xi = conjugate_vars(ctx, x, oq, cap - 1);
  EXPECT_LT(conjugate_check(oq, ctx, xi, 2), 1e-6);
  std::vector<NCPoly> s;
  for (const auto& p : xi) s.push_back(apply_sigma(ctx, p, -1.0));
  EXPECT_LT(max_vec_diff(s, scalar_mat_vec(ctx.A, xi)), 1e-10);
  for (int j = 0; j < 2; ++j) EXPECT_LT(max_coeff_diff(adjoint(xi[j]), xi[j]), 1e-12);
  const auto p = potential_W(ctx, xi, cap);
  EXPECT_LT(p.grad_residual, 1e-10);
  EXPECT_LT(p.symmetry_defect, 1e-10);
}

TEST(Conjugate, PotentialShrinksWithQ) {
  const auto ctx = ctx_trivial(1);
  double prev = 1e300;
  for (double q : {0.01, 0.005, 0.002}) {
    const auto d = perturbation(ctx, q, [&] {
      PipelineConfig c;
      c.q = q;
      c.transport.degree_cap = 6;
      return c;
    }());
    const double n = norm_R_sigma(ctx, d.potential.W, 4.0).value;
    EXPECT_LT(n, prev);
    prev = n;
  }
}

}  // namespace
