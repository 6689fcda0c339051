#pragma once

#include <random>
#include <vector>

#include "ncfree/pipeline.hpp"

namespace testing_support {

using namespace ncfree;

// Brute force over all pair partitions, crossings counted from the chord list.
// Shares nothing with the oracle's scan.
inline cplx brute_moment(const ModularContext& ctx, double q, const Word& w) {
  const int n = static_cast<int>(w.size());
  if (n % 2) return 0.0;
  std::vector<int> partner(n, -1);
  cplx total = 0.0;
  auto rec = [&](auto&& self) -> void {
    int first = -1;
    for (int i = 0; i < n; ++i)
      if (partner[i] < 0) {
        first = i;
        break;
      }
    if (first < 0) {
      cplx weight = 1.0;
      int crossings = 0;
      for (int a = 0; a < n; ++a) {
        const int b = partner[a];
        if (b < a) continue;
        weight *= ctx.alpha(letter(w, b), letter(w, a));  // <e_{w_a}, e_{w_b}>_U
        for (int c = a + 1; c < b; ++c)
          if (partner[c] > b) ++crossings;
      }
      total += weight * std::pow(q, crossings);
      return;
    }
    for (int j = first + 1; j < n; ++j) {
      if (partner[j] >= 0) continue;
      partner[first] = j;
      partner[j] = first;
      self(self);
      partner[first] = partner[j] = -1;
    }
  };
  rec(rec);
  return total;
}

// q-Hermite polynomials as coefficient vectors: H_{n+1} = x H_n - [n]_q H_{n-1}.
inline std::vector<std::vector<double>> q_hermite(int nmax, double q) {
  std::vector<std::vector<double>> h{{1.0}, {0.0, 1.0}};
  for (int n = 1; n < nmax; ++n) {
    double qn = 0.0;
    for (int k = 0; k < n; ++k) qn += std::pow(q, k);
    std::vector<double> next(n + 2, 0.0);
    for (int k = 0; k <= n; ++k) next[k + 1] += h[n][k];
    for (int k = 0; k < n; ++k) next[k] -= qn * h[n - 1][k];
    h.push_back(next);
  }
  return h;
}

// Commutative power series reversion: given y = x + sum_{k>=2} a_k x^k, return b with x = y + sum b_k y^k.
// Coefficients by undetermined coefficients on dense vectors.
inline std::vector<double> reversion(const std::vector<double>& a, int order) {
  std::vector<double> b(order + 1, 0.0);
  b[1] = 1.0;
  auto compose = [&](const std::vector<double>& outer, const std::vector<double>& inner) {
    std::vector<double> out(order + 1, 0.0), pw(order + 1, 0.0);
    pw[0] = 1.0;
    for (int k = 0; k <= order; ++k) {
      if (k < static_cast<int>(outer.size()))
        for (int d = 0; d <= order; ++d) out[d] += outer[k] * pw[d];
      std::vector<double> next(order + 1, 0.0);
      for (int i = 0; i <= order; ++i)
        for (int j = 0; i + j <= order; ++j) next[i + j] += pw[i] * inner[j];
      pw = next;
    }
    return out;
  };
  for (int d = 2; d <= order; ++d) {
    const auto c = compose(a, b);  // a(b(y)) should be y
    b[d] -= c[d];
  }
  return b;
}

inline NCPoly random_poly(std::mt19937& rng, int n, int max_deg, bool complex_coeffs = true, int min_deg = 0) {
  std::normal_distribution<> nd;
  NCPoly p(n);
  for (const auto& w : words_up_to(n, max_deg))
    if (static_cast<int>(w.size()) >= min_deg) p.add_term(w, cplx(nd(rng), complex_coeffs ? nd(rng) : 0.0));
  p.prune();
  return p;
}

// Sparse random polynomial: a few monomials.
inline NCPoly random_sparse(std::mt19937& rng, int n, int max_deg, int terms) {
  std::normal_distribution<> nd;
  std::uniform_int_distribution<> len(0, max_deg), let(0, n - 1);
  NCPoly p(n);
  for (int t = 0; t < terms; ++t) {
    Word w;
    const int l = len(rng);
    for (int i = 0; i < l; ++i) w.push_back(to_letter(let(rng)));
    p.add_term(w, cplx(nd(rng), nd(rng)));
  }
  p.prune();
  return p;
}

inline TensorPoly random_tensor(std::mt19937& rng, int n, int max_total, int terms) {
  std::normal_distribution<> nd;
  std::uniform_int_distribution<> let(0, n - 1);
  TensorPoly t(n);
  for (int k = 0; k < terms; ++k) {
    std::uniform_int_distribution<> la(0, max_total);
    const int a = la(rng);
    std::uniform_int_distribution<> lb(0, max_total - a);
    const int b = lb(rng);
    Word u, v;
    for (int i = 0; i < a; ++i) u.push_back(to_letter(let(rng)));
    for (int i = 0; i < b; ++i) v.push_back(to_letter(let(rng)));
    t.add_term(u, v, cplx(nd(rng), nd(rng)));
  }
  t.prune();
  return t;
}

// Random self-adjoint element of the centralizer.
inline NCPoly random_centralizer(std::mt19937& rng, const ModularContext& ctx, int max_deg) {
  const NCPoly h = random_poly(rng, ctx.num_vars, max_deg);
  return centralizer_part(ctx, 0.5 * (h + adjoint(h)));
}

inline double rel(double err, double scale) { return err / std::max(1.0, scale); }

inline double max_vec_diff(const std::vector<NCPoly>& a, const std::vector<NCPoly>& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, max_coeff_diff(a[j], b[j]));
  return m;
}

inline ModularContext ctx_trivial(int n) { return build_context({}, n); }
inline ModularContext ctx_lambda2() { return build_context({2.0}, 0); }

}  // namespace testing_support
