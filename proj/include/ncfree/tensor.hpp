#pragma once

#include <map>
#include <utility>
#include <vector>

#include "modular.hpp"

namespace ncfree {

using WordPair = std::pair<Word, Word>;

// Element of P (x) P^op: (a, b) stands for a (x) b°.
class TensorPoly {
 public:
  using Terms = std::map<WordPair, cplx>;

  TensorPoly() = default;
  explicit TensorPoly(int num_vars, int cap = kUnbounded) : n_(num_vars), cap_(cap) {}

  static TensorPoly unit(int num_vars, cplx c = 1.0, int cap = kUnbounded) {
    TensorPoly t(num_vars, cap);
    t.add_term(Word(), Word(), c);
    t.prune();
    return t;
  }
  static TensorPoly elementary(const NCPoly& a, const NCPoly& b, int cap = kUnbounded) {
    a.check_vars(b);
    TensorPoly t(a.num_vars(), cap);
    for (const auto& [u, cu] : a.terms())
      for (const auto& [v, cv] : b.terms()) t.add_term(u, v, cu * cv);
    t.mark_truncated(a.truncated() || b.truncated());
    t.prune();
    return t;
  }

  int num_vars() const { return n_; }
  int cap() const { return cap_; }
  bool truncated() const { return truncated_; }
  void mark_truncated(bool t = true) { truncated_ = truncated_ || t; }
  const Terms& terms() const { return c_; }
  bool is_zero() const { return c_.empty(); }
  std::size_t size() const { return c_.size(); }

  void add_term(const Word& a, const Word& b, cplx c) {
    if (static_cast<int>(a.size() + b.size()) > cap_) {
      if (c != cplx(0.0)) truncated_ = true;
      return;
    }
    c_[{a, b}] += c;
  }

  cplx coeff(const Word& a, const Word& b) const {
    auto it = c_.find({a, b});
    return it == c_.end() ? cplx(0.0) : it->second;
  }

  int degree() const {
    int d = 0;
    for (const auto& [k, c] : c_) d = std::max(d, static_cast<int>(k.first.size() + k.second.size()));
    return d;
  }

  void prune(double tol = kPruneTol) {
    for (auto it = c_.begin(); it != c_.end();) {
      if (std::abs(it->second) < tol)
        it = c_.erase(it);
      else
        ++it;
    }
  }

  void set_cap(int cap) {
    cap_ = cap;
    for (auto it = c_.begin(); it != c_.end();) {
      if (static_cast<int>(it->first.first.size() + it->first.second.size()) > cap_) {
        truncated_ = true;
        it = c_.erase(it);
      } else {
        ++it;
      }
    }
  }

  TensorPoly& operator+=(const TensorPoly& o) {
    check_vars(o);
    if (o.cap_ < cap_) set_cap(o.cap_);
    for (const auto& [k, c] : o.c_) add_term(k.first, k.second, c);
    truncated_ = truncated_ || o.truncated_;
    prune();
    return *this;
  }
  TensorPoly& operator-=(const TensorPoly& o) {
    check_vars(o);
    if (o.cap_ < cap_) set_cap(o.cap_);
    for (const auto& [k, c] : o.c_) add_term(k.first, k.second, -c);
    truncated_ = truncated_ || o.truncated_;
    prune();
    return *this;
  }
  TensorPoly& operator*=(cplx s) {
    for (auto& [k, c] : c_) c *= s;
    prune();
    return *this;
  }

  void check_vars(const TensorPoly& o) const {
    if (o.n_ != n_) throw Error(ErrorCode::VarCountMismatch, "tensors over different variable counts");
  }

 private:
  int n_ = 0;
  int cap_ = kUnbounded;
  bool truncated_ = false;
  Terms c_;
};

inline TensorPoly operator+(TensorPoly a, const TensorPoly& b) { return a += b; }
inline TensorPoly operator-(TensorPoly a, const TensorPoly& b) { return a -= b; }
inline TensorPoly operator*(cplx s, TensorPoly a) { return a *= s; }

inline TensorPoly with_cap(TensorPoly t, int cap) {
  t.set_cap(cap);
  return t;
}

// Same terms under a new cap, which may be larger than the old one.
inline TensorPoly recapped(const TensorPoly& t, int cap) {
  TensorPoly out(t.num_vars(), cap);
  out.mark_truncated(t.truncated());
  for (const auto& [k, c] : t.terms()) out.add_term(k.first, k.second, c);
  return out;
}

// (a (x) b) # (c (x) d) = ac (x) db
inline TensorPoly t_mul(const TensorPoly& s, const TensorPoly& t) {
  s.check_vars(t);
  TensorPoly out(s.num_vars(), std::min(s.cap(), t.cap()));
  out.mark_truncated(s.truncated() || t.truncated());
  const std::size_t cap = static_cast<std::size_t>(out.cap());
  for (const auto& [k1, c1] : s.terms())
    for (const auto& [k2, c2] : t.terms()) {
      if (k1.first.size() + k1.second.size() + k2.first.size() + k2.second.size() > cap) {
        out.mark_truncated();
        continue;
      }
      out.add_term(k1.first + k2.first, k2.second + k1.second, c1 * c2);
    }
  out.prune();
  return out;
}

// (a (x) b) # g = a g b
inline NCPoly t_apply(const TensorPoly& s, const NCPoly& g) {
  if (s.num_vars() != g.num_vars()) throw Error(ErrorCode::VarCountMismatch, "t_apply");
  NCPoly out(g.num_vars(), g.cap());
  out.mark_truncated(s.truncated() || g.truncated());
  for (const auto& [k, c] : s.terms())
    for (const auto& [w, cw] : g.terms()) out.add_term(k.first + w + k.second, c * cw);
  out.prune();
  return out;
}

// (a (x) b)^* = a^* (x) b^*
inline TensorPoly t_star(const TensorPoly& s) {
  TensorPoly out(s.num_vars(), s.cap());
  out.mark_truncated(s.truncated());
  for (const auto& [k, c] : s.terms()) out.add_term(reversed(k.first), reversed(k.second), std::conj(c));
  return out;
}

// (a (x) b)^dagger = b^* (x) a^*
inline TensorPoly t_dagger(const TensorPoly& s) {
  TensorPoly out(s.num_vars(), s.cap());
  out.mark_truncated(s.truncated());
  for (const auto& [k, c] : s.terms()) out.add_term(reversed(k.second), reversed(k.first), std::conj(c));
  return out;
}

// (a (x) b)^diamond = b (x) a
inline TensorPoly t_diamond(const TensorPoly& s) {
  TensorPoly out(s.num_vars(), s.cap());
  out.mark_truncated(s.truncated());
  for (const auto& [k, c] : s.terms()) out.add_term(k.second, k.first, c);
  return out;
}

// m(a (x) b) = ab
inline NCPoly t_flip_m(const TensorPoly& s, int cap = kUnbounded) {
  NCPoly out(s.num_vars(), std::min(cap, s.cap()));
  out.mark_truncated(s.truncated());
  for (const auto& [k, c] : s.terms()) out.add_term(k.first + k.second, c);
  out.prune();
  return out;
}

// Left and right legs of a single term, as polynomials.
inline NCPoly leg(int n, const Word& w, cplx c = 1.0) { return NCPoly::monomial(n, w, c); }

// sigma_{i s_left} (x) sigma_{i s_right}, legwise.
inline TensorPoly t_sigma(const ModularContext& ctx, const TensorPoly& s, double s_left, double s_right) {
  if (s.num_vars() != ctx.num_vars) throw Error(ErrorCode::VarCountMismatch, "t_sigma");
  if (s_left == 0.0 && s_right == 0.0) return s;
  const CMatrix ml = matrix_power(ctx, -s_left), mr = matrix_power(ctx, -s_right);
  // group by left word so each distinct leg is transformed once
  std::map<Word, NCPoly> left_cache, right_cache;
  auto image = [&](std::map<Word, NCPoly>& cache, const Word& w, double sv, const CMatrix& m) -> const NCPoly& {
    auto it = cache.find(w);
    if (it != cache.end()) return it->second;
    NCPoly mono = NCPoly::monomial(ctx.num_vars, w);
    return cache.emplace(w, sv == 0.0 ? mono : linear_substitute(mono, m)).first->second;
  };
  TensorPoly out(s.num_vars(), s.cap());
  out.mark_truncated(s.truncated());
  for (const auto& [k, c] : s.terms()) {
    const NCPoly& l = image(left_cache, k.first, s_left, ml);
    const NCPoly& r = image(right_cache, k.second, s_right, mr);
    for (const auto& [u, cu] : l.terms())
      for (const auto& [v, cv] : r.terms()) out.add_term(u, v, c * cu * cv);
  }
  out.prune();
  return out;
}

// Representation-dependent upper bound on the projective norm.
inline double pi_norm_bound(const TensorPoly& s, double r) {
  double total = 0.0;
  for (const auto& [k, c] : s.terms())
    total += std::abs(c) * std::pow(r, static_cast<double>(k.first.size() + k.second.size()));
  return total;
}

inline double max_coeff_diff(const TensorPoly& s, const TensorPoly& t) {
  double m = 0.0;
  for (const auto& [k, c] : s.terms()) m = std::max(m, std::abs(c - t.coeff(k.first, k.second)));
  for (const auto& [k, c] : t.terms())
    if (!s.terms().count(k)) m = std::max(m, std::abs(c));
  return m;
}

// Only terms of total degree <= d.
inline TensorPoly low_degree(const TensorPoly& s, int d) {
  TensorPoly out(s.num_vars(), s.cap());
  for (const auto& [k, c] : s.terms())
    if (static_cast<int>(k.first.size() + k.second.size()) <= d) out.add_term(k.first, k.second, c);
  return out;
}

// ---------------------------------------------------------------------------
// N x N matrices over P (x) P^op, row-major.

class TensorMatrix {
 public:
  TensorMatrix() = default;
  TensorMatrix(int dim, int num_vars, int cap = kUnbounded)
      : dim_(dim), entries_(static_cast<std::size_t>(dim) * dim, TensorPoly(num_vars, cap)) {}

  static TensorMatrix identity(int dim, int num_vars, int cap = kUnbounded) {
    TensorMatrix m(dim, num_vars, cap);
    for (int i = 0; i < dim; ++i) m(i, i) = TensorPoly::unit(num_vars, 1.0, cap);
    return m;
  }
  // scalar matrix c_{ij} (1 (x) 1)
  static TensorMatrix scalar(const CMatrix& c, int num_vars, int cap = kUnbounded) {
    const int d = static_cast<int>(c.rows());
    TensorMatrix m(d, num_vars, cap);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = TensorPoly::unit(num_vars, c(i, j), cap);
    return m;
  }

  int dim() const { return dim_; }
  TensorPoly& operator()(int i, int j) { return entries_[static_cast<std::size_t>(i) * dim_ + j]; }
  const TensorPoly& operator()(int i, int j) const { return entries_[static_cast<std::size_t>(i) * dim_ + j]; }
  int num_vars() const { return entries_.empty() ? 0 : entries_[0].num_vars(); }
  bool truncated() const {
    for (const auto& e : entries_)
      if (e.truncated()) return true;
    return false;
  }

 private:
  int dim_ = 0;
  std::vector<TensorPoly> entries_;
};

inline void check_dim(const TensorMatrix& a, int d) {
  if (a.dim() != d) throw Error(ErrorCode::DimMismatch, "matrix dimension");
}

inline TensorMatrix mat_add(const TensorMatrix& a, const TensorMatrix& b) {
  check_dim(b, a.dim());
  TensorMatrix out = a;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) out(i, j) += b(i, j);
  return out;
}

inline TensorMatrix mat_scale(cplx s, TensorMatrix a) {
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) a(i, j) *= s;
  return a;
}

// [Q # Q']_{ij} = sum_k Q_{ik} # Q'_{kj}
inline TensorMatrix mat_mul(const TensorMatrix& q, const TensorMatrix& qp) {
  check_dim(qp, q.dim());
  const int d = q.dim();
  const int cap = std::min(q(0, 0).cap(), qp(0, 0).cap());
  TensorMatrix out(d, q.num_vars(), cap);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        if (q(i, k).is_zero() || qp(k, j).is_zero()) {
          out(i, j).mark_truncated(q(i, k).truncated() || qp(k, j).truncated());
          continue;
        }
        out(i, j) += t_mul(q(i, k), qp(k, j));
      }
  return out;
}

// (Q # g)_i = sum_j Q_{ij} # g_j
inline std::vector<NCPoly> mat_vec(const TensorMatrix& q, const std::vector<NCPoly>& g) {
  if (static_cast<int>(g.size()) != q.dim()) throw Error(ErrorCode::DimMismatch, "mat_vec");
  std::vector<NCPoly> out;
  for (int i = 0; i < q.dim(); ++i) {
    NCPoly acc(g[0].num_vars(), g[0].cap());
    for (int j = 0; j < q.dim(); ++j) acc += t_apply(q(i, j), g[j]);
    out.push_back(acc);
  }
  return out;
}

// f # g = sum_j f_j g_j
inline NCPoly vec_dot(const std::vector<NCPoly>& f, const std::vector<NCPoly>& g) {
  if (f.size() != g.size() || f.empty()) throw Error(ErrorCode::DimMismatch, "vec_dot");
  NCPoly acc(f[0].num_vars(), std::min(f[0].cap(), g[0].cap()));
  for (std::size_t j = 0; j < f.size(); ++j) acc += mul(f[j], g[j]);
  return acc;
}

// Scalar matrix acting on a vector of polynomials.
inline std::vector<NCPoly> scalar_mat_vec(const CMatrix& m, const std::vector<NCPoly>& g) {
  if (m.rows() != static_cast<int>(g.size())) throw Error(ErrorCode::DimMismatch, "scalar_mat_vec");
  std::vector<NCPoly> out;
  for (int i = 0; i < m.rows(); ++i) {
    NCPoly acc(g[0].num_vars(), g[0].cap());
    for (int j = 0; j < m.cols(); ++j)
      if (std::abs(m(i, j)) > 0) acc += m(i, j) * g[j];
    out.push_back(acc);
  }
  return out;
}

// sum_{ij} M_{ij} Q_{ji}
inline TensorPoly weighted_trace(const CMatrix& m, const TensorMatrix& q) {
  check_dim(q, static_cast<int>(m.rows()));
  TensorPoly acc(q.num_vars(), q(0, 0).cap());
  for (int i = 0; i < q.dim(); ++i)
    for (int j = 0; j < q.dim(); ++j) {
      acc.mark_truncated(q(j, i).truncated());
      if (std::abs(m(i, j)) > 0 && !q(j, i).is_zero()) acc += m(i, j) * q(j, i);
    }
  return acc;
}

inline TensorPoly trace(const TensorMatrix& q) {
  return weighted_trace(CMatrix::Identity(q.dim(), q.dim()), q);
}
inline TensorPoly trace_A(const ModularContext& ctx, const TensorMatrix& q) { return weighted_trace(ctx.A, q); }
inline TensorPoly trace_Ainv(const ModularContext& ctx, const TensorMatrix& q) {
  return weighted_trace(matrix_power(ctx, -1.0), q);
}

inline double pi_norm_bound_mat(const TensorMatrix& q, double r) {
  double best = 0.0;
  for (int i = 0; i < q.dim(); ++i) {
    double row = 0.0;
    for (int j = 0; j < q.dim(); ++j) row += pi_norm_bound(q(i, j), r);
    best = std::max(best, row);
  }
  return best;
}

inline TensorMatrix mat_sigma(const ModularContext& ctx, const TensorMatrix& q, double s_left, double s_right) {
  TensorMatrix out = q;
  for (int i = 0; i < q.dim(); ++i)
    for (int j = 0; j < q.dim(); ++j) out(i, j) = t_sigma(ctx, q(i, j), s_left, s_right);
  return out;
}

inline TensorMatrix mat_with_cap(TensorMatrix q, int cap) {
  for (int i = 0; i < q.dim(); ++i)
    for (int j = 0; j < q.dim(); ++j) q(i, j).set_cap(cap);
  return q;
}

inline double max_coeff_diff(const TensorMatrix& a, const TensorMatrix& b) {
  check_dim(b, a.dim());
  double m = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) m = std::max(m, max_coeff_diff(a(i, j), b(i, j)));
  return m;
}

}  // namespace ncfree
