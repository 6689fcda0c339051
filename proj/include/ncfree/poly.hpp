#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace ncfree {

using cplx = std::complex<double>;

// A word is a monomial X_{w[0]} X_{w[1]} ... stored one letter per char,
// letters are 0-based variable indices. The empty word is the constant 1.
using Word = std::string;

inline constexpr int kUnbounded = 1 << 20;
inline constexpr double kPruneTol = 1e-14;

inline int letter(const Word& w, std::size_t i) { return static_cast<unsigned char>(w[i]); }
inline char to_letter(int j) { return static_cast<char>(static_cast<unsigned char>(j)); }

inline Word make_word(std::initializer_list<int> idx) {
  Word w;
  for (int j : idx) w.push_back(to_letter(j));
  return w;
}

inline Word make_word(const std::vector<int>& idx) {
  Word w;
  for (int j : idx) w.push_back(to_letter(j));
  return w;
}

inline std::vector<int> word_indices(const Word& w) {
  std::vector<int> out;
  for (std::size_t i = 0; i < w.size(); ++i) out.push_back(letter(w, i));
  return out;
}

inline Word reversed(Word w) {
  std::reverse(w.begin(), w.end());
  return w;
}

// All words of length n over n_vars letters, lexicographic.
inline std::vector<Word> words_of_length(int n_vars, int n) {
  std::vector<Word> out{Word()};
  for (int k = 0; k < n; ++k) {
    std::vector<Word> next;
    next.reserve(out.size() * n_vars);
    for (const auto& w : out)
      for (int j = 0; j < n_vars; ++j) next.push_back(w + to_letter(j));
    out.swap(next);
  }
  return out;
}

inline std::vector<Word> words_up_to(int n_vars, int max_len) {
  std::vector<Word> out;
  for (int n = 0; n <= max_len; ++n) {
    auto ws = words_of_length(n_vars, n);
    out.insert(out.end(), ws.begin(), ws.end());
  }
  return out;
}

// Truncated non-commutative power series in num_vars variables.
class NCPoly {
 public:
  using Terms = std::map<Word, cplx>;

  NCPoly() = default;
  explicit NCPoly(int num_vars, int cap = kUnbounded) : n_(num_vars), cap_(cap) {}

  static NCPoly constant(int num_vars, cplx c, int cap = kUnbounded) {
    NCPoly p(num_vars, cap);
    p.add_term(Word(), c);
    p.prune();
    return p;
  }
  static NCPoly var(int num_vars, int j, int cap = kUnbounded) {
    if (j < 0 || j >= num_vars) throw Error(ErrorCode::IndexOutOfRange, "variable index");
    NCPoly p(num_vars, cap);
    p.add_term(Word(1, to_letter(j)), 1.0);
    return p;
  }
  static NCPoly monomial(int num_vars, const Word& w, cplx c = 1.0, int cap = kUnbounded) {
    NCPoly p(num_vars, cap);
    p.add_term(w, c);
    p.prune();
    return p;
  }

  int num_vars() const { return n_; }
  int cap() const { return cap_; }
  bool truncated() const { return truncated_; }
  void mark_truncated(bool t = true) { truncated_ = truncated_ || t; }
  const Terms& terms() const { return c_; }
  bool is_zero() const { return c_.empty(); }
  std::size_t size() const { return c_.size(); }

  // Accumulate c onto word w. Words beyond the cap are dropped and taint the result.
  void add_term(const Word& w, cplx c) {
    if (static_cast<int>(w.size()) > cap_) {
      if (c != cplx(0.0)) truncated_ = true;
      return;
    }
    c_[w] += c;
  }

  cplx coeff(const Word& w) const {
    auto it = c_.find(w);
    return it == c_.end() ? cplx(0.0) : it->second;
  }

  int degree() const {
    int d = 0;
    for (const auto& [w, c] : c_) d = std::max(d, static_cast<int>(w.size()));
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

  // Lower the cap, dropping (and flagging) anything above it.
  void set_cap(int cap) {
    cap_ = cap;
    for (auto it = c_.begin(); it != c_.end();) {
      if (static_cast<int>(it->first.size()) > cap_) {
        truncated_ = true;
        it = c_.erase(it);
      } else {
        ++it;
      }
    }
  }

  NCPoly& operator+=(const NCPoly& o) {
    check_vars(o);
    if (o.cap_ < cap_) set_cap(o.cap_);
    for (const auto& [w, c] : o.c_) add_term(w, c);
    truncated_ = truncated_ || o.truncated_;
    prune();
    return *this;
  }
  NCPoly& operator-=(const NCPoly& o) {
    check_vars(o);
    if (o.cap_ < cap_) set_cap(o.cap_);
    for (const auto& [w, c] : o.c_) add_term(w, -c);
    truncated_ = truncated_ || o.truncated_;
    prune();
    return *this;
  }
  NCPoly& operator*=(cplx s) {
    for (auto& [w, c] : c_) c *= s;
    prune();
    return *this;
  }

  void check_vars(const NCPoly& o) const {
    if (o.n_ != n_) throw Error(ErrorCode::VarCountMismatch, "polynomials over different variable counts");
  }

 private:
  int n_ = 0;
  int cap_ = kUnbounded;
  bool truncated_ = false;
  Terms c_;
};

inline NCPoly operator+(NCPoly a, const NCPoly& b) { return a += b; }
inline NCPoly operator-(NCPoly a, const NCPoly& b) { return a -= b; }
inline NCPoly operator*(cplx s, NCPoly a) { return a *= s; }
inline NCPoly operator-(NCPoly a) { return a *= -1.0; }

inline NCPoly add(const NCPoly& p, const NCPoly& q) { return p + q; }
inline NCPoly scalar_mul(cplx c, const NCPoly& p) { return c * p; }

inline NCPoly mul(const NCPoly& p, const NCPoly& q) {
  p.check_vars(q);
  NCPoly out(p.num_vars(), std::min(p.cap(), q.cap()));
  out.mark_truncated(p.truncated() || q.truncated());
  const int cap = out.cap();
  for (const auto& [a, ca] : p.terms())
    for (const auto& [b, cb] : q.terms()) {
      if (static_cast<int>(a.size() + b.size()) > cap) {
        out.mark_truncated();
        continue;
      }
      out.add_term(a + b, ca * cb);
    }
  out.prune();
  return out;
}

inline NCPoly operator*(const NCPoly& p, const NCPoly& q) { return mul(p, q); }

inline NCPoly adjoint(const NCPoly& p) {
  NCPoly out(p.num_vars(), p.cap());
  out.mark_truncated(p.truncated());
  for (const auto& [w, c] : p.terms()) out.add_term(reversed(w), std::conj(c));
  return out;
}

inline NCPoly project_degree(const NCPoly& p, int n) {
  NCPoly out(p.num_vars(), p.cap());
  out.mark_truncated(p.truncated());
  for (const auto& [w, c] : p.terms())
    if (static_cast<int>(w.size()) == n) out.add_term(w, c);
  return out;
}

inline NCPoly with_cap(NCPoly p, int cap) {
  p.set_cap(cap);
  return p;
}

// Same terms under a new cap, which may be larger than the old one.
inline NCPoly recapped(const NCPoly& p, int cap) {
  NCPoly out(p.num_vars(), cap);
  out.mark_truncated(p.truncated());
  for (const auto& [w, c] : p.terms()) out.add_term(w, c);
  return out;
}

inline std::vector<NCPoly> recapped_vec(const std::vector<NCPoly>& v, int cap) {
  std::vector<NCPoly> out;
  for (const auto& p : v) out.push_back(recapped(p, cap));
  return out;
}

// P(Y_1, ..., Y_N). Prefix products are truncated at the cap of Y, which is
// safe because later factors can only raise degree.
inline NCPoly substitute(const NCPoly& p, const std::vector<NCPoly>& y) {
  if (static_cast<int>(y.size()) != p.num_vars())
    throw Error(ErrorCode::VarCountMismatch, "substitute: need one polynomial per variable");
  if (y.empty()) return p;
  const int n = y[0].num_vars();
  int cap = y[0].cap();
  for (const auto& yj : y) {
    if (yj.num_vars() != n) throw Error(ErrorCode::VarCountMismatch, "substitute: mixed variable counts");
    cap = std::min(cap, yj.cap());
  }
  NCPoly out(n, cap);
  out.mark_truncated(p.truncated());
  for (const auto& yj : y) out.mark_truncated(yj.truncated());

  // Stack of prefix products along the lexicographic walk of p's words.
  std::vector<NCPoly> stack{NCPoly::constant(n, 1.0, cap)};
  Word prefix;
  for (const auto& [w, c] : p.terms()) {
    std::size_t common = 0;
    while (common < prefix.size() && common < w.size() && prefix[common] == w[common]) ++common;
    prefix.resize(common);
    stack.resize(common + 1);
    for (std::size_t i = common; i < w.size(); ++i) {
      stack.push_back(mul(stack.back(), y[letter(w, i)]));
      prefix.push_back(w[i]);
    }
    const NCPoly& val = stack.back();
    out.mark_truncated(val.truncated());
    for (const auto& [u, cu] : val.terms()) out.add_term(u, c * cu);
  }
  out.prune();
  return out;
}

inline double norm_R(const NCPoly& p, double r) {
  double s = 0.0;
  for (const auto& [w, c] : p.terms()) s += std::abs(c) * std::pow(r, static_cast<double>(w.size()));
  return s;
}

// Largest coefficientwise modulus of p - q.
inline double max_coeff_diff(const NCPoly& p, const NCPoly& q) {
  double m = 0.0;
  for (const auto& [w, c] : p.terms()) m = std::max(m, std::abs(c - q.coeff(w)));
  for (const auto& [w, c] : q.terms())
    if (!p.terms().count(w)) m = std::max(m, std::abs(c));
  return m;
}

inline double max_coeff(const NCPoly& p) {
  double m = 0.0;
  for (const auto& [w, c] : p.terms()) m = std::max(m, std::abs(c));
  return m;
}

// Identity tuple (X_1, ..., X_N).
inline std::vector<NCPoly> variables(int n, int cap = kUnbounded) {
  std::vector<NCPoly> x;
  for (int j = 0; j < n; ++j) x.push_back(NCPoly::var(n, j, cap));
  return x;
}

}  // namespace ncfree
