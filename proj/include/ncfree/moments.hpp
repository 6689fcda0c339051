#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "tensor.hpp"

namespace ncfree {

// phi_q on monomials: sum over pair partitions of q^{crossings} times the
// product of <e_{w_a}, e_{w_b}>_U = alpha_{w_b w_a} over chords a < b.
class MomentOracle {
 public:
  MomentOracle(const ModularContext& ctx, double q)
      : ctx_(std::make_shared<ModularContext>(ctx)), q_(q), cache_(std::make_shared<Cache>()) {
    if (!(q > -1.0 && q < 1.0)) throw Error(ErrorCode::BadInput, "q must lie in (-1, 1)");
  }

  const ModularContext& ctx() const { return *ctx_; }
  double q() const { return q_; }
  int num_vars() const { return ctx_->num_vars; }

  // <e_j, e_k>_U
  cplx pairing(int j, int k) const { return ctx_->alpha(k, j); }

  cplx moment(const Word& w) const {
    for (std::size_t i = 0; i < w.size(); ++i)
      if (letter(w, i) >= num_vars()) throw Error(ErrorCode::IndexOutOfRange, "moment: letter out of range");
    if (w.size() % 2 == 1) return 0.0;
    if (q_ == 0.0) return noncrossing(w);
    return with_crossings(Word(), w);
  }

  cplx state(const NCPoly& p) const {
    check(p.num_vars());
    cplx s = 0.0;
    for (const auto& [w, c] : p.terms()) s += c * moment(w);
    return s;
  }

  cplx state_tensor(const TensorPoly& t) const {
    check(t.num_vars());
    cplx s = 0.0;
    for (const auto& [k, c] : t.terms()) s += c * moment(k.first) * moment(k.second);
    return s;
  }

  // <P, Q> = phi(P^* Q), computed without truncation
  cplx inner(const NCPoly& p, const NCPoly& q) const {
    check(p.num_vars());
    check(q.num_vars());
    cplx s = 0.0;
    for (const auto& [u, cu] : p.terms())
      for (const auto& [v, cv] : q.terms()) s += std::conj(cu) * cv * moment(reversed(u) + v);
    return s;
  }

  // (phi (x) 1)(a (x) b) = phi(a) b
  NCPoly contract_left(const TensorPoly& t, int cap = kUnbounded) const {
    check(t.num_vars());
    NCPoly out(t.num_vars(), std::min(cap, t.cap()));
    out.mark_truncated(t.truncated());
    for (const auto& [k, c] : t.terms()) {
      const cplx m = moment(k.first);
      if (m != cplx(0.0)) out.add_term(k.second, c * m);
    }
    out.prune();
    return out;
  }

  // (1 (x) phi)(a (x) b) = phi(b) a
  NCPoly contract_right(const TensorPoly& t, int cap = kUnbounded) const {
    check(t.num_vars());
    NCPoly out(t.num_vars(), std::min(cap, t.cap()));
    out.mark_truncated(t.truncated());
    for (const auto& [k, c] : t.terms()) {
      const cplx m = moment(k.second);
      if (m != cplx(0.0)) out.add_term(k.first, c * m);
    }
    out.prune();
    return out;
  }

  std::size_t cache_size() const {
    std::lock_guard<std::mutex> lock(cache_->m);
    return cache_->map.size();
  }

 private:
  struct Cache {
    std::mutex m;
    std::unordered_map<std::string, cplx> map;
  };

  void check(int n) const {
    if (n != num_vars()) throw Error(ErrorCode::VarCountMismatch, "oracle variable count");
  }

  bool lookup(const std::string& key, cplx& out) const {
    std::lock_guard<std::mutex> lock(cache_->m);
    auto it = cache_->map.find(key);
    if (it == cache_->map.end()) return false;
    out = it->second;
    return true;
  }
  void store(const std::string& key, cplx v) const {
    std::lock_guard<std::mutex> lock(cache_->m);
    cache_->map.emplace(key, v);
  }

  // q = 0: pair the first letter with position b; the inside and outside
  // factor because chords cannot cross.
  cplx noncrossing(const Word& w) const {
    if (w.empty()) return 1.0;
    if (w.size() % 2 == 1) return 0.0;
    cplx v;
    if (lookup(w, v)) return v;
    v = 0.0;
    const int first = letter(w, 0);
    for (std::size_t b = 1; b < w.size(); b += 2) {
      const cplx wt = pairing(first, letter(w, b));
      if (wt == cplx(0.0)) continue;
      const cplx inside = noncrossing(w.substr(1, b - 1));
      if (inside == cplx(0.0)) continue;
      v += wt * inside * noncrossing(w.substr(b + 1));
    }
    store(w, v);
    return v;
  }

  // General q: scan left to right keeping the letters of open chords.
  // Closing the chord at depth t below the top crosses the t chords opened
  // after it that are still open, so it costs q^t.
  cplx with_crossings(const Word& open, const Word& rest) const {
    if (rest.empty()) return open.empty() ? 1.0 : 0.0;
    if (open.size() > rest.size() || (open.size() + rest.size()) % 2 == 1) return 0.0;
    std::string key = open;
    key.push_back('\xff');
    key += rest;
    cplx v;
    if (lookup(key, v)) return v;
    v = 0.0;
    const int x = letter(rest, 0);
    const Word tail = rest.substr(1);
    if (open.size() + 1 <= tail.size()) v += with_crossings(open + rest[0], tail);
    double qt = 1.0;
    for (std::size_t t = 0; t < open.size(); ++t) {
      const std::size_t pos = open.size() - 1 - t;
      const cplx wt = pairing(letter(open, pos), x);
      if (wt != cplx(0.0)) {
        Word rem = open;
        rem.erase(pos, 1);
        v += qt * wt * with_crossings(rem, tail);
      }
      qt *= q_;
    }
    store(key, v);
    return v;
  }

  std::shared_ptr<ModularContext> ctx_;
  double q_;
  std::shared_ptr<Cache> cache_;
};

// A moment functional w -> phi(X_w) for some N-tuple.
class Law {
 public:
  using Fn = std::function<cplx(const Word&)>;
  Law(int num_vars, Fn fn) : n_(num_vars), fn_(std::move(fn)) {}

  int num_vars() const { return n_; }
  cplx operator()(const Word& w) const { return fn_(w); }

  cplx state(const NCPoly& p) const {
    cplx s = 0.0;
    for (const auto& [w, c] : p.terms()) s += c * fn_(w);
    return s;
  }
  cplx state_tensor(const TensorPoly& t) const {
    cplx s = 0.0;
    for (const auto& [k, c] : t.terms()) s += c * fn_(k.first) * fn_(k.second);
    return s;
  }

 private:
  int n_;
  Fn fn_;
};

inline Law oracle_law(const MomentOracle& o) {
  return Law(o.num_vars(), [o](const Word& w) { return o.moment(w); });
}

// phi_Y(P) := phi(P(Y)). Products are truncated at max_degree (default: exact).
inline Law law_of(const MomentOracle& o, const std::vector<NCPoly>& y, int max_degree = kUnbounded) {
  if (static_cast<int>(y.size()) != o.num_vars()) throw Error(ErrorCode::DimMismatch, "law_of");
  struct State {
    std::mutex m;
    std::vector<NCPoly> y;
    std::unordered_map<Word, NCPoly> prefix;
    std::unordered_map<Word, cplx> memo;
  };
  auto st = std::make_shared<State>();
  for (const auto& yj : y) st->y.push_back(recapped(yj, max_degree));
  auto product = [st, max_degree](auto&& self, const Word& w) -> NCPoly {
    if (w.empty()) return NCPoly::constant(static_cast<int>(st->y.size()), 1.0, max_degree);
    {
      std::lock_guard<std::mutex> lock(st->m);
      auto it = st->prefix.find(w);
      if (it != st->prefix.end()) return it->second;
    }
    NCPoly v = mul(self(self, w.substr(0, w.size() - 1)), st->y[letter(w, w.size() - 1)]);
    std::lock_guard<std::mutex> lock(st->m);
    st->prefix.emplace(w, v);
    return v;
  };
  return Law(o.num_vars(), [o, st, product](const Word& w) -> cplx {
    {
      std::lock_guard<std::mutex> lock(st->m);
      auto it = st->memo.find(w);
      if (it != st->memo.end()) return it->second;
    }
    const cplx v = o.state(product(product, w));
    std::lock_guard<std::mutex> lock(st->m);
    st->memo.emplace(w, v);
    return v;
  });
}

}  // namespace ncfree
