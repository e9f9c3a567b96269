#include "sinf.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace tdlc {

bool sinf_member(const Str& eta) {
  auto [sigma, tau] = deinterleave(eta);
  // injectivity of each strand
  for (const Str* s : {&sigma, &tau}) {
    std::set<unsigned> seen;
    for (unsigned x : *s)
      if (!seen.insert(x).second) return false;
  }
  // mutually inverse where defined
  for (std::size_t i = 0; i < sigma.size(); ++i)
    if (sigma[i] < tau.size() && tau[sigma[i]] != i) return false;
  for (std::size_t k = 0; k < tau.size(); ++k)
    if (tau[k] < sigma.size() && sigma[tau[k]] != k) return false;
  return true;
}

std::vector<std::pair<unsigned, unsigned>> alpha_of(const Str& eta) {
  auto [sigma, tau] = deinterleave(eta);
  std::map<unsigned, unsigned> fwd, bwd;
  auto add = [&](unsigned i, unsigned k) {
    auto [it, fresh] = fwd.emplace(i, k);
    if (!fresh && it->second != k)
      throw Error(ErrKind::Inconsistent, "alpha_of: not a function");
    auto [jt, fresh2] = bwd.emplace(k, i);
    if (!fresh2 && jt->second != i)
      throw Error(ErrKind::Inconsistent, "alpha_of: not injective");
  };
  for (std::size_t i = 0; i < sigma.size(); ++i) add((unsigned)i, sigma[i]);
  for (std::size_t k = 0; k < tau.size(); ++k) add(tau[k], (unsigned)k);
  std::vector<std::pair<unsigned, unsigned>> out(fwd.begin(), fwd.end());
  return out;
}

MonotoneMachine sinf_op() {
  // Inputs f = f0 ⊕ f1 and g = g0 ⊕ g1; output (f o g) = (f0 o g0) ⊕ (g1 o f1).
  return make_machine(2, [](std::span<const Str> in, Fuel& fuel) {
    spend(fuel);
    auto [f0, f1] = deinterleave(in[0]);
    auto [g0, g1] = deinterleave(in[1]);
    Str r0, r1;
    for (unsigned x : g0) {
      if (x >= f0.size()) break;
      r0.push_back(f0[x]);
      spend(fuel);
    }
    for (unsigned x : f1) {
      if (x >= g1.size()) break;
      r1.push_back(g1[x]);
      spend(fuel);
    }
    std::size_t n = std::min(r0.size(), r1.size());
    return interleave(take(r0, n), take(r1, n));
  });
}

MonotoneMachine sinf_inv() {
  return make_machine(1, [](std::span<const Str> in, Fuel& fuel) {
    spend(fuel);
    auto [a, b] = deinterleave(in[0]);
    std::size_t n = std::min(a.size(), b.size());
    return interleave(take(b, n), take(a, n));
  });
}

// ---- code-set operations ------------------------------------------------------

StringSet set_inverse(const ClcTree& T, const StringSet& u) {
  std::vector<Str> out;
  for (const Str& s : u.members) {
    std::vector<Str> evens =
        s.size() % 2 == 0 ? std::vector<Str>{s} : expand_to(T, s, s.size() + 1);
    for (const Str& e : evens) {
      auto [a, b] = deinterleave(e);
      out.push_back(interleave(b, a));
    }
  }
  return canonicalize(T, StringSet(std::move(out)));
}

namespace {

// act(delta, gamma)(i) = delta(gamma(i)); requires every entry of gamma to be
// below |delta|.
Str str_act(const Str& delta, const Str& gamma) {
  Str r;
  r.reserve(gamma.size());
  for (unsigned x : gamma) {
    if (x >= delta.size())
      throw Error(ErrKind::Inconsistent, "str_act: index out of range");
    r.push_back(delta[x]);
  }
  return r;
}

// DFS over strings of T of a fixed length; positions may be forced to a
// value, otherwise they range up to a per-position bound. Stops at the first
// completion unless collecting.
struct ForcedDfs {
  const ClcTree* T;
  std::size_t len;
  std::function<std::optional<unsigned>(std::size_t)> forced;
  std::function<unsigned(const Str&, std::size_t)> bound;
  std::vector<Str>* out = nullptr;  // collect all completions when set
  bool found = false;

  void go(Str& cur) {
    if (cur.size() == len) {
      if (out) out->push_back(cur);
      found = true;
      return;
    }
    std::size_t p = cur.size();
    std::optional<unsigned> f = forced(p);
    unsigned lo = f ? *f : 0, hi = f ? *f : bound(cur, p);
    for (unsigned v = lo;; ++v) {
      cur.push_back(v);
      if (T->member(cur)) go(cur);
      cur.pop_back();
      if (found && !out) return;
      if (v == hi) break;
    }
  }
};

}  // namespace

StringSet set_product(const ClcTree& T, const StringSet& u, const StringSet& v) {
  // Common even length for all cone roots on both sides.
  std::size_t n = 2;
  for (const auto& m : {u.members, v.members})
    for (const Str& s : m) n = std::max(n, s.size() + s.size() % 2);
  std::vector<Str> us, vs;
  for (const Str& s : u.members)
    for (Str& e : expand_to(T, s, n)) us.push_back(std::move(e));
  for (const Str& s : v.members)
    for (Str& e : expand_to(T, s, n)) vs.push_back(std::move(e));

  // A product h g with h in [tau] and g in [sig] is characterized by
  // beta = h restricted to length 2m and alpha = g restricted to length
  // 2 max(beta) + 2, where m - 1 bounds the entries of tau and sig:
  //   f in [tau][sig]  <=>  exists such beta, alpha in T with
  //   beta_0 . sig_0 < f_0  and  alpha_1 . beta_1 < f_1
  // (where (delta . gamma)(i) = delta(gamma(i))). The cones of that event are
  // the strings eta in T of length 2m whose strand 0 extends beta_0 . sig_0
  // and whose strand 1 equals alpha_1 . beta_1 for some witnessing alpha.
  // Only the values of alpha_1 on the range of beta_1 matter for eta, so the
  // candidates eta are enumerated directly and each is validated by a
  // first-success search for a witnessing alpha.
  std::vector<Str> out;
  std::size_t half = n / 2;
  for (const Str& tau : us) {    // left factor: elements of [tau] applied second
    for (const Str& sig : vs) {  // right factor: elements of [sig] applied first
      unsigned m = (unsigned)half;  // keep 2m >= n so beta extends tau
      for (unsigned x : tau) m = std::max(m, x + 1);
      for (unsigned x : sig) m = std::max(m, x + 1);
      Str sig0 = deinterleave(sig).first;
      for (const Str& beta : expand_to(T, tau, 2 * (std::size_t)m)) {
        unsigned mb = (unsigned)half - 1;  // keep 2 mb + 2 >= n so alpha extends sig
        for (unsigned x : beta) mb = std::max(mb, x);
        std::size_t alen = 2 * (std::size_t)mb + 2;
        auto [beta0, beta1] = deinterleave(beta);
        Str s0 = str_act(beta0, sig0);  // the first n/2 values of f_0

        std::vector<Str> candidates;
        ForcedDfs enum_eta{&T,
                           2 * (std::size_t)m,
                           [&](std::size_t p) -> std::optional<unsigned> {
                             if (p % 2 == 0 && p / 2 < half) return s0[p / 2];
                             return std::nullopt;
                           },
                           [&](const Str& cur, std::size_t p) -> unsigned {
                             // odd positions hold alpha_1(beta_1(p/2))
                             if (p % 2 == 1)
                               return T.bound(sig, 2 * (std::size_t)beta1[p / 2] + 1);
                             return T.bound(take(cur, 2), p);
                           },
                           &candidates};
        Str root;
        enum_eta.go(root);

        for (Str& eta : candidates) {
          // Some alpha in T of length alen extending sig must satisfy
          // alpha_1(beta_1(j)) = eta_1(j) for all j < m.
          Str eta1 = deinterleave(eta).second;
          std::map<std::size_t, unsigned> pin;
          bool consistent = true;
          for (unsigned j = 0; j < m && consistent; ++j) {
            std::size_t p = 2 * (std::size_t)beta1[j] + 1;
            if (p < n && sig[p] != eta1[j]) consistent = false;
            auto [it, fresh] = pin.emplace(p, eta1[j]);
            if (!fresh && it->second != eta1[j]) consistent = false;
          }
          if (!consistent) continue;
          ForcedDfs feas{&T,
                         alen,
                         [&](std::size_t p) -> std::optional<unsigned> {
                           if (p < n) return sig[p];
                           auto it = pin.find(p);
                           return it != pin.end() ? std::optional<unsigned>(it->second)
                                                  : std::nullopt;
                         },
                         [&](const Str&, std::size_t p) { return T.bound(sig, p); },
                         nullptr};
          Str acur;
          feas.go(acur);
          if (feas.found) out.push_back(std::move(eta));
        }
      }
    }
  }
  return canonicalize(T, StringSet(std::move(out)));
}

// ---- regular trees -------------------------------------------------------------

RegularTree::RegularTree(unsigned d) : d_(d) {
  if (d < 3) throw Error(ErrKind::BadArgument, "RegularTree: degree must be >= 3");
  parent_ = {0};
  depth_ = {0};
}

void RegularTree::ensure(unsigned v) {
  while (parent_.size() <= v) {
    unsigned u = (unsigned)processed_++;
    unsigned children = u == 0 ? d_ : d_ - 1;
    for (unsigned c = 0; c < children; ++c) {
      parent_.push_back(u);
      depth_.push_back(depth_[u] + 1);
    }
  }
}

unsigned RegularTree::parent(unsigned v) {
  ensure(v);
  return parent_[v];
}

unsigned RegularTree::depth(unsigned v) {
  ensure(v);
  return depth_[v];
}

unsigned RegularTree::distance(unsigned a, unsigned b) {
  unsigned dist = 0;
  while (depth(a) > depth(b)) a = parent(a), ++dist;
  while (depth(b) > depth(a)) b = parent(b), ++dist;
  while (a != b) a = parent(a), b = parent(b), dist += 2;
  return dist;
}

std::vector<unsigned> RegularTree::neighbours(unsigned v) {
  std::vector<unsigned> out;
  if (v > 0) out.push_back(parent(v));
  // children of v are contiguous; locate the first by counting
  unsigned first = v == 0 ? 1 : 0;
  if (v > 0) {
    // children of u start at 1 + d + (u-1)(d-1) for u >= 1
    first = 1 + d_ + (v - 1) * (d_ - 1);
  }
  unsigned count = v == 0 ? d_ : d_ - 1;
  for (unsigned c = 0; c < count; ++c) out.push_back(first + c);
  return out;
}

unsigned RegularTree::level_end(unsigned k) {
  // |sphere(j)| = d (d-1)^(j-1) for j >= 1; cumulative, clamped.
  const unsigned long long cap = std::numeric_limits<unsigned>::max();
  unsigned long long total = 1, sphere = d_;
  for (unsigned j = 1; j <= k; ++j) {
    total += sphere;
    if (total > cap) return (unsigned)cap;
    if (sphere > cap / (d_ - 1)) return (unsigned)cap;
    sphere *= d_ - 1;
  }
  return (unsigned)(total - 1);
}

// ---- tree automorphisms ---------------------------------------------------------

TreeAut::TreeAut(std::shared_ptr<RegularTree> t, std::vector<std::pair<unsigned, unsigned>> seeds)
    : t_(std::move(t)) {
  for (auto [v, w] : seeds) {
    for (auto [v2, w2] : seeds)
      if (t_->distance(v, v2) != t_->distance(w, w2))
        throw Error(ErrKind::BadArgument, "TreeAut: seeds not distance-preserving");
    if (!fwd_.emplace(v, w).second || !bwd_.emplace(w, v).second)
      throw Error(ErrKind::BadArgument, "TreeAut: conflicting seeds");
  }
  if (fwd_.empty()) {
    fwd_[0] = 0;
    bwd_[0] = 0;
  }
  if (!fwd_.count(0))
    throw Error(ErrKind::BadArgument, "TreeAut: seeds must include the root");
  for (const auto& [v, w] : fwd_)
    if (v != 0 && !fwd_.count(t_->parent(v)))
      throw Error(ErrKind::BadArgument, "TreeAut: seeded vertices must be connected to the root");
}

void TreeAut::ensure(unsigned v) {
  while (next_ <= v) {
    unsigned cur = next_++;
    if (fwd_.count(cur)) continue;
    // cur > 0 here (0 is always seeded) and parents precede children in BFS
    // numbering, so the parent's image exists; map cur to the least unused
    // neighbour of it. Greedy extension of a distance-preserving partial map
    // of a tree stays distance-preserving, so no global check is needed.
    unsigned pi = fwd_.at(t_->parent(cur));
    bool placed = false;
    for (unsigned w : t_->neighbours(pi)) {
      if (bwd_.count(w)) continue;
      fwd_[cur] = w;
      bwd_[w] = cur;
      placed = true;
      break;
    }
    if (!placed) throw Error(ErrKind::Inconsistent, "TreeAut: no image available");
  }
}

unsigned TreeAut::fwd(unsigned v) {
  ensure(v);
  return fwd_.at(v);
}

unsigned TreeAut::bwd(unsigned v) {
  while (!bwd_.count(v)) ensure(next_);
  return bwd_.at(v);
}

PathHandle TreeAut::path() {
  auto self = std::make_shared<TreeAut>(*this);
  return PathHandle{[self](std::size_t n) {
    Str out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      unsigned k = (unsigned)(i / 2);
      out.push_back(i % 2 == 0 ? self->fwd(k) : self->bwd(k));
    }
    return out;
  }};
}

// ---- Tree(Aut(T_d)) --------------------------------------------------------------

ClcTree aut_tree(std::shared_ptr<RegularTree> t) {
  auto member = [t](const Str& eta) {
    if (!sinf_member(eta)) return false;
    std::vector<std::pair<unsigned, unsigned>> alpha;
    try {
      alpha = alpha_of(eta);
    } catch (const Error&) {
      return false;
    }
    for (std::size_t i = 0; i < alpha.size(); ++i)
      for (std::size_t j = i + 1; j < alpha.size(); ++j)
        if (t->distance(alpha[i].first, alpha[j].first) !=
            t->distance(alpha[i].second, alpha[j].second))
          return false;
    return true;
  };
  auto compact = [member](const Str& eta) { return eta.size() >= 2 && member(eta); };
  auto bound = [t](const Str& sigma, std::size_t i) -> unsigned {
    if (i < sigma.size()) return sigma[i];
    if (sigma.size() < 2)
      throw Error(ErrKind::BadArgument, "aut_tree bound: cone not compact");
    unsigned anchor = i % 2 == 0 ? sigma[0] : sigma[1];
    unsigned k = (unsigned)(i / 2);
    return t->level_end(t->depth(anchor) + t->depth(k));
  };
  return ClcTree{member, compact, bound};
}

}  // namespace tdlc
