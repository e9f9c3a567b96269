#include "machines.hpp"

#include <algorithm>
#include <atomic>
#include <map>

namespace tdlc {

static std::atomic<std::uint64_t> next_mid{1};

PathHandle path_from(Str head, unsigned repeat) {
  return PathHandle{[head = std::move(head), repeat](std::size_t n) {
    Str out = take(head, n);
    while (out.size() < n) out.push_back(repeat);
    return out;
  }};
}

MonotoneMachine make_machine(int arity, std::function<Str(std::span<const Str>, Fuel&)> step) {
  MonotoneMachine m;
  m.arity = arity;
  m.mid = next_mid.fetch_add(1);
  m.step = std::move(step);
  return m;
}

Str run_machine(const MonotoneMachine& m, const Str& a, Fuel& fuel) {
  if (m.arity != 1) throw Error(ErrKind::BadArgument, "run_machine: arity mismatch");
  return m.step(std::span<const Str>(&a, 1), fuel);
}

Str run_machine(const MonotoneMachine& m, const Str& a, const Str& b, Fuel& fuel) {
  if (m.arity != 2) throw Error(ErrKind::BadArgument, "run_machine: arity mismatch");
  std::size_t n = std::min(a.size(), b.size());
  Str ta = take(a, n), tb = take(b, n);
  Str in[2] = {std::move(ta), std::move(tb)};
  return m.step(std::span<const Str>(in, 2), fuel);
}

Str eval_path(const MonotoneMachine& m, const PathHandle& f, std::size_t n, Fuel fuel) {
  for (std::size_t len = n;; ++len) {
    spend(fuel);
    Str out = run_machine(m, f.prefix(len), fuel);
    if (out.size() >= n) return take(out, n);
  }
}

Str eval_path(const MonotoneMachine& m, const PathHandle& f, const PathHandle& g, std::size_t n,
              Fuel fuel) {
  for (std::size_t len = n;; ++len) {
    spend(fuel);
    Str out = run_machine(m, f.prefix(len), g.prefix(len), fuel);
    if (out.size() >= n) return take(out, n);
  }
}

std::pair<Str, Str> deinterleave(const Str& s) {
  Str a, b;
  for (std::size_t i = 0; i < s.size(); ++i) (i % 2 ? b : a).push_back(s[i]);
  return {a, b};
}

Str interleave(const Str& a, const Str& b) {
  Str out;
  std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i < a.size()) out.push_back(a[i]);
    if (i < b.size()) out.push_back(b[i]);
  }
  if (a.size() > b.size() + 1 || b.size() > a.size())
    throw Error(ErrKind::BadArgument, "interleave: strand lengths must differ by at most one");
  return out;
}

ClcTree pair_tree(const ClcTree& a, const ClcTree& b) {
  ClcTree t;
  t.member = [a, b](const Str& s) {
    auto [x, y] = deinterleave(s);
    return a.member(x) && b.member(y);
  };
  t.compact = [a, b](const Str& s) {
    auto [x, y] = deinterleave(s);
    return a.compact(x) && b.compact(y);
  };
  t.bound = [a, b](const Str& s, std::size_t i) {
    auto [x, y] = deinterleave(s);
    return (i % 2 == 0) ? a.bound(x, i / 2) : b.bound(y, i / 2);
  };
  return t;
}

MonotoneMachine pair_machine(const MonotoneMachine& m) {
  if (m.arity != 2) throw Error(ErrKind::BadArgument, "pair_machine: arity must be 2");
  return make_machine(1, [m](std::span<const Str> in, Fuel& fuel) {
    auto [a, b] = deinterleave(in[0]);
    return run_machine(m, a, b, fuel);
  });
}

std::size_t modulus(const MonotoneMachine& m, const ClcTree& K, const Str& root, std::size_t n,
                    Fuel& fuel) {
  if (m.arity != 1) throw Error(ErrKind::BadArgument, "modulus: unary machines only");
  std::vector<Str> level = {root};
  for (std::size_t len = root.size();; ++len) {
    bool all_long = true;
    for (const Str& s : level) {
      spend(fuel);
      if (run_machine(m, s, fuel).size() < n) {
        all_long = false;
        break;
      }
    }
    if (all_long) return len;
    std::vector<Str> next;
    for (const Str& s : level)
      for (unsigned i : child_labels(K, s)) {
        spend(fuel);
        Str c = s;
        c.push_back(i);
        next.push_back(std::move(c));
      }
    level = std::move(next);
  }
}

bool image_subset(const MonotoneMachine& m, const ClcTree& K, const StringSet& u,
                  const StringSet& w, Fuel fuel) {
  // Depth-first with pruning: a branch is settled as soon as its committed
  // output either lands inside a target cone or diverges from all of them.
  std::function<bool(const Str&)> visit = [&](const Str& rho) -> bool {
    spend(fuel);
    Str out = run_machine(m, rho, fuel);
    bool partial = false;
    for (const Str& b : w.members) {
      if (is_prefix(b, out)) return true;      // cone image inside target
      if (is_prefix(out, b)) partial = true;   // undecided, need more input
    }
    if (!partial) return false;  // committed output escapes every target cone
    if (!K.compact(rho))
      throw Error(ErrKind::FuelExhausted, "image_subset: non-compact undecided cone");
    unsigned cap = K.bound(rho, rho.size());
    bool any = false;
    for (unsigned c = 0; c <= cap; ++c) {
      Str child = rho;
      child.push_back(c);
      if (!K.member(child)) continue;
      any = true;
      if (!visit(child)) return false;
    }
    if (!any)
      throw Error(ErrKind::Inconsistent, "image_subset: leaf in a leafless tree");
    return true;
  };
  for (const Str& sigma : u.members)
    if (!visit(sigma)) return false;
  return true;
}

namespace {

// Shared state of an inverse machine: g = modulus of m
// on K, h(s) = least t >= s such that outputs to length t determine inputs to
// length s across all strings of K of length g(t).
struct InverseState {
  MonotoneMachine m;
  ClcTree K;
  Fuel per_step_fuel;
  std::size_t inj_limit;
  std::map<std::size_t, std::size_t> g_cache;  // n -> modulus depth
  std::map<std::size_t, std::size_t> h_cache;
  std::map<std::size_t, std::vector<std::pair<Str, Str>>> table;  // depth -> (input, output)

  std::size_t g(std::size_t n, Fuel& fuel) {
    auto it = g_cache.find(n);
    if (it != g_cache.end()) return it->second;
    std::size_t d = modulus(m, K, {}, n, fuel);
    g_cache[n] = d;
    return d;
  }

  const std::vector<std::pair<Str, Str>>& rows(std::size_t depth, Fuel& fuel) {
    auto it = table.find(depth);
    if (it != table.end()) return it->second;
    std::vector<std::pair<Str, Str>> rws;
    for (const Str& eta : expand_to(K, {}, depth)) {
      spend(fuel);
      rws.emplace_back(eta, run_machine(m, eta, fuel));
    }
    return table.emplace(depth, std::move(rws)).first->second;
  }

  std::size_t h(std::size_t s, Fuel& fuel) {
    auto it = h_cache.find(s);
    if (it != h_cache.end()) return it->second;
    for (std::size_t t = s; t < s + inj_limit; ++t) {
      std::size_t depth = g(t, fuel);
      const auto& rws = rows(depth, fuel);
      // outputs to length t must determine inputs to length s
      bool ok = true;
      std::map<Str, Str> det;
      for (const auto& [in, out] : rws) {
        spend(fuel);
        Str key = take(out, t);
        Str val = take(in, s);
        auto [pos, fresh] = det.emplace(key, val);
        if (!fresh && pos->second != val) {
          ok = false;
          break;
        }
      }
      if (ok) {
        h_cache[s] = t;
        return t;
      }
    }
    throw Error(ErrKind::NonInjective, "invert_bijection: machine not injective at depth " +
                                           std::to_string(s + inj_limit));
  }
};

}  // namespace

MonotoneMachine invert_bijection(const MonotoneMachine& m, const ClcTree& K, Fuel per_step_fuel,
                                 std::size_t inj_limit) {
  if (m.arity != 1) throw Error(ErrKind::BadArgument, "invert_bijection: unary machines only");
  if (!K.compact(Str{}))
    throw Error(ErrKind::BadArgument, "invert_bijection: domain tree must be compact");
  auto st = std::make_shared<InverseState>();
  st->m = m;
  st->K = K;
  st->per_step_fuel = per_step_fuel;
  st->inj_limit = inj_limit;
  return make_machine(1, [st](std::span<const Str> in, Fuel& fuel) {
    const Str& beta = in[0];
    Fuel local = st->per_step_fuel;
    Fuel& budget = local;  // internal tables use the machine's own budget
    (void)fuel;
    // Largest s with h(s) <= |beta|.
    std::size_t s = 0;
    while (st->h(s + 1, budget) <= beta.size()) ++s;
    if (s == 0 && st->h(0, budget) > beta.size()) return Str{};
    std::size_t t = st->h(s, budget);
    std::size_t depth = st->g(t, budget);
    Str key = take(beta, t);
    for (const auto& [eta, out] : st->rows(depth, budget)) {
      if (is_prefix(key, out)) return take(eta, s);
    }
    throw Error(ErrKind::Undefined, "inverse machine: input not in the image");
  });
}

std::vector<Str> strings_by_weight(const ClcTree& t, unsigned max_weight) {
  // All member strings with length + entry-sum <= max_weight, in graded
  // (weight, shortlex) order. Trees are prefix-closed, so the generation
  // recurses only below members.
  std::vector<Str> out;
  if (!t.member({})) return out;
  std::vector<std::pair<unsigned, Str>> found;
  std::function<void(Str&, unsigned)> gen = [&](Str& s, unsigned rem) {
    // rem = remaining weight budget; adding entry x costs 1 + x
    for (unsigned x = 0; x + 1 <= rem; ++x) {
      s.push_back(x);
      if (t.member(s)) {
        found.emplace_back(max_weight - (rem - 1 - x), s);
        gen(s, rem - 1 - x);
      }
      s.pop_back();
    }
  };
  Str s;
  gen(s, max_weight);
  std::stable_sort(found.begin(), found.end(),
                   [](const auto& a, const auto& b) {
                     if (a.first != b.first) return a.first < b.first;
                     return shortlex_less(a.second, b.second);
                   });
  out.push_back({});
  for (auto& [w, c] : found) out.push_back(std::move(c));
  return out;
}

RootNormal root_normalize(const ClcTree& t, Fuel enum_fuel) {
  struct State {
    ClcTree t;
    Fuel enum_fuel;
    std::vector<Str> minimals;
    unsigned scanned_weight = 0;

    bool is_minimal_compact(const Str& s) {
      if (s.empty() || !t.member(s) || !t.compact(s)) return false;
      Str parent(s.begin(), s.end() - 1);
      return !t.compact(parent);
    }
    void ensure(std::size_t n, Fuel& fuel) {
      while (minimals.size() <= n) {
        spend(fuel);
        ++scanned_weight;
        if (scanned_weight > enum_fuel)
          throw Error(ErrKind::FuelExhausted, "root_normalize: minimal-string scan exhausted");
        for (const Str& c : strings_by_weight(t, scanned_weight)) {
          unsigned w = static_cast<unsigned>(c.size());
          for (unsigned x : c) w += x;
          if (w != scanned_weight) continue;  // only fresh strings of this weight
          if (is_minimal_compact(c)) minimals.push_back(c);
        }
      }
    }
  };
  auto st = std::make_shared<State>();
  st->t = t;
  st->enum_fuel = enum_fuel;

  auto minimal = [st](std::size_t i) {
    Fuel f = st->enum_fuel * 1000;
    st->ensure(i, f);
    return st->minimals[i];
  };
  auto from_norm = [st, minimal](const Str& s) {
    if (s.empty()) return s;
    Str out = minimal(s[0]);
    out.insert(out.end(), s.begin() + 1, s.end());
    return out;
  };
  auto to_norm = [st, minimal](const Str& s) -> std::optional<Str> {
    for (std::size_t i = 0;; ++i) {
      Str root;
      try {
        root = minimal(i);
      } catch (const Error&) {
        return std::nullopt;
      }
      if (root.size() > s.size()) {
        // minimals are graded by weight, not length; keep scanning a bit
        if (i > s.size() + 64) return std::nullopt;
        continue;
      }
      if (is_prefix(root, s)) {
        Str out = {static_cast<unsigned>(i)};
        out.insert(out.end(), s.begin() + root.size(), s.end());
        return out;
      }
    }
  };

  ClcTree nt;
  nt.member = [st, from_norm](const Str& s) {
    if (s.empty()) return true;
    try {
      Fuel f = st->enum_fuel * 1000;
      st->ensure(s[0], f);
    } catch (const Error&) {
      return false;
    }
    return st->t.member(from_norm(s));
  };
  nt.compact = [st, nt_member = nt.member, from_norm](const Str& s) {
    if (s.empty()) return false;
    return nt_member(s) && st->t.compact(from_norm(s));
  };
  nt.bound = [st, from_norm](const Str& s, std::size_t i) -> unsigned {
    if (s.empty()) throw Error(ErrKind::BadArgument, "root_normalize: root cone is not compact");
    if (i == 0) return s[0];
    Str orig = from_norm(s);
    std::size_t shift = orig.size() - s.size();  // |sigma_i| - 1
    return st->t.bound(orig, i + shift);
  };

  RootNormal rn;
  rn.tree = nt;
  rn.minimal = minimal;
  rn.from_norm = from_norm;
  rn.to_norm = to_norm;
  return rn;
}

ClcTree prune(const ClcTree& T, std::function<bool(const Str&)> in_S,
              std::function<PathHandle(std::size_t)> dense,
              std::function<std::optional<bool>(const Str&)> witness, Fuel fuel) {
  struct State {
    ClcTree T;
    std::function<bool(const Str&)> in_S;
    std::function<PathHandle(std::size_t)> dense;
    std::function<std::optional<bool>(const Str&)> witness;
    Fuel fuel;
    std::map<Str, bool> cache;

    bool alive(const Str& sigma) {
      if (sigma.empty()) return true;
      auto it = cache.find(sigma);
      if (it != cache.end()) return it->second;
      bool v = decide(sigma);
      cache[sigma] = v;
      return v;
    }
    bool decide(const Str& sigma) {
      if (!T.member(sigma) || !in_S(sigma)) return false;
      if (witness) {
        auto w = witness(sigma);
        if (w.has_value()) return *w;
      }
      Fuel budget = fuel;
      // Alternate: does the t-th dense path extend sigma / do all level-t
      // extensions of sigma leave S?
      std::vector<Str> frontier = {sigma};
      for (std::size_t t = 0;; ++t) {
        spend(budget);
        if (dense && is_prefix(sigma, dense(t).prefix(sigma.size()))) return true;
        if (t >= sigma.size()) {
          // Exhaustive refutation needs compact cones; while any frontier
          // cone is non-compact, only the dense scan can decide.
          bool expandable = true;
          for (const Str& s : frontier)
            if (!T.compact(s)) expandable = false;
          if (expandable) {
            std::vector<Str> next;
            for (const Str& s : frontier)
              for (unsigned i : child_labels(T, s)) {
                spend(budget);
                Str c = s;
                c.push_back(i);
                if (in_S(c)) next.push_back(std::move(c));
              }
            frontier = std::move(next);
            if (frontier.empty()) return false;
          }
        }
      }
    }
  };
  auto st = std::make_shared<State>();
  st->T = T;
  st->in_S = std::move(in_S);
  st->dense = std::move(dense);
  st->witness = std::move(witness);
  st->fuel = fuel;

  ClcTree out;
  out.member = [st](const Str& s) { return st->alive(s); };
  out.compact = [st](const Str& s) { return st->alive(s) && st->T.compact(s); };
  out.bound = [st](const Str& s, std::size_t i) { return st->T.bound(s, i); };
  return out;
}

}  // namespace tdlc
