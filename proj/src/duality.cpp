#include "duality.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <set>
#include <sstream>

#include "sinf.hpp"

namespace tdlc {

namespace {
struct StrHash {
  std::size_t operator()(const Str& s) const {
    std::size_t h = 1469598103934665603ull;
    for (unsigned x : s) {
      h ^= x;
      h *= 1099511628211ull;
    }
    return h;
  }
};
}  // namespace

// ---- products of path tuples ----------------------------------------------------

ClcTree tuple_tree(const ClcTree& t, unsigned k) {
  if (k == 0) throw Error(ErrKind::BadArgument, "tuple_tree: need k >= 1");
  auto member = [t, k](const Str& s) {
    for (const Str& part : tuple_strands(s, k))
      if (!t.member(part)) return false;
    return true;
  };
  auto compact = [t, k](const Str& s) {
    for (const Str& part : tuple_strands(s, k))
      if (!t.compact(part)) return false;
    return true;
  };
  auto bound = [t, k](const Str& s, std::size_t i) {
    return t.bound(tuple_strands(s, k)[i % k], i / k);
  };
  return ClcTree{member, compact, bound};
}

std::vector<Str> tuple_strands(const Str& s, unsigned k) {
  std::vector<Str> out(k);
  for (auto& strand : out) strand.reserve(s.size() / k + 1);
  for (std::size_t j = 0; j < s.size(); ++j) out[j % k].push_back(s[j]);
  return out;
}

MonotoneMachine word_machine(const BairePresentation& g, const std::vector<bool>& invert) {
  unsigned k = invert.size();
  if (k == 0) throw Error(ErrKind::BadArgument, "word_machine: empty word");
  MonotoneMachine op = g.op, inv = g.inv;
  return make_machine(1, [k, invert, op, inv](std::span<const Str> in, Fuel& fuel) {
    std::vector<Str> strands = tuple_strands(in[0], k);
    for (unsigned j = 0; j < k; ++j)
      if (invert[j]) {
        std::array<Str, 1> arg{strands[j]};
        strands[j] = inv.step(arg, fuel);
      }
    Str acc = strands[0];
    for (unsigned j = 1; j < k; ++j) {
      std::array<Str, 2> args{acc, strands[j]};
      acc = op.step(args, fuel);
    }
    return acc;
  });
}

bool product_subset(const BairePresentation& g, const std::vector<StringSet>& parts,
                    const std::vector<bool>& invert, const StringSet& target, Fuel fuel) {
  for (const StringSet& p : parts)
    if (p.empty()) return true;  // empty factor, empty product
  unsigned k = parts.size();
  // When the factor cones sit at nearly equal depths, materialize the
  // interleaved source cones and start the scan there — much faster than
  // descending from the root. Expanding to a common length is exponential in
  // the depth gap, so bail out to a root scan past a small budget.
  {
    std::size_t len = 0, budget = 1024;
    for (const StringSet& p : parts)
      for (const Str& s : p.members) len = std::max(len, s.size());
    std::vector<std::vector<Str>> exts(k);
    bool small = true;
    for (unsigned j = 0; j < k && small; ++j)
      for (const Str& s : parts[j].members) {
        if (len - s.size() > 8 || exts[j].size() > budget / 4) {
          small = false;
          break;
        }
        std::vector<Str> e = expand_to(g.tree, s, len);
        exts[j].insert(exts[j].end(), e.begin(), e.end());
      }
    std::size_t combos = 1;
    for (unsigned j = 0; j < k && small; ++j) {
      combos *= exts[j].size();
      if (combos > budget) small = false;
    }
    if (small) {
      std::vector<Str> cones;
      std::vector<std::size_t> sel(k, 0);
      while (true) {
        Str inter;
        for (std::size_t i = 0; i < len; ++i)
          for (unsigned j = 0; j < k; ++j) inter.push_back(exts[j][sel[j]][i]);
        cones.push_back(std::move(inter));
        unsigned j = 0;
        while (j < k && ++sel[j] == exts[j].size()) sel[j++] = 0;
        if (j == k) break;
      }
      ClcTree dom = tuple_tree(g.tree, k);
      MonotoneMachine m = word_machine(g, invert);
      return image_subset(m, dom, StringSet(std::move(cones)), target, fuel);
    }
  }
  auto rs = std::make_shared<std::vector<ClcTree>>();
  for (const StringSet& p : parts) rs->push_back(restrict_tree(g.tree, p));
  auto member = [rs, k](const Str& s) {
    std::vector<Str> strands = tuple_strands(s, k);
    for (unsigned j = 0; j < k; ++j)
      if (!(*rs)[j].member(strands[j])) return false;
    return true;
  };
  auto compact = [rs, k](const Str& s) {
    std::vector<Str> strands = tuple_strands(s, k);
    for (unsigned j = 0; j < k; ++j)
      if (!(*rs)[j].compact(strands[j])) return false;
    return true;
  };
  auto bound = [rs, k](const Str& s, std::size_t i) {
    return (*rs)[i % k].bound(tuple_strands(s, k)[i % k], i / k);
  };
  ClcTree dom{member, compact, bound};
  MonotoneMachine m = word_machine(g, invert);
  return image_subset(m, dom, StringSet(std::vector<Str>{Str{}}), target, fuel);
}

// ---- canonical code enumeration ---------------------------------------------------

namespace {
unsigned str_weight(const Str& s) {
  unsigned w = s.size();
  for (unsigned x : s) w += x;
  return w;
}
}  // namespace

unsigned code_weight(const StringSet& u) {
  unsigned w = 0;
  for (const Str& s : u.members) w += str_weight(s) + 1;
  return w;
}

std::vector<StringSet> canonical_codes_by_weight(const ClcTree& t, unsigned max_weight) {
  std::vector<Str> pool;
  for (const Str& s : strings_by_weight(t, max_weight))
    if (t.compact(s) && str_weight(s) + 1 <= max_weight) pool.push_back(s);
  std::vector<StringSet> out;
  std::vector<Str> chosen;
  std::function<void(std::size_t, unsigned)> dfs = [&](std::size_t from, unsigned left) {
    if (!chosen.empty()) {
      StringSet u(chosen);
      if (canonicalize(t, u) == u) out.push_back(u);
    }
    for (std::size_t i = from; i < pool.size(); ++i) {
      unsigned c = str_weight(pool[i]) + 1;
      if (c > left) continue;
      bool anti = true;
      for (const Str& s : chosen)
        if (comparable(s, pool[i])) anti = false;
      if (!anti) continue;
      chosen.push_back(pool[i]);
      dfs(i + 1, left - c);
      chosen.pop_back();
    }
  };
  dfs(0, max_weight);
  std::sort(out.begin(), out.end(), [](const StringSet& a, const StringSet& b) {
    unsigned wa = code_weight(a), wb = code_weight(b);
    if (wa != wb) return wa < wb;
    return a < b;
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}


// ---- wcomp -----------------------------------------------------------------------

WcompGroupoid::WcompGroupoid(BairePresentation g, Fuel step_fuel)
    : g_(std::move(g)), fuel_(step_fuel) {
  elems_.push_back(StringSet{});  // A_0 = empty
  intern_[StringSet{}] = 0;
}

StringSet WcompGroupoid::code(Elt n) {
  ensure(n + 1);
  return elems_[n];
}

Elt WcompGroupoid::elt_of(const StringSet& canonical) {
  Fuel budget = fuel_;
  while (true) {
    auto it = intern_.find(canonical);
    if (it != intern_.end()) return it->second;
    spend(budget, 64);
    advance_stage();
  }
}

bool WcompGroupoid::incl_codes(const std::vector<StringSet>& parts,
                               const std::vector<bool>& invert, const StringSet& target) {
  std::ostringstream key;
  for (std::size_t i = 0; i < parts.size(); ++i)
    key << (invert[i] ? "~" : "") << show_set(parts[i]);
  key << "<" << show_set(target);
  auto it = incl_cache_.find(key.str());
  if (it != incl_cache_.end()) return it->second;
  bool v = product_subset(g_, parts, invert, target, fuel_);
  incl_cache_[key.str()] = v;
  return v;
}

bool WcompGroupoid::incl(const std::vector<Elt>& parts, const std::vector<bool>& invert,
                         Elt target) {
  std::vector<StringSet> codes;
  for (Elt e : parts) codes.push_back(code(e));
  return incl_codes(codes, invert, code(target));
}

void WcompGroupoid::extend_pool(unsigned cap) {
  if (cap <= pool_cap_) return;
  // Append only the strings of weight in (pool_cap_, cap]; the graded order
  // keeps previously handed-out pool indices stable.
  for (const Str& s : strings_by_weight(g_.tree, cap)) {
    if (!g_.tree.compact(s)) continue;
    unsigned w = s.size();
    for (unsigned x : s) w += x;
    if (pool_cap_ > 0 && w <= pool_cap_) continue;  // first call takes weight 0 too
    pool_.push_back(s);
    pool_wt_.push_back(w);
  }
  pool_cap_ = cap;
}

Elt WcompGroupoid::intern(const StringSet& canonical, bool subgroup) {
  auto it = intern_.find(canonical);
  Elt n;
  if (it != intern_.end()) {
    n = it->second;
  } else {
    n = static_cast<Elt>(elems_.size());
    elems_.push_back(canonical);
    intern_[canonical] = n;
  }
  if (subgroup && std::find(subgroups_.begin(), subgroups_.end(), n) == subgroups_.end()) {
    subgroups_.push_back(n);
    sub_ptr_.push_back(0);
    cosets_of_[n].push_back(n);
    runit_cache_[n] = n;
    lunit_cache_[n] = n;
  }
  return n;
}

void WcompGroupoid::advance_stage() {
  ++stage_;
  extend_pool(stage_);
  // single-cone subgroup candidates of weight exactly this stage
  for (; sub_scan_ < pool_.size() && pool_wt_[sub_scan_] + 1 <= stage_; ++sub_scan_) {
    StringSet u = canonicalize(g_.tree, StringSet(std::vector<Str>{pool_[sub_scan_]}));
    if (intern_.count(u) &&
        std::find(subgroups_.begin(), subgroups_.end(), intern_.at(u)) != subgroups_.end())
      continue;
    if (incl_codes({u, u}, {false, false}, u) && incl_codes({u}, {true}, u))
      intern(u, true);
  }
  // left cosets of U as single cones: [tau] = tau0 * U exactly when
  // [tau] U subseteq [tau] (so [tau] absorbs U on the right, i.e. is a union
  // of left cosets) and [tau]^-1 [tau] subseteq U (so it is a single one).
  // A cone that is strictly shallower or deeper than a coset fails one of
  // the two inclusions, so the certificate is exact.
  for (std::size_t wi = 0; wi < subgroups_.size(); ++wi) {
    Elt un = subgroups_[wi];
    const StringSet ucode = elems_[un];
    unsigned uw = code_weight(ucode);
    for (std::size_t& p = sub_ptr_[wi];
         p < pool_.size() && pool_wt_[p] + 1 + uw <= stage_; ++p) {
      StringSet bcode =
          canonicalize(g_.tree, StringSet(std::vector<Str>{pool_[p]}));
      bool covered = false;
      for (Elt b : cosets_of_[un])
        if (cone_subset(g_.tree, bcode, elems_[b])) {
          covered = true;
          break;
        }
      if (covered) continue;
      if (!incl_codes({bcode, ucode}, {false, false}, bcode)) continue;
      if (!incl_codes({bcode, bcode}, {true, false}, ucode)) continue;
      Elt b = intern(bcode, false);
      if (std::find(cosets_of_[un].begin(), cosets_of_[un].end(), b) ==
          cosets_of_[un].end()) {
        cosets_of_[un].push_back(b);
        runit_cache_[b] = un;
      }
    }
  }
}

void WcompGroupoid::ensure(std::size_t n) {
  Fuel budget = fuel_;
  while (elems_.size() < n) {
    spend(budget, 64);
    advance_stage();
  }
}

Elt WcompGroupoid::at(std::size_t n) {
  ensure(n + 1);
  return static_cast<Elt>(n);
}

std::string WcompGroupoid::print(Elt a) { return show_set(code(a)); }

Elt WcompGroupoid::right_unit_elt(Elt a) {
  if (a == kEmpty) return kEmpty;
  auto it = runit_cache_.find(a);
  if (it != runit_cache_.end()) return it->second;
  Fuel budget = fuel_;
  for (std::size_t i = 0;; ++i) {
    spend(budget);
    while (i >= subgroups_.size()) {
      spend(budget, 64);
      advance_stage();
    }
    Elt v = subgroups_[i];
    if (incl({a, v}, {false, false}, a) && incl({a, a}, {true, false}, v)) {
      runit_cache_[a] = v;
      return v;
    }
  }
}

Elt WcompGroupoid::left_unit_elt(Elt a) {
  if (a == kEmpty) return kEmpty;
  auto it = lunit_cache_.find(a);
  if (it != lunit_cache_.end()) return it->second;
  Fuel budget = fuel_;
  for (std::size_t i = 0;; ++i) {
    spend(budget);
    while (i >= subgroups_.size()) {
      spend(budget, 64);
      advance_stage();
    }
    Elt u = subgroups_[i];
    if (incl({u, a}, {false, false}, a) && incl({a, a}, {false, true}, u)) {
      lunit_cache_[a] = u;
      return u;
    }
  }
}

std::optional<Elt> WcompGroupoid::compose(Elt a, Elt b) {
  if (a == kEmpty || b == kEmpty) return std::nullopt;
  auto it = compose_cache_.find({a, b});
  if (it != compose_cache_.end()) return it->second;
  std::optional<Elt> result;
  if (right_unit_elt(a) == left_unit_elt(b)) {
    Elt lu = left_unit_elt(a), ru = right_unit_elt(b);
    Fuel budget = fuel_;
    for (std::size_t n = 1;; ++n) {
      spend(budget);
      Elt c = at(n);
      if (left_unit_elt(c) != lu || right_unit_elt(c) != ru) continue;
      if (incl({a, b}, {false, false}, c)) {
        result = c;
        break;
      }
    }
  }
  compose_cache_[{a, b}] = result;
  return result;
}

Elt WcompGroupoid::inverse(Elt a) {
  if (a == kEmpty) return kEmpty;
  auto it = inverse_cache_.find(a);
  if (it != inverse_cache_.end()) return it->second;
  Fuel budget = fuel_;
  for (std::size_t n = 1;; ++n) {
    spend(budget);
    Elt c = at(n);
    if (incl({a}, {true}, c) && incl({c}, {true}, a)) {
      inverse_cache_[a] = c;
      inverse_cache_[c] = a;
      return c;
    }
  }
}

Elt WcompGroupoid::meet(Elt a, Elt b) {
  if (a == kEmpty || b == kEmpty) return kEmpty;
  auto key = std::minmax(a, b);
  auto it = meet_cache_.find(key);
  if (it != meet_cache_.end()) return it->second;
  StringSet m = cone_intersect(g_.tree, code(a), code(b));
  Elt r = m.empty() ? kEmpty : elt_of(canonicalize(g_.tree, m));
  meet_cache_[key] = r;
  return r;
}

mpz_class WcompGroupoid::index(Elt u, Elt v) {
  if (!is_subgroup(u) || !is_subgroup(v))
    throw Error(ErrKind::BadArgument, "index: need subgroups");
  Elt m = meet(u, v);
  if (m == kEmpty) throw Error(ErrKind::Inconsistent, "index: trivial intersection");
  StringSet ucode = code(u);
  StringSet mcode = code(m);
  // Count the left cosets of m covering u, scanning candidate cones in the
  // graded string pool directly (the global enumeration would interleave
  // unrelated lighter cosets).
  StringSet covered;
  mpz_class count = 0;
  Fuel budget = fuel_;
  for (std::size_t p = 0;; ++p) {
    spend(budget);
    while (p >= pool_.size()) {
      spend(budget, 64);
      extend_pool(pool_cap_ + 1);
    }
    StringSet bcode = canonicalize(g_.tree, StringSet(std::vector<Str>{pool_[p]}));
    if (!cone_subset(g_.tree, bcode, ucode)) continue;
    if (cone_subset(g_.tree, bcode, covered)) continue;
    if (!incl_codes({bcode, mcode}, {false, false}, bcode)) continue;
    if (!incl_codes({bcode, bcode}, {true, false}, mcode)) continue;
    covered = cone_union(g_.tree, covered, bcode);
    ++count;
    if (cone_subset(g_.tree, ucode, covered)) return count;
  }
}

// ---- gcomp -----------------------------------------------------------------------

GroupoidView::GroupoidView(std::shared_ptr<MeetGroupoid> w, Fuel fuel)
    : w_(std::move(w)), fuel_(fuel) {
  Fuel budget = fuel_;
  for (std::size_t n = 0;; ++n) {
    spend(budget);
    if (w_->is_subgroup(w_->at(n))) {
      j0_ = n;
      break;
    }
  }
}

std::size_t GroupoidView::swap(std::size_t i) const {
  if (i == 0) return j0_;
  if (i == j0_) return 0;
  return i;
}

Elt GroupoidView::handle(unsigned number) { return w_->at(swap(number)); }

unsigned GroupoidView::number(Elt h) {
  auto it = rev_.find(h);
  if (it != rev_.end()) return it->second;
  Fuel budget = fuel_;
  for (;; ++scanned_) {
    spend(budget);
    Elt e = w_->at(scanned_);
    rev_.emplace(e, static_cast<unsigned>(swap(scanned_)));
    if (e == h) return static_cast<unsigned>(swap(scanned_));
  }
}

BairePresentation gcomp(std::shared_ptr<MeetGroupoid> w, Fuel step_fuel) {
  return gcomp(std::move(w), nullptr, step_fuel);
}

BairePresentation gcomp(std::shared_ptr<MeetGroupoid> w, std::shared_ptr<GroupoidView> view,
                        Fuel step_fuel) {
  if (!view) view = std::make_shared<GroupoidView>(w, step_fuel);
  auto mem_cache = std::make_shared<std::unordered_map<Str, bool, StrHash>>();
  auto bound_cache = std::make_shared<std::unordered_map<Str, unsigned, StrHash>>();
  auto member = [w, view, mem_cache](const Str& eta) {
    auto it = mem_cache->find(eta);
    if (it != mem_cache->end()) return it->second;
    auto remember = [&](bool v) {
      (*mem_cache)[eta] = v;
      return v;
    };
    if (!sinf_member(eta)) return remember(false);
    std::vector<std::pair<Elt, Elt>> pairs;
    auto [sigma, tau] = deinterleave(eta);
    for (std::size_t r = 0; r < sigma.size(); ++r)
      pairs.emplace_back(view->handle(r), view->handle(sigma[r]));
    for (std::size_t s = 0; s < tau.size(); ++s)
      pairs.emplace_back(view->handle(tau[s]), view->handle(s));
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    return remember(extendible(*w, pairs));
  };
  auto compact = [](const Str& eta) { return eta.size() >= 2; };
  Fuel fuel = step_fuel;
  auto bound = [w, view, fuel, bound_cache](const Str& eta, std::size_t i) -> unsigned {
    if (eta.size() < 2)
      throw Error(ErrKind::BadArgument, "gcomp bound: cone not compact");
    if (i < eta.size()) return eta[i];
    // the bound depends only on the first two entries beyond fixed positions
    Str key{eta[0], eta[1], static_cast<unsigned>(i)};
    auto it = bound_cache->find(key);
    if (it != bound_cache->end()) return it->second;
    Elt u0 = view->handle(0);
    Elt f = view->handle(static_cast<unsigned>(i / 2));
    Elt l = f == kEmpty ? kEmpty : view->handle(i % 2 == 0 ? eta[0] : eta[1]);
    unsigned hi;
    if (f == kEmpty || l == kEmpty) {
      hi = view->number(kEmpty);
    } else {
      hi = 0;
      for (Elt v : possible_values(*w, u0, l, f, fuel)) hi = std::max(hi, view->number(v));
    }
    (*bound_cache)[key] = hi;
    return hi;
  };
  return BairePresentation{ClcTree{member, compact, bound}, sinf_op(), sinf_inv()};
}

// ---- action and isomorphism --------------------------------------------------------

Elt act(WcompGroupoid& w, const PathHandle& g, Elt a, Fuel fuel) {
  if (a == kEmpty) return kEmpty;
  Elt v = w.right_unit_elt(a);
  const ClcTree& t = w.presentation().tree;
  for (std::size_t round = 1;; ++round) {
    spend(fuel);
    Str sigma = g.prefix(round);
    if (!t.compact(sigma)) continue;
    StringSet scode(std::vector<Str>{sigma});
    for (std::size_t n = 1; n <= round; ++n) {
      spend(fuel);
      Elt b = w.at(n);
      if (w.right_unit_elt(b) != v) continue;
      Fuel probe = fuel;
      try {
        if (product_subset(w.presentation(), {scode, w.code(a)}, {false, false}, w.code(b),
                           probe))
          return b;
      } catch (const Error& e) {
        if (e.kind != ErrKind::FuelExhausted) throw;
      }
    }
  }
}

Elt act_right(WcompGroupoid& w, const PathHandle& g, Elt a, Fuel fuel) {
  MonotoneMachine inv = w.presentation().inv;
  PathHandle ginv{[inv, g, fuel](std::size_t n) { return eval_path(inv, g, n, fuel); }};
  return w.inverse(act(w, ginv, w.inverse(a), fuel));
}

Str phi_prefix(WcompGroupoid& w, GroupoidView& view, const PathHandle& g, std::size_t n,
               Fuel fuel) {
  MonotoneMachine inv = w.presentation().inv;
  PathHandle ginv{[inv, g, fuel](std::size_t k) { return eval_path(inv, g, k, fuel); }};
  Str out;
  for (std::size_t i = 0; i < n; ++i) {
    Elt a = view.handle(static_cast<unsigned>(i / 2));
    Elt b = a == kEmpty ? kEmpty : act(w, i % 2 == 0 ? g : ginv, a, fuel);
    out.push_back(view.number(b));
  }
  return out;
}

// ---- inversion of bijective homomorphisms -------------------------------------------

PathHandle canonical_path(const ClcTree& t, const Str& sigma, Fuel fuel) {
  auto cache = std::make_shared<Str>(sigma);
  ClcTree tree = t;
  return PathHandle{[cache, tree, fuel](std::size_t n) {
    Fuel budget = fuel;
    while (cache->size() < n) {
      bool found = false;
      if (tree.compact(*cache)) {
        auto kids = child_labels(tree, *cache);
        if (kids.empty()) throw Error(ErrKind::Inconsistent, "canonical_path: leaf reached");
        cache->push_back(kids.front());
        found = true;
      } else {
        for (unsigned c = 0; !found; ++c) {
          spend(budget);
          Str next = *cache;
          next.push_back(c);
          if (tree.member(next)) {
            *cache = std::move(next);
            found = true;
          }
        }
      }
    }
    return take(*cache, n);
  }};
}

ClcTree restrict_tree(const ClcTree& t, const StringSet& code) {
  std::vector<Str> roots = code.members;
  auto member = [t, roots](const Str& s) {
    if (!t.member(s)) return false;
    for (const Str& r : roots)
      if (comparable(r, s)) return true;
    return false;
  };
  auto compact = [](const Str&) { return true; };
  auto bound = [t, roots](const Str& s, std::size_t i) -> unsigned {
    unsigned hi = 0;
    for (const Str& r : roots) {
      if (!comparable(r, s)) continue;
      if (i < r.size())
        hi = std::max(hi, r[i]);
      else
        hi = std::max(hi, t.bound(r, i));
    }
    return hi;
  };
  return ClcTree{member, compact, bound};
}

MonotoneMachine invert_homomorphism(std::shared_ptr<WcompGroupoid> wg,
                                    std::shared_ptr<WcompGroupoid> wh,
                                    const MonotoneMachine& psi, Fuel fuel) {
  struct State {
    std::shared_ptr<WcompGroupoid> wg, wh;
    MonotoneMachine psi;
    Fuel fuel;
    Elt u = kEmpty;  // base subgroup of G
    Elt v = kEmpty;  // psi(U) in H
    struct Piece {
      StringSet source;  // coset C_i of U in G
      StringSet image;   // S_i = psi(C_i) in H
      MonotoneMachine theta;
    };
    std::vector<Piece> pieces;
    std::size_t scan = 0;  // next wg enumeration index to inspect

    void init() {
      // first enumerated subgroup of G
      Fuel budget = fuel;
      for (std::size_t n = 1;; ++n) {
        spend(budget);
        if (wg->is_subgroup(wg->at(n))) {
          u = wg->at(n);
          break;
        }
      }
      // V = psi(U): the inclusion-minimal enumerated subgroup of H containing
      // the image, certified by shrinking image covers
      StringSet cu = wg->code(u);
      const ClcTree& th = wh->presentation().tree;
      std::optional<Elt> best;
      Fuel scan_budget = fuel;
      std::size_t after = 0;
      for (std::size_t n = 1; !best || after < 24; ++n) {
        spend(scan_budget, 16);
        if (best) ++after;
        Elt c = wh->at(n);
        if (!wh->is_subgroup(c)) continue;
        Fuel probe = fuel;
        if (!image_subset(psi, wg->presentation().tree, cu, wh->code(c), probe)) continue;
        if (!best || cone_subset(th, wh->code(c), wh->code(*best))) best = c;
      }
      if (!best) throw Error(ErrKind::FuelExhausted, "invert_homomorphism: image subgroup");
      // refutation pass: the cover of psi(U) must keep containing the candidate
      Fuel cover_budget = fuel;
      for (std::size_t depth = 1; depth <= 16; ++depth) {
        std::vector<Str> cover;
        bool deep_enough = true;
        for (const Str& root : cu.members)
          for (const Str& rho :
               expand_to(wg->presentation().tree, root,
                         root.size() + depth)) {
            spend(cover_budget);
            std::array<Str, 1> arg{rho};
            Fuel step_budget = fuel;
            Str out = psi.step(arg, step_budget);
            if (out.empty()) deep_enough = false;
            cover.push_back(std::move(out));
          }
        if (!deep_enough) continue;
        StringSet cov = canonicalize(th, StringSet(std::move(cover)));
        if (!cone_subset(th, wh->code(*best), cov))
          throw Error(ErrKind::Inconsistent,
                      "invert_homomorphism: no enumerated subgroup matches the image");
        if (cov == wh->code(*best)) break;  // exact match certified
      }
      v = *best;
    }

    void extend() {
      // next left coset of U in G's enumeration
      Fuel budget = fuel;
      for (;; ++scan) {
        spend(budget);
        Elt c = wg->at(scan);
        if (c == kEmpty || wg->right_unit_elt(c) != u) continue;
        StringSet sc = wg->code(c);
        PathHandle a = canonical_path(wg->presentation().tree, sc.members.front(), fuel);
        MonotoneMachine psi_m = psi;
        Fuel f = fuel;
        PathHandle pa{[psi_m, a, f](std::size_t n) { return eval_path(psi_m, a, n, f); }};
        Elt s = act(*wh, pa, v, fuel);
        ClcTree piece_tree = restrict_tree(wg->presentation().tree, sc);
        pieces.push_back(
            {sc, wh->code(s), invert_bijection(psi, piece_tree, fuel)});
        ++scan;
        return;
      }
    }
  };

  auto st = std::make_shared<State>();
  st->wg = std::move(wg);
  st->wh = std::move(wh);
  st->psi = psi;
  st->fuel = fuel;
  st->init();

  return make_machine(1, [st](std::span<const Str> in, Fuel& fuel) -> Str {
    const Str& beta = in[0];
    const ClcTree& th = st->wh->presentation().tree;
    if (beta.empty() || !th.compact(beta)) return {};
    StringSet bcode(std::vector<Str>{beta});
    for (std::size_t i = 0;; ++i) {
      spend(fuel);
      while (i >= st->pieces.size()) st->extend();
      if (cone_subset(th, bcode, st->pieces[i].image))
        return st->pieces[i].theta.step(in, fuel);
      // the images of distinct cosets are disjoint, so a cone meeting this
      // piece without being contained in it straddles the boundary and the
      // input is simply not long enough to dispatch yet
      if (!cone_intersect(th, bcode, st->pieces[i].image).empty()) return {};
    }
  });
}

}  // namespace tdlc
