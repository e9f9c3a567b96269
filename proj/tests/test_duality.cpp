#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <memory>
#include <random>
#include <set>

#include "../src/duality.hpp"
#include "../src/padic_groupoids.hpp"
#include "../src/sinf.hpp"

using namespace tdlc;

namespace {

// The additive group Z_2 on the full binary tree: digit i of the path is the
// coefficient of 2^i. Addition carries upward, so digit i of a sum or of a
// negation depends only on digits 0..i of the inputs.
BairePresentation z2_baire() {
  auto member = [](const Str& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned d) { return d <= 1; });
  };
  auto compact = [](const Str&) { return true; };
  auto bound = [](const Str&, std::size_t) -> unsigned { return 1; };
  MonotoneMachine op = make_machine(2, [](std::span<const Str> in, Fuel& fuel) {
    std::size_t n = std::min(in[0].size(), in[1].size());
    spend(fuel, n + 1);
    Str out;
    unsigned carry = 0;
    for (std::size_t i = 0; i < n; ++i) {
      unsigned s = in[0][i] + in[1][i] + carry;
      out.push_back(s & 1);
      carry = s >> 1;
    }
    return out;
  });
  MonotoneMachine inv = make_machine(1, [](std::span<const Str> in, Fuel& fuel) {
    spend(fuel, in[0].size() + 1);
    Str out;
    unsigned carry = 1;  // -x = complement + 1
    for (unsigned d : in[0]) {
      unsigned s = (1 - d) + carry;
      out.push_back(s & 1);
      carry = s >> 1;
    }
    return out;
  });
  return BairePresentation{ClcTree{member, compact, bound}, op, inv};
}

Str digits_of(mpz_class v, std::size_t n) {
  Str out;
  for (std::size_t i = 0; i < n; ++i) {
    mpz_class q, r;
    mpz_fdiv_qr_ui(q.get_mpz_t(), r.get_mpz_t(), v.get_mpz_t(), 2);
    out.push_back(static_cast<unsigned>(r.get_ui()));
    v = q;
  }
  return out;
}

mpz_class value_of(const Str& s) {
  mpz_class v = 0;
  for (std::size_t i = s.size(); i-- > 0;) v = 2 * v + s[i];
  return v;
}

StringSet single(Str s) { return StringSet(std::vector<Str>{std::move(s)}); }

// Multiplication by an odd constant is an automorphism of (Z_2, +); digit i of
// k*x depends only on digits 0..i of x.
MonotoneMachine mul_machine(unsigned k) {
  return make_machine(1, [k](std::span<const Str> in, Fuel& fuel) {
    spend(fuel, in[0].size() + 1);
    mpz_class prod = value_of(in[0]) * k;
    return digits_of(prod, in[0].size());
  });
}

constexpr Fuel kFuel = 400000;

}  // namespace

TEST_CASE("product_subset on Z_2") {
  BairePresentation g = z2_baire();
  StringSet c0 = single({0}), c1 = single({1});
  // (1 + 2Z_2) + (1 + 2Z_2) = 2Z_2
  CHECK(product_subset(g, {c1, c1}, {false, false}, c0, kFuel));
  CHECK_FALSE(product_subset(g, {c1, c1}, {false, false}, c1, kFuel));
  // -(1 + 2Z_2) = 1 + 2Z_2
  CHECK(product_subset(g, {c1}, {true}, c1, kFuel));
  CHECK_FALSE(product_subset(g, {c1}, {true}, c0, kFuel));
  // (2Z_2) + (2Z_2) subseteq 2Z_2, and 2Z_2 - (1+2Z_2) subseteq 1+2Z_2
  CHECK(product_subset(g, {c0, c0}, {false, false}, c0, kFuel));
  CHECK(product_subset(g, {c0, c1}, {false, true}, c1, kFuel));
  // refinement of targets: 1+4Z_2 + 2+4Z_2 = 3+4Z_2
  CHECK(product_subset(g, {single({1, 0}), single({0, 1})}, {false, false}, single({1, 1}),
                       kFuel));
  CHECK_FALSE(product_subset(g, {c1, single({0, 1})}, {false, false}, single({1, 1}), kFuel));
}

TEST_CASE("canonical codes of the binary tree by weight") {
  ClcTree t = z2_baire().tree;
  auto codes = canonical_codes_by_weight(t, 3);
  // weight <= 3 admits {eps} (1), {[0]} (2), {[1]} (3), {[0,0]} (3); the pair
  // {[0],[1]} is non-canonical (merges to {eps}).
  StringSet whole = single({});
  CHECK(std::count(codes.begin(), codes.end(), whole) == 1);
  CHECK(std::count(codes.begin(), codes.end(), single({0})) == 1);
  CHECK(std::count(codes.begin(), codes.end(), single({1})) == 1);
  for (const StringSet& u : codes) CHECK(canonicalize(t, u) == u);
  for (std::size_t i = 1; i < codes.size(); ++i)
    CHECK(code_weight(codes[i - 1]) <= code_weight(codes[i]));
}

TEST_CASE("wcomp of Z_2 against the exact coset oracle") {
  auto w = std::make_shared<WcompGroupoid>(z2_baire(), kFuel);
  QpGroupoid oracle = zp_groupoid(2);

  Elt whole = w->elt_of(single({}));
  CHECK(w->is_subgroup(whole));
  Elt even = w->elt_of(single({0}));
  Elt odd = w->elt_of(single({1}));
  CHECK(w->is_subgroup(even));
  CHECK_FALSE(w->is_subgroup(odd));
  CHECK(w->is_left_coset_of(odd, even));
  CHECK(w->index(whole, even) == 2);
  CHECK(w->index(whole, w->elt_of(single({0, 0}))) == 4);
  CHECK(w->index(even, w->elt_of(single({0, 0}))) == 2);

  // In Z_2 every compact open coset is a single cone; map it to the oracle.
  const std::size_t kN = 18;
  auto to_oracle = [&](Elt a) -> Elt {
    if (a == kEmpty) return kEmpty;
    StringSet c = w->code(a);
    REQUIRE(c.members.size() == 1);
    const Str& s = c.members.front();
    return oracle.coset(mpz_class(s.size()),
                        mpq_class(value_of(s), mpz_class(1) << s.size()));
  };
  for (std::size_t i = 1; i <= kN; ++i)
    for (std::size_t j = 1; j <= kN; ++j) {
      Elt a = w->at(i), b = w->at(j);
      auto got = w->compose(a, b);
      auto want = oracle.compose(to_oracle(a), to_oracle(b));
      CHECK(got.has_value() == want.has_value());
      if (got && want) CHECK(to_oracle(*got) == *want);
      CHECK(to_oracle(w->meet(a, b)) == oracle.meet(to_oracle(a), to_oracle(b)));
    }
  for (std::size_t i = 1; i <= kN; ++i) {
    Elt a = w->at(i);
    CHECK(to_oracle(w->inverse(a)) == oracle.inverse(to_oracle(a)));
    CHECK(w->is_subgroup(a) == oracle.is_subgroup(to_oracle(a)));
    CHECK(haar(*w, a, whole) == haar(oracle, to_oracle(a), to_oracle(whole)));
  }
}

TEST_CASE("gcomp of wcomp(Z_2)") {
  auto w = std::make_shared<WcompGroupoid>(z2_baire(), kFuel);
  auto view = std::make_shared<GroupoidView>(w, kFuel);
  BairePresentation g = gcomp(w, view, kFuel);

  // The identity translation fixes every coset: its path is 0,0,1,1,2,2,...
  Str id;
  for (unsigned i = 0; i < 3; ++i) {
    id.push_back(i);
    id.push_back(i);
    CHECK(g.tree.member(id));
  }
  CHECK(g.tree.member(Str{}));
  CHECK_FALSE(g.tree.compact(Str{0}));
  CHECK(g.tree.compact(Str{0, 0}));

  // Exhaustive check to depth 3: members respect the bound, every member of a
  // compact cone extends, and labels above the bound are never members.
  std::vector<Str> level{{}};
  for (std::size_t depth = 0; depth < 3; ++depth) {
    std::vector<Str> next;
    for (const Str& eta : level) {
      unsigned cap = eta.size() >= 2 ? g.tree.bound(eta, eta.size()) : 8;
      std::size_t kids = 0;
      for (unsigned c = 0; c <= cap + 4; ++c) {
        Str child = eta;
        child.push_back(c);
        if (g.tree.member(child)) {
          if (eta.size() >= 2) CHECK(c <= cap);
          ++kids;
          next.push_back(std::move(child));
        }
      }
      if (eta.size() >= 2) CHECK(kids >= 1);  // leafless
    }
    level = std::move(next);
    CHECK_FALSE(level.empty());
  }
}

TEST_CASE("the translation action on cosets") {
  auto w = std::make_shared<WcompGroupoid>(z2_baire(), kFuel);
  Elt whole = w->elt_of(single({}));
  Elt even = w->elt_of(single({0}));
  Elt odd = w->elt_of(single({1}));

  PathHandle id = path_from({}, 0);
  PathHandle one = path_from({1}, 0);
  CHECK(act(*w, id, even, kFuel) == even);
  CHECK(act(*w, id, odd, kFuel) == odd);
  CHECK(act(*w, id, whole, kFuel) == whole);
  CHECK(act(*w, one, even, kFuel) == odd);
  CHECK(act(*w, one, odd, kFuel) == even);
  CHECK(act(*w, one, whole, kFuel) == whole);
  // 3 + (2 + 4Z_2) = 1 + 4Z_2
  PathHandle three = path_from({1, 1}, 0);
  CHECK(act(*w, three, w->elt_of(single({0, 1})), kFuel) == w->elt_of(single({1, 0})));

  std::mt19937 rng(2026);
  for (int t = 0; t < 6; ++t) {
    mpz_class v = rng() % 64;
    PathHandle gp = path_from(digits_of(v, 7), 0);
    PathHandle gn = path_from(digits_of(-v, 7), 0);
    Elt a = w->at(1 + rng() % 10);
    Elt moved = act(*w, gp, a, kFuel);
    CHECK(act(*w, gn, moved, kFuel) == a);
    CHECK(act_right(*w, gp, a, kFuel) == moved);  // abelian: gA = Ag
  }
}

TEST_CASE("phi embeds the group into gcomp(wcomp)") {
  auto w = std::make_shared<WcompGroupoid>(z2_baire(), kFuel);
  auto view = std::make_shared<GroupoidView>(w, kFuel);
  BairePresentation g2 = gcomp(w, view, kFuel);

  PathHandle id = path_from({}, 0);
  Str pid = phi_prefix(*w, *view, id, 6, kFuel);
  CHECK(pid == Str{0, 0, 1, 1, 2, 2});
  CHECK(g2.tree.member(pid));

  PathHandle a = path_from({1}, 0);       // 1
  PathHandle b = path_from({1, 1}, 0);    // 3
  PathHandle c = path_from({0, 0, 1}, 0); // 4
  const std::size_t kLen = 4;
  for (auto [g, h, sum] : {std::tuple{a, b, c}, std::tuple{b, a, c}}) {
    CHECK(g2.tree.member(phi_prefix(*w, *view, g, 8, kFuel)));
    auto fsum = phi_prefix(*w, *view, sum, kLen, kFuel);
    PathHandle pg{[&, g](std::size_t n) { return phi_prefix(*w, *view, g, n, kFuel); }};
    PathHandle ph{[&, h](std::size_t n) { return phi_prefix(*w, *view, h, n, kFuel); }};
    Str composed = eval_path(g2.op, pg, ph, kLen, kFuel);
    // compare on the committed common length
    std::size_t n = std::min(composed.size(), fsum.size());
    CHECK(take(composed, n) == take(fsum, n));
    CHECK(n >= 2);
  }
}

TEST_CASE("duality roundtrip: wcomp(gcomp(Z_2 fragment)) is isomorphic to it") {
  Fuel f = kFuel;
  auto zp = std::make_shared<QpGroupoid>(zp_groupoid(2));
  auto view = std::make_shared<GroupoidView>(zp, f);
  WcompGroupoid w(gcomp(zp, view, f), f);

  // Greedily extend a partial isomorphism phi from the first elements of the
  // roundtrip groupoid into the fragment: phi(n) is the least unused fragment
  // element whose row and column in the operation tables (compose, inverse,
  // meet, subgroup flag) agree with n's against everything mapped so far.
  // Products landing outside the mapped set must do so on both sides.
  const std::size_t kCount = 12;
  std::vector<Elt> phi{kEmpty};  // phi(0) = empty set on both sides
  auto table_ok = [&](std::size_t n, Elt c) {
    if (zp->is_subgroup(c) != w.is_subgroup(w.at(n))) return false;
    // image of a roundtrip element under the tentative map phi + (n -> c)
    auto image = [&](Elt a) -> std::optional<Elt> {
      if (a < phi.size()) return phi[a];
      if (a == n) return c;
      return std::nullopt;
    };
    auto mapped_rhs = [&](Elt b) {
      return b == c || std::find(phi.begin(), phi.end(), b) != phi.end();
    };
    auto side = [&](std::optional<Elt> lhs, std::optional<Elt> rhs) {
      // lhs in the roundtrip groupoid, rhs in the fragment
      if (lhs.has_value() != rhs.has_value()) return false;
      if (!lhs.has_value()) return true;
      auto img = image(*lhs);
      if (img.has_value()) return *img == *rhs;
      return !mapped_rhs(*rhs);  // both outside the mapped set
    };
    if (!side(w.inverse(w.at(n)), zp->inverse(c))) return false;
    for (std::size_t m = 1; m < phi.size(); ++m) {
      Elt b = w.at(m);
      if (!side(w.compose(w.at(n), b), zp->compose(c, phi[m]))) return false;
      if (!side(w.compose(b, w.at(n)), zp->compose(phi[m], c))) return false;
      if (!side(w.meet(w.at(n), b), zp->meet(c, phi[m]))) return false;
    }
    return true;
  };
  for (std::size_t n = 1; n <= kCount; ++n) {
    Elt chosen = kEmpty;
    for (Elt c = 1; chosen == kEmpty; ++c) {
      zp->at(c);
      if (std::find(phi.begin(), phi.end(), c) != phi.end()) continue;
      if (table_ok(n, c)) chosen = c;
      REQUIRE(c < 4 * kCount);  // the greedy match must not run away
    }
    phi.push_back(chosen);
  }
  // phi is injective by construction; spot-check it is a genuine isomorphism
  // on the mapped fragment by replaying the full tables once more.
  for (std::size_t n = 1; n <= kCount; ++n) CHECK(table_ok(n, phi[n]));
}

TEST_CASE("inverting bijective homomorphisms of Z_2") {
  BairePresentation g = z2_baire();
  auto wa = std::make_shared<WcompGroupoid>(g, kFuel);
  auto wb = std::make_shared<WcompGroupoid>(g, kFuel);

  MonotoneMachine ident = make_machine(1, [](std::span<const Str> in, Fuel& fuel) {
    spend(fuel, in[0].size() + 1);
    return Str(in[0]);
  });
  MonotoneMachine neg = g.inv;
  MonotoneMachine triple = mul_machine(3);

  struct CaseDef {
    MonotoneMachine psi;
    std::function<mpz_class(const mpz_class&)> fwd;
  };
  std::vector<CaseDef> cases = {
      {ident, [](const mpz_class& v) { return v; }},
      {triple, [](const mpz_class& v) { return v * 3; }},
  };
  for (auto& cs : cases) {
    MonotoneMachine theta = invert_homomorphism(wa, wb, cs.psi, kFuel);
    for (unsigned v : {0u, 1u, 2u, 3u, 5u, 12u}) {
      Str image = digits_of(cs.fwd(v), 6);
      Str back = eval_path(theta, path_from(image, image.back()), 4, 8 * kFuel);
      CHECK(take(back, 4) == digits_of(v, 4));
    }
  }
  // negation has prefix-dependent images; exercise it on full paths
  MonotoneMachine theta = invert_homomorphism(wa, wb, neg, kFuel);
  for (unsigned v : {1u, 3u, 6u}) {
    Str image = digits_of(-mpz_class(v), 8);
    Str back = eval_path(theta, path_from(image, image.back()), 4, 8 * kFuel);
    CHECK(take(back, 4) == digits_of(v, 4));
  }
}
