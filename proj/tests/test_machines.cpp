#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "../src/machines.hpp"

using namespace tdlc;

namespace {

// Identity on binary strings.
MonotoneMachine id_machine() {
  return make_machine(1, [](std::span<const Str> in, Fuel& fuel) {
    spend(fuel);
    return in[0];
  });
}

// Bitwise complement on binary strings.
MonotoneMachine flip_machine() {
  return make_machine(1, [](std::span<const Str> in, Fuel& fuel) {
    spend(fuel);
    Str out = in[0];
    for (unsigned& x : out) x = 1 - x;
    return out;
  });
}

// Successor on 2-adic integers, digits little-endian: flip 1s until the first
// 0 (which becomes 1); while the prefix is all 1s the low digits are already
// committed, the rest is not.
MonotoneMachine succ_machine() {
  return make_machine(1, [](std::span<const Str> in, Fuel& fuel) {
    spend(fuel);
    Str out;
    bool carry = true;
    for (unsigned x : in[0]) {
      if (carry) {
        if (x == 1) {
          out.push_back(0);
        } else {
          out.push_back(1);
          carry = false;
        }
      } else {
        out.push_back(x);
      }
    }
    return out;  // always fully determined: carry propagation is upward only
  });
}

// Drop the first symbol (not injective on the full binary tree... it is
// injective actually; use a truly non-injective one: constant 0 map).
MonotoneMachine const_machine() {
  return make_machine(1, [](std::span<const Str> in, Fuel& fuel) {
    spend(fuel);
    return Str(in[0].size(), 0);
  });
}

// Binary XOR machine.
MonotoneMachine xor_machine() {
  return make_machine(2, [](std::span<const Str> in, Fuel& fuel) {
    spend(fuel);
    Str out;
    for (std::size_t i = 0; i < in[0].size(); ++i) out.push_back(in[0][i] ^ in[1][i]);
    return out;
  });
}

}  // namespace

TEST_CASE("eval_path and machine basics") {
  auto m = succ_machine();
  // 3 = (1,1,0,...) -> 4 = (0,0,1,0,...)
  Str got = eval_path(m, path_from({1, 1}), 5, 1000);
  CHECK(got == Str{0, 0, 1, 0, 0});
  // -1 = (1,1,1,...): successor is 0 but no digit is ever committed... in fact
  // every digit is committed as 0 once read (carry stays pending for length
  // |input|, committed output has full length here by construction).
  CHECK(eval_path(m, path_from({}, 1), 4, 1000) == Str{0, 0, 0, 0});
  auto x = xor_machine();
  CHECK(eval_path(x, path_from({1, 0, 1}), path_from({1, 1, 0}), 3, 1000) == Str{0, 1, 1});
  CHECK_THROWS_AS(eval_path(m, path_from({1}), 3, 1), Error);  // fuel runs out
}

TEST_CASE("modulus on the full binary tree") {
  ClcTree t = full_tree(2);
  // machine committing floor(n/2) output symbols
  auto half = make_machine(1, [](std::span<const Str> in, Fuel& fuel) {
    spend(fuel);
    return take(in[0], in[0].size() / 2);
  });
  Fuel fuel = 100000;
  CHECK(modulus(half, t, {}, 3, fuel) == 6);
  CHECK(modulus(id_machine(), t, {}, 4, fuel) == 4);
  CHECK(modulus(id_machine(), t, {0, 1}, 1, fuel) == 2);
  Fuel tiny = 5;
  CHECK_THROWS_AS(modulus(half, t, {}, 30, tiny), Error);
}

TEST_CASE("image_subset against hand-computed images") {
  ClcTree t = full_tree(2);
  auto flip = flip_machine();
  // flip([0]) = [1]
  CHECK(image_subset(flip, t, StringSet(std::vector<Str>{{0}}), StringSet(std::vector<Str>{{1}}), 100000));
  CHECK(!image_subset(flip, t, StringSet(std::vector<Str>{{0}}), StringSet(std::vector<Str>{{0}}), 100000));
  // succ([1,1]) = cone of (0,0,1) union ... : successor of x = 3 mod 4 is 0 mod 4
  auto succ = succ_machine();
  CHECK(image_subset(succ, t, StringSet(std::vector<Str>{{1, 1}}), StringSet(std::vector<Str>{{0, 0}}), 100000));
  CHECK(!image_subset(succ, t, StringSet(std::vector<Str>{{1, 1}}), StringSet(std::vector<Str>{{0, 0, 0}}), 100000));
  // full tree maps onto itself under flip
  CHECK(image_subset(flip, t, StringSet(std::vector<Str>{Str{}}), StringSet(std::vector<Str>{{0}, {1}}), 100000));
}

TEST_CASE("invert_bijection recovers inverses") {
  ClcTree t = full_tree(2);
  auto succ = succ_machine();
  auto pred = invert_bijection(succ, t, 1u << 22);
  // pred(4) = 3: feed (0,0,1,0,0,...) expect (1,1,0,...)
  Str got = eval_path(pred, path_from({0, 0, 1, 0, 0, 0}), 3, 1u << 22);
  CHECK(got == Str{1, 1, 0});
  // roundtrip on several inputs
  for (unsigned v = 0; v < 8; ++v) {
    Str digits = {v & 1u, (v >> 1) & 1u, (v >> 2) & 1u};
    Str mid = eval_path(succ, path_from(digits), 3, 1u << 20);
    Str back = eval_path(pred, path_from(mid), 3, 1u << 22);
    CHECK(back == digits);
  }
  auto flip = flip_machine();
  auto unflip = invert_bijection(flip, t, 1u << 22);
  CHECK(eval_path(unflip, path_from({1, 0, 1}), 3, 1u << 22) == Str{0, 1, 0});
  // a constant machine is reported non-injective
  auto bad = invert_bijection(const_machine(), t, 1u << 22, 8);
  bool caught = false;
  try {
    eval_path(bad, path_from({0, 0, 0, 0}), 1, 1u << 22);
  } catch (const Error& e) {
    caught = e.kind == ErrKind::NonInjective;
  }
  CHECK(caught);
}

TEST_CASE("root_normalize moves infinite branching to the root") {
  // Q-like tree: first entry unbounded, later entries binary; cones compact
  // once the first entry is fixed.
  ClcTree q;
  q.member = [](const Str& s) {
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s[i] > 1) return false;
    return true;
  };
  q.compact = [member = q.member](const Str& s) { return member(s) && !s.empty(); };
  q.bound = [](const Str& s, std::size_t i) -> unsigned {
    if (i == 0) return s.empty() ? 0u : s[0];
    return 1u;
  };
  RootNormal rn = root_normalize(q, 10000);
  // minimal compact strings are exactly the one-entry strings (r), in weight
  // order: (0),(1),(2),...
  CHECK(rn.minimal(0) == Str{0});
  CHECK(rn.minimal(3) == Str{3});
  CHECK(rn.tree.member({5, 1, 0}));
  CHECK(!rn.tree.member({5, 2}));
  CHECK(rn.tree.compact({7}));
  CHECK(!rn.tree.compact({}));
  CHECK(rn.from_norm({2, 1}) == Str{2, 1});
  CHECK(rn.to_norm({2, 1}).value() == Str{2, 1});
}

TEST_CASE("prune removes dead branches") {
  ClcTree t = full_tree(2);
  // S: strings of length <= 3, or all-zero strings. Only the zero path
  // survives; every nonzero string of length <= 3 is a dead end.
  auto in_S = [](const Str& s) {
    if (s.size() <= 3) return true;
    for (unsigned x : s)
      if (x != 0) return false;
    return true;
  };
  auto dense = [](std::size_t) { return path_from({}); };  // the zero path
  ClcTree pruned = prune(t, in_S, dense, nullptr, 100000);
  CHECK(pruned.member({0, 0}));
  CHECK(pruned.member({0, 0, 0, 0, 0}));
  CHECK(!pruned.member({1}));
  CHECK(!pruned.member({0, 1, 0}));
  // witness shortcut gives the same answers
  auto witness = [](const Str& s) -> std::optional<bool> {
    for (unsigned x : s)
      if (x != 0) return false;
    return true;
  };
  ClcTree pruned2 = prune(t, in_S, nullptr, witness, 100000);
  for (const Str& s : std::vector<Str>{{}, {0}, {1}, {0, 0}, {0, 1}, {1, 1, 1}})
    CHECK(pruned.member(s) == pruned2.member(s));
}

TEST_CASE("pair_tree and pair_machine") {
  ClcTree t2 = full_tree(2), t3 = full_tree(3);
  ClcTree pt = pair_tree(t2, t3);
  CHECK(pt.member({1, 2, 0, 0}));
  CHECK(!pt.member({2, 0}));
  CHECK(!pt.member({0, 3}));
  CHECK(pt.bound({}, 0) == 1);
  CHECK(pt.bound({}, 1) == 2);
  CHECK(interleave({1, 0}, {2, 2}) == Str{1, 2, 0, 2});
  auto [a, b] = deinterleave({1, 2, 0, 2});
  CHECK(a == Str{1, 0});
  CHECK(b == Str{2, 2});
  auto px = pair_machine(xor_machine());
  Fuel fuel = 1000;
  CHECK(run_machine(px, {1, 1, 0, 0, 1, 1}, fuel) == Str{0, 0, 0});
}
