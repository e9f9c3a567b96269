#include "groupoid.hpp"

#include <sstream>

namespace tdlc {

bool MeetGroupoid::subset(Elt a, Elt b) {
  if (a == kEmpty) return true;
  return meet(a, b) == a;
}

Elt MeetGroupoid::left_unit(Elt a) {
  if (a == kEmpty) return kEmpty;
  auto r = compose(a, inverse(a));
  if (!r) throw Error(ErrKind::Inconsistent, "left_unit: A A^-1 undefined at " + print(a));
  return *r;
}

Elt MeetGroupoid::right_unit(Elt a) {
  if (a == kEmpty) return kEmpty;
  auto r = compose(inverse(a), a);
  if (!r) throw Error(ErrKind::Inconsistent, "right_unit: A^-1 A undefined at " + print(a));
  return *r;
}

bool MeetGroupoid::is_subgroup(Elt a) {
  if (a == kEmpty) return false;
  return inverse(a) == a && left_unit(a) == a;
}

bool MeetGroupoid::is_left_coset_of(Elt a, Elt u) {
  return a != kEmpty && right_unit(a) == u;
}

bool MeetGroupoid::is_right_coset_of(Elt a, Elt u) {
  return a != kEmpty && left_unit(a) == u;
}

mpq_class haar(MeetGroupoid& w, Elt a, Elt u0) {
  if (!w.is_subgroup(u0)) throw Error(ErrKind::BadArgument, "haar: U0 must be a subgroup");
  if (a == kEmpty) return mpq_class(0);
  Elt v = w.right_unit(a);  // A is a left coset of V; mu(A) = mu(V)
  mpq_class num(w.index(v, u0));
  mpq_class den(w.index(u0, v));
  mpq_class out = num / den;
  out.canonicalize();
  return out;
}

AxiomReport check_axioms(MeetGroupoid& w, std::size_t n) {
  AxiomReport rep;
  auto fail = [&rep](const std::string& msg) {
    rep.ok = false;
    if (!rep.detail.empty()) rep.detail += "; ";
    rep.detail += msg;
  };
  std::vector<Elt> e;
  for (std::size_t i = 0; i < n; ++i) e.push_back(w.at(i));

  if (w.at(0) != kEmpty) fail("at(0) is not the empty element");
  if (w.inverse(kEmpty) != kEmpty) fail("empty^-1 != empty");

  for (Elt a : e) {
    if (a == kEmpty) continue;
    // (b) A A^-1 and A^-1 A are defined (left_unit/right_unit throw otherwise)
    Elt lu, ru;
    try {
      lu = w.left_unit(a);
      ru = w.right_unit(a);
    } catch (const Error& err) {
      fail(err.what());
      continue;
    }
    // (c) cancellation against the units
    auto c1 = w.compose(a, ru);
    if (!c1 || *c1 != a) fail("A (A^-1 A) != A at " + w.print(a));
    auto c2 = w.compose(lu, a);
    if (!c2 || *c2 != a) fail("(A A^-1) A != A at " + w.print(a));
    // composition with the empty element is undefined
    if (w.compose(a, kEmpty) || w.compose(kEmpty, a)) fail("composition with empty defined");
    // meet with self / empty
    if (w.meet(a, a) != a) fail("A meet A != A");
    if (w.meet(a, kEmpty) != kEmpty) fail("A meet empty != empty");
  }

  for (Elt a : e)
    for (Elt b : e) {
      if (a == kEmpty || b == kEmpty) continue;
      // meet semilattice: commutative, result below both
      Elt m = w.meet(a, b);
      if (m != w.meet(b, a)) fail("meet not commutative");
      if (m != kEmpty && (!w.subset(m, a) || !w.subset(m, b))) fail("meet not a lower bound");
      // (d) inclusion invariant under inverse
      if (w.subset(a, b) != w.subset(w.inverse(a), w.inverse(b)))
        fail("A <= B iff A^-1 <= B^-1 fails at " + w.print(a) + ", " + w.print(b));
      auto ab = w.compose(a, b);
      if (ab) {
        // (c) recover the factors
        auto r1 = w.compose(*ab, w.inverse(b));
        if (!r1 || *r1 != a) fail("(AB)B^-1 != A at " + w.print(a) + "," + w.print(b));
        auto r2 = w.compose(w.inverse(a), *ab);
        if (!r2 || *r2 != b) fail("A^-1(AB) != B at " + w.print(a) + "," + w.print(b));
        // inverse antihomomorphism
        auto ba = w.compose(w.inverse(b), w.inverse(a));
        if (!ba || *ba != w.inverse(*ab)) fail("(AB)^-1 != B^-1 A^-1");
      }
    }

  // (a) associativity with matching definedness, (e) monotone composition
  for (Elt a : e)
    for (Elt b : e)
      for (Elt c : e) {
        if (a == kEmpty || b == kEmpty || c == kEmpty) continue;
        auto ab = w.compose(a, b);
        auto bc = w.compose(b, c);
        std::optional<Elt> l = ab ? w.compose(*ab, c) : std::optional<Elt>{};
        std::optional<Elt> r = bc ? w.compose(a, *bc) : std::optional<Elt>{};
        if (l.has_value() != r.has_value() || (l && *l != *r)) fail("associativity fails");
        // (e): A' <= A, B' <= B, AB defined -> A'B' defined and <= AB
        if (ab) {
          Elt a2 = w.meet(a, c), b2 = w.meet(b, c);  // arbitrary sub-elements from the sample
          if (a2 != kEmpty && b2 != kEmpty && w.right_unit(a2) == w.left_unit(b2)) {
            auto ab2 = w.compose(a2, b2);
            if (ab2 && !w.subset(*ab2, *ab)) fail("composition not monotone");
          }
        }
      }
  return rep;
}

std::vector<Elt> left_cosets_within(MeetGroupoid& w, Elt v, Elt u, Fuel fuel) {
  if (!w.is_subgroup(v) || !w.is_subgroup(u) || !w.subset(v, u))
    throw Error(ErrKind::BadArgument, "left_cosets_within: need subgroups V <= U");
  mpz_class want = w.index(u, v);
  std::vector<Elt> out;
  for (std::size_t i = 0;; ++i) {
    spend(fuel);
    if (mpz_class(static_cast<unsigned long>(out.size())) == want) return out;
    Elt c = w.at(i);
    if (c == kEmpty) continue;
    if (w.right_unit(c) != v || !w.subset(c, u)) continue;
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
}

std::optional<Elt> meet_via_sides(MeetGroupoid& w, Elt a0, Elt a1, Fuel fuel) {
  if (a0 == kEmpty || a1 == kEmpty) return kEmpty;
  Elt u = w.meet(w.left_unit(a0), w.left_unit(a1));
  Elt v = w.meet(w.right_unit(a0), w.right_unit(a1));
  if (u == kEmpty || v == kEmpty) return kEmpty;
  for (std::size_t i = 0;; ++i) {
    if (fuel == 0) return std::nullopt;  // undetermined within fuel
    --fuel;
    Elt c = w.at(i);
    if (c == kEmpty) continue;
    if (w.left_unit(c) == u && w.right_unit(c) == v && w.subset(c, a0) && w.subset(c, a1))
      return c;
  }
}

std::vector<Elt> possible_values(MeetGroupoid& w, Elt u, Elt l, Elt f, Fuel fuel) {
  if (!w.is_subgroup(u) || !w.is_left_coset_of(l, u))
    throw Error(ErrKind::BadArgument, "possible_values: need L a left coset of the subgroup U");
  if (f == kEmpty) return {kEmpty};
  Elt v = w.right_unit(f);  // F is a left coset of V
  Elt w0 = w.meet(u, v);
  mpz_class k = w.index(u, w0);
  if (!k.fits_ulong_p()) throw Error(ErrKind::BadArgument, "possible_values: index too large");
  unsigned long want = k.get_ui();
  // The k left cosets of U cap V inside L, lifted to left cosets of V.
  std::vector<Elt> lifts;
  std::vector<Elt> seen;
  for (std::size_t i = 0; lifts.size() < want; ++i) {
    spend(fuel);
    Elt c = w.at(i);
    if (c == kEmpty) continue;
    if (w.right_unit(c) != w0 || !w.subset(c, l)) continue;
    if (std::find(seen.begin(), seen.end(), c) != seen.end()) continue;
    seen.push_back(c);
    // unique left coset D of V with C subseteq D
    for (std::size_t j = 0;; ++j) {
      spend(fuel);
      Elt d = w.at(j);
      if (d == kEmpty) continue;
      if (w.right_unit(d) == v && w.subset(c, d)) {
        lifts.push_back(d);
        break;
      }
    }
  }
  std::vector<Elt> out;
  for (Elt d : lifts) {
    auto df = w.compose(d, f);
    if (!df) throw Error(ErrKind::Inconsistent, "possible_values: D F undefined");
    if (std::find(out.begin(), out.end(), *df) == out.end()) out.push_back(*df);
  }
  return out;
}

std::optional<Elt> extendibility_witness(MeetGroupoid& w,
                                         const std::vector<std::pair<Elt, Elt>>& pairs) {
  std::optional<Elt> acc;
  for (auto [a, b] : pairs) {
    if (a == kEmpty || b == kEmpty) {
      if (a != b) return std::nullopt;  // empty must map to empty
      continue;
    }
    auto ba = w.compose(b, w.inverse(a));
    if (!ba) return std::nullopt;
    acc = acc ? w.meet(*acc, *ba) : *ba;
    if (*acc == kEmpty) return std::nullopt;
  }
  if (!acc)
    throw Error(ErrKind::BadArgument,
                "extendibility_witness: need at least one nonempty pair");
  return acc;
}

}  // namespace tdlc
