#include "strings.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace tdlc {

bool is_prefix(const Str& a, const Str& b) {
  if (a.size() > b.size()) return false;
  return std::equal(a.begin(), a.end(), b.begin());
}

bool comparable(const Str& a, const Str& b) {
  return is_prefix(a, b) || is_prefix(b, a);
}

bool shortlex_less(const Str& a, const Str& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::string show_str(const Str& s) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out << ',';
    out << s[i];
  }
  out << ']';
  return out.str();
}

Str parse_fstr(const std::string& text) {
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  skip_ws();
  if (i >= text.size() || text[i] != '[') throw Error(ErrKind::Parse, "expected '[' in " + text);
  ++i;
  Str out;
  skip_ws();
  if (i < text.size() && text[i] == ']') {
    ++i;
  } else {
    for (;;) {
      skip_ws();
      std::size_t start = i;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      if (i == start) throw Error(ErrKind::Parse, "expected digit in " + text);
      out.push_back(static_cast<unsigned>(std::stoul(text.substr(start, i - start))));
      skip_ws();
      if (i < text.size() && text[i] == ',') {
        ++i;
        continue;
      }
      if (i < text.size() && text[i] == ']') {
        ++i;
        break;
      }
      throw Error(ErrKind::Parse, "expected ',' or ']' in " + text);
    }
  }
  skip_ws();
  if (i != text.size()) throw Error(ErrKind::Parse, "trailing junk in " + text);
  return out;
}

ClcTree full_tree(unsigned arity) {
  if (arity == 0) throw Error(ErrKind::BadArgument, "full_tree: arity must be positive");
  ClcTree t;
  t.member = [arity](const Str& s) {
    for (unsigned x : s)
      if (x >= arity) return false;
    return true;
  };
  t.compact = t.member;
  t.bound = [arity](const Str&, std::size_t) { return arity - 1; };
  return t;
}

std::vector<unsigned> child_labels(const ClcTree& t, const Str& sigma) {
  if (!t.compact(sigma))
    throw Error(ErrKind::BadArgument, "child_labels: cone not compact at " + show_str(sigma));
  std::vector<unsigned> out;
  unsigned hi = t.bound(sigma, sigma.size());
  Str child = sigma;
  child.push_back(0);
  for (unsigned i = 0; i <= hi; ++i) {
    child.back() = i;
    if (t.member(child)) out.push_back(i);
  }
  return out;
}

std::vector<Str> expand_to(const ClcTree& t, const Str& sigma, std::size_t len) {
  if (sigma.size() >= len) return {sigma};
  std::vector<Str> level = {sigma};
  for (std::size_t d = sigma.size(); d < len; ++d) {
    std::vector<Str> next;
    for (const Str& s : level) {
      for (unsigned i : child_labels(t, s)) {
        Str c = s;
        c.push_back(i);
        next.push_back(std::move(c));
      }
    }
    level = std::move(next);
  }
  return level;
}

mpz_class string_code(const Str& w) {
  static std::vector<unsigned long> primes = {2, 3};
  auto ensure_primes = [&](std::size_t n) {
    while (primes.size() < n) {
      unsigned long c = primes.back() + 2;
      for (;; c += 2) {
        bool ok = true;
        for (unsigned long p : primes) {
          if (p * p > c) break;
          if (c % p == 0) {
            ok = false;
            break;
          }
        }
        if (ok) break;
      }
      primes.push_back(c);
    }
  };
  ensure_primes(w.size());
  mpz_class out = 1;
  for (std::size_t i = 0; i < w.size(); ++i) {
    mpz_class f;
    mpz_ui_pow_ui(f.get_mpz_t(), primes[i], w[i] + 1u);
    out *= f;
  }
  return out;
}

mpz_class strong_index(const std::vector<Str>& u) {
  mpz_class out = 0;
  for (const Str& w : u) {
    mpz_class h = string_code(w);
    if (!h.fits_ulong_p())
      throw Error(ErrKind::BadArgument, "strong_index: exponent too large to materialize");
    mpz_class term;
    mpz_ui_pow_ui(term.get_mpz_t(), 2, h.get_ui());
    out += term;
  }
  return out;
}

StringSet::StringSet(std::vector<Str> m) {
  std::sort(m.begin(), m.end(), shortlex_less);
  m.erase(std::unique(m.begin(), m.end()), m.end());
  members = std::move(m);
}

bool StringSet::operator<(const StringSet& o) const {
  auto weight = [](const StringSet& u) {
    unsigned long w = u.members.size();
    for (const Str& s : u.members) {
      w += s.size();
      for (unsigned x : s) w += x;
    }
    return w;
  };
  auto total_len = [](const StringSet& u) {
    std::size_t n = 0;
    for (const Str& s : u.members) n += s.size();
    return n;
  };
  unsigned long wa = weight(*this), wb = weight(o);
  if (wa != wb) return wa < wb;
  std::size_t la = total_len(*this), lb = total_len(o);
  if (la != lb) return la < lb;
  if (members.size() != o.members.size()) return members.size() < o.members.size();
  return std::lexicographical_compare(members.begin(), members.end(), o.members.begin(),
                                      o.members.end(), shortlex_less);
}

std::string show_set(const StringSet& u) {
  std::string out = "{";
  for (std::size_t i = 0; i < u.members.size(); ++i) {
    if (i) out += ',';
    out += show_str(u.members[i]);
  }
  return out + "}";
}

StringSet canonicalize(const ClcTree& t, const StringSet& u) {
  std::vector<Str> work = u.members;
  for (;;) {
    std::sort(work.begin(), work.end(), shortlex_less);
    work.erase(std::unique(work.begin(), work.end()), work.end());
    // Drop strings with a proper prefix present (their cone is covered).
    std::vector<Str> anti;
    for (const Str& s : work) {
      bool covered = false;
      for (const Str& p : anti) {
        if (p.size() < s.size() && is_prefix(p, s)) {
          covered = true;
          break;
        }
      }
      if (!covered) anti.push_back(s);
    }
    // Merge complete sibling families into their parent when the parent's
    // cone is compact (so the family is enumerable and covers the parent).
    bool merged = false;
    std::map<Str, std::vector<unsigned>> families;
    for (const Str& s : anti) {
      if (s.empty()) continue;
      Str parent(s.begin(), s.end() - 1);
      families[parent].push_back(s.back());
    }
    std::vector<Str> next;
    std::vector<Str> killed;
    for (auto& [parent, labels] : families) {
      if (!t.member(parent) || !t.compact(parent)) continue;
      std::vector<unsigned> all = child_labels(t, parent);
      std::sort(labels.begin(), labels.end());
      if (labels == all && !all.empty()) {
        next.push_back(parent);
        for (unsigned i : all) {
          Str c = parent;
          c.push_back(i);
          killed.push_back(std::move(c));
        }
        merged = true;
      }
    }
    if (!merged) {
      StringSet out;
      out.members = std::move(anti);
      return out;
    }
    std::sort(killed.begin(), killed.end(), shortlex_less);
    for (const Str& s : anti)
      if (!std::binary_search(killed.begin(), killed.end(), s, shortlex_less))
        next.push_back(s);
    work = std::move(next);
  }
}

StringSet cone_union(const ClcTree& t, const StringSet& u, const StringSet& v) {
  std::vector<Str> all = u.members;
  all.insert(all.end(), v.members.begin(), v.members.end());
  return canonicalize(t, StringSet(std::move(all)));
}

StringSet cone_intersect(const ClcTree& t, const StringSet& u, const StringSet& v) {
  // Cones are nested or disjoint: [a] cap [b] is [longer of a,b] if comparable,
  // empty otherwise.
  std::vector<Str> out;
  for (const Str& a : u.members)
    for (const Str& b : v.members) {
      if (is_prefix(a, b))
        out.push_back(b);
      else if (is_prefix(b, a))
        out.push_back(a);
    }
  return canonicalize(t, StringSet(std::move(out)));
}

bool cone_subset(const ClcTree& t, const StringSet& u, const StringSet& v) {
  if (u.members.empty()) return true;
  std::size_t n = 0;
  for (const Str& b : v.members) n = std::max(n, b.size());
  for (const Str& a : u.members) {
    bool covered = false;
    for (const Str& b : v.members)
      if (is_prefix(b, a)) {
        covered = true;
        break;
      }
    if (covered) continue;
    if (!t.compact(a))
      throw Error(ErrKind::BadArgument, "cone_subset: non-compact uncovered cone " + show_str(a));
    for (const Str& ext : expand_to(t, a, n)) {
      bool ok = false;
      for (const Str& b : v.members)
        if (is_prefix(b, ext)) {
          ok = true;
          break;
        }
      if (!ok) return false;
    }
  }
  return true;
}

}  // namespace tdlc
