#include "padic_baire.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <mutex>

namespace tdlc {

namespace {
// precision value meaning "no information"
constexpr long kNoInfo = std::numeric_limits<long>::min() / 4;

mpz_class pow_p(unsigned p, unsigned long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), p, e);
  return r;
}
}  // namespace

long qval(unsigned p, const mpq_class& x) {
  if (x == 0) throw Error(ErrKind::BadArgument, "qval: zero has no valuation");
  auto count = [&](const mpz_class& z) {
    long v = 0;
    mpz_class q = z;
    while (q % p == 0) {
      q /= p;
      ++v;
    }
    return v;
  };
  return count(x.get_num()) - count(x.get_den());
}

PadicBall pb_add(unsigned, const PadicBall& a, const PadicBall& b) {
  return {a.center + b.center, std::min(a.prec, b.prec)};
}

PadicBall pb_neg(const PadicBall& a) { return {-a.center, a.prec}; }

PadicBall pb_mul(unsigned p, const PadicBall& a, const PadicBall& b) {
  long va = a.center == 0 ? a.prec : std::min(qval(p, a.center), a.prec);
  long vb = b.center == 0 ? b.prec : std::min(qval(p, b.center), b.prec);
  if (a.prec <= kNoInfo / 2 || b.prec <= kNoInfo / 2)
    return {a.center * b.center, kNoInfo};
  long prec = std::min({a.prec + vb, b.prec + va, a.prec + b.prec});
  return {a.center * b.center, prec};
}

PadicBall pb_inv(unsigned p, const PadicBall& a) {
  if (a.center == 0) return {0, kNoInfo};
  long v = qval(p, a.center);
  if (v >= a.prec) return {0, kNoInfo};  // 0 not excluded
  return {1 / a.center, a.prec - 2 * v};
}

// ---- the tree Q -----------------------------------------------------------------

ClcTree q_tree(unsigned p) {
  auto member = [p](const Str& s) {
    if (s.empty()) return true;
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s[i] >= p) return false;
    if (s[0] > 0 && s.size() >= 2 && s[1] == 0) return false;
    return true;
  };
  auto compact = [member](const Str& s) { return !s.empty() && member(s); };
  auto bound = [p](const Str& s, std::size_t i) -> unsigned {
    if (i < s.size()) return s[i];
    if (i == 0) throw Error(ErrKind::BadArgument, "q_tree bound: root cone not compact");
    return p - 1;
  };
  return ClcTree{member, compact, bound};
}

PadicBall ball_of(unsigned p, const Str& s) {
  if (s.empty()) return {0, kNoInfo};
  long r = s[0];
  mpz_class n = 0;
  for (std::size_t i = s.size(); i-- > 1;) n = n * p + s[i];
  mpq_class c(n, pow_p(p, r));
  c.canonicalize();
  return {c, (long)(s.size() - 1) - r};
}

Str emit_qstr(unsigned p, const PadicBall& ball) {
  if (ball.prec <= kNoInfo / 2) return {};
  long v = ball.center == 0 ? ball.prec : std::min(qval(p, ball.center), ball.prec);
  long r;
  if (v < ball.prec)
    r = std::max(0L, -v);  // valuation of every member is exactly v
  else if (ball.prec >= 0)
    r = 0;  // every member lies in Z_p
  else
    return {};
  // digits of p^r * x, known modulo p^(prec + r); the scaled center is a
  // p-adic integer, so its denominator is invertible modulo p^k
  mpq_class scaled = ball.center * pow_p(p, r);
  long k = ball.prec + r;
  mpz_class mod = pow_p(p, k);
  mpz_class d = 0;
  if (k > 0) {
    mpz_class deninv;
    if (mpz_invert(deninv.get_mpz_t(), scaled.get_den().get_mpz_t(), mod.get_mpz_t()) == 0)
      throw Error(ErrKind::Inconsistent, "emit_qstr: denominator not a p-adic unit");
    mpz_class prod = scaled.get_num() * deninv;
    mpz_fdiv_r(d.get_mpz_t(), prod.get_mpz_t(), mod.get_mpz_t());
  }
  Str out{(unsigned)r};
  for (long i = 0; i < k; ++i) {
    mpz_class digit = d % p;
    out.push_back((unsigned)digit.get_ui());
    d /= p;
  }
  return out;
}

Str qstr_of(unsigned p, const mpq_class& x, std::size_t len) {
  if (len == 0) return {};
  long r = x == 0 ? 0 : std::max(0L, -qval(p, x));
  Str out = emit_qstr(p, PadicBall{x, (long)len - 1 - r});
  if (out.size() == len) return out;
  // the prefix is too short to determine the valuation from a ball alone:
  // write the exact digits directly
  out = {(unsigned)r};
  mpq_class scaled = x * pow_p(p, r);
  mpz_class mod = pow_p(p, (long)len - 1);
  mpz_class deninv, d = 0;
  if (len > 1) {
    if (mpz_invert(deninv.get_mpz_t(), scaled.get_den().get_mpz_t(), mod.get_mpz_t()) == 0)
      throw Error(ErrKind::Inconsistent, "qstr_of: denominator not a p-adic unit");
    mpz_class prod = scaled.get_num() * deninv;
    mpz_fdiv_r(d.get_mpz_t(), prod.get_mpz_t(), mod.get_mpz_t());
  }
  for (std::size_t i = 1; i < len; ++i) {
    mpz_class digit = d % p;
    out.push_back((unsigned)digit.get_ui());
    d /= p;
  }
  return out;
}

mpq_class qstr_value(unsigned p, const Str& s) {
  if (s.empty()) return 0;
  return ball_of(p, s).center;
}

PathHandle q_path(unsigned p, const mpq_class& x) {
  return PathHandle{[p, x](std::size_t n) { return qstr_of(p, x, n); }};
}

// ---- ring machines ---------------------------------------------------------------

MonotoneMachine qp_normalize(unsigned p) {
  return make_machine(1, [p](std::span<const Str> in, Fuel& fuel) {
    spend(fuel);
    return emit_qstr(p, ball_of(p, in[0]));
  });
}

MonotoneMachine qp_neg(unsigned p) {
  return make_machine(1, [p](std::span<const Str> in, Fuel& fuel) {
    spend(fuel);
    return emit_qstr(p, pb_neg(ball_of(p, in[0])));
  });
}

MonotoneMachine qp_add(unsigned p) {
  return make_machine(2, [p](std::span<const Str> in, Fuel& fuel) {
    spend(fuel);
    return emit_qstr(p, pb_add(p, ball_of(p, in[0]), ball_of(p, in[1])));
  });
}

MonotoneMachine qp_mul(unsigned p) {
  return make_machine(2, [p](std::span<const Str> in, Fuel& fuel) {
    spend(fuel);
    return emit_qstr(p, pb_mul(p, ball_of(p, in[0]), ball_of(p, in[1])));
  });
}

// ---- matrix trees ----------------------------------------------------------------

Str matrix_strand(const Str& s, unsigned strands, unsigned i) {
  Str out;
  for (std::size_t q = i; q < s.size(); q += strands) out.push_back(s[q]);
  return out;
}

Str matrix_interleave(const std::vector<Str>& strands) {
  Str out;
  for (std::size_t k = 0;; ++k)
    for (std::size_t i = 0; i < strands.size(); ++i) {
      if (strands[i].size() <= k) return out;
      out.push_back(strands[i][k]);
    }
}

ClcTree matrix_tree(unsigned p, unsigned n) {
  unsigned nn = n * n;
  ClcTree q = q_tree(p);
  auto member = [q, nn](const Str& s) {
    for (unsigned i = 0; i < nn; ++i)
      if (!q.member(matrix_strand(s, nn, i))) return false;
    return true;
  };
  auto compact = [member, nn](const Str& s) { return s.size() >= nn && member(s); };
  auto bound = [p, nn](const Str& s, std::size_t q_) -> unsigned {
    if (q_ < s.size()) return s[q_];
    if (q_ < nn) throw Error(ErrKind::BadArgument, "matrix_tree bound: cone not compact");
    return p - 1;
  };
  return ClcTree{member, compact, bound};
}

PathHandle matrix_path(unsigned p, unsigned n, const std::vector<mpq_class>& entries) {
  if (entries.size() != (std::size_t)n * n)
    throw Error(ErrKind::BadArgument, "matrix_path: wrong entry count");
  return PathHandle{[p, n, entries](std::size_t len) {
    std::size_t per = (len + n * n - 1) / (n * n);
    std::vector<Str> strands;
    for (const mpq_class& e : entries) strands.push_back(qstr_of(p, e, per));
    return take(matrix_interleave(strands), len);
  }};
}

std::vector<PadicBall> matrix_balls(unsigned p, unsigned n, const Str& s) {
  std::vector<PadicBall> out;
  for (unsigned i = 0; i < n * n; ++i) out.push_back(ball_of(p, matrix_strand(s, n * n, i)));
  return out;
}

mpq_class det_exact(unsigned n, const std::vector<mpq_class>& m) {
  if (n == 1) return m[0];
  mpq_class sum = 0;
  for (unsigned j = 0; j < n; ++j) {
    std::vector<mpq_class> minor;
    for (unsigned r = 1; r < n; ++r)
      for (unsigned c = 0; c < n; ++c)
        if (c != j) minor.push_back(m[r * n + c]);
    mpq_class term = m[j] * det_exact(n - 1, minor);
    sum += (j % 2 == 0) ? term : -term;
  }
  return sum;
}

namespace {

PadicBall det_ball(unsigned p, unsigned n, const std::vector<PadicBall>& m) {
  if (n == 1) return m[0];
  PadicBall sum{0, std::numeric_limits<long>::max() / 4};
  for (unsigned j = 0; j < n; ++j) {
    std::vector<PadicBall> minor;
    for (unsigned r = 1; r < n; ++r)
      for (unsigned c = 0; c < n; ++c)
        if (c != j) minor.push_back(m[r * n + c]);
    PadicBall term = pb_mul(p, m[j], det_ball(p, n - 1, minor));
    if (j % 2 == 1) term = pb_neg(term);
    sum = pb_add(p, sum, term);
  }
  return sum;
}

// cofactor of entry (i, j): sign * det of the complementary minor
PadicBall cofactor_ball(unsigned p, unsigned n, const std::vector<PadicBall>& m, unsigned i,
                        unsigned j) {
  std::vector<PadicBall> minor;
  for (unsigned r = 0; r < n; ++r)
    for (unsigned c = 0; c < n; ++c)
      if (r != i && c != j) minor.push_back(m[r * n + c]);
  PadicBall d = n == 1 ? PadicBall{1, std::numeric_limits<long>::max() / 4}
                       : det_ball(p, n - 1, minor);
  return ((i + j) % 2 == 1) ? pb_neg(d) : d;
}

mpq_class cofactor_exact(unsigned n, const std::vector<mpq_class>& m, unsigned i, unsigned j) {
  if (n == 1) return 1;
  std::vector<mpq_class> minor;
  for (unsigned r = 0; r < n; ++r)
    for (unsigned c = 0; c < n; ++c)
      if (r != i && c != j) minor.push_back(m[r * n + c]);
  mpq_class d = det_exact(n - 1, minor);
  return ((i + j) % 2 == 1) ? -d : d;
}

Str emit_matrix(unsigned p, const std::vector<PadicBall>& balls) {
  std::vector<Str> strands;
  for (const PadicBall& b : balls) strands.push_back(emit_qstr(p, b));
  return matrix_interleave(strands);
}

}  // namespace

MonotoneMachine matrix_mul(unsigned p, unsigned n) {
  return make_machine(2, [p, n](std::span<const Str> in, Fuel& fuel) {
    spend(fuel, n * n);
    auto a = matrix_balls(p, n, in[0]);
    auto b = matrix_balls(p, n, in[1]);
    std::vector<PadicBall> c;
    for (unsigned i = 0; i < n; ++i)
      for (unsigned j = 0; j < n; ++j) {
        PadicBall s{0, std::numeric_limits<long>::max() / 4};
        for (unsigned k = 0; k < n; ++k)
          s = pb_add(p, s, pb_mul(p, a[i * n + k], b[k * n + j]));
        c.push_back(s);
      }
    return emit_matrix(p, c);
  });
}

MonotoneMachine matrix_det(unsigned p, unsigned n) {
  return make_machine(1, [p, n](std::span<const Str> in, Fuel& fuel) {
    spend(fuel, n * n);
    return emit_qstr(p, det_ball(p, n, matrix_balls(p, n, in[0])));
  });
}

MonotoneMachine sl_inv(unsigned p, unsigned n) {
  return make_machine(1, [p, n](std::span<const Str> in, Fuel& fuel) {
    spend(fuel, n * n);
    auto m = matrix_balls(p, n, in[0]);
    std::vector<PadicBall> adj(n * n);
    for (unsigned i = 0; i < n; ++i)
      for (unsigned j = 0; j < n; ++j) adj[j * n + i] = cofactor_ball(p, n, m, i, j);
    return emit_matrix(p, adj);
  });
}

// ---- SL_n ------------------------------------------------------------------------

std::vector<mpq_class> sl_dense_matrix(unsigned p, unsigned n, std::size_t k) {
  unsigned nn = n * n;
  if (k == 0) {
    std::vector<mpq_class> id(nn, 0);
    for (unsigned i = 0; i < n; ++i) id[i * n + i] = 1;
    return id;
  }
  struct Stash {
    std::vector<std::vector<mpq_class>> found;
    unsigned next_h = 1;
  };
  static std::mutex mu;
  static std::map<std::pair<unsigned, unsigned>, Stash> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& stash = cache[{p, n}];
  auto& found = stash.found;
  // stage h: scale e <= h and integer entries with |entry| <= h, at least one
  // of them attaining h (so each matrix appears at exactly one stage)
  for (unsigned& h = stash.next_h; found.size() < k; ++h) {
    if (h > 64) throw Error(ErrKind::FuelExhausted, "sl_dense_matrix: enumeration too deep");
    for (unsigned e = 0; e <= h; ++e) {
      std::vector<long> v(nn, -(long)h);
      while (true) {
        long maxabs = e;
        for (long x : v) maxabs = std::max(maxabs, std::abs(x));
        if (maxabs == (long)h) {
          std::vector<mpq_class> m;
          mpq_class scale(1, pow_p(p, e));
          for (long x : v) m.push_back(x * scale);
          if (det_exact(n, m) == 1) found.push_back(m);
        }
        std::size_t i = 0;
        while (i < nn && v[i] == (long)h) v[i++] = -(long)h;
        if (i == nn) break;
        ++v[i];
      }
    }
  }
  return found[k - 1];
}

ClcTree sl_n_tree(unsigned p, unsigned n, Fuel fuel) {
  ClcTree T = matrix_tree(p, n);
  auto in_S = [p, n, T](const Str& s) {
    if (!T.member(s)) return false;
    PadicBall d = det_ball(p, n, matrix_balls(p, n, s));
    if (d.prec <= 0) return true;
    mpq_class diff = d.center - 1;
    return diff == 0 || qval(p, diff) >= d.prec;
  };
  auto dense = [p, n](std::size_t k) { return matrix_path(p, n, sl_dense_matrix(p, n, k)); };
  auto witness = [p, n](const Str& s) -> std::optional<bool> {
    unsigned nn = n * n;
    auto balls = matrix_balls(p, n, s);
    std::vector<Str> strands;
    for (unsigned i = 0; i < nn; ++i) strands.push_back(matrix_strand(s, nn, i));
    // base exact completion: ball centers, except that a strand pinned to
    // r > 0 with no digits yet needs a value of exact valuation -r
    std::vector<mpq_class> base(nn);
    std::vector<unsigned> loose;  // strands with no digit info may also take a
                                  // second candidate value, center + p^prec
    for (unsigned i = 0; i < nn; ++i) {
      base[i] = balls[i].center;
      if (strands[i].size() == 1 && strands[i][0] > 0)
        base[i] = mpq_class(1, pow_p(p, strands[i][0]));
      else if (strands[i].size() <= 1)
        loose.push_back(i);
    }
    std::size_t combos = loose.size() <= 12 ? (std::size_t)1 << loose.size() : 1;
    for (std::size_t mask = 0; mask < combos; ++mask) {
      std::vector<mpq_class> c = base;
      for (std::size_t b = 0; b < loose.size(); ++b)
        if (mask >> b & 1) c[loose[b]] += pow_p(p, std::max(balls[loose[b]].prec, 0L));
      mpq_class D = det_exact(n, c);
      // adjust one entry by Cramer's rule to force determinant 1, then verify
      // that the adjusted matrix still extends the prefix
      for (unsigned i = 0; i < nn; ++i) {
        mpq_class cof = cofactor_exact(n, c, i / n, i % n);
        mpq_class x = c[i];
        if (D != 1) {
          if (cof == 0) continue;
          x += (1 - D) / cof;
        }
        std::vector<mpq_class> m = c;
        m[i] = x;
        bool ok = true;
        for (unsigned j = 0; j < nn && ok; ++j)
          if (qstr_of(p, m[j], strands[j].size()) != strands[j]) ok = false;
        if (ok) return true;
      }
    }
    return std::nullopt;
  };
  return prune(T, in_S, dense, witness, fuel);
}

// ---- GL_n ------------------------------------------------------------------------

namespace {
bool ball_contains(unsigned p, const PadicBall& b, const mpq_class& x) {
  if (b.prec <= 0) return true;
  mpq_class diff = b.center - x;
  return diff == 0 || qval(p, diff) >= b.prec;
}
}  // namespace

BairePresentation gl_embed(unsigned p, unsigned n) {
  unsigned N = n + 1;
  ClcTree TN = matrix_tree(p, N);
  auto member = [p, n, N, TN](const Str& s) {
    if (!TN.member(s)) return false;
    auto balls = matrix_balls(p, N, s);
    // the appended row and column vanish off the corner
    for (unsigned i = 0; i < n; ++i) {
      if (!ball_contains(p, balls[i * N + n], 0)) return false;
      if (!ball_contains(p, balls[n * N + i], 0)) return false;
    }
    // corner times block determinant is 1
    std::vector<PadicBall> block;
    for (unsigned i = 0; i < n; ++i)
      for (unsigned j = 0; j < n; ++j) block.push_back(balls[i * N + j]);
    PadicBall prod = pb_mul(p, balls[n * N + n], det_ball(p, n, block));
    return ball_contains(p, prod, 1);
  };
  ClcTree tree{member, [member, N](const Str& s) { return s.size() >= N * N && member(s); },
               TN.bound};
  return BairePresentation{tree, matrix_mul(p, N), sl_inv(p, N)};
}

MonotoneMachine gl_embed_map(unsigned p, unsigned n) {
  unsigned N = n + 1;
  return make_machine(1, [p, n, N](std::span<const Str> in, Fuel& fuel) {
    spend(fuel, N * N);
    unsigned nn = n * n;
    std::vector<Str> strands(N * N);
    std::size_t longest = 0;
    for (unsigned i = 0; i < n; ++i)
      for (unsigned j = 0; j < n; ++j) {
        strands[i * N + j] = matrix_strand(in[0], nn, i * n + j);
        longest = std::max(longest, strands[i * N + j].size());
      }
    Str corner = emit_qstr(p, pb_inv(p, det_ball(p, n, matrix_balls(p, n, in[0]))));
    strands[n * N + n] = corner;
    longest = std::max(longest, corner.size());
    for (unsigned i = 0; i < n; ++i) {
      strands[i * N + n] = Str(longest, 0);  // exact zeros: 0^(r) then 0-digits
      strands[n * N + i] = Str(longest, 0);
    }
    return matrix_interleave(strands);
  });
}

// ---- F_p((t)) --------------------------------------------------------------------

namespace {
long lval(const LaurentBall& a) {
  for (std::size_t i = 0; i < a.digits.size(); ++i)
    if (a.digits[i] != 0 && a.lo + (long)i < a.prec) return a.lo + (long)i;
  return a.prec;  // center vanishes below the precision: valuation >= prec
}
}  // namespace

LaurentBall lb_add(unsigned p, const LaurentBall& a, const LaurentBall& b) {
  long lo = std::min(a.digits.empty() ? 0 : a.lo, b.digits.empty() ? 0 : b.lo);
  long hi = std::max(a.digits.empty() ? 0 : a.lo + (long)a.digits.size(),
                     b.digits.empty() ? 0 : b.lo + (long)b.digits.size());
  LaurentBall out;
  out.lo = lo;
  out.prec = std::min(a.prec, b.prec);
  if (hi > lo) out.digits.assign(hi - lo, 0);
  for (std::size_t i = 0; i < a.digits.size(); ++i)
    out.digits[a.lo + (long)i - lo] = (out.digits[a.lo + (long)i - lo] + a.digits[i]) % p;
  for (std::size_t i = 0; i < b.digits.size(); ++i)
    out.digits[b.lo + (long)i - lo] = (out.digits[b.lo + (long)i - lo] + b.digits[i]) % p;
  return out;
}

LaurentBall lb_neg(unsigned p, const LaurentBall& a) {
  LaurentBall out = a;
  for (unsigned& d : out.digits) d = (p - d) % p;
  return out;
}

LaurentBall lb_mul(unsigned p, const LaurentBall& a, const LaurentBall& b) {
  LaurentBall out;
  if (a.prec <= kNoInfo / 2 || b.prec <= kNoInfo / 2)
    out.prec = kNoInfo;
  else {
    long va = std::min(lval(a), a.prec), vb = std::min(lval(b), b.prec);
    out.prec = std::min({a.prec + vb, b.prec + va, a.prec + b.prec});
  }
  out.lo = a.lo + b.lo;
  if (!a.digits.empty() && !b.digits.empty()) {
    out.digits.assign(a.digits.size() + b.digits.size() - 1, 0);
    for (std::size_t i = 0; i < a.digits.size(); ++i)
      for (std::size_t j = 0; j < b.digits.size(); ++j)
        out.digits[i + j] = (out.digits[i + j] + a.digits[i] * b.digits[j]) % p;
  }
  return out;
}

ClcTree laurent_tree(unsigned p) { return q_tree(p); }

LaurentBall lball_of(unsigned p, const Str& s) {
  (void)p;
  if (s.empty()) return {0, {}, kNoInfo};
  LaurentBall out;
  out.lo = -(long)s[0];
  out.digits.assign(s.begin() + 1, s.end());
  out.prec = (long)(s.size() - 1) - (long)s[0];
  return out;
}

Str emit_lstr(unsigned p, const LaurentBall& ball) {
  (void)p;
  if (ball.prec <= kNoInfo / 2) return {};
  long v = std::min(lval(ball), ball.prec);
  long r;
  if (v < ball.prec)
    r = std::max(0L, -v);
  else if (ball.prec >= 0)
    r = 0;
  else
    return {};
  Str out{(unsigned)r};
  for (long e = -r; e < ball.prec; ++e) {
    long idx = e - ball.lo;
    out.push_back(idx >= 0 && idx < (long)ball.digits.size() ? ball.digits[idx] : 0);
  }
  return out;
}

MonotoneMachine lau_normalize(unsigned p) {
  return make_machine(1, [p](std::span<const Str> in, Fuel& fuel) {
    spend(fuel);
    return emit_lstr(p, lball_of(p, in[0]));
  });
}

MonotoneMachine lau_neg(unsigned p) {
  return make_machine(1, [p](std::span<const Str> in, Fuel& fuel) {
    spend(fuel);
    return emit_lstr(p, lb_neg(p, lball_of(p, in[0])));
  });
}

MonotoneMachine lau_add(unsigned p) {
  return make_machine(2, [p](std::span<const Str> in, Fuel& fuel) {
    spend(fuel);
    return emit_lstr(p, lb_add(p, lball_of(p, in[0]), lball_of(p, in[1])));
  });
}

MonotoneMachine lau_mul(unsigned p) {
  return make_machine(2, [p](std::span<const Str> in, Fuel& fuel) {
    spend(fuel);
    return emit_lstr(p, lb_mul(p, lball_of(p, in[0]), lball_of(p, in[1])));
  });
}

}  // namespace tdlc
