#include "padic_groupoids.hpp"

#include <sstream>

namespace tdlc {

mpz_class zigzag(std::size_t n) {
  // 0, -1, 1, -2, 2, ...
  if (n == 0) return 0;
  mpz_class half((unsigned long)((n + 1) / 2));
  return (n % 2) ? mpz_class(-half) : half;
}

mpq_class prufer_frac(const mpq_class& q) {
  mpz_class num = q.get_num(), den = q.get_den();
  mpz_class rem;
  mpz_fdiv_r(rem.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  mpq_class out(rem, den);
  out.canonicalize();
  return out;
}

unsigned prufer_level(const mpq_class& a, unsigned p) {
  mpz_class den = a.get_den();
  unsigned m = 0;
  while (den != 1) {
    if (!mpz_divisible_ui_p(den.get_mpz_t(), p))
      throw Error(ErrKind::BadArgument, "value is not in the Pruefer p-group");
    mpz_divexact_ui(den.get_mpz_t(), den.get_mpz_t(), p);
    ++m;
  }
  return m;
}

mpq_class prufer_shift(const mpq_class& a, const mpz_class& k, unsigned p) {
  if (k < 0) throw Error(ErrKind::BadArgument, "prufer_shift: negative shift");
  unsigned lvl = prufer_level(a, p);
  mpz_class kk = k;
  if (kk > lvl) kk = lvl;  // beyond the level everything is 0 mod 1 anyway
  if (!kk.fits_ulong_p()) throw Error(ErrKind::BadArgument, "prufer_shift: shift too large");
  mpz_class f;
  mpz_ui_pow_ui(f.get_mpz_t(), p, kk.get_ui());
  return prufer_frac(mpq_class(f) * a);
}

// ---- W(Q_p) -----------------------------------------------------------------

QpGroupoid::QpGroupoid(unsigned p, bool restrict_to_zp) : p_(p), zp_(restrict_to_zp) {
  if (p < 2) throw Error(ErrKind::BadArgument, "p must be at least 2");
  table_.push_back(Coset{0, 0});  // slot 0: the empty element (never printed as a coset)
  enum_.push_back(kEmpty);
}

bool QpGroupoid::valid(const Coset& c) const {
  if (c.a < 0 || c.a >= 1) return false;
  unsigned lvl = prufer_level(c.a, p_);
  if (zp_ && (c.r < 0 || mpz_class(lvl) > c.r)) return false;  // must lie inside Z_p
  return true;
}

Elt QpGroupoid::coset(const mpz_class& r, const mpq_class& a) {
  Coset c{r, prufer_frac(a)};
  if (!valid(c)) throw Error(ErrKind::BadArgument, "coset outside this groupoid");
  auto it = intern_.find(c);
  if (it != intern_.end()) return it->second;
  table_.push_back(c);
  Elt e = static_cast<Elt>(table_.size() - 1);
  intern_.emplace(std::move(c), e);
  return e;
}

const QpGroupoid::Coset& QpGroupoid::data(Elt e) const {
  if (e == kEmpty || e >= table_.size())
    throw Error(ErrKind::BadArgument, "data: not a coset handle");
  return table_[e];
}

std::optional<Elt> QpGroupoid::compose(Elt a, Elt b) {
  if (a == kEmpty || b == kEmpty) return std::nullopt;
  const Coset &x = data(a), &y = data(b);
  if (x.r != y.r) return std::nullopt;
  return coset(x.r, prufer_frac(x.a + y.a));
}

Elt QpGroupoid::inverse(Elt a) {
  if (a == kEmpty) return kEmpty;
  const Coset& x = data(a);
  return coset(x.r, prufer_frac(-x.a));
}

Elt QpGroupoid::meet(Elt a, Elt b) {
  if (a == kEmpty || b == kEmpty) return kEmpty;
  Coset x = data(a), y = data(b);
  if (x.r < y.r) std::swap(x, y);
  // now x.r >= y.r: D_x subseteq D_y iff p^(x.r-y.r) x.a = y.a
  if (prufer_shift(x.a, x.r - y.r, p_) == y.a) return coset(x.r, x.a);
  return kEmpty;
}

mpz_class QpGroupoid::index(Elt u, Elt v) {
  if (!is_subgroup(u) || !is_subgroup(v))
    throw Error(ErrKind::BadArgument, "index: arguments must be subgroups");
  mpz_class r = data(u).r, s = data(v).r;
  mpz_class d = s > r ? mpz_class(s - r) : mpz_class(0);
  if (!d.fits_ulong_p()) throw Error(ErrKind::BadArgument, "index: exponent too large");
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), p_, d.get_ui());
  return out;
}

Elt QpGroupoid::at(std::size_t n) {
  while (enum_.size() <= n) {
    // all cosets of weight w: |zigzag index of r| + level(a) == w
    unsigned w = enum_weight_++;
    for (unsigned i = 0; i <= w; ++i) {
      mpz_class r = zigzag(i);
      unsigned m = w - i;
      if (zp_ && (r < 0 || mpz_class(m) > r)) continue;
      if (m == 0) {
        enum_.push_back(coset(r, 0));
        continue;
      }
      mpz_class pm;
      mpz_ui_pow_ui(pm.get_mpz_t(), p_, m);
      for (mpz_class k = 1; k < pm; ++k) {
        if (mpz_divisible_ui_p(k.get_mpz_t(), p_)) continue;  // level exactly m
        enum_.push_back(coset(r, mpq_class(k, pm)));
      }
    }
  }
  return enum_[n];
}

std::string QpGroupoid::print(Elt a) {
  if (a == kEmpty) return "empty";
  const Coset& x = data(a);
  std::ostringstream out;
  out << "D[p=" << p_ << ";r=" << x.r << ";a=" << x.a << "]";
  return out.str();
}

// ---- shared parsing helpers ---------------------------------------------------

namespace {

std::map<std::string, std::string> parse_fields(const std::string& text, char tag) {
  if (text.size() < 3 || text[0] != tag || text[1] != '[' || text.back() != ']')
    throw Error(ErrKind::Parse, std::string("expected ") + tag + "[...]: " + text);
  std::map<std::string, std::string> out;
  std::string body = text.substr(2, text.size() - 3);
  std::size_t pos = 0;
  while (pos <= body.size()) {
    std::size_t end = body.find(';', pos);
    std::string field = body.substr(pos, end == std::string::npos ? end : end - pos);
    std::size_t eq = field.find('=');
    if (eq == std::string::npos) throw Error(ErrKind::Parse, "expected key=value in " + text);
    out[field.substr(0, eq)] = field.substr(eq + 1);
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return out;
}

mpz_class parse_mpz(const std::string& s, const std::string& ctx) {
  try {
    return mpz_class(s);
  } catch (const std::invalid_argument&) {
    throw Error(ErrKind::Parse, "bad integer '" + s + "' in " + ctx);
  }
}

mpq_class parse_mpq(const std::string& s, const std::string& ctx) {
  try {
    mpq_class q(s);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw Error(ErrKind::Parse, "bad rational '" + s + "' in " + ctx);
  }
}

void check_p(const std::map<std::string, std::string>& f, unsigned p, const std::string& ctx) {
  auto it = f.find("p");
  if (it != f.end() && parse_mpz(it->second, ctx) != p)
    throw Error(ErrKind::Parse, "prime mismatch in " + ctx);
}

std::string at_or_throw(const std::map<std::string, std::string>& f, const std::string& key,
                        const std::string& ctx) {
  auto it = f.find(key);
  if (it == f.end()) throw Error(ErrKind::Parse, "missing field '" + key + "' in " + ctx);
  return it->second;
}

}  // namespace

Elt QpGroupoid::parse(const std::string& text) {
  auto f = parse_fields(text, 'D');
  check_p(f, p_, text);
  return coset(parse_mpz(at_or_throw(f, "r", text), text),
               parse_mpq(at_or_throw(f, "a", text), text));
}

// ---- W(Z x| Q_p) --------------------------------------------------------------

SemidirectGroupoid::SemidirectGroupoid(unsigned p) : p_(p) {
  if (p < 2) throw Error(ErrKind::BadArgument, "p must be at least 2");
  table_.push_back(Coset{0, 0, 0});
  enum_.push_back(kEmpty);
}

Elt SemidirectGroupoid::coset(const mpz_class& z, const mpz_class& r, const mpq_class& a) {
  Coset c{z, r, prufer_frac(a)};
  prufer_level(c.a, p_);  // validates the denominator
  auto it = intern_.find(c);
  if (it != intern_.end()) return it->second;
  table_.push_back(c);
  Elt e = static_cast<Elt>(table_.size() - 1);
  intern_.emplace(std::move(c), e);
  return e;
}

const SemidirectGroupoid::Coset& SemidirectGroupoid::data(Elt e) const {
  if (e == kEmpty || e >= table_.size())
    throw Error(ErrKind::BadArgument, "data: not a coset handle");
  return table_[e];
}

std::optional<Elt> SemidirectGroupoid::compose(Elt a, Elt b) {
  if (a == kEmpty || b == kEmpty) return std::nullopt;
  const Coset &x = data(a), &y = data(b);
  // g^v D_{r,c} g^w D_{s,d} = g^(v+w) D_{r+w,c} D_{s,d}, defined iff r+w = s
  if (x.r + y.z != y.r) return std::nullopt;
  return coset(x.z + y.z, y.r, prufer_frac(x.a + y.a));
}

Elt SemidirectGroupoid::inverse(Elt a) {
  if (a == kEmpty) return kEmpty;
  const Coset& x = data(a);
  return coset(-x.z, x.r - x.z, prufer_frac(-x.a));
}

Elt SemidirectGroupoid::meet(Elt a, Elt b) {
  if (a == kEmpty || b == kEmpty) return kEmpty;
  Coset x = data(a), y = data(b);
  if (x.z != y.z) return kEmpty;
  if (x.r < y.r) std::swap(x, y);
  if (prufer_shift(x.a, x.r - y.r, p_) == y.a) return coset(x.z, x.r, x.a);
  return kEmpty;
}

mpz_class SemidirectGroupoid::index(Elt u, Elt v) {
  if (!is_subgroup(u) || !is_subgroup(v))
    throw Error(ErrKind::BadArgument, "index: arguments must be subgroups");
  mpz_class r = data(u).r, s = data(v).r;
  mpz_class d = s > r ? mpz_class(s - r) : mpz_class(0);
  if (!d.fits_ulong_p()) throw Error(ErrKind::BadArgument, "index: exponent too large");
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), p_, d.get_ui());
  return out;
}

Elt SemidirectGroupoid::at(std::size_t n) {
  while (enum_.size() <= n) {
    unsigned w = enum_weight_++;
    for (unsigned i = 0; i <= w; ++i) {
      mpz_class z = zigzag(i);
      for (unsigned j = 0; i + j <= w; ++j) {
        mpz_class r = zigzag(j);
        unsigned m = w - i - j;
        if (m == 0) {
          enum_.push_back(coset(z, r, 0));
          continue;
        }
        mpz_class pm;
        mpz_ui_pow_ui(pm.get_mpz_t(), p_, m);
        for (mpz_class k = 1; k < pm; ++k) {
          if (mpz_divisible_ui_p(k.get_mpz_t(), p_)) continue;
          enum_.push_back(coset(z, r, mpq_class(k, pm)));
        }
      }
    }
  }
  return enum_[n];
}

std::string SemidirectGroupoid::print(Elt a) {
  if (a == kEmpty) return "empty";
  const Coset& x = data(a);
  std::ostringstream out;
  out << "E[p=" << p_ << ";z=" << x.z << ";r=" << x.r << ";a=" << x.a << "]";
  return out.str();
}

Elt SemidirectGroupoid::parse(const std::string& text) {
  auto f = parse_fields(text, 'E');
  check_p(f, p_, text);
  return coset(parse_mpz(at_or_throw(f, "z", text), text),
               parse_mpz(at_or_throw(f, "r", text), text),
               parse_mpq(at_or_throw(f, "a", text), text));
}

// ---- W(F_p((t))) ---------------------------------------------------------------

LaurentVal laurent_add(const LaurentVal& x, const LaurentVal& y, unsigned p) {
  LaurentVal out(std::max(x.size(), y.size()), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    unsigned v = (i < x.size() ? x[i] : 0) + (i < y.size() ? y[i] : 0);
    out[i] = v % p;
  }
  while (!out.empty() && out.back() == 0) out.pop_back();
  return out;
}

LaurentVal laurent_neg(const LaurentVal& x, unsigned p) {
  LaurentVal out = x;
  for (unsigned& d : out) d = (p - d) % p;
  while (!out.empty() && out.back() == 0) out.pop_back();
  return out;
}

LaurentVal laurent_shift(const LaurentVal& x, const mpz_class& k) {
  if (k < 0) throw Error(ErrKind::BadArgument, "laurent_shift: negative shift");
  if (mpz_class(x.size()) <= k) return {};
  LaurentVal out(x.begin() + k.get_ui(), x.end());
  while (!out.empty() && out.back() == 0) out.pop_back();
  return out;
}

LaurentGroupoid::LaurentGroupoid(unsigned p) : p_(p) {
  if (p < 2) throw Error(ErrKind::BadArgument, "p must be at least 2");
  table_.push_back(Coset{0, {}});
  enum_.push_back(kEmpty);
}

Elt LaurentGroupoid::coset(const mpz_class& r, const LaurentVal& a) {
  Coset c{r, a};
  while (!c.a.empty() && c.a.back() == 0) c.a.pop_back();
  for (unsigned d : c.a)
    if (d >= p_) throw Error(ErrKind::BadArgument, "digit out of range");
  auto it = intern_.find(c);
  if (it != intern_.end()) return it->second;
  table_.push_back(c);
  Elt e = static_cast<Elt>(table_.size() - 1);
  intern_.emplace(std::move(c), e);
  return e;
}

const LaurentGroupoid::Coset& LaurentGroupoid::data(Elt e) const {
  if (e == kEmpty || e >= table_.size())
    throw Error(ErrKind::BadArgument, "data: not a coset handle");
  return table_[e];
}

std::optional<Elt> LaurentGroupoid::compose(Elt a, Elt b) {
  if (a == kEmpty || b == kEmpty) return std::nullopt;
  const Coset &x = data(a), &y = data(b);
  if (x.r != y.r) return std::nullopt;
  return coset(x.r, laurent_add(x.a, y.a, p_));
}

Elt LaurentGroupoid::inverse(Elt a) {
  if (a == kEmpty) return kEmpty;
  const Coset& x = data(a);
  return coset(x.r, laurent_neg(x.a, p_));
}

Elt LaurentGroupoid::meet(Elt a, Elt b) {
  if (a == kEmpty || b == kEmpty) return kEmpty;
  Coset x = data(a), y = data(b);
  if (x.r < y.r) std::swap(x, y);
  if (laurent_shift(x.a, x.r - y.r) == y.a) return coset(x.r, x.a);
  return kEmpty;
}

mpz_class LaurentGroupoid::index(Elt u, Elt v) {
  if (!is_subgroup(u) || !is_subgroup(v))
    throw Error(ErrKind::BadArgument, "index: arguments must be subgroups");
  mpz_class r = data(u).r, s = data(v).r;
  mpz_class d = s > r ? mpz_class(s - r) : mpz_class(0);
  if (!d.fits_ulong_p()) throw Error(ErrKind::BadArgument, "index: exponent too large");
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), p_, d.get_ui());
  return out;
}

Elt LaurentGroupoid::at(std::size_t n) {
  while (enum_.size() <= n) {
    unsigned w = enum_weight_++;
    for (unsigned i = 0; i <= w; ++i) {
      mpz_class r = zigzag(i);
      unsigned m = w - i;
      if (m == 0) {
        enum_.push_back(coset(r, {}));
        continue;
      }
      // digit vectors of length exactly m (last digit nonzero), by value
      mpz_class pm;
      mpz_ui_pow_ui(pm.get_mpz_t(), p_, m);
      for (mpz_class v = 0; v < pm; ++v) {
        LaurentVal a(m, 0);
        mpz_class rest = v;
        for (unsigned d = 0; d < m; ++d) {
          a[d] = static_cast<unsigned>(mpz_fdiv_ui(rest.get_mpz_t(), p_));
          rest /= p_;
        }
        if (a[m - 1] == 0) continue;
        enum_.push_back(coset(r, a));
      }
    }
  }
  return enum_[n];
}

std::string LaurentGroupoid::print(Elt a) {
  if (a == kEmpty) return "empty";
  const Coset& x = data(a);
  std::ostringstream out;
  out << "L[p=" << p_ << ";r=" << x.r << ";a=";
  if (x.a.empty()) {
    out << "0";
  } else {
    for (std::size_t i = 0; i < x.a.size(); ++i) {
      if (i) out << ',';
      out << x.a[i];
    }
  }
  out << "]";
  return out.str();
}

Elt LaurentGroupoid::parse(const std::string& text) {
  auto f = parse_fields(text, 'L');
  check_p(f, p_, text);
  mpz_class r = parse_mpz(at_or_throw(f, "r", text), text);
  std::string as = at_or_throw(f, "a", text);
  LaurentVal a;
  if (as != "0" && !as.empty()) {
    std::size_t pos = 0;
    while (pos <= as.size()) {
      std::size_t end = as.find(',', pos);
      std::string d = as.substr(pos, end == std::string::npos ? end : end - pos);
      if (d.empty() || d.find_first_not_of("0123456789") != std::string::npos)
        throw Error(ErrKind::Parse, "bad digit '" + d + "' in " + text);
      a.push_back(static_cast<unsigned>(std::stoul(d)));
      if (end == std::string::npos) break;
      pos = end + 1;
    }
  }
  return coset(r, a);
}

}  // namespace tdlc
