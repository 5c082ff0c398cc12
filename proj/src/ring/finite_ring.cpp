#include "kakeya/ring.hpp"

#include <algorithm>

namespace kakeya::ring {

bool is_prime(int p) {
  if (p < 2) return false;
  for (int q = 2; q * q <= p; ++q)
    if (p % q == 0) return false;
  return true;
}

static int mod(long long a, int p) {
  long long r = a % p;
  return static_cast<int>(r < 0 ? r + p : r);
}

int inverse_mod(int a, int p) {
  // p is small; extended Euclid keeps it exact for any modulus.
  long long t = 0, nt = 1, r = p, nr = mod(a, p);
  while (nr != 0) {
    long long q = r / nr;
    t -= q * nt;
    std::swap(t, nt);
    r -= q * nr;
    std::swap(r, nr);
  }
  if (r != 1) throw InvalidArgument("no inverse mod " + std::to_string(p));
  return mod(t, p);
}

RingElem::RingElem(int coarse, int fine, int modulus)
    : x1(mod(coarse, modulus)), x2(mod(fine, modulus)), p(modulus) {}

static void same_modulus(const RingElem& a, const RingElem& b) {
  if (a.p != b.p)
    throw InvalidArgument("ring elements over different moduli " + std::to_string(a.p) +
                          " and " + std::to_string(b.p));
}

RingElem RingElem::operator+(const RingElem& o) const {
  same_modulus(*this, o);
  return {x1 + o.x1, x2 + o.x2, p};
}
RingElem RingElem::operator-(const RingElem& o) const {
  same_modulus(*this, o);
  return {x1 - o.x1, x2 - o.x2, p};
}
RingElem RingElem::operator-() const { return {-x1, -x2, p}; }
RingElem RingElem::operator*(const RingElem& o) const { return ring_mul(*this, o); }

RingElem ring_mul(const RingElem& a, const RingElem& b) {
  same_modulus(a, b);
  const int p = a.p;
  return {a.x1 * b.x1, a.x1 * b.x2 + a.x2 * b.x1, p};
}

RingElem RingElem::inverse() const {
  if (!is_unit()) throw InvalidArgument("nilpotent element has no inverse");
  // (x1 + x2 t)^{-1} = x1^{-1} - x2 x1^{-2} t
  const int i = inverse_mod(x1, p);
  return {i, -x2 * i % p * i, p};
}

std::int64_t RPoint3::index() const {
  const std::int64_t q = static_cast<std::int64_t>(x.p) * x.p;
  return (x.index() * q + y.index()) * q + z.index();
}

RPoint3 RPoint3::from_index(std::int64_t idx, int p) {
  const std::int64_t q = static_cast<std::int64_t>(p) * p;
  RPoint3 r;
  r.z = RingElem::from_index(static_cast<int>(idx % q), p);
  idx /= q;
  r.y = RingElem::from_index(static_cast<int>(idx % q), p);
  r.x = RingElem::from_index(static_cast<int>(idx / q), p);
  return r;
}

bool RPoint3::in_sl2_set() const {
  const int p = x.p;
  return z.x2 == mod(static_cast<long long>(x.x1) * y.x2 - static_cast<long long>(x.x2) * y.x1, p);
}

std::vector<RPoint3> RLine::points() const {
  const int p = a.p;
  std::vector<RPoint3> out;
  out.reserve(static_cast<size_t>(p) * p);
  for (int i = 0; i < p * p; ++i) {
    const RingElem s = RingElem::from_index(i, p);
    out.push_back({a + s * c, b + s * d, s});
  }
  return out;
}

std::vector<std::int64_t> RLine::point_indices() const {
  std::vector<std::int64_t> out;
  for (const auto& q : points()) out.push_back(q.index());
  std::sort(out.begin(), out.end());
  return out;
}

RPlane::RPlane(RingElem u, RingElem v, RingElem w, RingElem s) {
  const RingElem* coords[3] = {&u, &v, &w};
  const RingElem* pivot = nullptr;
  for (const RingElem* c : coords)
    if (c->is_unit()) {
      pivot = c;
      break;
    }
  // Without a unit coefficient the solution set has p^5 or p^6 points (or none).
  if (!pivot) throw InvalidArgument("plane needs a unit coefficient among (u,v,w)");
  const RingElem inv = pivot->inverse();
  u_ = u * inv;
  v_ = v * inv;
  w_ = w * inv;
  s_ = s * inv;
}

bool RPlane::contains(const RPoint3& q) const { return u_ * q.x + v_ * q.y + w_ * q.z == s_; }

bool RPlane::contains(const RLine& l) const {
  // u(a+sc) + v(b+sd) + ws = s0 for all s
  return u_ * l.a + v_ * l.b == s_ && (u_ * l.c + v_ * l.d + w_).is_zero();
}

std::vector<RPoint3> RPlane::solutions() const {
  const int p = u_.p;
  const std::int64_t n = static_cast<std::int64_t>(p) * p * p * p * p * p;
  std::vector<RPoint3> out;
  for (std::int64_t i = 0; i < n; ++i) {
    RPoint3 q = RPoint3::from_index(i, p);
    if (contains(q)) out.push_back(q);
  }
  return out;
}

std::vector<RPlane> all_planes(int p) {
  if (!is_prime(p)) throw InvalidArgument("p must be prime");
  std::vector<RPlane> out;
  const int q = p * p;
  const RingElem one(1, 0, p);
  auto nil = [&](int f) { return RingElem(0, f, p); };
  auto el = [&](int i) { return RingElem::from_index(i, p); };
  for (int v = 0; v < q; ++v)
    for (int w = 0; w < q; ++w)
      for (int s = 0; s < q; ++s) out.emplace_back(one, el(v), el(w), el(s));
  for (int u = 0; u < p; ++u)
    for (int w = 0; w < q; ++w)
      for (int s = 0; s < q; ++s) out.emplace_back(nil(u), one, el(w), el(s));
  for (int u = 0; u < p; ++u)
    for (int v = 0; v < p; ++v)
      for (int s = 0; s < q; ++s) out.emplace_back(nil(u), nil(v), one, el(s));
  return out;
}

static void check_p(int p, const RingLimits& limits) {
  if (!is_prime(p)) throw InvalidArgument("p=" + std::to_string(p) + " is not prime");
  if (p > limits.max_set_p)
    throw ResourceError("p=" + std::to_string(p) + " exceeds configured maximum " +
                        std::to_string(limits.max_set_p));
}

std::vector<RPoint3> build_sl2_set(int p, const RingLimits& limits) {
  check_p(p, limits);
  std::vector<RPoint3> out;
  for (int x1 = 0; x1 < p; ++x1)
    for (int x2 = 0; x2 < p; ++x2)
      for (int y1 = 0; y1 < p; ++y1)
        for (int y2 = 0; y2 < p; ++y2)
          for (int z1 = 0; z1 < p; ++z1)
            out.push_back({RingElem(x1, x2, p), RingElem(y1, y2, p),
                           RingElem(z1, x1 * y2 - x2 * y1, p)});
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<RLine> build_sl2_lines(int p, const RingLimits& limits) {
  check_p(p, limits);
  std::set<RLine> lines;
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      for (int c = 0; c < p; ++c)
        for (int d = 0; d < p; ++d) {
          if (mod(a * d - b * c, p) != 1) continue;
          for (int al = 0; al < p; ++al)
            lines.insert({RingElem(a, al * a, p), RingElem(b, al * b, p), RingElem(c, al * c, p),
                          RingElem(d, al * d, p)});
        }
  return {lines.begin(), lines.end()};
}

std::set<std::array<int, 3>> coarse_projection(const std::vector<RPoint3>& pts) {
  std::set<std::array<int, 3>> out;
  for (const auto& q : pts) out.insert({q.x.x1, q.y.x1, q.z.x1});
  return out;
}

}  // namespace kakeya::ring
