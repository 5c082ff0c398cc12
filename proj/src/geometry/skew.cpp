#include <algorithm>

#include "kakeya/geometry.hpp"

namespace kakeya::geom {

namespace {

void orthonormal_pair(const Vec3& d, Vec3& e1, Vec3& e2) {
  const Vec3 seed = std::abs(d.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  e1 = (seed - seed.dot(d) * d).normalized();
  e2 = d.cross(e1);
}

std::pair<double, double> window(const Line3& l, double radius) {
  auto c = l.ball_chord(Vec3::Zero(), radius);
  if (!c) throw PreconditionError("line misses B(0," + std::to_string(radius) + ")");
  return *c;
}

}  // namespace

double cone_ratio(const Line3& l1, const Line3& l2, double phi) {
  const auto [t0, t1] = window(l2, 2.0);
  Vec3 e1, e2;
  orthonormal_pair(l1.dir, e1, e2);
  const Vec3 n = std::cos(phi) * e1 + std::sin(phi) * e2;
  const Vec3 m = -std::sin(phi) * e1 + std::cos(phi) * e2;
  const Vec3 w0 = l2.base - l1.base;
  const double N0 = n.dot(w0), N1 = n.dot(l2.dir);
  const double D0 = m.dot(w0), D1 = m.dot(l2.dir);
  const double eps = 1e-13 * std::max(1.0, w0.norm());
  auto N = [&](double t) { return N0 + N1 * t; };
  auto D = [&](double t) { return D0 + D1 * t; };
  const double inf = std::numeric_limits<double>::infinity();

  if (std::abs(D1) <= 1e-15 && std::abs(D0) <= eps)
    return (std::abs(N1) <= 1e-15 && std::abs(N0) <= eps) ? 0.0 : inf;
  if (std::abs(D1) > 1e-15) {
    const double ts = -D0 / D1;
    if (ts >= t0 && ts <= t1) {
      if (std::abs(N(ts)) <= eps) return std::abs(N1 / D1);
      return inf;
    }
  }
  // Linear-fractional in t: the supremum on the chord sits at an endpoint.
  double best = 0;
  for (double t : {t0, t1}) best = std::max(best, std::abs(N(t)) / std::abs(D(t)));
  return best;
}

double skewness(const Line3& l1, const Line3& l2) {
  window(l1, 1.0);
  window(l2, 2.0);
  constexpr int kScan = 64;
  double best = std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int k = 0; k < kScan; ++k) {
    const double v = cone_ratio(l1, l2, kPi * k / kScan);
    if (v < best) best = v, arg = k;
  }
  if (best == 0) return 0;
  double a = kPi * (arg - 1) / kScan, b = kPi * (arg + 1) / kScan;
  const double g = (std::sqrt(5.0) - 1) / 2;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = cone_ratio(l1, l2, x1), f2 = cone_ratio(l1, l2, x2);
  while (b - a > 1e-12) {
    if (f1 < f2) {
      b = x2, x2 = x1, f2 = f1;
      x1 = b - g * (b - a);
      f1 = cone_ratio(l1, l2, x1);
    } else {
      a = x1, x1 = x2, f1 = f2;
      x2 = a + g * (b - a);
      f2 = cone_ratio(l1, l2, x2);
    }
  }
  return std::min({best, f1, f2});
}

std::pair<double, double> separation(const Line3& l1, const Line3& l2) {
  const auto [s0, s1] = window(l1, 1.0);
  // dist^2(l1(s), l2) = |w(s)|^2 - (w(s).d2)^2 with w(s) = w0 + s d1: a quadratic in s.
  const Vec3 w0 = l1.base - l2.base;
  const Vec3 p0 = w0 - w0.dot(l2.dir) * l2.dir;
  const Vec3 p1 = l1.dir - l1.dir.dot(l2.dir) * l2.dir;
  const double A = p1.squaredNorm(), B = 2 * p0.dot(p1), C = p0.squaredNorm();
  auto f = [&](double s) { return std::sqrt(std::max(0.0, A * s * s + B * s + C)); };
  double lo = std::min(f(s0), f(s1)), hi = std::max(f(s0), f(s1));
  if (A > 0) {
    const double sv = -B / (2 * A);
    if (sv > s0 && sv < s1) lo = std::min(lo, f(sv));
  }
  return {lo, hi};
}

}  // namespace kakeya::geom
