#include "kakeya/geometry.hpp"

namespace kakeya::geom {

using nlohmann::json;

Line3::Line3(const Vec3& b, const Vec3& d, double len) : base(b), length(len) {
  const double n = d.norm();
  if (!(n > 0) || !std::isfinite(n)) throw InvalidArgument("line direction must be nonzero");
  dir = d / n;
  if (!(len > 0)) throw InvalidArgument("segment length must be positive");
}

Line3 Line3::from_chart(double a, double b, double c, double d) {
  return Line3(Vec3(a, b, 0), Vec3(c, d, 1));
}

Line3 Line3::through(const Vec3& p, const Vec3& q) { return Line3(p, q - p, (q - p).norm()); }

Vec4 Line3::chart() const {
  if (!has_chart()) throw DegeneracyError("line direction is horizontal; no chart form");
  const double s = -base.z() / dir.z();
  const Vec3 p0 = point(s);
  return Vec4(p0.x(), p0.y(), dir.x() / dir.z(), dir.y() / dir.z());
}

std::optional<std::pair<double, double>> Line3::ball_chord(const Vec3& center, double radius) const {
  const Vec3 w = base - center;
  const double b = w.dot(dir);
  const double disc = b * b - (w.squaredNorm() - radius * radius);
  if (disc < 0) return std::nullopt;
  const double r = std::sqrt(disc);
  return std::make_pair(-b - r, -b + r);
}

json Line3::to_json() const {
  json j = {{"base", {base.x(), base.y(), base.z()}}, {"dir", {dir.x(), dir.y(), dir.z()}}};
  if (is_segment()) j["len"] = length;
  return j;
}

static Vec3 vec3_from(const json& a) {
  if (!a.is_array() || a.size() != 3) throw InvalidArgument("expected 3-element array");
  return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

Line3 Line3::from_json(const json& j) {
  if (j.contains("chart")) {
    const auto& c = j["chart"];
    if (!c.is_array() || c.size() != 4) throw InvalidArgument("chart needs 4 numbers");
    return from_chart(c[0].get<double>(), c[1].get<double>(), c[2].get<double>(), c[3].get<double>());
  }
  if (j.contains("base") && j.contains("dir")) {
    const double len = j.contains("len") ? j["len"].get<double>() : std::numeric_limits<double>::infinity();
    return Line3(vec3_from(j["base"]), vec3_from(j["dir"]), len);
  }
  throw InvalidArgument("line object needs \"chart\" or \"base\"/\"dir\"");
}

std::optional<std::pair<double, double>> closest_parameters(const Line3& a, const Line3& b) {
  const double c = a.dir.dot(b.dir);
  const double den = 1 - c * c;
  if (den < 1e-14) return std::nullopt;
  const Vec3 w = a.base - b.base;
  const double d1 = a.dir.dot(w), d2 = b.dir.dot(w);
  const double s = (c * d2 - d1) / den;
  const double t = (d2 - c * d1) / den;
  return std::make_pair(s, t);
}

double line_distance(const Line3& a, const Line3& b) {
  if (auto st = closest_parameters(a, b)) return (a.point(st->first) - b.point(st->second)).norm();
  return b.distance_to(a.base);
}

double skew_margin(const Line3& a, const Line3& b) {
  return std::abs((b.base - a.base).dot(a.dir.cross(b.dir)));
}

double line_angle(const Vec3& d1, const Vec3& d2) {
  const double c = std::abs(d1.normalized().dot(d2.normalized()));
  return std::acos(std::min(1.0, c));
}

bool same_line(const Line3& a, const Line3& b, double tol) {
  if (a.dir.cross(b.dir).norm() > tol) return false;
  return b.distance_to(a.base) <= tol && a.distance_to(b.base) <= tol;
}

Line3 AffineMap::operator()(const Line3& l) const {
  const Vec3 p = (*this)(l.base);
  const Vec3 q = (*this)(l.point(1.0));
  return Line3(p, q - p);
}

AffineMap AffineMap::inverse() const {
  const Mat3 Ai = A.inverse();
  return {Ai, -Ai * b};
}

std::array<Line3, 3> canonical_triple() {
  return {Line3(Vec3(0, 0, 0), Vec3(1, 0, 0)), Line3(Vec3(0, 1, 0), Vec3(0, 0, 1)),
          Line3(Vec3(1, 0, 1), Vec3(0, 1, 0))};
}

bool heisenberg_membership(cplx x, cplx y, cplx z, double tol) {
  const double scale = std::max({1.0, std::abs(z), std::abs(x) * std::abs(y)});
  return std::abs(z.imag() - (x * std::conj(y)).imag()) <= tol * scale;
}

ComplexLine heisenberg_line(double a, double b, cplx w) { return {a, b, w}; }

}  // namespace kakeya::geom
