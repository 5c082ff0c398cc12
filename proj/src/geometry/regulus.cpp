#include <algorithm>

#include "kakeya/geometry.hpp"

namespace kakeya::geom {

namespace {

Vec3 plane_normal_through(const Vec3& p, const Line3& l) { return (l.base - p).cross(l.dir); }

double intersection_parameter(const Line3& along, const Line3& other) {
  auto st = closest_parameters(along, other);
  if (!st) throw DegeneracyError("parallel lines have no intersection parameter");
  return st->first;
}

}  // namespace

Vec3 RegulusFrame::y(double s) const {
  const Vec3 p2(0, u1 * std::sin(theta), u1 * std::cos(theta) - s);
  const Vec3 p3(0, u2 * std::sin(theta), u2 * std::cos(theta) - s);
  return p2.cross(v).cross(p3.cross(w));
}

Vec3 RegulusFrame::dy(double s) const {
  const Vec3 ez = Vec3::UnitZ();
  const Vec3 p2(0, u1 * std::sin(theta), u1 * std::cos(theta) - s);
  const Vec3 p3(0, u2 * std::sin(theta), u2 * std::cos(theta) - s);
  const Vec3 a = p2.cross(v), b = p3.cross(w);
  const Vec3 da = -ez.cross(v), db = -ez.cross(w);
  return da.cross(b) + a.cross(db);
}

Vec3 RegulusFrame::ddy(double) const {
  const Vec3 ez = Vec3::UnitZ();
  return 2.0 * (-ez.cross(v)).cross(-ez.cross(w));
}

RegulusFrame make_frame(const Line3& g1, const Line3& g2, const Line3& g3, const Vec3& origin) {
  RegulusFrame f;
  f.origin = g1.closest_point(origin);
  const Vec3 ez = g1.dir;
  const Vec3 n2 = plane_normal_through(f.origin, g2);
  const Vec3 n3 = plane_normal_through(f.origin, g3);
  Vec3 dl = n2.cross(n3);
  if (dl.norm() <= 1e-12 * std::max(1.0, n2.norm() * n3.norm()))
    throw DegeneracyError("no unique transversal through the frame origin");
  dl.normalize();
  Vec3 ey = dl - dl.dot(ez) * ez;
  if (ey.norm() < 1e-12) throw DegeneracyError("transversal parallel to the first generator");
  ey.normalize();
  const Vec3 ex = ey.cross(ez);
  f.rot.row(0) = ex;
  f.rot.row(1) = ey;
  f.rot.row(2) = ez;
  f.theta = std::atan2(dl.dot(ey), dl.dot(ez));
  const Line3 transversal(f.origin, dl);
  f.u1 = intersection_parameter(transversal, g2);
  f.u2 = intersection_parameter(transversal, g3);
  f.v = f.rot * g2.dir;
  f.w = f.rot * g3.dir;
  return f;
}

Regulus fit_regulus(const Line3& l1, const Line3& l2, const Line3& l3, const RegulusOptions& opt) {
  const std::array<const Line3*, 3> g = {&l1, &l2, &l3};
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (skew_margin(*g[i], *g[j]) < opt.skew_threshold)
        throw DegeneracyError("generators " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                              " are not skew (coplanar or intersecting)");
  const Vec3 n = l1.dir.cross(l2.dir);
  if (n.norm() < 1e-12) throw DegeneracyError("generators 1 and 2 are parallel");
  const double plane_angle = std::asin(std::min(1.0, std::abs(l3.dir.dot(n.normalized()))));
  if (plane_angle < opt.plane_angle_threshold)
    throw DegeneracyError("generator directions nearly parallel to a common plane (paraboloid case)");

  Regulus r;
  r.generators = {l1, l2, l3};
  r.quadric = quadric_through_lines(l1, l2, l3);
  for (const Line3* l : g) {
    const Vec3 c0 = l->closest_point(Vec3::Zero());
    for (int k = 0; k < 30; ++k) {
      const double t = -2.0 + 4.0 * k / 29.0;
      if (std::abs(r.quadric(c0 + t * l->dir)) > 1e-9)
        throw DegeneracyError("quadric fit residual too large");
    }
  }
  // Origin on l1 near the world origin where the transversal is well conditioned.
  const Vec3 c0 = l1.closest_point(Vec3::Zero());
  for (double off : {0.0, 0.3, -0.3, 0.6, -0.6, 0.9, -0.9, 1.5, -1.5}) {
    try {
      RegulusFrame f = make_frame(l1, l2, l3, c0 + off * l1.dir);
      const Vec3 dl(0, std::sin(f.theta), std::cos(f.theta));
      if (std::sin(f.theta) < 0.05 || line_angle(dl, f.v) < 0.05 || line_angle(dl, f.w) < 0.05) continue;
      r.frame = f;
      return r;
    } catch (const DegeneracyError&) {
    }
  }
  throw DegeneracyError("no well-conditioned frame origin on the first generator");
}

Line3 ruling_line(const Regulus& r, double s) {
  const Vec3 y = r.frame.y(s);
  if (y.norm() < 1e-14) throw DegeneracyError("ruling direction vanishes at this parameter");
  return Line3(r.frame.to_world(Vec3(0, 0, s)), r.frame.dir_to_world(y));
}

Line3 transversal_through_point(const Vec3& p, const Line3& l1, const Line3& l2, const Line3& l3,
                                double tol) {
  const std::array<const Line3*, 3> g = {&l1, &l2, &l3};
  const double scale = std::max(1.0, p.norm());
  std::vector<const Line3*> use;
  for (const Line3* l : g)
    if (l->distance_to(p) > tol * scale) use.push_back(l);
  if (use.size() < 2) throw DegeneracyError("point lies on two generators");
  const Vec3 na = plane_normal_through(p, *use[0]);
  const Vec3 nb = plane_normal_through(p, *use[1]);
  const Vec3 d = na.cross(nb);
  if (d.norm() <= 1e-12 * na.norm() * nb.norm())
    throw DegeneracyError("planes through the point are parallel");
  Line3 t(p, d);
  // Coplanarity residual; stays well conditioned when the lines are nearly parallel.
  for (const Line3* l : g)
    if (skew_margin(t, *l) > tol * scale)
      throw PreconditionError("point is not on the regulus: transversal misses a generator (residual " +
                              std::to_string(skew_margin(t, *l)) + ")");
  return t;
}

double CurvatureResult::relative_gap() const {
  const double m = std::max({std::abs(fundamental_forms), std::abs(frame_formula), 1e-300});
  return std::abs(fundamental_forms - frame_formula) / m;
}

static double frame_curvature(const RegulusFrame& f) {
  const Vec3 d = f.dy(0), y = f.y(0);
  return -(d.x() * d.x()) / (y.y() * y.y());
}

CurvatureResult gauss_curvature(const Regulus& r, const Vec3& p, double tol) {
  const QuadricPoly& q = r.quadric;
  const Vec3 g = q.gradient(p);
  if (g.norm() < 1e-12) throw DegeneracyError("singular point: gradient of Q vanishes");
  if (q.first_order_distance(p) > tol) throw PreconditionError("point is off the surface");
  const Vec3 ph = q.project(p);
  const auto& G = r.generators;

  CurvatureResult out;
  {
    const RegulusFrame& f = r.frame;
    const Line3 t = transversal_through_point(ph, G[0], G[1], G[2], 1e-7);
    double s;
    if (G[0].distance_to(ph) <= 1e-12) {
      s = f.to_frame(ph).z();
    } else {
      s = f.to_frame(G[0].point(intersection_parameter(G[0], t))).z();
    }
    const Vec3 P = f.to_frame(ph);
    const Vec3 Y = f.y(s), dY = f.dy(s), ddY = f.ddy(s);
    const double tt = (P - Vec3(0, 0, s)).dot(Y) / Y.squaredNorm();
    const Vec3 rs = Vec3::UnitZ() + tt * dY, rt = Y, rst = dY, rss = tt * ddY;
    const Vec3 n = rs.cross(rt).normalized();
    const double E = rs.dot(rs), F = rs.dot(rt), Gm = rt.dot(rt);
    const double L = rss.dot(n), M = rst.dot(n), N = 0.0;
    out.fundamental_forms = (L * N - M * M) / (E * Gm - F * F);
  }
  {
    // Generator-family line through p, then a fresh frame at p.
    int on = -1;
    for (int i = 0; i < 3; ++i)
      if (G[i].distance_to(ph) <= 1e-9) on = i;
    Line3 gp;
    std::vector<const Line3*> others;
    if (on >= 0) {
      gp = G[on];
      for (int i = 0; i < 3; ++i)
        if (i != on) others.push_back(&G[i]);
    } else {
      const Line3 ra = ruling_line(r, -1.3), rb = ruling_line(r, 0.2), rc = ruling_line(r, 1.1);
      gp = transversal_through_point(ph, ra, rb, rc, 1e-6);
      std::array<int, 3> idx = {0, 1, 2};
      std::sort(idx.begin(), idx.end(),
                [&](int a, int b) { return G[a].distance_to(ph) > G[b].distance_to(ph); });
      others = {&G[idx[0]], &G[idx[1]]};
    }
    out.frame_formula = frame_curvature(make_frame(gp, *others[0], *others[1], ph));
  }
  return out;
}

double xij_determinant(const Line3& li, const Line3& lj) {
  const Vec4 a = li.chart(), b = lj.chart();
  return (a[0] - b[0]) * (a[3] - b[3]) - (a[1] - b[1]) * (a[2] - b[2]);
}

double CurvatureIdentity::relative_error() const {
  return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
}

CurvatureIdentity curvature_identity(const Regulus& r) {
  const RegulusFrame& f = r.frame;
  CurvatureIdentity ci;
  ci.curvature = frame_curvature(f);
  const double st = std::sin(f.theta), ct = std::cos(f.theta);
  const Line3 a(Vec3::Zero(), Vec3::UnitZ());
  const Line3 b(Vec3(0, f.u1 * st, f.u1 * ct), f.v);
  const Line3 c(Vec3(0, f.u2 * st, f.u2 * ct), f.w);
  ci.x12 = xij_determinant(a, b);
  ci.x13 = xij_determinant(a, c);
  ci.x23 = xij_determinant(b, c);
  ci.lhs = std::sqrt(std::abs(ci.curvature)) * std::abs(ci.x12 * ci.x13 * ci.x23);
  const double du = f.u1 - f.u2;
  ci.rhs = du * du * f.v.x() * f.v.x() * f.w.x() * f.w.x() * st * st /
           (f.v.z() * f.v.z() * f.w.z() * f.w.z());
  return ci;
}

bool RegulusStrip::contains(const Vec3& p) const {
  return surface.first_order_distance(p) <= delta && ruling.distance_to(p) <= std::sqrt(delta);
}

std::array<Line3, 3> random_admissible_triple(Rng& rng, double min_margin, double min_plane_angle) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::array<Line3, 3> l;
    for (auto& x : l) x = Line3(rng.in_ball3(0.5), rng.unit_vector3());
    if (std::abs(l[1].dir.dot(l[0].dir)) < 0.2 || std::abs(l[2].dir.dot(l[0].dir)) < 0.2) continue;
    bool ok = true;
    for (int i = 0; i < 3 && ok; ++i)
      for (int j = i + 1; j < 3; ++j)
        if (skew_margin(l[i], l[j]) < min_margin) ok = false;
    if (!ok) continue;
    try {
      RegulusOptions ro;
      ro.plane_angle_threshold = min_plane_angle;
      const Regulus r = fit_regulus(l[0], l[1], l[2], ro);
      const RegulusFrame& f = r.frame;
      if (std::abs(std::sin(f.theta)) < 0.1 || std::abs(f.u1 - f.u2) < 0.05) continue;
      if (std::abs(f.v.x()) < 0.05 || std::abs(f.w.x()) < 0.05) continue;
      if (std::abs(f.u1) > 4 || std::abs(f.u2) > 4) continue;
      NormalizeOptions no;
      no.plane_angle_threshold = min_plane_angle;
      no.guard_threshold = 1e-2;
      affine_normalize(l[0], l[1], l[2], no);
    } catch (const std::runtime_error&) {
      continue;
    }
    return l;
  }
  throw DegeneracyError("could not sample an admissible triple");
}

}  // namespace kakeya::geom
