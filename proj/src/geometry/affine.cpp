#include "kakeya/geometry.hpp"

namespace kakeya::geom {

namespace {

// Point where the line crosses the plane {coordinate k = value}.
Vec3 cross_coordinate(const Line3& l, int k, double value) {
  if (std::abs(l.dir[k]) < 1e-14) throw DegeneracyError("line parallel to coordinate plane");
  return l.point((value - l.base[k]) / l.dir[k]);
}

}  // namespace

AffineMap affine_normalize(const Line3& l1, const Line3& l2, const Line3& l3,
                           const NormalizeOptions& opt) {
  const Vec3 n12 = l1.dir.cross(l2.dir);
  if (n12.norm() < 1e-12) throw DegeneracyError("first two lines are parallel");
  const double plane_angle = std::asin(std::min(1.0, std::abs(l3.dir.dot(n12.normalized()))));
  if (plane_angle < opt.plane_angle_threshold)
    throw DegeneracyError("third line is nearly parallel to the plane spanned by the first two directions");

  // Rigid motion: l1 -> x-axis, l2 parallel to the xz-plane through (0, y0, 0).
  auto st = closest_parameters(l1, l2);
  const Vec3 o = l1.point(st->first);
  const Vec3 ex = l1.dir, ey = n12.normalized(), ez = ex.cross(ey);
  AffineMap T;
  T.A.row(0) = ex;
  T.A.row(1) = ey;
  T.A.row(2) = ez;
  T.b = -T.A * o;
  const double y0 = (l2.point(st->second) - o).dot(ey);
  if (std::abs(y0) < 1e-12) throw DegeneracyError("first two lines intersect");

  // Linear map fixing the x-axis and sending l2 to (0,1,0) + R(0,0,1).
  const Vec3 d2 = T.A * l2.dir;
  const double alpha = d2.x(), gamma = d2.z();
  AffineMap S2;
  S2.A << 1, 0, -alpha / gamma, 0, 1 / y0, 0, 0, 0, 1 / gamma;
  T = S2.compose(T);

  // (x,y,z) -> (x + b(1-y), y, c z + d y) sends the crossing of l3 with y=0 to (1,0,1).
  const Line3 m3 = T(l3);
  const Vec3 q0 = cross_coordinate(m3, 1, 0.0);
  if (std::abs(q0.z()) < 1e-12) throw DegeneracyError("third line meets the first");
  const double b = 1 - q0.x(), c = 1 / q0.z(), d = 1;
  AffineMap S3;
  S3.A << 1, -b, 0, 0, 1, 0, 0, d, c;
  S3.b = Vec3(b, 0, 0);
  T = S3.compose(T);

  // (x,y,z) -> (a x + (1-a)(1-y), y, z + d y) with a = 1/(2 x1 - 1), d = 2 - 2 z1.
  const Vec3 q1 = cross_coordinate(T(l3), 1, 0.5);
  const double guard = 2 * q1.x() - 1;
  if (std::abs(guard) < opt.guard_threshold)
    throw DegeneracyError("|2 x1 - 1| below threshold: third line nearly meets a transversal");
  const double a = 1 / guard, d4 = 2 - 2 * q1.z();
  AffineMap S4;
  S4.A << a, -(1 - a), 0, 0, 1, 0, 0, d4, 1;
  S4.b = Vec3(1 - a, 0, 0);
  return S4.compose(T);
}

}  // namespace kakeya::geom
