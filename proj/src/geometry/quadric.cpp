#include "kakeya/geometry.hpp"

namespace kakeya::geom {

using nlohmann::json;

QuadricPoly::QuadricPoly(const std::array<double, 10>& coeffs) : c(coeffs) {
  if (is_zero()) throw InvalidArgument("zero polynomial is not a quadric");
}

std::array<double, 10> QuadricPoly::monomials(const Vec3& p) {
  const double x = p.x(), y = p.y(), z = p.z();
  return {1, x, y, z, x * x, y * y, z * z, x * y, x * z, y * z};
}

double QuadricPoly::operator()(const Vec3& p) const {
  const auto m = monomials(p);
  double s = 0;
  for (int i = 0; i < 10; ++i) s += c[i] * m[i];
  return s;
}

Vec3 QuadricPoly::gradient(const Vec3& p) const {
  const double x = p.x(), y = p.y(), z = p.z();
  return {c[1] + 2 * c[4] * x + c[7] * y + c[8] * z, c[2] + 2 * c[5] * y + c[7] * x + c[9] * z,
          c[3] + 2 * c[6] * z + c[8] * x + c[9] * y};
}

Mat3 QuadricPoly::hessian() const {
  Mat3 h;
  h << 2 * c[4], c[7], c[8], c[7], 2 * c[5], c[9], c[8], c[9], 2 * c[6];
  return h;
}

bool QuadricPoly::is_zero(double tol) const {
  for (double v : c)
    if (std::abs(v) > tol) return false;
  return true;
}

QuadricPoly QuadricPoly::normalized() const {
  int arg = 0;
  for (int i = 1; i < 10; ++i)
    if (std::abs(c[i]) > std::abs(c[arg])) arg = i;
  if (c[arg] == 0) throw InvalidArgument("zero polynomial is not a quadric");
  QuadricPoly q;
  for (int i = 0; i < 10; ++i) q.c[i] = c[i] / c[arg];
  return q;
}

double QuadricPoly::first_order_distance(const Vec3& p) const {
  const double g = gradient(p).norm();
  const double v = std::abs((*this)(p));
  if (g == 0) return v == 0 ? 0 : std::numeric_limits<double>::infinity();
  return v / g;
}

Vec3 QuadricPoly::project(const Vec3& p, int iterations) const {
  Vec3 q = p;
  for (int i = 0; i < iterations; ++i) {
    const Vec3 g = gradient(q);
    const double gg = g.squaredNorm();
    if (gg == 0) break;
    const double v = (*this)(q);
    q -= v / gg * g;
    if (std::abs(v) < 1e-15) break;
  }
  return q;
}

json QuadricPoly::to_json() const { return json(c); }

QuadricPoly QuadricPoly::from_json(const json& j) {
  if (!j.is_array() || j.size() != 10) throw InvalidArgument("quadric needs 10 coefficients");
  std::array<double, 10> a{};
  for (int i = 0; i < 10; ++i) a[i] = j[i].get<double>();
  return QuadricPoly(a);
}

double implicit_gauss_curvature(const QuadricPoly& q, const Vec3& p) {
  const Vec3 g = q.gradient(p);
  const double gn = g.norm();
  if (gn == 0) throw DegeneracyError("gradient vanishes: singular point");
  Mat4 b = Mat4::Zero();
  b.topLeftCorner<3, 3>() = q.hessian();
  b.block<3, 1>(0, 3) = g;
  b.block<1, 3>(3, 0) = g.transpose();
  return -b.determinant() / (gn * gn * gn * gn);
}

QuadricPoly quadric_through_lines(const Line3& l1, const Line3& l2, const Line3& l3) {
  Eigen::Matrix<double, 12, 10> M;
  int row = 0;
  for (const Line3* l : {&l1, &l2, &l3}) {
    const Vec3 c0 = l->closest_point(Vec3::Zero());
    for (double t : {-1.5, -0.5, 0.5, 1.5}) {
      const auto m = QuadricPoly::monomials(c0 + t * l->dir);
      for (int k = 0; k < 10; ++k) M(row, k) = m[k];
      M.row(row).normalize();
      ++row;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // 12 rows, 10 columns: singular values sv[0..9], the quadric is the last right vector.
  if (sv[8] <= 1e-9 * sv[0])
    throw DegeneracyError("lines lie on more than one quadric (coplanar, concurrent or parallel configuration)");
  std::array<double, 10> a{};
  for (int k = 0; k < 10; ++k) a[k] = svd.matrixV()(k, 9);
  return QuadricPoly(a).normalized();
}

}  // namespace kakeya::geom
