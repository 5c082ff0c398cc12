#pragma once

#include <array>
#include <complex>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kakeya/common.hpp"

namespace kakeya::geom {

/// A line in R^3 stored as base point + unit direction. `length` is infinite
/// for full lines; finite lengths describe the segment base + [0, length] dir.
struct Line3 {
  Vec3 base = Vec3::Zero();
  Vec3 dir = Vec3::UnitZ();
  double length = std::numeric_limits<double>::infinity();

  Line3() = default;
  Line3(const Vec3& b, const Vec3& d, double len = std::numeric_limits<double>::infinity());

  /// (a,b,0) + R(c,d,1)
  static Line3 from_chart(double a, double b, double c, double d);
  static Line3 from_chart(const Vec4& p) { return from_chart(p[0], p[1], p[2], p[3]); }
  static Line3 through(const Vec3& p, const Vec3& q);

  bool has_chart(double tol = 1e-12) const { return std::abs(dir.z()) > tol; }
  /// Throws DegeneracyError when the direction is horizontal.
  Vec4 chart() const;

  Vec3 point(double s) const { return base + s * dir; }
  Vec3 closest_point(const Vec3& p) const { return base + (p - base).dot(dir) * dir; }
  double parameter_of(const Vec3& p) const { return (p - base).dot(dir); }
  double distance_to(const Vec3& p) const { return (p - closest_point(p)).norm(); }
  /// Parameter interval of the (infinite) line inside the closed ball, if any.
  std::optional<std::pair<double, double>> ball_chord(const Vec3& center, double radius) const;
  bool is_segment() const { return std::isfinite(length); }
  Vec3 end() const { return point(length); }
  Vec3 midpoint() const { return point(0.5 * length); }

  nlohmann::json to_json() const;
  static Line3 from_json(const nlohmann::json& j);
};

/// Distance between two infinite lines.
double line_distance(const Line3& a, const Line3& b);
/// Parameters (s on a, t on b) of the closest pair; nullopt for parallel lines.
std::optional<std::pair<double, double>> closest_parameters(const Line3& a, const Line3& b);
/// 6 x signed volume of the unit-step tetrahedron; zero iff coplanar.
double skew_margin(const Line3& a, const Line3& b);
/// Angle in [0, pi/2] between two lines.
double line_angle(const Vec3& d1, const Vec3& d2);

/// Degree <= 2 polynomial in (x,y,z). Monomial order (1,x,y,z,x^2,y^2,z^2,xy,xz,yz).
struct QuadricPoly {
  std::array<double, 10> c{};

  QuadricPoly() = default;
  explicit QuadricPoly(const std::array<double, 10>& coeffs);

  static std::array<double, 10> monomials(const Vec3& p);
  double operator()(const Vec3& p) const;
  Vec3 gradient(const Vec3& p) const;
  Mat3 hessian() const;
  bool is_zero(double tol = 0.0) const;
  /// Divide by the coefficient of largest magnitude (first one on ties).
  QuadricPoly normalized() const;
  /// |Q|/|grad Q|, a first-order distance to the zero set.
  double first_order_distance(const Vec3& p) const;
  /// Newton projection onto Z(Q); returns the foot point.
  Vec3 project(const Vec3& p, int iterations = 30) const;

  nlohmann::json to_json() const;
  static QuadricPoly from_json(const nlohmann::json& j);
};

/// Gauss curvature of the implicit surface Q = 0 at p (bordered Hessian formula).
double implicit_gauss_curvature(const QuadricPoly& q, const Vec3& p);

/// Quadric vanishing on three lines, no hyperboloid guard.
/// Throws DegeneracyError when the null space is not one-dimensional.
QuadricPoly quadric_through_lines(const Line3& l1, const Line3& l2, const Line3& l3);

/// Rigid frame attached to a regulus: generator 1 is the z-axis, the origin is
/// a point of generator 1 and the x-axis is the surface normal there.
struct RegulusFrame {
  Mat3 rot = Mat3::Identity();  ///< rows: frame axes in world coordinates
  Vec3 origin = Vec3::Zero();   ///< world position of the frame origin
  double theta = 0;             ///< angle of the transversal through the origin with the z-axis
  double u1 = 0, u2 = 0;        ///< positions along the transversal of generators 2 and 3
  Vec3 v = Vec3::Zero();        ///< direction of generator 2 (frame coordinates)
  Vec3 w = Vec3::Zero();        ///< direction of generator 3 (frame coordinates)

  Vec3 to_frame(const Vec3& p) const { return rot * (p - origin); }
  Vec3 to_world(const Vec3& q) const { return origin + rot.transpose() * q; }
  Vec3 dir_to_frame(const Vec3& d) const { return rot * d; }
  Vec3 dir_to_world(const Vec3& d) const { return rot.transpose() * d; }

  /// Ruling direction y(s) through (0,0,s) and its first two derivatives (frame coords).
  Vec3 y(double s) const;
  Vec3 dy(double s) const;
  Vec3 ddy(double s) const;
};

/// Build a frame with origin at `origin` (projected onto g1).
RegulusFrame make_frame(const Line3& g1, const Line3& g2, const Line3& g3, const Vec3& origin);

struct RegulusOptions {
  double skew_threshold = 1e-6;        ///< minimum skew_margin between generators
  double plane_angle_threshold = 1e-3; ///< angle of v(L3) with span(v(L1), v(L2)), radians
};

struct Regulus {
  std::array<Line3, 3> generators;
  QuadricPoly quadric;
  RegulusFrame frame;
};

/// Guarded fit: pairwise skew generators, hyperboloid case.
Regulus fit_regulus(const Line3& l1, const Line3& l2, const Line3& l3,
                    const RegulusOptions& opt = {});

/// Line of the other ruling through (0,0,s) in the regulus frame (world coordinates).
Line3 ruling_line(const Regulus& r, double s);

/// Line through p meeting all three generators.
Line3 transversal_through_point(const Vec3& p, const Line3& l1, const Line3& l2, const Line3& l3,
                                double tol = 1e-9);

struct CurvatureResult {
  double fundamental_forms = 0;  ///< from the ruled parameterization of the regulus frame
  double frame_formula = 0;      ///< -(y1'(0))^2 / y2(0)^2 after re-framing at p
  double relative_gap() const;
};

/// Gauss curvature at a point of the regulus, computed two ways.
CurvatureResult gauss_curvature(const Regulus& r, const Vec3& p, double tol = 1e-7);

/// chart determinant det[[a_i-a_j, b_i-b_j],[c_i-c_j, d_i-d_j]]
double xij_determinant(const Line3& li, const Line3& lj);

struct CurvatureIdentity {
  double curvature = 0;
  double x12 = 0, x13 = 0, x23 = 0;
  double lhs = 0;  ///< |K|^{1/2} |X12 X13 X23|
  double rhs = 0;  ///< (u1-u2)^2 v1^2 w1^2 sin^2(theta) / (v3^2 w3^2)
  double relative_error() const;
};

/// Evaluate the curvature/volume identity in the regulus' own frame.
CurvatureIdentity curvature_identity(const Regulus& r);

double skewness(const Line3& l1, const Line3& l2);
/// Cone ratio alpha(phi) for the plane through l1 with pencil angle phi.
double cone_ratio(const Line3& l1, const Line3& l2, double phi);
std::pair<double, double> separation(const Line3& l1, const Line3& l2);

struct AffineMap {
  Mat3 A = Mat3::Identity();
  Vec3 b = Vec3::Zero();

  Vec3 operator()(const Vec3& p) const { return A * p + b; }
  Line3 operator()(const Line3& l) const;
  AffineMap compose(const AffineMap& inner) const { return {A * inner.A, A * inner.b + b}; }
  AffineMap inverse() const;
  double det() const { return A.determinant(); }
};

/// The canonical triple R(1,0,0); (0,1,0)+R(0,0,1); (1,0,1)+R(0,1,0).
std::array<Line3, 3> canonical_triple();

struct NormalizeOptions {
  double plane_angle_threshold = 1e-3;
  double guard_threshold = 1e-6;  ///< minimum |2 x1 - 1|
};

/// Affine map sending (l1,l2,l3) to the canonical triple.
AffineMap affine_normalize(const Line3& l1, const Line3& l2, const Line3& l3,
                           const NormalizeOptions& opt = {});

/// True when the point sets agree (directions parallel, mutual distance small).
bool same_line(const Line3& a, const Line3& b, double tol);

/// delta-neighborhood of a regulus cut by the delta^{1/2}-neighborhood of a ruling.
struct RegulusStrip {
  QuadricPoly surface;
  Line3 ruling;
  double delta = 0;

  Vec3 direction() const { return ruling.dir; }
  bool contains(const Vec3& p) const;
};

using cplx = std::complex<double>;

bool heisenberg_membership(cplx x, cplx y, cplx z, double tol = 1e-12);

/// L_{a,b,w} = {(s, w + a s, s conj(w) + b) : s in C}
struct ComplexLine {
  double a = 0, b = 0;
  cplx w = 0;
  std::array<cplx, 3> point(cplx s) const {
    return {s, w + a * s, s * std::conj(w) + b};
  }
};

ComplexLine heisenberg_line(double a, double b, cplx w);

/// Random lines through B(0, 1/2) with generic directions; used by tests and the CLI.
std::array<Line3, 3> random_admissible_triple(Rng& rng, double min_margin = 0.05,
                                              double min_plane_angle = 0.2);

}  // namespace kakeya::geom
