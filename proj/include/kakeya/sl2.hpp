#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "kakeya/common.hpp"
#include "kakeya/geometry.hpp"
#include "kakeya/incidence.hpp"

namespace kakeya::sl2 {

/// A point of {ad - bc = 1}, i.e. the line (a,b,0) + R(c,d,1).
struct SL2Point {
  Vec4 p = Vec4(1, 0, 0, 1);

  SL2Point() = default;
  /// Throws PreconditionError when |ad - bc - 1| > tol.
  explicit SL2Point(const Vec4& v, double tol = 1e-10);
  SL2Point(double a, double b, double c, double d, double tol = 1e-10)
      : SL2Point(Vec4(a, b, c, d), tol) {}

  double a() const { return p[0]; }
  double b() const { return p[1]; }
  double c() const { return p[2]; }
  double d() const { return p[3]; }
  geom::Line3 line() const { return geom::Line3::from_chart(p); }
};

double sl2_form(const Vec4& x);  ///< ad - bc

/// (a, b, lambda) -> (a, b, lambda a - b/r^2, lambda b + a/r^2), r = |(a,b)|; always on SL2.
SL2Point sl2_from_params(double a, double b, double lambda);

/// Normal vector (d, -c, -b, a).
Vec4 tangent_normal(const SL2Point& p);

struct ChordTransversality {
  double determinant = 0;  ///< |det[[a1-a2, b1-b2],[c1-c2, d1-d2]]|
  double normal_dot = 0;   ///< |normal(p1).(p1 - p2)|
};

ChordTransversality chord_transversality_both(const SL2Point& p1, const SL2Point& p2);
double chord_transversality(const SL2Point& p1, const SL2Point& p2);

struct StripDirection {
  Mat4 system;            ///< rows: three height constraints, then the tangency row
  double determinant = 0;
  Vec4 direction;         ///< unit kernel of the three height constraints
  Vec4 particular;        ///< system^{-1} (e, f, g, 0)
  double transversality = 0;  ///< |normal . direction| / |normal|
};

StripDirection strip_direction(const SL2Point& p, const Vec3& efg = Vec3::Zero());

struct BetaCurve {
  SL2Point anchor_t, anchor_b;
  Vec4 origin;                  ///< point of the 2-plane cut by the two incidence hyperplanes
  Eigen::Matrix<double, 4, 2> plane;  ///< orthonormal basis of that 2-plane
  std::array<int, 2> free_coords;     ///< coordinates kept by the substitution model
  incidence::Curve2 model;      ///< conic in the free coordinates after substituting the linear constraints
  Vec4 projection_origin;       ///< principal-axis frame of sampled points
  Eigen::Matrix<double, 4, 2> projection;
  incidence::Curve2 planar;     ///< conic in the principal-axis frame

  /// Point of the curve from free-coordinate values (on the 2-plane; on SL2 iff model vanishes).
  Vec4 lift(double x, double y) const;
  /// Points of the curve sampled within |free coords| <= extent.
  std::vector<Vec4> sample(int n, double extent = 4.0) const;
  nlohmann::json sidecar() const;
};

/// Lines of the complex meeting both anchors.
BetaCurve beta_curve(const SL2Point& p_t, const SL2Point& p_b, double threshold = 1e-6);

struct LocusCluster {
  Vec4 center;
  double diameter = 0;
  int leaves = 0;
};

struct LocusOptions {
  double tolerance_factor = 1.0;  ///< fuzz is tolerance_factor * delta
  double extent = 4.0;            ///< search box [-extent, extent]^4
  double transversality_threshold = 0.1;
  std::size_t max_leaves = 50000000;
};

struct LocusReport {
  std::vector<LocusCluster> clusters;
  double max_diameter = 0;
  double c = 0;                  ///< max_diameter / delta^{1/2}
  double linearized_c = 0;       ///< same ratio for the linearized system at the exact solutions
  std::size_t leaves = 0;
  double leaf_size = 0;
  bool pass = false;             ///< <= 2 clusters, each of diameter <= 8 delta^{1/2}
};

LocusReport triple_hairbrush_locus(const SL2Point& p1, const SL2Point& p2, const SL2Point& p3, double delta,
                                   const LocusOptions& opt = {});

/// Exact common points of the three incidence hyperplanes and SL2 (0 or 2 points, or 1 if tangent).
std::vector<Vec4> hairbrush_solutions(const SL2Point& p1, const SL2Point& p2, const SL2Point& p3);

/// Rank-deficient fit; lists the candidate classes of every null direction.
struct AmbiguityError : std::runtime_error {
  std::vector<std::string> candidates;
  AmbiguityError(const std::string& msg, std::vector<std::string> c)
      : std::runtime_error(msg), candidates(std::move(c)) {}
};

struct PolyFit {
  std::array<double, 6> coeffs{};   ///< (A, B, C, D, E, F); F = 1 when f-dominant, else largest magnitude 1
  double residual = 0;              ///< rms of P over the centers
  std::string cls;                  ///< f-dominant | a-dominant | b-dominant | degenerate
  std::array<double, 6> reduced{};  ///< after the case map, scaled so F = 1 when possible
  nlohmann::json to_json() const;
};

/// Fit A a + B b + C c + D d + E + F (ad - bc) to the centers.
PolyFit sl2_poly_detect(const std::vector<Vec4>& centers, double tolerance = 1e-9);

std::string classify_coefficients(const std::array<double, 6>& c);

/// Random point of the window |(a,b)| in [r_min, r_max], |(c,d)| <= cd_max.
SL2Point sample_sl2_window(Rng& rng, double r_min = 1.0 / 3, double r_max = 0.8, double cd_max = 3.0);

std::vector<Vec4> read_sl2_csv(const std::string& path);
void write_sl2_csv(const std::string& path, const std::vector<Vec4>& pts);

}  // namespace kakeya::sl2
