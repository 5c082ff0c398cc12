#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kakeya/common.hpp"

namespace kakeya::incidence {

/// Dense bivariate polynomial; coefficients in graded order
/// 1, x, y, x^2, xy, y^2, x^3, x^2 y, ...
class BivariatePoly {
 public:
  BivariatePoly() : degree_(0), c_(1, 0.0) {}
  explicit BivariatePoly(int degree);
  BivariatePoly(int degree, std::vector<double> coeffs);

  static int size_for(int degree) { return (degree + 1) * (degree + 2) / 2; }
  /// Index of x^i y^j.
  static int index(int i, int j) {
    const int k = i + j;
    return k * (k + 1) / 2 + j;
  }
  /// x - a or similar linear forms.
  static BivariatePoly linear(double c0, double cx, double cy);

  int degree() const { return degree_; }
  const std::vector<double>& coeffs() const { return c_; }
  double coeff(int i, int j) const;
  void set(int i, int j, double v) { c_[index(i, j)] = v; }

  double operator()(double x, double y) const;
  double operator()(const Vec2& p) const { return (*this)(p.x(), p.y()); }
  Vec2 gradient(const Vec2& p) const;
  BivariatePoly operator*(const BivariatePoly& o) const;
  bool is_zero() const;
  /// Sum of |coefficients|, used to scale tolerances.
  double scale() const;

  nlohmann::json to_json() const;

 private:
  int degree_;
  std::vector<double> c_;
};

/// Implicit curve of degree <= 2; coefficient order (1, x, y, x^2, xy, y^2).
struct Curve2 {
  std::array<double, 6> c{};

  Curve2() = default;
  explicit Curve2(const std::array<double, 6>& coeffs);

  double operator()(const Vec2& p) const;
  Vec2 gradient(const Vec2& p) const;
  bool is_zero() const;
  BivariatePoly poly() const;
  /// |gamma(p)| / |grad gamma(p)|
  double first_order_distance(const Vec2& p) const;
  /// Conic through five points (throws DegeneracyError if not unique).
  static Curve2 through_points(const std::array<Vec2, 5>& pts);
};

/// Exact Euclidean distance from p to the real zero set of a conic
/// (+infinity when the zero set is empty).
double point_conic_distance(const Curve2& curve, const Vec2& p);
/// Closest point of the zero set (nullopt when empty).
std::optional<Vec2> conic_foot_point(const Curve2& curve, const Vec2& p);

struct PlanarPointSet {
  std::vector<Vec2> points;
  double separation = 0;  ///< declared minimum pairwise distance
  double delta = 0;       ///< scale; |P| <= 1/delta when delta > 0
  /// Checks the declared invariants; throws PreconditionError on violation.
  void validate() const;
};

std::int64_t fuzzy_incidences(const std::vector<Vec2>& pts, const std::vector<Curve2>& curves, double r);
/// Incidence matrix rows per curve: indices of points within r.
std::vector<std::vector<int>> incidence_lists(const std::vector<Vec2>& pts,
                                              const std::vector<Curve2>& curves, double r);

struct RoundStats {
  int degree = 0;
  int sets = 0;           ///< sets bisected this round
  bool exact = true;      ///< every bisection verified
  int max_excess = 0;     ///< worst side count minus ceil(n/2)
  int attempts = 0;
};

struct PartitionOptions {
  int max_degree = 64;
  int tries = 50;
  int iterations = 300;
  double boundary_tol = 1e-9;
  int initial_grid = 256;
  int max_grid = 4096;
};

struct PartitionResult {
  BivariatePoly poly;
  std::vector<std::vector<int>> cells;  ///< point indices per nonempty cell
  std::vector<int> boundary;            ///< points on Z(P)
  std::vector<RoundStats> rounds;
  int n_components = 0;                 ///< components of the domain minus Z(P) seen by the grid
  int grid_resolution = 0;
  std::vector<int> unresolved;          ///< points the grid could not attach to a component
  bool all_on_boundary = false;
  double c1 = 0;                        ///< components / D^2
  double c2 = 0;                        ///< max cell size / (n / D^2)
};

PartitionResult polynomial_partition(const std::vector<Vec2>& pts, int D, Rng& rng,
                                     const PartitionOptions& opt = {});

struct CellOptions {
  int initial_grid = 256;
  int max_grid = 4096;
  double boundary_tol = 1e-9;
  double extent = 1.0;  ///< domain is [-extent, extent]^2 (enlarged to contain all points)
};

struct CellLabeling {
  std::vector<int> labels;  ///< -1 for points on Z(P); otherwise component id
  int n_components = 0;
  int resolution = 0;
  std::vector<int> unresolved;
};

CellLabeling assign_cells(const BivariatePoly& P, const std::vector<Vec2>& pts, const CellOptions& opt = {});
// Same, for P given as a product of factors (at most 64). Grid cells are
// joined only when every factor has the same sign, so two factor curves
// crossing one grid cell cannot merge distinct components.
CellLabeling assign_cells(const std::vector<BivariatePoly>& factors, const std::vector<Vec2>& pts,
                          const CellOptions& opt = {});

struct CoveringReport {
  std::int64_t covering = 0;  ///< greedy rho-net size for Z(P) inside B(0,1)
  double bound = 0;           ///< D/rho + D^2
  double c = 0;               ///< covering / bound
  double area = 0;            ///< |N_rho(Z(P)) cap B(0,1)|
  double area_bound = 0;      ///< D rho + D^2 rho^2
  double area_c = 0;
  int components = 0;         ///< connected components of Z(P) cap B(0,1)
  double component_c = 0;     ///< components / D^2
  std::int64_t samples = 0;
};

CoveringReport zero_set_covering(const BivariatePoly& P, double rho, int D);
/// Sample points of Z(P) inside B(0,1) from sign changes on a grid of the given spacing.
std::vector<Vec2> zero_set_samples(const BivariatePoly& P, double spacing, double radius = 1.0);

struct NearVarietyProfile {
  std::vector<double> t_values;
  std::vector<double> exceptional;  ///< measure of {dist > t rho} on the chord
  std::vector<double> near;         ///< measure of {dist <= t rho}
  double fitted_c = 0;              ///< exceptional(1) / s^3
  std::vector<bool> verdicts;       ///< exceptional(t) <= c s^3 t^{-1/2}
};

/// Profile along the chord L cap B(0,1) of the line through `point` with direction `dir`.
NearVarietyProfile near_variety_profile(const Curve2& P, const Vec2& point, const Vec2& dir, double s,
                                        double rho, int samples = 200001);

struct DiscreteSTOptions {
  double r = 0;          ///< incidence radius; 0 means delta
  int max_retries = 5;
  int curve_attempts = 20000;
  int D = 0;             ///< 0 means round(delta^{-1/6})
};

struct DiscreteSTReport {
  double delta = 0;
  int A = 0;
  std::uint64_t seed = 0;
  int D = 0;
  double r = 0;
  std::vector<Vec2> points;
  std::vector<Curve2> curves;
  int max_pair_curves = 0;     ///< max over point pairs of curves near both
  std::int64_t brute = 0;
  std::int64_t partition_route = 0;
  std::int64_t boundary_points = 0;
  std::int64_t boundary_term = 0;   ///< I(P0, C)
  std::int64_t cell_term = 0;       ///< sum over cells of I(P_cell, C_cell)
  std::int64_t cell_curve_sum = 0;  ///< sum over cells of |C_cell|
  int cells = 0;
  double bound = 0;                 ///< A^{1/2} delta^{-4/3}
  double ratio = 0;                 ///< brute / bound
  double cs_bound = 0;              ///< |C| + (A |P|^2 |C|)^{1/2}
  int retries = 0;
  nlohmann::json to_json() const;
};

DiscreteSTReport discrete_st_experiment(double delta, int A, std::uint64_t seed,
                                        const DiscreteSTOptions& opt = {});

/// Partition-route incidence count, with the per-term breakdown filled into `rep`.
std::int64_t partition_route_incidences(const std::vector<Vec2>& pts, const std::vector<Curve2>& curves,
                                        double r, int D, Rng& rng, DiscreteSTReport* rep = nullptr);

std::vector<Vec2> read_points_csv(const std::string& path);
std::vector<Curve2> read_curves_csv(const std::string& path);
void write_points_csv(const std::string& path, const std::vector<Vec2>& pts);
void write_curves_csv(const std::string& path, const std::vector<Curve2>& curves);

}  // namespace kakeya::incidence
