#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kakeya/common.hpp"
#include "kakeya/geometry.hpp"

namespace kakeya::tubes {

using geom::Line3;

/// delta-neighborhood of a unit segment. `group` ties thin tubes to the fat
/// tube they were generated in (-1 when unused).
struct Tube {
  int id = 0;
  Line3 axis;
  double delta = 0;
  int group = -1;

  Vec3 direction() const { return axis.dir; }
  /// Distance from p to the axis segment.
  double distance_to(const Vec3& p) const;
};

/// Cubic lattice over [-extent, extent]^3. Voxel (i,j,k) has center
/// -extent + (i + 1/2) h along each axis and flat index (i n + j) n + k.
struct VoxelGrid {
  double h = 0;
  int n = 0;
  double extent = 1.0;

  VoxelGrid() = default;
  VoxelGrid(double h, double extent = 1.0);
  /// Default grid for tubes of radius delta: h = delta / 2.
  static VoxelGrid for_delta(double delta) { return VoxelGrid(delta / 2); }

  double voxel_volume() const { return h * h * h; }
  double coord(int i) const { return -extent + (i + 0.5) * h; }
  Vec3 center(std::uint64_t index) const;
  std::uint64_t index(int i, int j, int k) const {
    return (static_cast<std::uint64_t>(i) * n + static_cast<std::uint64_t>(j)) * n + static_cast<std::uint64_t>(k);
  }
  int slice_of(std::uint64_t index) const { return static_cast<int>(index / (static_cast<std::uint64_t>(n) * n)); }
  std::uint64_t total() const { return static_cast<std::uint64_t>(n) * n * n; }
};

/// Y(T). Full shadings are the whole rasterized tube and store no voxels;
/// partial shadings hold a sorted subset of the tube's voxel set.
struct Shading {
  int tube_id = 0;
  bool full = true;
  std::vector<std::uint64_t> voxels;
};

struct TubeFamily {
  double delta = 0;
  std::vector<Tube> tubes;
  std::vector<Shading> shadings;  ///< parallel to tubes
  std::string provenance = "file";
  std::uint64_t seed = 0;

  std::size_t size() const { return tubes.size(); }
  /// Throws InvalidArgument on duplicate ids, mixed delta or missing shadings.
  void validate() const;
  int index_of(int id) const;
  /// Shading voxels are indices into VoxelGrid::for_delta(delta).
  void write_jsonl(const std::string& path) const;
  static TubeFamily read_jsonl(const std::string& path);
  static TubeFamily from_tubes(std::vector<Tube> tubes, double delta, const std::string& provenance,
                               std::uint64_t seed);
};

/// Unit segment centered at `center`, clipped to B(0, 1 - delta).
Tube make_tube(int id, const Vec3& center, const Vec3& dir, double delta, int group = -1);

// ---------------------------------------------------------------------------
// Rasterization and volumes

/// Voxels whose centers lie within delta of the axis segment, sorted.
std::vector<std::uint64_t> rasterize(const Tube& t, const VoxelGrid& g);
/// Same with an explicit radius (used for neighborhoods); no resolution check.
std::vector<std::uint64_t> rasterize_capsule(const Line3& axis, double radius, const VoxelGrid& g);
/// Voxels of Y(T) on g; partial shadings are only defined on for_delta(delta).
std::vector<std::uint64_t> shading_voxels(const TubeFamily& f, std::size_t index, const VoxelGrid& g);
/// Restrict a partial shading to the tube (enforces Y(T) inside T).
Shading make_partial_shading(const Tube& t, std::vector<std::uint64_t> voxels);

struct UnionStats {
  std::int64_t union_voxels = 0;
  std::int64_t sum_voxels = 0;  ///< sum over tubes of |Y(T)| in voxels, counted per tube
  double union_volume = 0;
  double sum_volume = 0;
  int max_multiplicity = 0;
  std::vector<std::int64_t> histogram;  ///< histogram[m] = voxels of multiplicity m (m >= 1)
  double voxel_volume = 0;
  nlohmann::json to_json() const;
};

UnionStats union_volume(const TubeFamily& f, const VoxelGrid& g);

/// lambda^{5/2} delta^{1/2} (delta^2 |T|)^{3/4}
double wolff_prediction(double delta, double lambda, std::size_t n_tubes);

/// Sorted (voxel offset within the slice, tube index) pairs of slice i.
std::vector<std::pair<std::uint32_t, int>> slice_memberships(const TubeFamily& f, const VoxelGrid& g, int i);

// ---------------------------------------------------------------------------
// Wolff axioms

struct WolffOptions {
  int samples = 10000;
  double tolerance = 0.5;  ///< violation when ratio > 1 + tolerance
  std::uint64_t seed = 1;
};

struct PrismWitness {
  Vec3 center = Vec3::Zero();
  Vec3 u = Vec3::UnitZ(), v = Vec3::UnitX(), w = Vec3::UnitY();  ///< long side along u
  double s = 0, t = 0;
  int count = 0;
  double ratio = 0;
};

struct WolffReport {
  double max_ratio = 0;
  PrismWitness worst;
  int violations = 0;  ///< sampled (prism, s, t) with ratio > 1 + tolerance
  int samples = 0;
  bool pass = true;
  nlohmann::json to_json() const;
};

/// Contained: the axis segment lies in the 2 x s x t prism.
int prism_count(const TubeFamily& f, const Vec3& center, const Vec3& u, const Vec3& v, double s, double t);
WolffReport check_wolff_axioms(const TubeFamily& f, const WolffOptions& opt = {});

// ---------------------------------------------------------------------------
// Hairbrush, two ends, planiness

/// Tube ids whose shadings meet every anchor's shading.
std::vector<int> hairbrush(const TubeFamily& f, const std::vector<int>& anchor_ids, const VoxelGrid& g,
                           bool include_anchors = true);

struct TwoEndsResult {
  Vec3 center = Vec3::Zero();
  double radius = 0;
  double captured = 0;  ///< |Y cap B(p0, s)|
  double total = 0;     ///< |Y|
  bool capture_ok = false;
  bool nonconcentration_ok = false;  ///< checked against the whole dyadic family
  double worst_nonconcentration = 0; ///< max |Y cap B(p,r) cap B(p0,s)| / ((r/s)^rho |Y cap B(p0,s)|)
};

/// Maximizes |Y cap B(p, s)| s^{-rho} over balls with dyadic radii delta 2^k <= 1
/// and centers on the grid of spacing s/2 (plus the unit ball at the shading's center).
TwoEndsResult two_ends_reduce(const std::vector<Vec3>& shading_points, double voxel_volume, double delta,
                              double rho);
TwoEndsResult two_ends_reduce(const TubeFamily& f, std::size_t index, double rho);

struct PlaninessReport {
  double value = 0;
  double normalized = 0;  ///< value / (delta^2 |T|)^{3/2}
  int max_multiplicity = 0;
  std::int64_t exact_voxels = 0;
  std::int64_t sampled_voxels = 0;
  nlohmann::json to_json() const;
};

struct PlaninessOptions {
  int exact_limit = 32;
  int mc_triples = 4096;
  std::uint64_t seed = 1;
};

PlaninessReport planiness_statistic(const TubeFamily& f, const VoxelGrid& g, const PlaninessOptions& opt = {});

// ---------------------------------------------------------------------------
// Generators

/// About delta^{-2} tubes with pairwise delta-separated directions and midpoints in B(0, 1/2).
TubeFamily gen_direction_separated(double delta, std::uint64_t seed, std::size_t count = 0);

struct Sl2FamilyOptions {
  std::size_t fat_tubes = 0;  ///< 0: delta^{-3/2}
  int thin_per_fat = 0;       ///< 0: delta^{-1/2}
};

/// Fat tubes from delta^{1/2}-separated points of ad - bc = 1; delta^{-1/2}
/// thin tubes per fat tube along the strip direction in parameter space.
TubeFamily gen_sl2_family(double delta, std::uint64_t seed, const Sl2FamilyOptions& opt = {});

/// Line (a,b,0) + R(c,d,1) as a unit segment centered at its point closest to the origin.
Line3 chart_segment(const Vec4& p);

// ---------------------------------------------------------------------------
// Neighborhood profile

struct ProfileEntry {
  double r = 0;
  double volume = 0;
  double grid_h = 0;
};

/// Volume of the r-neighborhood of the union of shadings for each r >= delta.
std::vector<ProfileEntry> minkowski_profile(const TubeFamily& f, const std::vector<double>& scales);
void write_profile_csv(const std::string& path, const std::vector<ProfileEntry>& profile);

// ---------------------------------------------------------------------------
// Heisenberg / SL2 decomposition

struct CandidateStrip {
  geom::RegulusStrip strip;
  std::string origin;  ///< "fat-tube" or "triple"
};

/// Axis sampled at 9 points: within delta/2 of Z(Q) to first order and within
/// delta^{1/2} of the ruling.
bool strip_contains(const CandidateStrip& c, const Tube& t);

/// Fat-tube strips (one per generated group) plus quadrics through parameter-near triples.
std::vector<CandidateStrip> candidate_strips(const TubeFamily& f, Rng& rng, int triples = 200);

struct ExtractedStrip {
  std::size_t candidate = 0;
  std::vector<int> tube_ids;
};

struct StripDecomposition {
  std::vector<int> t1;  ///< Heisenberg part
  std::vector<int> t2;  ///< union of extracted strips
  std::vector<ExtractedStrip> strips;  ///< in extraction order
  double alpha = 0;
  double threshold = 0;  ///< delta^{-1/2 + alpha}
  int iterations = 0;
  double iteration_bound = 0;  ///< |T| delta^{1/2 - alpha}
  nlohmann::json to_json() const;
};

StripDecomposition decompose_heisenberg_sl2(const TubeFamily& f, double alpha,
                                            const std::vector<CandidateStrip>& candidates);

struct DecompositionCheck {
  bool partition = false;
  bool residual_below = false;
  bool extracted_above = false;
  bool terminated_in_bound = false;
  bool ok() const { return partition && residual_below && extracted_above && terminated_in_bound; }
};

DecompositionCheck verify_decomposition(const TubeFamily& f, const std::vector<CandidateStrip>& candidates,
                                        const StripDecomposition& d);

// ---------------------------------------------------------------------------
// Covered entropy

struct CoveredEntropyOptions {
  double min_curvature = 0.01;
  int points_per_interval = 2;
  int angles = 0;  ///< 0: ceil(pi / rho)
  int tilts = 3;
};

struct CoveredEntropyReport {
  std::int64_t covering = 0;
  double ratio = 0;  ///< covering / rho^{-7/4}
  std::int64_t surface_covering = 0;  ///< covering number of N_rho(R) cap B(0,1) from the same sampler
  double min_curvature = 0;
  std::int64_t samples = 0;
  nlohmann::json to_json() const;
};

/// `plane_normals[j]` is the normal of Pi_j for the j-th rho-interval of `ell`.
CoveredEntropyReport covered_entropy(const geom::Regulus& R, const Line3& ell, const std::vector<Vec3>& plane_normals,
                                     double rho, const CoveredEntropyOptions& opt = {});
/// Tangent planes of R along ell, one per rho-interval (ell must lie on R).
std::vector<Vec3> tangent_plane_normals(const geom::Regulus& R, const Line3& ell, double rho);

// ---------------------------------------------------------------------------
// Consequences of the hairbrush bound

struct FatHairbrushReport {
  std::vector<double> rho;
  std::vector<std::int64_t> counts;
  std::vector<double> bounds;  ///< delta^{-2} rho^{1/4} delta^{-slack}
  bool pass = true;
  nlohmann::json to_json() const;
};

/// Tubes meeting N_rho(L) at angle >= min_angle, for rho in {delta, 4 delta, 16 delta}.
FatHairbrushReport fat_hairbrush_check(const TubeFamily& f, const Line3& L, double min_angle = 0.1,
                                       double slack = 0.1);

struct TransversalityReport {
  int mu = 0;  ///< dyadic multiplicity class kept by the pigeonholing
  std::int64_t kept_voxels = 0;
  std::int64_t removed_focused = 0;
  double kept_mass_fraction = 0;
  double c = 0;  ///< max over survivors, theta, probes of count / (theta^{1/10} m(p))
  nlohmann::json to_json() const;
};

struct TransversalityOptions {
  double focus_cap = 4.0;  ///< voxels whose focus constant exceeds this are dropped
};

/// Dyadic pigeonholing of the multiplicity function followed by removal of
/// focused voxels; reports the robust-transversality constant on the survivors.
TransversalityReport robust_transversality(const TubeFamily& f, const VoxelGrid& g,
                                           const TransversalityOptions& opt = {});

/// 26 directions of the unit cube neighborhood, normalized.
std::vector<Vec3> probe_directions();

}  // namespace kakeya::tubes
