#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "kakeya/common.hpp"

namespace kakeya::ring {

bool is_prime(int p);

/// x1 + x2 t in F_p[t]/(t^2).
struct RingElem {
  int x1 = 0;
  int x2 = 0;
  int p = 2;

  RingElem() = default;
  RingElem(int coarse, int fine, int modulus);

  bool is_unit() const { return x1 != 0; }
  bool is_nilpotent() const { return x1 == 0; }
  bool is_zero() const { return x1 == 0 && x2 == 0; }

  RingElem operator+(const RingElem& o) const;
  RingElem operator-(const RingElem& o) const;
  RingElem operator-() const;
  RingElem operator*(const RingElem& o) const;
  bool operator==(const RingElem& o) const { return x1 == o.x1 && x2 == o.x2 && p == o.p; }
  bool operator!=(const RingElem& o) const { return !(*this == o); }
  bool operator<(const RingElem& o) const {
    return std::tie(x1, x2) < std::tie(o.x1, o.x2);
  }

  /// Inverse of a unit; throws on nilpotents.
  RingElem inverse() const;
  /// Index in [0, p^2).
  int index() const { return x1 * p + x2; }
  static RingElem from_index(int idx, int p) { return RingElem(idx / p, idx % p, p); }
};

RingElem ring_mul(const RingElem& a, const RingElem& b);
int inverse_mod(int a, int p);

struct RPoint3 {
  RingElem x, y, z;
  bool operator<(const RPoint3& o) const { return index() < o.index(); }
  bool operator==(const RPoint3& o) const { return x == o.x && y == o.y && z == o.z; }
  /// Index in [0, p^6).
  std::int64_t index() const;
  static RPoint3 from_index(std::int64_t idx, int p);
  /// z2 == x1 y2 - x2 y1 (mod p).
  bool in_sl2_set() const;
};

/// The line (a,b,0) + s(c,d,1), s in R.
struct RLine {
  RingElem a, b, c, d;
  std::vector<RPoint3> points() const;
  /// Sorted point indices.
  std::vector<std::int64_t> point_indices() const;
  bool operator<(const RLine& o) const {
    return std::tie(a, b, c, d) < std::tie(o.a, o.b, o.c, o.d);
  }
  bool operator==(const RLine& o) const { return a == o.a && b == o.b && c == o.c && d == o.d; }
};

/// Solution set of u x + v y + w z = s. Only planes with exactly p^4 solutions
/// are constructible; they are stored with the first unit among (u,v,w) scaled to 1.
class RPlane {
 public:
  RPlane(RingElem u, RingElem v, RingElem w, RingElem s);
  const RingElem& u() const { return u_; }
  const RingElem& v() const { return v_; }
  const RingElem& w() const { return w_; }
  const RingElem& s() const { return s_; }
  bool contains(const RPoint3& q) const;
  bool contains(const RLine& l) const;
  std::vector<RPoint3> solutions() const;
  bool operator<(const RPlane& o) const {
    return std::tie(u_, v_, w_, s_) < std::tie(o.u_, o.v_, o.w_, o.s_);
  }
  bool operator==(const RPlane& o) const {
    return u_ == o.u_ && v_ == o.v_ && w_ == o.w_ && s_ == o.s_;
  }

 private:
  RingElem u_, v_, w_, s_;
};

/// All canonical planes (p^6 + p^5 + p^4 of them).
std::vector<RPlane> all_planes(int p);

struct RingLimits {
  int max_set_p = 7;     ///< build_sl2_set / build_sl2_lines
  int max_pair_p = 5;    ///< pairwise axioms
  int max_plane_p = 3;   ///< plane-quantified axioms
};

std::vector<RPoint3> build_sl2_set(int p, const RingLimits& limits = {});
std::vector<RLine> build_sl2_lines(int p, const RingLimits& limits = {});
std::set<std::array<int, 3>> coarse_projection(const std::vector<RPoint3>& pts);

struct AxiomResult {
  std::string name;
  bool pass = false;
  std::optional<nlohmann::json> witness;
  nlohmann::json detail;
};

struct AxiomReport {
  int p = 0;
  std::vector<AxiomResult> axioms;
  std::int64_t card_X = 0;
  std::int64_t card_L = 0;
  std::int64_t card_union = 0;
  std::int64_t card_projection = 0;

  bool all_pass() const;
  const AxiomResult* find(const std::string& name) const;
  nlohmann::json to_json() const;
};

/// Names accepted in `checks`: line_count, lines_per_plane, pair_intersection,
/// intersecting_pairs_coplanar, plane_pair_lines, triples_one_plane, union.
/// An empty list selects all.
AxiomReport verify_ring_axioms(const std::vector<RLine>& lines, int p,
                               const std::vector<std::string>& checks = {},
                               const RingLimits& limits = {});

const std::vector<std::string>& axiom_names();

}  // namespace kakeya::ring
