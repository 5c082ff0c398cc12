#include <algorithm>
#include <map>
#include <numeric>

#include "kakeya/sl2.hpp"

namespace kakeya::sl2 {

namespace {

struct Box {
  Vec4 c;
  double h;  // half edge
};

std::pair<double, double> interval_mul(double alo, double ahi, double blo, double bhi) {
  const double p[4] = {alo * blo, alo * bhi, ahi * blo, ahi * bhi};
  return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}

int find(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

}  // namespace

std::vector<Vec4> hairbrush_solutions(const SL2Point& p1, const SL2Point& p2, const SL2Point& p3) {
  Eigen::Matrix<double, 3, 4> N;
  N.row(0) = tangent_normal(p1).transpose();
  N.row(1) = tangent_normal(p2).transpose();
  N.row(2) = tangent_normal(p3).transpose();
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(N, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()[2] < 1e-14 * svd.singularValues()[0])
    throw DegeneracyError("incidence hyperplanes are dependent");
  const Vec4 x0 = svd.solve(Eigen::Vector3d(2, 2, 2));
  const Vec4 k = svd.matrixV().col(3);
  // ad - bc along x0 + t k
  auto q = [](const Vec4& u, const Vec4& v) { return 0.5 * (u[0] * v[3] + u[3] * v[0] - u[1] * v[2] - u[2] * v[1]); };
  const double A = q(k, k), B = 2 * q(x0, k), C = q(x0, x0) - 1.0;
  std::vector<Vec4> out;
  if (std::abs(A) < 1e-15) {
    if (std::abs(B) > 1e-15) out.push_back(x0 - (C / B) * k);
    return out;
  }
  const double disc = B * B - 4 * A * C;
  if (disc < 0) return out;
  const double s = std::sqrt(disc);
  const double qq = -0.5 * (B + (B >= 0 ? s : -s));
  out.push_back(x0 + (qq / A) * k);
  if (disc > 0 && qq != 0) out.push_back(x0 + (C / qq) * k);
  return out;
}

LocusReport triple_hairbrush_locus(const SL2Point& p1, const SL2Point& p2, const SL2Point& p3, double delta,
                                   const LocusOptions& opt) {
  if (!(delta > 0 && delta < 1)) throw PreconditionError("delta must lie in (0, 1)");
  const double sq = std::sqrt(delta);
  if ((p1.p - p2.p).norm() < sq * (1 - 1e-9))
    throw PreconditionError("separation: |p1 - p2| < delta^{1/2}");
  if (chord_transversality(p3, p1) <= opt.transversality_threshold)
    throw PreconditionError("transversality: p3 and p1 below threshold");
  if (chord_transversality(p3, p2) <= opt.transversality_threshold)
    throw PreconditionError("transversality: p3 and p2 below threshold");

  const std::array<Vec4, 3> n = {tangent_normal(p1), tangent_normal(p2), tangent_normal(p3)};
  const double tol = opt.tolerance_factor * delta;
  const double leaf = tol / 2;

  auto exact = [&](const Vec4& x) {
    for (const auto& ni : n)
      if (std::abs(ni.dot(x) - 2.0) > tol) return false;
    return std::abs(sl2_form(x) - 1.0) <= tol;
  };
  // conservative interval test: never rejects a box meeting the fuzzy set
  auto feasible = [&](const Box& b) {
    for (const auto& ni : n) {
      const double r = std::abs(ni.dot(b.c) - 2.0);
      if (r > tol + b.h * ni.cwiseAbs().sum()) return false;
    }
    const Vec4 lo = b.c.array() - b.h, hi = b.c.array() + b.h;
    const auto ad = interval_mul(lo[0], hi[0], lo[3], hi[3]);
    const auto bc = interval_mul(lo[1], hi[1], lo[2], hi[2]);
    const double glo = ad.first - bc.second - 1.0, ghi = ad.second - bc.first - 1.0;
    return glo <= tol && ghi >= -tol;
  };

  // Leaves are summarized per tile of edge delta^{1/2}/8 by their count and
  // the extreme leaf in each of the 8 coordinate directions.
  struct Tile {
    std::size_t count = 0;
    std::array<Vec4, 8> ext;
  };
  using Key = std::array<long long, 4>;
  const double tile = sq / 8;
  std::map<Key, Tile> tiles;
  std::size_t n_leaves = 0;
  std::vector<Box> stack{{Vec4::Zero(), opt.extent}};
  double leaf_h = opt.extent;
  while (!stack.empty()) {
    const Box b = stack.back();
    stack.pop_back();
    if (!feasible(b)) continue;
    if (2 * b.h <= leaf) {
      // leaves sample the system at their center
      leaf_h = b.h;
      if (!exact(b.c)) continue;
      if (++n_leaves > opt.max_leaves) throw ResourceError("triple hairbrush locus: leaf budget exceeded");
      Key k;
      for (int j = 0; j < 4; ++j) k[j] = static_cast<long long>(std::floor(b.c[j] / tile));
      Tile& t = tiles[k];
      if (t.count++ == 0) t.ext.fill(b.c);
      for (int j = 0; j < 4; ++j) {
        if (b.c[j] < t.ext[2 * j][j]) t.ext[2 * j] = b.c;
        if (b.c[j] > t.ext[2 * j + 1][j]) t.ext[2 * j + 1] = b.c;
      }
      continue;
    }
    const double h = b.h / 2;
    for (int m = 15; m >= 0; --m) {
      Vec4 c = b.c;
      for (int j = 0; j < 4; ++j) c[j] += ((m >> j) & 1 ? h : -h);
      stack.push_back({c, h});
    }
  }

  LocusReport rep;
  rep.leaves = n_leaves;
  rep.leaf_size = 2 * leaf_h;
  if (n_leaves == 0) {
    rep.pass = true;
    return rep;
  }
  std::vector<Vec4> leaves;
  std::vector<std::size_t> weight;
  for (const auto& [k, t] : tiles) {
    for (int e = 0; e < 8; ++e) {
      leaves.push_back(t.ext[e]);
      weight.push_back(e == 0 ? t.count : 0);
    }
  }

  // Single-linkage clustering with cut 4 delta^{1/2} on the tile extremes. Points sharing a grid
  // cell of edge cut/2 are within the cut, so cells merge wholesale and only
  // neighboring cells need a pair search.
  const double cut = 4 * sq;
  const double cell = cut / 2;
  std::map<Key, std::vector<int>> grid;
  for (int i = 0; i < static_cast<int>(leaves.size()); ++i) {
    Key k;
    for (int j = 0; j < 4; ++j) k[j] = static_cast<long long>(std::floor(leaves[i][j] / cell));
    grid[k].push_back(i);
  }
  std::vector<Key> keys;
  for (const auto& kv : grid) keys.push_back(kv.first);
  std::map<Key, int> cell_id;
  for (int i = 0; i < static_cast<int>(keys.size()); ++i) cell_id[keys[i]] = i;
  std::vector<int> parent(keys.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (int a = 0; a < static_cast<int>(keys.size()); ++a) {
    for (int m = 0; m < 625; ++m) {
      Key kk = keys[a];
      int t = m;
      for (int j = 0; j < 4; ++j, t /= 5) kk[j] += t % 5 - 2;
      auto it = cell_id.find(kk);
      if (it == cell_id.end() || it->second <= a) continue;
      const int b = it->second;
      if (find(parent, a) == find(parent, b)) continue;
      bool linked = false;
      for (int i : grid[keys[a]]) {
        for (int j : grid[keys[b]])
          if ((leaves[i] - leaves[j]).norm() <= cut) {
            linked = true;
            break;
          }
        if (linked) break;
      }
      if (linked) parent[find(parent, b)] = find(parent, a);
    }
  }
  std::map<int, std::vector<int>> groups;
  for (int a = 0; a < static_cast<int>(keys.size()); ++a) {
    auto& g = groups[find(parent, a)];
    const auto& v = grid[keys[a]];
    g.insert(g.end(), v.begin(), v.end());
  }

  for (const auto& [root, idx] : groups) {
    LocusCluster cl;
    for (int i : idx) cl.leaves += static_cast<int>(weight[i]);
    Vec4 mean = Vec4::Zero();
    for (int i : idx) mean += leaves[i];
    cl.center = mean / static_cast<double>(idx.size());
    // two-sweep diameter: farthest leaf from the centroid, then farthest from that leaf
    auto farthest = [&](const Vec4& from) {
      int best = idx[0];
      double bd = -1;
      for (int i : idx) {
        const double d = (leaves[i] - from).squaredNorm();
        if (d > bd) {
          bd = d;
          best = i;
        }
      }
      return best;
    };
    const int e1 = farthest(cl.center);
    const int e2 = farthest(leaves[e1]);
    // include the leaf boxes themselves
    cl.diameter = (leaves[e1] - leaves[e2]).norm() + 2 * leaf_h * 2;
    rep.max_diameter = std::max(rep.max_diameter, cl.diameter);
    rep.clusters.push_back(cl);
  }
  std::sort(rep.clusters.begin(), rep.clusters.end(),
            [](const LocusCluster& x, const LocusCluster& y) { return x.leaves > y.leaves; });
  rep.c = rep.max_diameter / sq;
  // diameter of J^{-1}([-tol, tol]^4) at each exact solution
  for (const auto& x : hairbrush_solutions(p1, p2, p3)) {
    Mat4 J;
    J.row(0) = n[0].transpose();
    J.row(1) = n[1].transpose();
    J.row(2) = n[2].transpose();
    J.row(3) = Vec4(x[3], -x[2], -x[1], x[0]).transpose();
    const Mat4 Ji = J.inverse();
    double d = 0;
    for (int m = 0; m < 16; ++m) {
      Vec4 sv;
      for (int j = 0; j < 4; ++j) sv[j] = (m >> j) & 1 ? 1.0 : -1.0;
      d = std::max(d, (Ji * sv).norm());
    }
    rep.linearized_c = std::max(rep.linearized_c, 2 * d * tol / sq);
  }
  rep.pass = rep.clusters.size() <= 2 && rep.c <= 8.0;
  return rep;
}

}  // namespace kakeya::sl2
