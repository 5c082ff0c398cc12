#pragma once

#include <algorithm>

#include "kakeya/tubes.hpp"

namespace kakeya::tubes::detail {

// Calls f(j, k) for every voxel of slice i whose center is within R of the segment.
template <class F>
void capsule_slice(const Line3& seg, double R, const VoxelGrid& g, int i, F&& f) {
  const double x = g.coord(i);
  const Vec3& b = seg.base;
  const Vec3& d = seg.dir;
  double t0 = 0, t1 = seg.length;
  if (std::abs(d.x()) > 1e-15) {
    double ta = (x - R - b.x()) / d.x(), tb = (x + R - b.x()) / d.x();
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return;
  } else if (std::abs(x - b.x()) > R) {
    return;
  }
  const Vec3 p0 = b + t0 * d, p1 = b + t1 * d;
  auto lo_index = [&](double v) { return std::max(0, static_cast<int>(std::ceil((v + g.extent) / g.h - 0.5))); };
  auto hi_index = [&](double v) { return std::min(g.n - 1, static_cast<int>(std::floor((v + g.extent) / g.h - 0.5))); };
  const int jlo = lo_index(std::min(p0.y(), p1.y()) - R), jhi = hi_index(std::max(p0.y(), p1.y()) + R);
  const int klo = lo_index(std::min(p0.z(), p1.z()) - R), khi = hi_index(std::max(p0.z(), p1.z()) + R);
  const double R2 = R * R;
  const double wx = x - b.x();
  for (int j = jlo; j <= jhi; ++j) {
    const double wy = g.coord(j) - b.y();
    for (int k = klo; k <= khi; ++k) {
      const double wz = g.coord(k) - b.z();
      const double t = std::clamp(wx * d.x() + wy * d.y() + wz * d.z(), 0.0, seg.length);
      const double ex = wx - t * d.x(), ey = wy - t * d.y(), ez = wz - t * d.z();
      if (ex * ex + ey * ey + ez * ez <= R2) f(j, k);
    }
  }
}

// Slice range touched by a capsule.
inline std::pair<int, int> slice_range(const Line3& seg, double R, const VoxelGrid& g) {
  const double x0 = std::min(seg.base.x(), seg.end().x()) - R, x1 = std::max(seg.base.x(), seg.end().x()) + R;
  const int lo = std::max(0, static_cast<int>(std::ceil((x0 + g.extent) / g.h - 0.5)));
  const int hi = std::min(g.n - 1, static_cast<int>(std::floor((x1 + g.extent) / g.h - 0.5)));
  return {lo, hi};
}

// Tubes bucketed by blocks of slices.
struct SliceIndex {
  static constexpr int kBlock = 16;
  std::vector<std::pair<int, int>> range;
  std::vector<std::vector<int>> blocks;

  int n_blocks() const { return static_cast<int>(blocks.size()); }
};

// radius <= 0 means "the tube itself" (delta).
SliceIndex build_slice_index(const TubeFamily& f, const VoxelGrid& g, double radius);

// Calls cb(j, k, tube_index) for every shaded voxel of slice i. With radius > 0
// full capsules of that radius are visited instead of the shadings.
template <class F>
void visit_slice(const TubeFamily& f, const VoxelGrid& g, const SliceIndex& idx, int i, double radius, F&& cb) {
  const auto& block = idx.blocks[i / SliceIndex::kBlock];
  const std::uint64_t nn = static_cast<std::uint64_t>(g.n) * g.n;
  for (int t : block) {
    if (i < idx.range[t].first || i > idx.range[t].second) continue;
    const Shading& s = f.shadings[t];
    if (radius > 0 || s.full) {
      const double R = radius > 0 ? radius : f.tubes[t].delta;
      capsule_slice(f.tubes[t].axis, R, g, i, [&](int j, int k) { cb(j, k, t); });
    } else {
      const std::uint64_t lo = static_cast<std::uint64_t>(i) * nn;
      auto a = std::lower_bound(s.voxels.begin(), s.voxels.end(), lo);
      auto b = std::lower_bound(a, s.voxels.end(), lo + nn);
      for (auto it = a; it != b; ++it) {
        const std::uint64_t r = *it - lo;
        cb(static_cast<int>(r / g.n), static_cast<int>(r % g.n), t);
      }
    }
  }
}

// Partial shadings are stored on the family's default grid.
void require_shading_grid(const TubeFamily& f, const VoxelGrid& g);

// Union statistics of capsules of the given radius (radius <= 0: shadings).
UnionStats capsule_union(const TubeFamily& f, const VoxelGrid& g, double radius);

// Calls cb(block, i, offset, tubes) for each occupied voxel, where tubes are
// the (sorted) indices of tubes whose shading holds the voxel. Blocks of
// slices run in parallel; cb must only write state owned by its block.
template <class F>
void for_each_occupied(const TubeFamily& f, const VoxelGrid& g, F&& cb) {
  const SliceIndex idx = build_slice_index(f, g, 0.0);
  parallel_for(static_cast<std::size_t>(idx.n_blocks()), [&](std::size_t b) {
    std::vector<std::pair<std::uint32_t, int>> pairs;
    std::vector<int> members;
    const int i0 = static_cast<int>(b) * SliceIndex::kBlock;
    const int i1 = std::min(g.n, i0 + SliceIndex::kBlock);
    for (int i = i0; i < i1; ++i) {
      pairs.clear();
      visit_slice(f, g, idx, i, 0.0,
                  [&](int j, int k, int t) { pairs.emplace_back(static_cast<std::uint32_t>(j) * g.n + k, t); });
      std::sort(pairs.begin(), pairs.end());
      for (std::size_t a = 0; a < pairs.size();) {
        std::size_t e = a;
        members.clear();
        while (e < pairs.size() && pairs[e].first == pairs[a].first) members.push_back(pairs[e++].second);
        cb(b, i, pairs[a].first, members);
        a = e;
      }
    }
  });
}

}  // namespace kakeya::tubes::detail
