#include <numeric>
#include <set>
#include <unordered_map>

#include "raster.hpp"

namespace kakeya::tubes {

using nlohmann::json;

std::vector<int> hairbrush(const TubeFamily& f, const std::vector<int>& anchor_ids, const VoxelGrid& g,
                           bool include_anchors) {
  std::vector<std::vector<std::uint64_t>> anchors;
  std::set<int> anchor_set;
  for (int id : anchor_ids) {
    anchors.push_back(shading_voxels(f, f.index_of(id), g));
    anchor_set.insert(id);
  }
  std::vector<char> member(f.size(), 0);
  parallel_for(f.size(), [&](std::size_t t) {
    if (!include_anchors && anchor_set.count(f.tubes[t].id)) return;
    const auto vox = shading_voxels(f, t, g);
    bool all = true;
    for (const auto& a : anchors) {
      // both sorted: linear merge
      auto i = vox.begin();
      auto j = a.begin();
      bool hit = false;
      while (i != vox.end() && j != a.end() && !hit) {
        if (*i < *j)
          ++i;
        else if (*j < *i)
          ++j;
        else
          hit = true;
      }
      all = all && hit;
      if (!all) break;
    }
    member[t] = all;
  });
  std::vector<int> out;
  for (std::size_t t = 0; t < f.size(); ++t)
    if (member[t]) out.push_back(f.tubes[t].id);
  return out;
}

namespace {

struct KeyHash {
  std::size_t operator()(const std::array<long long, 3>& k) const {
    return static_cast<std::size_t>(k[0] * 73856093LL ^ k[1] * 19349663LL ^ k[2] * 83492791LL);
  }
};

using Key = std::array<long long, 3>;

Key key_of(const Vec3& p, double size) {
  return {static_cast<long long>(std::floor(p.x() / size)), static_cast<long long>(std::floor(p.y() / size)),
          static_cast<long long>(std::floor(p.z() / size))};
}

}  // namespace

TwoEndsResult two_ends_reduce(const std::vector<Vec3>& pts, double voxel_volume, double delta, double rho) {
  if (pts.empty()) throw PreconditionError("empty shading");
  if (!(rho > 0 && rho < 1)) throw PreconditionError("rho must lie in (0, 1)");
  if (!(delta > 0 && delta < 1)) throw PreconditionError("delta must lie in (0, 1)");
  TwoEndsResult res;
  res.total = static_cast<double>(pts.size()) * voxel_volume;
  if (res.total / (kPi * delta * delta) < delta) throw PreconditionError("|Y(T)| below delta in tube units");

  std::vector<double> radii;
  for (double s = delta; s <= 1.0 + 1e-12; s *= 2) radii.push_back(s);
  if (radii.back() < 1.0 - 1e-12) radii.push_back(1.0);

  Vec3 lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 mid = 0.5 * (lo + hi);

  // Ball family: for each radius, centers of the s/2 lattice within s of the shading.
  struct Ball {
    Vec3 c;
    double r;
  };
  std::vector<std::vector<Ball>> family(radii.size());
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double s = radii[ri], step = s / 2;
    std::set<Key> centers;
    for (const auto& p : pts) {
      const Key k = key_of(p, step);
      for (long long a = -2; a <= 2; ++a)
        for (long long b = -2; b <= 2; ++b)
          for (long long c = -2; c <= 2; ++c) {
            const Key q{k[0] + a, k[1] + b, k[2] + c};
            const Vec3 x(q[0] * step, q[1] * step, q[2] * step);
            if ((x - p).norm() <= s) centers.insert(q);
          }
    }
    for (const auto& q : centers) family[ri].push_back({Vec3(q[0] * step, q[1] * step, q[2] * step), s});
  }
  family.back().push_back({mid, radii.back()});

  // point buckets per radius
  auto count_in = [&](const std::unordered_map<Key, std::vector<int>, KeyHash>& buckets, double size, const Ball& B,
                      const std::vector<char>* mask) {
    const Key k = key_of(B.c, size);
    const double r2 = B.r * B.r;
    std::int64_t n = 0;
    for (long long a = -1; a <= 1; ++a)
      for (long long b = -1; b <= 1; ++b)
        for (long long c = -1; c <= 1; ++c) {
          auto it = buckets.find({k[0] + a, k[1] + b, k[2] + c});
          if (it == buckets.end()) continue;
          for (int i : it->second)
            if ((!mask || (*mask)[i]) && (pts[i] - B.c).squaredNorm() <= r2) ++n;
        }
    return n;
  };

  std::vector<std::unordered_map<Key, std::vector<int>, KeyHash>> buckets(radii.size());
  for (std::size_t ri = 0; ri < radii.size(); ++ri)
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) buckets[ri][key_of(pts[i], radii[ri])].push_back(i);

  double best = -1;
  Ball chosen{mid, 1.0};
  std::int64_t chosen_count = 0;
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    std::vector<std::int64_t> counts(family[ri].size());
    parallel_for(family[ri].size(),
                 [&](std::size_t b) { counts[b] = count_in(buckets[ri], radii[ri], family[ri][b], nullptr); });
    for (std::size_t b = 0; b < counts.size(); ++b) {
      const double score = counts[b] / std::pow(radii[ri], rho);
      if (score > best) {
        best = score;
        chosen = family[ri][b];
        chosen_count = counts[b];
      }
    }
  }
  res.center = chosen.c;
  res.radius = chosen.r;
  res.captured = chosen_count * voxel_volume;
  res.capture_ok = res.captured >= std::pow(delta, rho) * res.total * (1 - 1e-12);

  // non-concentration against every ball of the family
  std::vector<char> inside(pts.size(), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) inside[i] = (pts[i] - chosen.c).norm() <= chosen.r;
  double worst = 0;
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    std::vector<double> ratio(family[ri].size());
    parallel_for(family[ri].size(), [&](std::size_t b) {
      const auto n = count_in(buckets[ri], radii[ri], family[ri][b], &inside);
      ratio[b] = n / (std::pow(radii[ri] / chosen.r, rho) * chosen_count);
    });
    for (double r : ratio) worst = std::max(worst, r);
  }
  res.worst_nonconcentration = worst;
  res.nonconcentration_ok = worst <= 1 + 1e-12;
  return res;
}

TwoEndsResult two_ends_reduce(const TubeFamily& f, std::size_t index, double rho) {
  const VoxelGrid g = VoxelGrid::for_delta(f.delta);
  std::vector<Vec3> pts;
  for (auto v : shading_voxels(f, index, g)) pts.push_back(g.center(v));
  return two_ends_reduce(pts, g.voxel_volume(), f.delta, rho);
}

PlaninessReport planiness_statistic(const TubeFamily& f, const VoxelGrid& g, const PlaninessOptions& opt) {
  const int nb = (g.n + detail::SliceIndex::kBlock - 1) / detail::SliceIndex::kBlock;
  std::vector<double> value(nb, 0);
  std::vector<std::int64_t> exact(nb, 0), sampled(nb, 0);
  std::vector<int> maxm(nb, 0);
  const Rng base(opt.seed);
  detail::for_each_occupied(f, g, [&](std::size_t b, int i, std::uint32_t off, const std::vector<int>& m) {
    const int k = static_cast<int>(m.size());
    maxm[b] = std::max(maxm[b], k);
    if (k < 3) return;
    double S = 0;
    auto det = [&](int a, int c, int e) {
      return std::abs(f.tubes[a].axis.dir.dot(f.tubes[c].axis.dir.cross(f.tubes[e].axis.dir)));
    };
    if (k <= opt.exact_limit) {
      for (int a = 0; a < k; ++a)
        for (int c = a + 1; c < k; ++c)
          for (int e = c + 1; e < k; ++e) S += det(m[a], m[c], m[e]);
      S *= 6;  // ordered triples
      ++exact[b];
    } else {
      Rng rng = base.split(static_cast<std::uint64_t>(i) * g.n * g.n + off);
      double acc = 0;
      for (int s = 0; s < opt.mc_triples; ++s) {
        int a = static_cast<int>(rng.below(k)), c, e;
        do c = static_cast<int>(rng.below(k));
        while (c == a);
        do e = static_cast<int>(rng.below(k));
        while (e == a || e == c);
        acc += det(m[a], m[c], m[e]);
      }
      S = acc / opt.mc_triples * k * (k - 1.0) * (k - 2.0);
      ++sampled[b];
    }
    value[b] += std::sqrt(S);
  });
  PlaninessReport rep;
  for (int b = 0; b < nb; ++b) {
    rep.value += value[b];
    rep.exact_voxels += exact[b];
    rep.sampled_voxels += sampled[b];
    rep.max_multiplicity = std::max(rep.max_multiplicity, maxm[b]);
  }
  rep.value *= g.voxel_volume();
  const double scale = std::pow(f.delta * f.delta * static_cast<double>(f.size()), 1.5);
  rep.normalized = scale > 0 ? rep.value / scale : 0;
  return rep;
}

json PlaninessReport::to_json() const {
  return {{"value", value},
          {"normalized", normalized},
          {"max_multiplicity", max_multiplicity},
          {"exact_voxels", exact_voxels},
          {"sampled_voxels", sampled_voxels}};
}

}  // namespace kakeya::tubes
