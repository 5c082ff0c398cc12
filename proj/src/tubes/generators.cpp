#include <map>
#include <unordered_map>

#include "kakeya/sl2.hpp"
#include "raster.hpp"

namespace kakeya::tubes {

namespace {

bool dyadic(double delta) {
  if (!(delta > 0 && delta < 1)) return false;
  const double k = -std::log2(delta);
  return std::abs(k - std::round(k)) < 1e-9;
}

}  // namespace

Line3 chart_segment(const Vec4& p) {
  const Line3 l = Line3::from_chart(p);
  const Vec3 c = l.base - l.base.dot(l.dir) * l.dir;
  return Line3(c - 0.5 * l.dir, l.dir, 1.0);
}

TubeFamily gen_direction_separated(double delta, std::uint64_t seed, std::size_t count) {
  if (!dyadic(delta)) throw PreconditionError("delta must be dyadic");
  const std::size_t target = count ? count : static_cast<std::size_t>(std::lround(1.0 / (delta * delta)));
  if (target > 4 * static_cast<std::size_t>(std::lround(1.0 / (delta * delta))))
    throw PreconditionError("more tubes than delta-separated directions allow");
  Rng rng = Rng(seed).split("dirsep");
  Rng drng = rng.split("directions"), trng = rng.split("translations");

  // dart throwing on the sphere; a line direction and its negative are both stored
  const double chord = 2 * std::sin(delta / 2);
  std::map<std::array<long long, 3>, std::vector<Vec3>> cells;
  auto key = [&](const Vec3& v) {
    return std::array<long long, 3>{static_cast<long long>(std::floor(v.x() / chord)),
                                    static_cast<long long>(std::floor(v.y() / chord)),
                                    static_cast<long long>(std::floor(v.z() / chord))};
  };
  std::vector<Vec3> dirs;
  for (std::size_t attempt = 0; attempt < 200 * target && dirs.size() < target; ++attempt) {
    Vec3 v = drng.unit_vector3();
    if (v.z() < 0) v = -v;
    bool ok = true;
    for (const Vec3& w : {v, Vec3(-v)}) {
      const auto k = key(w);
      for (long long a = -1; a <= 1 && ok; ++a)
        for (long long b = -1; b <= 1 && ok; ++b)
          for (long long c = -1; c <= 1 && ok; ++c) {
            auto it = cells.find({k[0] + a, k[1] + b, k[2] + c});
            if (it == cells.end()) continue;
            for (const auto& u : it->second)
              if ((u - w).norm() < chord) {
                ok = false;
                break;
              }
          }
    }
    if (!ok) continue;
    cells[key(v)].push_back(v);
    cells[key(Vec3(-v))].push_back(-v);
    dirs.push_back(v);
  }

  std::vector<Tube> tubes;
  for (std::size_t i = 0; i < dirs.size(); ++i)
    tubes.push_back(make_tube(static_cast<int>(i), trng.in_ball3(0.5), dirs[i], delta));
  return TubeFamily::from_tubes(std::move(tubes), delta, "random-direction-separated", seed);
}

TubeFamily gen_sl2_family(double delta, std::uint64_t seed, const Sl2FamilyOptions& opt) {
  if (!dyadic(delta)) throw PreconditionError("delta must be dyadic");
  if (delta < std::ldexp(1.0, -10)) throw ResourceError("delta below 2^-10");
  const std::size_t n_fat = opt.fat_tubes ? opt.fat_tubes : static_cast<std::size_t>(std::lround(std::pow(delta, -1.5)));
  const int m = opt.thin_per_fat ? opt.thin_per_fat : static_cast<int>(std::lround(std::pow(delta, -0.5)));
  const double sep = std::sqrt(delta);
  Rng rng = Rng(seed).split("sl2-family");

  // delta^{1/2}-separated points of the SL2 window
  std::unordered_map<std::uint64_t, std::vector<int>> cells;
  auto key = [&](const Vec4& p, const Eigen::Vector4i& off) {
    std::uint64_t h = 1469598103934665603ULL;
    for (int c = 0; c < 4; ++c) {
      const long long v = static_cast<long long>(std::floor(p[c] / sep)) + off[c];
      h = (h ^ static_cast<std::uint64_t>(v + (1LL << 40))) * 1099511628211ULL;
    }
    return h;
  };
  std::vector<Vec4> pts;
  for (std::size_t attempt = 0; attempt < 400 * n_fat && pts.size() < n_fat; ++attempt) {
    const Vec4 p = sl2::sample_sl2_window(rng).p;
    bool ok = true;
    for (int o = 0; o < 81 && ok; ++o) {
      const Eigen::Vector4i off(o % 3 - 1, (o / 3) % 3 - 1, (o / 9) % 3 - 1, (o / 27) % 3 - 1);
      auto it = cells.find(key(p, off));
      if (it == cells.end()) continue;
      for (int j : it->second)
        if ((pts[j] - p).norm() < sep) {
          ok = false;
          break;
        }
    }
    if (!ok) continue;
    cells[key(p, Eigen::Vector4i::Zero())].push_back(static_cast<int>(pts.size()));
    pts.push_back(p);
  }

  std::vector<Tube> tubes;
  int id = 0;
  for (std::size_t g = 0; g < pts.size(); ++g) {
    const sl2::SL2Point P(pts[g]);
    const Vec4 dir = sl2::strip_direction(P).direction.normalized();
    for (int k = 0; k < m; ++k) {
      const double tau = (k - (m - 1) / 2.0) * delta;
      const Line3 seg = chart_segment(pts[g] + tau * dir);
      tubes.push_back(make_tube(id++, seg.midpoint(), seg.dir, delta, static_cast<int>(g)));
    }
  }
  return TubeFamily::from_tubes(std::move(tubes), delta, "sl2-style", seed);
}

}  // namespace kakeya::tubes
