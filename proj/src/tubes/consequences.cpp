#include <map>
#include <unordered_map>

#include "raster.hpp"

namespace kakeya::tubes {

using nlohmann::json;

namespace {

using Key = std::array<long long, 3>;

Key key_of(const Vec3& p, double size) {
  return {static_cast<long long>(std::floor(p.x() / size)), static_cast<long long>(std::floor(p.y() / size)),
          static_cast<long long>(std::floor(p.z() / size))};
}

// Greedy rho-net size of a point sample.
std::int64_t greedy_net(const std::vector<Vec3>& pts, double rho) {
  std::map<Key, std::vector<Vec3>> centers;
  std::int64_t n = 0;
  for (const auto& p : pts) {
    const Key k = key_of(p, rho);
    bool covered = false;
    for (long long a = -1; a <= 1 && !covered; ++a)
      for (long long b = -1; b <= 1 && !covered; ++b)
        for (long long c = -1; c <= 1 && !covered; ++c) {
          auto it = centers.find({k[0] + a, k[1] + b, k[2] + c});
          if (it == centers.end()) continue;
          for (const auto& q : it->second)
            if ((q - p).norm() <= rho) {
              covered = true;
              break;
            }
        }
    if (!covered) {
      centers[k].push_back(p);
      ++n;
    }
  }
  return n;
}

// Distance from a segment to an infinite line.
double segment_line_distance(const Line3& seg, const Line3& L) {
  const Vec3 w0 = seg.base - L.base;
  const Vec3 a = w0 - w0.dot(L.dir) * L.dir;
  const Vec3 b = seg.dir - seg.dir.dot(L.dir) * L.dir;
  const double bb = b.squaredNorm();
  const double t = bb > 0 ? std::clamp(-a.dot(b) / bb, 0.0, seg.length) : 0.0;
  return (a + t * b).norm();
}

}  // namespace

std::vector<Vec3> tangent_plane_normals(const geom::Regulus& R, const Line3& ell, double rho) {
  if (!(rho > 0)) throw PreconditionError("rho must be positive");
  const int J = static_cast<int>(std::ceil(ell.length / rho - 1e-9));
  std::vector<Vec3> out;
  for (int j = 0; j < J; ++j) {
    const Vec3 x = ell.point(std::min(ell.length, (j + 0.5) * rho));
    Vec3 n = R.quadric.gradient(x);
    n -= n.dot(ell.dir) * ell.dir;
    if (!(n.norm() > 0)) throw DegeneracyError("singular point of the regulus on ell");
    out.push_back(n.normalized());
  }
  return out;
}

CoveredEntropyReport covered_entropy(const geom::Regulus& R, const Line3& ell, const std::vector<Vec3>& plane_normals,
                                     double rho, const CoveredEntropyOptions& opt) {
  if (!(rho > 0 && rho < 1)) throw PreconditionError("rho must lie in (0, 1)");
  if (!ell.is_segment() || ell.length > 1 + 1e-12) throw PreconditionError("ell must be a segment of length <= 1");
  const int J = static_cast<int>(std::ceil(ell.length / rho - 1e-9));
  if (static_cast<int>(plane_normals.size()) != J) throw PreconditionError("need one plane per rho-interval of ell");
  for (const auto& n : plane_normals)
    if (std::abs(n.normalized().dot(ell.dir)) > 1e-6) throw PreconditionError("each plane must contain ell");

  const geom::QuadricPoly& Q = R.quadric;
  CoveredEntropyReport rep;

  // curvature on R cap B(0,1), sampled along the second ruling
  double kmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 40; ++i) {
    const Line3 rl = geom::ruling_line(R, -2.0 + 4.0 * i / 40);
    const auto chord = rl.ball_chord(Vec3::Zero(), 1.0);
    if (!chord) continue;
    for (int k = 0; k <= 10; ++k) {
      const Vec3 p = rl.point(chord->first + (chord->second - chord->first) * k / 10.0);
      try {
        kmin = std::min(kmin, std::abs(geom::gauss_curvature(R, p).fundamental_forms));
      } catch (const std::runtime_error&) {
      }
    }
  }
  rep.min_curvature = kmin;
  if (!(kmin >= opt.min_curvature)) throw PreconditionError("Gauss curvature of R too small on B(0,1)");

  const int angles = opt.angles > 0 ? opt.angles : static_cast<int>(std::ceil(kPi / rho));
  const int tilts = std::max(1, opt.tilts);
  const double step = rho / 2;
  std::vector<std::vector<Vec3>> per_interval(J);
  std::vector<std::int64_t> samples(J, 0);
  parallel_for(static_cast<std::size_t>(J), [&](std::size_t j) {
    const Vec3 n = plane_normals[j].normalized();
    const Vec3 e1 = ell.dir, e2 = n.cross(e1).normalized();
    for (int q = 0; q < opt.points_per_interval; ++q) {
      const double s = std::min(ell.length, (j + (q + 0.5) / opt.points_per_interval) * rho);
      const Vec3 x = ell.point(s);
      for (int a = 0; a < angles; ++a) {
        const double phi = kPi * a / angles;
        const Vec3 u = std::cos(phi) * e1 + std::sin(phi) * e2;
        for (int tt = 0; tt < tilts; ++tt) {
          const double tau = tilts == 1 ? 0.0 : rho * (-1.0 + 2.0 * tt / (tilts - 1));
          const Vec3 v = (std::cos(tau) * u + std::sin(tau) * n).normalized();
          const Line3 lp(x, v);
          const auto chord = lp.ball_chord(Vec3::Zero(), 1.0);
          if (!chord) continue;
          // p is covered when l' passes through it within angle rho of T_p Z
          for (double t = chord->first; t <= chord->second; t += step) {
            const Vec3 y = lp.point(t);
            ++samples[j];
            if (!(Q.first_order_distance(y) <= rho)) continue;
            const Vec3 g = Q.gradient(y);
            if (g.norm() > 0 && std::abs(v.dot(g.normalized())) <= std::sin(rho)) per_interval[j].push_back(y);
          }
        }
      }
    }
  });
  std::vector<Vec3> covered;
  for (int j = 0; j < J; ++j) {
    covered.insert(covered.end(), per_interval[j].begin(), per_interval[j].end());
    rep.samples += samples[j];
  }
  rep.covering = greedy_net(covered, rho);
  rep.ratio = rep.covering / std::pow(rho, -1.75);

  // N_rho(R) cap B(0,1) on a rho/2 lattice, covered points first
  std::vector<Vec3> surface = covered;
  const int G = static_cast<int>(std::ceil(2.0 / step));
  for (int i = 0; i <= G; ++i)
    for (int j = 0; j <= G; ++j)
      for (int k = 0; k <= G; ++k) {
        const Vec3 p(-1 + i * step, -1 + j * step, -1 + k * step);
        if (p.squaredNorm() <= 1.0 && Q.first_order_distance(p) <= rho) surface.push_back(p);
      }
  rep.surface_covering = greedy_net(surface, rho);
  return rep;
}

json CoveredEntropyReport::to_json() const {
  return {{"covering", covering},
          {"ratio", ratio},
          {"surface_covering", surface_covering},
          {"min_curvature", min_curvature},
          {"samples", samples}};
}

FatHairbrushReport fat_hairbrush_check(const TubeFamily& f, const Line3& L, double min_angle, double slack) {
  FatHairbrushReport rep;
  const double delta = f.delta;
  const Line3 line(L.base, L.dir);
  for (double rho : {delta, 4 * delta, 16 * delta}) {
    std::int64_t n = 0;
    for (const auto& t : f.tubes)
      if (geom::line_angle(t.axis.dir, line.dir) >= min_angle && segment_line_distance(t.axis, line) <= rho + delta)
        ++n;
    const double bound = std::pow(delta, -2.0) * std::pow(rho, 0.25) * std::pow(delta, -slack);
    rep.rho.push_back(rho);
    rep.counts.push_back(n);
    rep.bounds.push_back(bound);
    rep.pass = rep.pass && n <= bound;
  }
  return rep;
}

json FatHairbrushReport::to_json() const {
  return {{"rho", rho}, {"counts", counts}, {"bounds", bounds}, {"pass", pass}};
}

std::vector<Vec3> probe_directions() {
  std::vector<Vec3> out;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      for (int c = -1; c <= 1; ++c)
        if (a || b || c) out.push_back(Vec3(a, b, c).normalized());
  return out;
}

TransversalityReport robust_transversality(const TubeFamily& f, const VoxelGrid& g, const TransversalityOptions& opt) {
  TransversalityReport rep;
  const UnionStats st = union_volume(f, g);
  // dyadic class [mu, 2 mu) carrying the most incidence mass
  double best = -1;
  for (int mu = 1; mu <= std::max(1, st.max_multiplicity); mu *= 2) {
    double mass = 0;
    for (int m = mu; m < 2 * mu && m < static_cast<int>(st.histogram.size()); ++m)
      mass += static_cast<double>(m) * st.histogram[m];
    if (mass > best) {
      best = mass;
      rep.mu = mu;
    }
  }
  const auto probes = probe_directions();
  std::vector<double> thetas;
  for (double th = 1.0; th > f.delta; th /= 2) thetas.push_back(th);

  const int nb = (g.n + detail::SliceIndex::kBlock - 1) / detail::SliceIndex::kBlock;
  std::vector<std::int64_t> kept(nb, 0), removed(nb, 0);
  std::vector<double> kept_mass(nb, 0), cmax(nb, 0);
  const int mu = rep.mu;
  detail::for_each_occupied(f, g, [&](std::size_t b, int, std::uint32_t, const std::vector<int>& m) {
    const int k = static_cast<int>(m.size());
    if (k < mu || k >= 2 * mu) return;
    double c = 0;
    for (const auto& v : probes)
      for (double th : thetas) {
        int n = 0;
        for (int t : m) n += geom::line_angle(f.tubes[t].axis.dir, v) <= th;
        c = std::max(c, n / (std::pow(th, 0.1) * k));
      }
    if (c > opt.focus_cap) {
      ++removed[b];
      return;
    }
    ++kept[b];
    kept_mass[b] += k;
    cmax[b] = std::max(cmax[b], c);
  });
  double mass = 0;
  for (int b = 0; b < nb; ++b) {
    rep.kept_voxels += kept[b];
    rep.removed_focused += removed[b];
    mass += kept_mass[b];
    rep.c = std::max(rep.c, cmax[b]);
  }
  rep.kept_mass_fraction = st.sum_voxels > 0 ? mass / static_cast<double>(st.sum_voxels) : 0;
  return rep;
}

json TransversalityReport::to_json() const {
  return {{"mu", mu},
          {"kept_voxels", kept_voxels},
          {"removed_focused", removed_focused},
          {"kept_mass_fraction", kept_mass_fraction},
          {"c", c}};
}

}  // namespace kakeya::tubes
