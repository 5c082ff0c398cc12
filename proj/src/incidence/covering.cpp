#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "kakeya/incidence.hpp"

namespace kakeya::incidence {

namespace {

struct CellHash {
  std::size_t operator()(const std::pair<long long, long long>& k) const {
    return std::hash<long long>()(k.first * 73856093LL ^ k.second * 19349663LL);
  }
};

using Buckets = std::unordered_map<std::pair<long long, long long>, std::vector<int>, CellHash>;

std::pair<long long, long long> bucket(const Vec2& p, double size) {
  return {static_cast<long long>(std::floor(p.x() / size)), static_cast<long long>(std::floor(p.y() / size))};
}

int find(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

}  // namespace

std::vector<Vec2> zero_set_samples(const BivariatePoly& P, double spacing, double radius) {
  if (!(spacing > 0)) throw PreconditionError("sample spacing must be positive");
  const int N = std::min(4096, static_cast<int>(std::ceil(2 * radius / spacing)));
  const double h = 2 * radius / N;
  std::vector<double> v(static_cast<std::size_t>(N + 1) * (N + 1));
  parallel_for(static_cast<std::size_t>(N + 1), [&](std::size_t i) {
    for (int j = 0; j <= N; ++j) v[i * (N + 1) + j] = P(-radius + i * h, -radius + j * h);
  });
  auto at = [&](int i, int j) { return v[static_cast<std::size_t>(i) * (N + 1) + j]; };
  auto pt = [&](int i, int j) { return Vec2(-radius + i * h, -radius + j * h); };

  std::vector<Vec2> out;
  auto edge = [&](const Vec2& a, const Vec2& b, double fa, double fb) {
    if (fa == 0) {
      if (a.norm() <= radius) out.push_back(a);
      return;
    }
    if ((fa > 0) == (fb > 0) || fb == 0) return;
    Vec2 lo = a, hi = b;
    double flo = fa;
    for (int it = 0; it < 40; ++it) {
      const Vec2 m = 0.5 * (lo + hi);
      const double fm = P(m);
      if ((fm > 0) == (flo > 0)) {
        lo = m;
        flo = fm;
      } else {
        hi = m;
      }
    }
    const Vec2 r = 0.5 * (lo + hi);
    if (r.norm() <= radius) out.push_back(r);
  };
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N; ++j) {
      if (i < N) edge(pt(i, j), pt(i + 1, j), at(i, j), at(i + 1, j));
      if (j < N) edge(pt(i, j), pt(i, j + 1), at(i, j), at(i, j + 1));
    }
  return out;
}

CoveringReport zero_set_covering(const BivariatePoly& P, double rho, int D) {
  if (!(rho > 0)) throw PreconditionError("rho must be positive");
  if (D < P.degree()) throw PreconditionError("deg P exceeds D");
  if (P.is_zero()) throw PreconditionError("zero polynomial");
  CoveringReport rep;
  const double h = rho / 4;
  const auto samples = zero_set_samples(P, h, 1.0);
  rep.samples = static_cast<std::int64_t>(samples.size());
  const double Dd = std::max(1, D);
  rep.bound = Dd / rho + Dd * Dd;
  rep.area_bound = Dd * rho + Dd * Dd * rho * rho;
  if (samples.empty()) return rep;

  // greedy rho-net
  Buckets centers;
  std::vector<Vec2> net;
  for (const auto& s : samples) {
    const auto k = bucket(s, rho);
    bool covered = false;
    for (long long dx = -1; dx <= 1 && !covered; ++dx)
      for (long long dy = -1; dy <= 1 && !covered; ++dy) {
        auto it = centers.find({k.first + dx, k.second + dy});
        if (it == centers.end()) continue;
        for (int c : it->second)
          if ((net[c] - s).norm() <= rho) {
            covered = true;
            break;
          }
      }
    if (!covered) {
      centers[k].push_back(static_cast<int>(net.size()));
      net.push_back(s);
    }
  }
  rep.covering = static_cast<std::int64_t>(net.size());
  rep.c = rep.covering / rep.bound;

  // |N_rho(Z) cap B(0,1)| on a grid of spacing rho/4
  const double g = std::max(h, 2.0 / 4096);
  const int G = static_cast<int>(std::ceil(2.0 / g));
  std::vector<char> mark(static_cast<std::size_t>(G) * G, 0);
  const int reach = static_cast<int>(std::ceil(rho / g)) + 1;
  for (const auto& s : samples) {
    const int ci = static_cast<int>((s.x() + 1) / g), cj = static_cast<int>((s.y() + 1) / g);
    for (int i = std::max(0, ci - reach); i <= std::min(G - 1, ci + reach); ++i)
      for (int j = std::max(0, cj - reach); j <= std::min(G - 1, cj + reach); ++j) {
        const Vec2 c(-1 + (i + 0.5) * g, -1 + (j + 0.5) * g);
        if (c.norm() <= 1.0 && (c - s).norm() <= rho) mark[static_cast<std::size_t>(i) * G + j] = 1;
      }
  }
  rep.area = static_cast<double>(std::count(mark.begin(), mark.end(), 1)) * g * g;
  rep.area_c = rep.area / rep.area_bound;

  // components of Z(P) cap B(0,1): samples linked below 3 grid steps
  const double link = 3 * std::max(h, 2.0 / 4096);
  std::vector<int> parent(samples.size());
  std::iota(parent.begin(), parent.end(), 0);
  Buckets bs;
  for (int i = 0; i < static_cast<int>(samples.size()); ++i) bs[bucket(samples[i], link)].push_back(i);
  for (int i = 0; i < static_cast<int>(samples.size()); ++i) {
    const auto k = bucket(samples[i], link);
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = bs.find({k.first + dx, k.second + dy});
        if (it == bs.end()) continue;
        for (int j : it->second)
          if (j > i && (samples[i] - samples[j]).norm() <= link) parent[find(parent, j)] = find(parent, i);
      }
  }
  int comps = 0;
  for (int i = 0; i < static_cast<int>(samples.size()); ++i)
    if (find(parent, i) == i) ++comps;
  rep.components = comps;
  rep.component_c = comps / (Dd * Dd);
  return rep;
}

NearVarietyProfile near_variety_profile(const Curve2& P, const Vec2& point, const Vec2& dir, double s, double rho,
                                        int samples) {
  if (P.is_zero()) throw InvalidArgument("zero polynomial");
  if (!(s > 0) || !(rho > 0) || samples < 3) throw PreconditionError("s, rho and samples must be positive");
  const double dn = dir.norm();
  if (!(dn > 0)) throw PreconditionError("line direction must be nonzero");
  const Vec2 u = dir / dn;
  // chord of the line with the unit disk
  const double b = point.dot(u);
  const double disc = b * b - (point.squaredNorm() - 1.0);
  if (disc <= 0) throw PreconditionError("line misses B(0,1)");
  const double t0 = -b - std::sqrt(disc), t1 = -b + std::sqrt(disc);
  const double len = t1 - t0;

  std::vector<double> dist(samples);
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t i) {
    const double t = t0 + len * (i + 0.5) / samples;
    dist[i] = point_conic_distance(P, point + t * u);
  });

  // three s-separated chord points within rho of Z(P)
  int found = 0;
  double last = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples && found < 3; ++i) {
    const double t = len * (i + 0.5) / samples;
    if (dist[i] <= rho && t - last >= s) {
      ++found;
      last = t;
    }
  }
  if (found < 3) throw PreconditionError("no three s-separated points of the chord lie within rho of Z(P)");

  NearVarietyProfile prof;
  prof.t_values = {1, 4, 16, 64};
  for (double t : prof.t_values) {
    const auto far = std::count_if(dist.begin(), dist.end(), [&](double d) { return d > t * rho; });
    const double ex = len * static_cast<double>(far) / samples;
    prof.exceptional.push_back(ex);
    prof.near.push_back(len - ex);
  }
  prof.fitted_c = prof.exceptional[0] / (s * s * s);
  for (std::size_t k = 0; k < prof.t_values.size(); ++k)
    prof.verdicts.push_back(prof.exceptional[k] <= prof.fitted_c * s * s * s / std::sqrt(prof.t_values[k]) * (1 + 1e-12));
  return prof;
}

}  // namespace kakeya::incidence
