#include <algorithm>
#include <map>
#include <set>

#include "kakeya/incidence.hpp"

namespace kakeya::incidence {

using nlohmann::json;

json DiscreteSTReport::to_json() const {
  return {{"delta", delta},
          {"A", A},
          {"seed", seed},
          {"D", D},
          {"r", r},
          {"points", points.size()},
          {"curves", curves.size()},
          {"max_pair_curves", max_pair_curves},
          {"incidences_brute", brute},
          {"incidences_partition", partition_route},
          {"boundary_points", boundary_points},
          {"boundary_term", boundary_term},
          {"cell_term", cell_term},
          {"cell_curve_sum", cell_curve_sum},
          {"cells", cells},
          {"bound", bound},
          {"ratio", ratio},
          {"cauchy_schwarz_bound", cs_bound},
          {"retries", retries}};
}

std::int64_t partition_route_incidences(const std::vector<Vec2>& pts, const std::vector<Curve2>& curves, double r,
                                        int D, Rng& rng, DiscreteSTReport* rep) {
  const PartitionResult part = polynomial_partition(pts, D, rng);

  // curves with a foot point within r of some point of the piece
  auto curves_near = [&](const std::vector<int>& piece) {
    std::vector<Curve2> out;
    for (const auto& g : curves) {
      for (int i : piece) {
        const auto f = conic_foot_point(g, pts[i]);
        if (f && (*f - pts[i]).norm() <= r) {
          out.push_back(g);
          break;
        }
      }
    }
    return out;
  };
  auto subset = [&](const std::vector<int>& piece) {
    std::vector<Vec2> out;
    for (int i : piece) out.push_back(pts[i]);
    return out;
  };

  std::int64_t boundary_term = 0;
  if (!part.boundary.empty()) boundary_term = fuzzy_incidences(subset(part.boundary), curves, r);
  std::int64_t cell_term = 0, curve_sum = 0;
  for (const auto& cell : part.cells) {
    const auto cc = curves_near(cell);
    curve_sum += static_cast<std::int64_t>(cc.size());
    if (!cc.empty()) cell_term += fuzzy_incidences(subset(cell), cc, r);
  }
  if (rep) {
    rep->boundary_points = static_cast<std::int64_t>(part.boundary.size());
    rep->boundary_term = boundary_term;
    rep->cell_term = cell_term;
    rep->cell_curve_sum = curve_sum;
    rep->cells = static_cast<int>(part.cells.size());
  }
  return boundary_term + cell_term;
}

DiscreteSTReport discrete_st_experiment(double delta, int A, std::uint64_t seed, const DiscreteSTOptions& opt) {
  if (!(delta > 0 && delta < 1)) throw PreconditionError("delta must lie in (0, 1)");
  const double k = -std::log2(delta);
  if (std::abs(k - std::round(k)) > 1e-9) throw PreconditionError("delta must be dyadic");
  if (A < 1) throw PreconditionError("A must be >= 1");

  DiscreteSTReport rep;
  rep.delta = delta;
  rep.A = A;
  rep.seed = seed;
  rep.r = opt.r > 0 ? opt.r : delta;
  rep.D = opt.D > 0 ? opt.D : static_cast<int>(std::lround(std::pow(delta, -1.0 / 6.0)));
  const int n_target = static_cast<int>(std::floor(1.0 / delta + 1e-9));
  const double sep = std::sqrt(delta);

  for (int attempt = 0; attempt <= opt.max_retries; ++attempt) {
    Rng rng = Rng(seed).split(static_cast<std::uint64_t>(attempt));
    Rng prng = rng.split("points"), crng = rng.split("curves");

    // delta^{1/2}-separated points by dart throwing
    std::vector<Vec2> pts;
    std::map<std::pair<long long, long long>, std::vector<int>> grid;
    auto key = [&](const Vec2& p) {
      return std::make_pair(static_cast<long long>(std::floor(p.x() / sep)),
                            static_cast<long long>(std::floor(p.y() / sep)));
    };
    for (int t = 0; t < 200 * n_target && static_cast<int>(pts.size()) < n_target; ++t) {
      const Vec2 p = prng.in_disk(1.0);
      const auto kk = key(p);
      bool ok = true;
      for (long long dx = -1; dx <= 1 && ok; ++dx)
        for (long long dy = -1; dy <= 1 && ok; ++dy) {
          auto it = grid.find({kk.first + dx, kk.second + dy});
          if (it == grid.end()) continue;
          for (int j : it->second)
            if ((pts[j] - p).norm() < sep) {
              ok = false;
              break;
            }
        }
      if (!ok) continue;
      grid[kk].push_back(static_cast<int>(pts.size()));
      pts.push_back(p);
    }

    // five-point conics, accepted while every point pair keeps <= A common curves
    const int n = static_cast<int>(pts.size());
    std::vector<int> pair(static_cast<std::size_t>(n) * n, 0);
    std::vector<Curve2> curves;
    for (int t = 0; t < opt.curve_attempts && static_cast<int>(curves.size()) < n; ++t) {
      std::array<int, 5> idx;
      std::set<int> used;
      while (used.size() < 5) used.insert(static_cast<int>(crng.below(n)));
      std::copy(used.begin(), used.end(), idx.begin());
      std::array<Vec2, 5> five;
      for (int i = 0; i < 5; ++i) five[i] = pts[idx[i]];
      Curve2 g;
      try {
        g = Curve2::through_points(five);
      } catch (const DegeneracyError&) {
        continue;
      }
      std::vector<int> near;
      for (int i = 0; i < n; ++i)
        if (point_conic_distance(g, pts[i]) <= rep.r) near.push_back(i);
      bool ok = true;
      for (std::size_t a = 0; a < near.size() && ok; ++a)
        for (std::size_t b = a + 1; b < near.size() && ok; ++b)
          ok = pair[static_cast<std::size_t>(near[a]) * n + near[b]] < A;
      if (!ok) continue;
      for (std::size_t a = 0; a < near.size(); ++a)
        for (std::size_t b = a + 1; b < near.size(); ++b) ++pair[static_cast<std::size_t>(near[a]) * n + near[b]];
      curves.push_back(g);
    }

    // verify the hypothesis from scratch
    const auto lists = incidence_lists(pts, curves, rep.r);
    std::vector<int> check(static_cast<std::size_t>(n) * n, 0);
    int worst = 0;
    for (const auto& row : lists)
      for (std::size_t a = 0; a < row.size(); ++a)
        for (std::size_t b = a + 1; b < row.size(); ++b)
          worst = std::max(worst, ++check[static_cast<std::size_t>(row[a]) * n + row[b]]);
    rep.retries = attempt;
    if (worst > A) continue;

    rep.points = pts;
    rep.curves = curves;
    rep.max_pair_curves = worst;
    rep.brute = 0;
    for (const auto& row : lists) rep.brute += static_cast<std::int64_t>(row.size());
    Rng part_rng = rng.split("partition");
    rep.partition_route = partition_route_incidences(pts, curves, rep.r, rep.D, part_rng, &rep);
    rep.bound = std::sqrt(static_cast<double>(A)) * std::pow(delta, -4.0 / 3.0);
    rep.ratio = static_cast<double>(rep.brute) / rep.bound;
    rep.cs_bound = static_cast<double>(curves.size()) +
                   std::sqrt(static_cast<double>(A) * n * static_cast<double>(n) * static_cast<double>(curves.size()));
    return rep;
  }
  throw DegeneracyError("generated configuration violates the A-hypothesis after all retries");
}

}  // namespace kakeya::incidence
