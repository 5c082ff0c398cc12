#include <fstream>
#include <map>
#include <set>
#include <unordered_set>

#include "raster.hpp"

namespace kakeya::tubes {

using nlohmann::json;

std::vector<ProfileEntry> minkowski_profile(const TubeFamily& f, const std::vector<double>& scales) {
  bool partial = false;
  for (const auto& s : f.shadings) partial = partial || !s.full;
  std::vector<ProfileEntry> out;
  for (double r : scales) {
    if (!(r >= f.delta * (1 - 1e-12))) throw PreconditionError("profile scales must be >= delta");
    const VoxelGrid g(r / 2, 1.0 + r + f.delta);
    ProfileEntry e{r, 0, g.h};
    if (!partial) {
      e.volume = detail::capsule_union(f, g, f.delta + r).union_volume;
    } else {
      // dilate shaded voxel centers by r
      const VoxelGrid base = VoxelGrid::for_delta(f.delta);
      std::unordered_set<std::uint64_t> marked;
      for (std::size_t t = 0; t < f.size(); ++t)
        for (auto v : shading_voxels(f, t, base)) {
          const Vec3 c = base.center(v);
          Line3 point(c, Vec3::UnitX(), 1.0);
          point.length = 0;  // capsule of length zero is the ball B(c, r)
          for (auto w : rasterize_capsule(point, r, g)) marked.insert(w);
        }
      e.volume = static_cast<double>(marked.size()) * g.voxel_volume();
    }
    out.push_back(e);
  }
  return out;
}

void write_profile_csv(const std::string& path, const std::vector<ProfileEntry>& profile) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out.precision(17);
  out << "r,volume,grid_h\n";
  for (const auto& e : profile) out << e.r << "," << e.volume << "," << e.grid_h << "\n";
}

bool strip_contains(const CandidateStrip& c, const Tube& t) {
  const double d = c.strip.delta;
  for (int k = 0; k <= 8; ++k) {
    const Vec3 p = t.axis.point(t.axis.length * k / 8.0);
    if (!(c.strip.surface.first_order_distance(p) <= d / 2)) return false;
    if (!(c.strip.ruling.distance_to(p) <= std::sqrt(d))) return false;
  }
  return true;
}

namespace {

std::optional<CandidateStrip> strip_through(const Line3& a, const Line3& b, const Line3& c, const Line3& ruling,
                                            double delta, const std::string& origin) {
  const Line3 la(a.base, a.dir), lb(b.base, b.dir), lc(c.base, c.dir);
  if (std::abs(geom::skew_margin(la, lb)) < 1e-12 || std::abs(geom::skew_margin(la, lc)) < 1e-12 ||
      std::abs(geom::skew_margin(lb, lc)) < 1e-12)
    return std::nullopt;
  try {
    CandidateStrip s;
    s.strip.surface = geom::quadric_through_lines(la, lb, lc).normalized();
    s.strip.ruling = Line3(ruling.base, ruling.dir);
    s.strip.delta = delta;
    s.origin = origin;
    return s;
  } catch (const DegeneracyError&) {
    return std::nullopt;
  } catch (const PreconditionError&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<CandidateStrip> candidate_strips(const TubeFamily& f, Rng& rng, int triples) {
  std::vector<CandidateStrip> out;
  std::map<int, std::vector<int>> groups;
  for (std::size_t t = 0; t < f.size(); ++t)
    if (f.tubes[t].group >= 0) groups[f.tubes[t].group].push_back(static_cast<int>(t));
  for (const auto& [g, members] : groups) {
    if (members.size() < 3) continue;
    const auto& a = f.tubes[members.front()].axis;
    const auto& b = f.tubes[members[members.size() / 2]].axis;
    const auto& c = f.tubes[members.back()].axis;
    if (auto s = strip_through(a, b, c, b, f.delta, "fat-tube")) out.push_back(*s);
  }

  // quadrics through parameter-near triples
  const double near = 2 * std::sqrt(f.delta);
  for (int k = 0; k < triples && f.size() >= 3; ++k) {
    const std::size_t A = rng.below(f.size());
    std::vector<std::size_t> close;
    for (std::size_t t = 0; t < f.size(); ++t) {
      if (t == A) continue;
      if ((f.tubes[t].axis.midpoint() - f.tubes[A].axis.midpoint()).norm() <= near &&
          geom::line_angle(f.tubes[t].axis.dir, f.tubes[A].axis.dir) <= near)
        close.push_back(t);
    }
    if (close.size() < 2) continue;
    const std::size_t B = close[rng.below(close.size())];
    std::size_t C = close[rng.below(close.size())];
    if (B == C) continue;
    if (auto s = strip_through(f.tubes[A].axis, f.tubes[B].axis, f.tubes[C].axis, f.tubes[A].axis, f.delta, "triple"))
      out.push_back(*s);
  }
  return out;
}

namespace {

// Tubes of f inside each candidate, found through a midpoint hash.
std::vector<std::vector<int>> containment(const TubeFamily& f, const std::vector<CandidateStrip>& cands) {
  const double cell = std::sqrt(f.delta);
  std::map<std::array<long long, 3>, std::vector<int>> buckets;
  auto key = [&](const Vec3& p) {
    return std::array<long long, 3>{static_cast<long long>(std::floor(p.x() / cell)),
                                    static_cast<long long>(std::floor(p.y() / cell)),
                                    static_cast<long long>(std::floor(p.z() / cell))};
  };
  for (std::size_t t = 0; t < f.size(); ++t) buckets[key(f.tubes[t].axis.midpoint())].push_back(static_cast<int>(t));
  std::vector<std::vector<int>> out(cands.size());
  parallel_for(cands.size(), [&](std::size_t c) {
    const Line3& L = cands[c].strip.ruling;
    const auto chord = L.ball_chord(Vec3::Zero(), 1.0 + cell);
    if (!chord) return;
    std::set<int> seen;
    for (double s = chord->first; s <= chord->second + cell; s += cell / 2) {
      const auto k = key(L.point(s));
      for (long long a = -2; a <= 2; ++a)
        for (long long b = -2; b <= 2; ++b)
          for (long long d = -2; d <= 2; ++d) {
            auto it = buckets.find({k[0] + a, k[1] + b, k[2] + d});
            if (it == buckets.end()) continue;
            for (int t : it->second) seen.insert(t);
          }
    }
    for (int t : seen)
      if (strip_contains(cands[c], f.tubes[t])) out[c].push_back(t);
  });
  return out;
}

}  // namespace

StripDecomposition decompose_heisenberg_sl2(const TubeFamily& f, double alpha,
                                            const std::vector<CandidateStrip>& candidates) {
  if (!(alpha >= 0)) throw PreconditionError("alpha must be nonnegative");
  StripDecomposition d;
  d.alpha = alpha;
  d.threshold = std::pow(f.delta, -0.5 + alpha);
  d.iteration_bound = static_cast<double>(f.size()) * std::pow(f.delta, 0.5 - alpha);
  const auto inside = containment(f, candidates);
  std::vector<char> residual(f.size(), 1);
  for (;;) {
    std::size_t best = candidates.size();
    int best_count = -1;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      int n = 0;
      for (int t : inside[c]) n += residual[t];
      if (n > best_count) {
        best_count = n;
        best = c;
      }
    }
    if (best == candidates.size() || best_count < d.threshold) break;
    ExtractedStrip e{best, {}};
    for (int t : inside[best])
      if (residual[t]) {
        residual[t] = 0;
        e.tube_ids.push_back(f.tubes[t].id);
      }
    d.strips.push_back(std::move(e));
    ++d.iterations;
  }
  for (std::size_t t = 0; t < f.size(); ++t) (residual[t] ? d.t1 : d.t2).push_back(f.tubes[t].id);
  return d;
}

DecompositionCheck verify_decomposition(const TubeFamily& f, const std::vector<CandidateStrip>& candidates,
                                        const StripDecomposition& d) {
  DecompositionCheck chk;
  std::map<int, int> seen;
  for (int id : d.t1) ++seen[id];
  for (int id : d.t2) ++seen[id];
  chk.partition = seen.size() == f.size() && d.t1.size() + d.t2.size() == f.size();
  for (const auto& t : f.tubes) chk.partition = chk.partition && seen.count(t.id) == 1;

  std::set<int> t1(d.t1.begin(), d.t1.end());
  chk.residual_below = true;
  const auto inside = containment(f, candidates);
  for (const auto& list : inside) {
    int n = 0;
    for (int t : list) n += t1.count(f.tubes[t].id) > 0;
    if (n >= d.threshold) chk.residual_below = false;
  }

  chk.extracted_above = true;
  std::set<int> extracted;
  for (const auto& e : d.strips) {
    if (e.candidate >= candidates.size() || static_cast<double>(e.tube_ids.size()) < d.threshold)
      chk.extracted_above = false;
    for (int id : e.tube_ids) {
      if (!extracted.insert(id).second) chk.extracted_above = false;
      if (e.candidate < candidates.size() && !strip_contains(candidates[e.candidate], f.tubes[f.index_of(id)]))
        chk.extracted_above = false;
    }
  }
  chk.extracted_above = chk.extracted_above && extracted == std::set<int>(d.t2.begin(), d.t2.end());
  chk.terminated_in_bound = d.iterations <= d.iteration_bound + 1e-9;
  return chk;
}

json StripDecomposition::to_json() const {
  json strips_json = json::array();
  for (const auto& s : strips) strips_json.push_back({{"candidate", s.candidate}, {"tubes", s.tube_ids.size()}});
  return {{"alpha", alpha},
          {"threshold", threshold},
          {"t1", t1.size()},
          {"t2", t2.size()},
          {"iterations", iterations},
          {"iteration_bound", iteration_bound},
          {"strips", strips_json}};
}

}  // namespace kakeya::tubes
