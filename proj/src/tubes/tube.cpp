#include <fstream>
#include <set>
#include <sstream>

#include "raster.hpp"

namespace kakeya::tubes {

using nlohmann::json;

double Tube::distance_to(const Vec3& p) const {
  const double t = std::clamp(axis.parameter_of(p), 0.0, axis.length);
  return (p - axis.point(t)).norm();
}

VoxelGrid::VoxelGrid(double h_, double extent_) : h(h_), extent(extent_) {
  if (!(h_ > 0) || !(extent_ > 0)) throw PreconditionError("voxel size and extent must be positive");
  const double cells = std::ceil(2 * extent_ / h_ - 1e-9);
  if (cells > 65535) throw ResourceError("voxel grid too fine");
  n = static_cast<int>(cells);
  h = 2 * extent_ / n;
}

Vec3 VoxelGrid::center(std::uint64_t index) const {
  const std::uint64_t nn = static_cast<std::uint64_t>(n);
  const int k = static_cast<int>(index % nn);
  const int j = static_cast<int>((index / nn) % nn);
  const int i = static_cast<int>(index / (nn * nn));
  return {coord(i), coord(j), coord(k)};
}

Tube make_tube(int id, const Vec3& center, const Vec3& dir, double delta, int group) {
  if (!(delta > 0)) throw PreconditionError("tube radius must be positive");
  const double dn = dir.norm();
  if (!(dn > 0)) throw PreconditionError("tube direction must be nonzero");
  const Vec3 u = dir / dn;
  double t0 = -0.5, t1 = 0.5;
  const Line3 line(center, u);
  const auto chord = line.ball_chord(Vec3::Zero(), 1.0 - delta);
  if (!chord) throw PreconditionError("tube misses B(0,1)");
  t0 = std::max(t0, chord->first);
  t1 = std::min(t1, chord->second);
  if (t0 >= t1) throw PreconditionError("tube misses B(0,1)");
  Tube t;
  t.id = id;
  t.axis = Line3(center + t0 * u, u, t1 - t0);
  t.delta = delta;
  t.group = group;
  return t;
}

TubeFamily TubeFamily::from_tubes(std::vector<Tube> tubes, double delta, const std::string& provenance,
                                  std::uint64_t seed) {
  TubeFamily f;
  f.delta = delta;
  f.tubes = std::move(tubes);
  f.provenance = provenance;
  f.seed = seed;
  for (const auto& t : f.tubes) f.shadings.push_back(Shading{t.id, true, {}});
  f.validate();
  return f;
}

void TubeFamily::validate() const {
  if (shadings.size() != tubes.size()) throw InvalidArgument("every tube needs a shading");
  std::set<int> ids;
  for (std::size_t i = 0; i < tubes.size(); ++i) {
    if (!ids.insert(tubes[i].id).second) throw InvalidArgument("duplicate tube id " + std::to_string(tubes[i].id));
    if (tubes[i].delta != delta) throw InvalidArgument("tubes of one family share delta");
    if (shadings[i].tube_id != tubes[i].id) throw InvalidArgument("shading order does not match tubes");
  }
}

int TubeFamily::index_of(int id) const {
  for (std::size_t i = 0; i < tubes.size(); ++i)
    if (tubes[i].id == id) return static_cast<int>(i);
  throw InvalidArgument("unknown tube id " + std::to_string(id));
}

void TubeFamily::write_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  for (std::size_t i = 0; i < tubes.size(); ++i) {
    const Tube& t = tubes[i];
    json j = {{"id", t.id},
              {"base", {t.axis.base.x(), t.axis.base.y(), t.axis.base.z()}},
              {"dir", {t.axis.dir.x(), t.axis.dir.y(), t.axis.dir.z()}},
              {"delta", t.delta}};
    if (t.axis.length != 1.0) j["length"] = t.axis.length;
    if (t.group >= 0) j["group"] = t.group;
    if (shadings[i].full)
      j["shading"] = "full";
    else
      j["shading"] = shadings[i].voxels;
    out << j.dump() << "\n";
  }
}

TubeFamily TubeFamily::read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path);
  TubeFamily f;
  std::string line;
  int lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Tube t;
      t.id = j.at("id").get<int>();
      const auto b = j.at("base"), d = j.at("dir");
      const Vec3 dir(d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>());
      if (!(dir.norm() > 0)) throw InvalidArgument("zero direction");
      t.axis = Line3(Vec3(b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>()), dir,
                     j.value("length", 1.0));
      t.delta = j.at("delta").get<double>();
      t.group = j.value("group", -1);
      if (first) f.delta = t.delta;
      first = false;
      Shading s{t.id, true, {}};
      const auto& sh = j.at("shading");
      if (sh.is_string()) {
        if (sh.get<std::string>() != "full") throw InvalidArgument("shading must be \"full\" or a voxel list");
      } else {
        s = make_partial_shading(t, sh.get<std::vector<std::uint64_t>>());
      }
      f.tubes.push_back(t);
      f.shadings.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  f.provenance = "file";
  f.validate();
  return f;
}

std::vector<std::uint64_t> rasterize_capsule(const Line3& axis, double radius, const VoxelGrid& g) {
  std::vector<std::uint64_t> out;
  const auto [lo, hi] = detail::slice_range(axis, radius, g);
  for (int i = lo; i <= hi; ++i)
    detail::capsule_slice(axis, radius, g, i, [&](int j, int k) { out.push_back(g.index(i, j, k)); });
  return out;  // slices ascend and (j, k) ascend within a slice
}

std::vector<std::uint64_t> rasterize(const Tube& t, const VoxelGrid& g) {
  if (g.h > t.delta / 2 * (1 + 1e-9)) throw PreconditionError("grid too coarse: need h <= delta/2");
  return rasterize_capsule(t.axis, t.delta, g);
}

Shading make_partial_shading(const Tube& t, std::vector<std::uint64_t> voxels) {
  const VoxelGrid g = VoxelGrid::for_delta(t.delta);
  std::sort(voxels.begin(), voxels.end());
  voxels.erase(std::unique(voxels.begin(), voxels.end()), voxels.end());
  std::vector<std::uint64_t> kept;
  for (auto v : voxels)
    if (v < g.total() && t.distance_to(g.center(v)) <= t.delta) kept.push_back(v);
  return Shading{t.id, false, std::move(kept)};
}

std::vector<std::uint64_t> shading_voxels(const TubeFamily& f, std::size_t index, const VoxelGrid& g) {
  const Shading& s = f.shadings.at(index);
  if (s.full) return rasterize(f.tubes[index], g);
  detail::require_shading_grid(f, g);
  return s.voxels;
}

namespace detail {

void require_shading_grid(const TubeFamily& f, const VoxelGrid& g) {
  const VoxelGrid d = VoxelGrid::for_delta(f.delta);
  if (d.n != g.n || d.extent != g.extent) throw PreconditionError("partial shadings live on the h = delta/2 grid");
}

SliceIndex build_slice_index(const TubeFamily& f, const VoxelGrid& g, double radius) {
  bool partial = false;
  for (const auto& s : f.shadings) partial = partial || !s.full;
  if (partial && radius <= 0) require_shading_grid(f, g);
  SliceIndex idx;
  idx.blocks.resize((g.n + SliceIndex::kBlock - 1) / SliceIndex::kBlock);
  idx.range.resize(f.tubes.size());
  for (std::size_t t = 0; t < f.tubes.size(); ++t) {
    const double R = radius > 0 ? radius : f.tubes[t].delta;
    idx.range[t] = slice_range(f.tubes[t].axis, R, g);
    for (int b = idx.range[t].first / SliceIndex::kBlock; b <= idx.range[t].second / SliceIndex::kBlock; ++b)
      if (idx.range[t].first <= idx.range[t].second) idx.blocks[b].push_back(static_cast<int>(t));
  }
  return idx;
}

}  // namespace detail

namespace {

// Multiplicity histogram of the union of capsules/shadings.
UnionStats accumulate(const TubeFamily& f, const VoxelGrid& g, double radius) {
  const detail::SliceIndex idx = detail::build_slice_index(f, g, radius);
  const int nb = idx.n_blocks();
  std::vector<std::vector<std::int64_t>> hist(nb);
  parallel_for(static_cast<std::size_t>(nb), [&](std::size_t b) {
    std::vector<std::uint32_t> cnt(static_cast<std::size_t>(g.n) * g.n, 0);
    std::vector<std::uint32_t> touched;
    auto& h = hist[b];
    const int i0 = static_cast<int>(b) * detail::SliceIndex::kBlock;
    const int i1 = std::min(g.n, i0 + detail::SliceIndex::kBlock);
    for (int i = i0; i < i1; ++i) {
      detail::visit_slice(f, g, idx, i, radius, [&](int j, int k, int) {
        const std::uint32_t c = static_cast<std::uint32_t>(j) * g.n + k;
        if (cnt[c]++ == 0) touched.push_back(c);
      });
      for (auto c : touched) {
        if (h.size() <= cnt[c]) h.resize(cnt[c] + 1, 0);
        ++h[cnt[c]];
        cnt[c] = 0;
      }
      touched.clear();
    }
  });
  UnionStats st;
  st.voxel_volume = g.voxel_volume();
  st.histogram.assign(1, 0);
  for (const auto& h : hist) {
    if (st.histogram.size() < h.size()) st.histogram.resize(h.size(), 0);
    for (std::size_t m = 1; m < h.size(); ++m) st.histogram[m] += h[m];
  }
  for (std::size_t m = 1; m < st.histogram.size(); ++m) {
    st.union_voxels += st.histogram[m];
    st.sum_voxels += static_cast<std::int64_t>(m) * st.histogram[m];
    if (st.histogram[m] > 0) st.max_multiplicity = static_cast<int>(m);
  }
  st.union_volume = st.union_voxels * st.voxel_volume;
  st.sum_volume = st.sum_voxels * st.voxel_volume;
  return st;
}

}  // namespace

UnionStats union_volume(const TubeFamily& f, const VoxelGrid& g) {
  for (const auto& t : f.tubes)
    if (g.h > t.delta / 2 * (1 + 1e-9)) throw PreconditionError("grid too coarse: need h <= delta/2");
  return accumulate(f, g, 0.0);
}

json UnionStats::to_json() const {
  return {{"union_voxels", union_voxels}, {"sum_voxels", sum_voxels},   {"union_volume", union_volume},
          {"sum_volume", sum_volume},     {"max_multiplicity", max_multiplicity}, {"histogram", histogram},
          {"voxel_volume", voxel_volume}};
}

double wolff_prediction(double delta, double lambda, std::size_t n_tubes) {
  return std::pow(lambda, 2.5) * std::sqrt(delta) * std::pow(delta * delta * static_cast<double>(n_tubes), 0.75);
}

std::vector<std::pair<std::uint32_t, int>> slice_memberships(const TubeFamily& f, const VoxelGrid& g, int i) {
  const detail::SliceIndex idx = detail::build_slice_index(f, g, 0.0);
  std::vector<std::pair<std::uint32_t, int>> out;
  detail::visit_slice(f, g, idx, i, 0.0,
                      [&](int j, int k, int t) { out.emplace_back(static_cast<std::uint32_t>(j) * g.n + k, t); });
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

UnionStats capsule_union(const TubeFamily& f, const VoxelGrid& g, double radius) { return accumulate(f, g, radius); }

}  // namespace detail

}  // namespace kakeya::tubes
