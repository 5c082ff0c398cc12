#include <algorithm>
#include <map>

#include "kakeya/ring.hpp"

namespace kakeya::ring {

using nlohmann::json;

const std::vector<std::string>& axiom_names() {
  static const std::vector<std::string> names = {
      "line_count",          "lines_per_plane",  "pair_intersection",
      "intersecting_pairs_coplanar", "plane_pair_lines", "triples_one_plane"};
  return names;
}

static json elem_json(const RingElem& e) { return json::array({e.x1, e.x2}); }

static json line_json(const RLine& l) {
  return json::array({elem_json(l.a), elem_json(l.b), elem_json(l.c), elem_json(l.d)});
}

static json point_json(const RPoint3& q) {
  return json::array({elem_json(q.x), elem_json(q.y), elem_json(q.z)});
}

static json plane_json(const RPlane& pl) {
  return json::array({elem_json(pl.u()), elem_json(pl.v()), elem_json(pl.w()), elem_json(pl.s())});
}

bool AxiomReport::all_pass() const {
  return std::all_of(axioms.begin(), axioms.end(), [](const AxiomResult& a) { return a.pass; });
}

const AxiomResult* AxiomReport::find(const std::string& name) const {
  for (const auto& a : axioms)
    if (a.name == name) return &a;
  return nullptr;
}

json AxiomReport::to_json() const {
  json j;
  j["p"] = p;
  j["axioms"] = json::array();
  for (const auto& a : axioms) {
    json e = {{"name", a.name}, {"pass", a.pass}};
    if (a.witness) e["witness"] = *a.witness;
    if (!a.detail.is_null()) e["detail"] = a.detail;
    j["axioms"].push_back(e);
  }
  j["cardinalities"] = {{"X", card_X}, {"L", card_L}, {"union", card_union},
                        {"projection", card_projection}};
  return j;
}

namespace {

struct Incidence {
  std::vector<std::vector<std::int64_t>> pts;  // sorted point indices per line
  std::vector<std::vector<int>> meet;          // meet[i][j] = #common points
};

int common_count(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                 std::int64_t* first = nullptr) {
  int n = 0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      if (n == 0 && first) *first = a[i];
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace

AxiomReport verify_ring_axioms(const std::vector<RLine>& lines, int p,
                               const std::vector<std::string>& checks_in,
                               const RingLimits& limits) {
  if (!is_prime(p)) throw InvalidArgument("p=" + std::to_string(p) + " is not prime");
  std::vector<std::string> checks = checks_in;
  if (checks.empty() || std::find(checks.begin(), checks.end(), "all") != checks.end())
    checks = axiom_names();
  auto wanted = [&](const std::string& n) {
    return std::find(checks.begin(), checks.end(), n) != checks.end();
  };
  for (const auto& c : checks)
    if (c != "union" && std::find(axiom_names().begin(), axiom_names().end(), c) == axiom_names().end())
      throw InvalidArgument("unknown check '" + c + "'");

  const bool need_pairs = wanted("pair_intersection") || wanted("intersecting_pairs_coplanar") ||
                          wanted("plane_pair_lines") || wanted("triples_one_plane");
  const bool need_planes = wanted("lines_per_plane") || wanted("intersecting_pairs_coplanar") ||
                           wanted("plane_pair_lines") || wanted("triples_one_plane");
  for (const auto& c : checks) {
    const bool plane_q = c == "lines_per_plane" || c == "intersecting_pairs_coplanar" ||
                         c == "plane_pair_lines" || c == "triples_one_plane";
    if (plane_q && p > limits.max_plane_p)
      throw ResourceError("axiom '" + c + "' skipped: p=" + std::to_string(p) +
                          " exceeds plane enumeration limit " + std::to_string(limits.max_plane_p));
    if (c == "pair_intersection" && p > limits.max_pair_p)
      throw ResourceError("axiom '" + c + "' skipped: p=" + std::to_string(p) +
                          " exceeds pairwise limit " + std::to_string(limits.max_pair_p));
  }

  AxiomReport rep;
  rep.p = p;
  const std::int64_t q = static_cast<std::int64_t>(p) * p;  // |R|
  const int n = static_cast<int>(lines.size());

  std::vector<std::vector<std::int64_t>> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = lines[i].point_indices();
  {
    std::vector<std::int64_t> all;
    for (const auto& v : pts) all.insert(all.end(), v.begin(), v.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    rep.card_union = static_cast<std::int64_t>(all.size());
  }
  rep.card_L = n;
  if (p <= limits.max_set_p) {
    const auto X = build_sl2_set(p, limits);
    rep.card_X = static_cast<std::int64_t>(X.size());
    rep.card_projection = static_cast<std::int64_t>(coarse_projection(X).size());
  }

  if (wanted("line_count")) {
    AxiomResult r{"line_count", 2 * n >= q * q && n <= q * q, std::nullopt,
                  {{"count", n}, {"R_squared", q * q}}};
    rep.axioms.push_back(r);
  }

  // meet[i][j] and first common point
  std::vector<std::vector<int>> meet;
  std::vector<std::vector<std::int64_t>> meet_pt;
  if (need_pairs) {
    meet.assign(n, std::vector<int>(n, 0));
    meet_pt.assign(n, std::vector<std::int64_t>(n, -1));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        std::int64_t f = -1;
        meet[i][j] = meet[j][i] = common_count(pts[i], pts[j], &f);
        meet_pt[i][j] = meet_pt[j][i] = f;
      }
  }

  if (wanted("pair_intersection")) {
    AxiomResult r{"pair_intersection", true, std::nullopt, {}};
    int worst = 0;
    for (int i = 0; i < n && r.pass; ++i)
      for (int j = i + 1; j < n; ++j) {
        worst = std::max(worst, meet[i][j]);
        if (meet[i][j] > 1) {
          r.pass = false;
          r.witness = json{{"lines", {line_json(lines[i]), line_json(lines[j])}},
                           {"common_points", meet[i][j]}};
          break;
        }
      }
    r.detail = {{"max_common_points", worst}};
    rep.axioms.push_back(r);
  }

  if (!need_planes) return rep;

  const auto planes = all_planes(p);
  std::vector<std::vector<int>> in_plane(planes.size());  // lines per plane
  std::vector<std::vector<int>> planes_of(n);             // planes per line (sorted)
  for (size_t k = 0; k < planes.size(); ++k)
    for (int i = 0; i < n; ++i)
      if (planes[k].contains(lines[i])) {
        in_plane[k].push_back(i);
        planes_of[i].push_back(static_cast<int>(k));
      }
  auto common_planes = [&](std::initializer_list<int> ids) {
    std::vector<int> acc = planes_of[*ids.begin()];
    for (auto it = ids.begin() + 1; it != ids.end(); ++it) {
      std::vector<int> nxt;
      std::set_intersection(acc.begin(), acc.end(), planes_of[*it].begin(), planes_of[*it].end(),
                            std::back_inserter(nxt));
      acc.swap(nxt);
    }
    return acc;
  };

  if (wanted("lines_per_plane")) {
    size_t best = 0, arg = 0;
    for (size_t k = 0; k < planes.size(); ++k)
      if (in_plane[k].size() > best) best = in_plane[k].size(), arg = k;
    AxiomResult r{"lines_per_plane", static_cast<std::int64_t>(best) <= q, std::nullopt,
                  {{"max_lines_in_plane", best}, {"bound", q}, {"planes", planes.size()}}};
    if (!r.pass) r.witness = json{{"plane", plane_json(planes[arg])}, {"lines", best}};
    rep.axioms.push_back(r);
  }

  if (wanted("intersecting_pairs_coplanar")) {
    AxiomResult r{"intersecting_pairs_coplanar", true, std::nullopt, {}};
    int pairs = 0;
    for (int i = 0; i < n && r.pass; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (meet[i][j] == 0) continue;
        ++pairs;
        if (common_planes({i, j}).empty()) {
          r.pass = false;
          r.witness = json{{"lines", {line_json(lines[i]), line_json(lines[j])}}};
          break;
        }
      }
    r.detail = {{"intersecting_pairs", pairs}};
    rep.axioms.push_back(r);
  }

  if (wanted("plane_pair_lines")) {
    // Two planes share at most one line of L <=> no two lines share two planes.
    AxiomResult r{"plane_pair_lines", true, std::nullopt, {}};
    for (int i = 0; i < n && r.pass; ++i)
      for (int j = i + 1; j < n; ++j) {
        const auto cp = common_planes({i, j});
        if (cp.size() > 1) {
          r.pass = false;
          r.witness = json{{"planes", {plane_json(planes[cp[0]]), plane_json(planes[cp[1]])}},
                           {"lines", {line_json(lines[i]), line_json(lines[j])}}};
          break;
        }
      }
    rep.axioms.push_back(r);
  }

  if (wanted("triples_one_plane")) {
    AxiomResult r{"triples_one_plane", true, std::nullopt, {}};
    std::int64_t triples = 0, bad = 0;
    std::map<size_t, std::int64_t> hist;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (!meet[i][j]) continue;
        for (int k = j + 1; k < n; ++k) {
          if (!meet[i][k] || !meet[j][k]) continue;
          // concurrent: the three lines share a point
          if (meet_pt[i][j] == meet_pt[i][k] && meet_pt[i][j] == meet_pt[j][k]) continue;
          ++triples;
          const auto cp = common_planes({i, j, k});
          ++hist[cp.size()];
          if (cp.size() != 1) {
            ++bad;
            if (!r.witness) {
              const RPoint3 a = RPoint3::from_index(meet_pt[i][j], p);
              const RPoint3 b = RPoint3::from_index(meet_pt[i][k], p);
              const RPoint3 c = RPoint3::from_index(meet_pt[j][k], p);
              r.witness = json{{"lines", {line_json(lines[i]), line_json(lines[j]), line_json(lines[k])}},
                               {"pairwise_points", {point_json(a), point_json(b), point_json(c)}},
                               {"common_planes", cp.size()}};
            }
          }
        }
      }
    r.pass = bad == 0;
    json h = json::object();
    for (auto [k, v] : hist) h[std::to_string(k)] = v;
    r.detail = {{"triples", triples}, {"failing_triples", bad}, {"common_plane_histogram", h}};
    rep.axioms.push_back(r);
  }
  return rep;
}

}  // namespace kakeya::ring
