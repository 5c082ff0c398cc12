// Acceptance runner. `acceptance --criterion N` checks one criterion,
// `acceptance` checks all twelve. One PASS/FAIL line per criterion; the exit
// code is nonzero when any selected criterion fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "kakeya/geometry.hpp"
#include "kakeya/incidence.hpp"
#include "kakeya/lab.hpp"
#include "kakeya/ring.hpp"
#include "kakeya/sl2.hpp"
#include "kakeya/tubes.hpp"

using namespace kakeya;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Record a failed check and keep going so the detail line lists every miss.
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

void ring_exactness(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int p : {2, 3, 5}) {
    const auto X = ring::build_sl2_set(p);
    const auto L = ring::build_sl2_lines(p);
    std::set<std::int64_t> xs;
    for (const auto& q : X) xs.insert(q.index());
    std::int64_t outside = 0;
    for (const auto& l : L)
      for (auto idx : l.point_indices()) outside += xs.count(idx) == 0;
    const auto proj = ring::coarse_projection(X);
    const std::int64_t p2 = p * p, p3 = p2 * p, p4 = p3 * p, p5 = p4 * p;
    o.detail << " p=" << p << ": |X|=" << X.size() << " |L|=" << L.size() << " |proj|=" << proj.size();
    o.require(static_cast<std::int64_t>(X.size()) == p5, "|X| = p^5 at p=" + std::to_string(p));
    o.require(static_cast<std::int64_t>(L.size()) == p4 - p2, "|L| = p^4 - p^2 at p=" + std::to_string(p));
    o.require(static_cast<std::int64_t>(proj.size()) == p3, "|projection| = p^3 at p=" + std::to_string(p));
    o.require(outside == 0, "lines inside X at p=" + std::to_string(p));
  }
  const double secs = seconds_since(t0);
  o.detail << "; " << secs << " s";
  o.require(secs < 60, "runtime < 60 s");
}

void ring_axioms(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int p : {2, 3}) {
    const auto rep = ring::verify_ring_axioms(ring::build_sl2_lines(p), p);
    o.detail << " p=" << p << ":";
    for (const auto& a : rep.axioms) {
      o.detail << " " << a.name << "=" << (a.pass ? "ok" : "FAIL");
      o.require(a.pass, a.name + " at p=" + std::to_string(p));
    }
    if (const auto* lpp = rep.find("lines_per_plane")) {
      const int m = lpp->detail["max_lines_in_plane"].get<int>();
      o.detail << " max_lines_in_plane=" << m;
      o.require(m <= p * p, "max lines per plane <= p^2");
    }
  }
  const double secs = seconds_since(t0);
  o.detail << "; " << secs << " s";
  o.require(secs < 300, "runtime < 5 min");
}

void curvature_identity(Outcome& o) {
  Rng rng = Rng(2026).split("acceptance-curvature");
  double worst_id = 0, worst_gap = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto l = geom::random_admissible_triple(rng);
    const auto r = geom::fit_regulus(l[0], l[1], l[2]);
    worst_id = std::max(worst_id, geom::curvature_identity(r).relative_error());
    const Vec3 p = geom::ruling_line(r, 0.4).point(0.3);
    worst_gap = std::max(worst_gap, geom::gauss_curvature(r, p).relative_gap());
  }
  o.detail << " 1000 triples: identity rel err " << worst_id << ", curvature methods rel gap " << worst_gap;
  o.require(worst_id <= 1e-8, "identity <= 1e-8");
  o.require(worst_gap <= 1e-6, "curvature agreement <= 1e-6");
}

void regulus_fit(Outcome& o) {
  const auto can = geom::canonical_triple();
  const auto q = geom::fit_regulus(can[0], can[1], can[2]).quadric.normalized();
  // z + xy - xz - yz in the order (1,x,y,z,x^2,y^2,z^2,xy,xz,yz)
  const std::array<double, 10> expect = {0, 0, 0, 1, 0, 0, 0, 1, -1, -1};
  double canon_err = 0;
  for (int i = 0; i < 10; ++i) canon_err = std::max(canon_err, std::abs(q.c[i] - expect[i]));

  Rng rng = Rng(2026).split("acceptance-regulus");
  double worst_res = 0;
  bool round_trip = true;
  double worst_rt = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto l = geom::random_admissible_triple(rng);
    const auto r = geom::fit_regulus(l[0], l[1], l[2]);
    for (const auto& g : l) {
      const Vec3 c0 = g.closest_point(Vec3::Zero());
      for (int i = 0; i < 30; ++i) worst_res = std::max(worst_res, std::abs(r.quadric(c0 + (-1 + i / 14.5) * g.dir)));
    }
    const auto T = geom::affine_normalize(l[0], l[1], l[2]);
    const auto Ti = T.inverse();
    for (int i = 0; i < 3; ++i) {
      round_trip = round_trip && geom::same_line(T(l[i]), can[i], 1e-8) && geom::same_line(Ti(can[i]), l[i], 1e-8);
      const Vec3 p = l[i].closest_point(Vec3::Zero());
      worst_rt = std::max(worst_rt, (Ti(T(p)) - p).norm());
    }
  }
  o.detail << " canonical coefficient err " << canon_err << "; 1000 triples x 3 lines x 30 samples: max |Q| "
           << worst_res << "; normalization round trip " << worst_rt;
  o.require(canon_err <= 1e-10, "canonical quadric");
  o.require(worst_res <= 1e-10, "residual <= 1e-10");
  o.require(round_trip && worst_rt <= 1e-8, "normalization round trip <= 1e-8");
}

void heisenberg(Outcome& o) {
  Rng rng = Rng(2026).split("acceptance-heisenberg");
  double worst = 0;
  int fails = 0;
  for (int k = 0; k < 10000; ++k) {
    const double a = rng.normal(), b = rng.normal();
    const geom::cplx w(rng.normal(), rng.normal()), s(rng.normal(), rng.normal());
    const auto p = geom::heisenberg_line(a, b, w).point(s);
    worst = std::max(worst, std::abs(p[2].imag() - (p[0] * std::conj(p[1])).imag()));
    fails += !geom::heisenberg_membership(p[0], p[1], p[2], 1e-12);
  }
  o.detail << " 10^4 samples: max |Im z - Im(x conj y)| = " << worst << ", rejected " << fails;
  o.require(worst <= 1e-12 && fails == 0, "membership to 1e-12");
}

void sl2_identities(Outcome& o) {
  Rng rng = Rng(2026).split("acceptance-sl2");
  double det_err = 0, chord_err = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto p = sl2::sample_sl2_window(rng);
    det_err = std::max(det_err, std::abs(sl2::strip_direction(p).determinant + 0.5));
    const auto q = sl2::sample_sl2_window(rng);
    const auto both = sl2::chord_transversality_both(p, q);
    chord_err = std::max(chord_err, std::abs(both.determinant - both.normal_dot));
  }
  // anchors (1,0,0,1) and (0,-1,1,0): d = 2 - a, c = b + 2, (a-1)^2 + (b+1)^2 = 1
  const sl2::SL2Point pb(1, 0, 0, 1), pt(0, -1, 1, 0);
  const auto bc = sl2::beta_curve(pt, pb);
  const std::array<double, 6> circle = {1, -2, 2, 1, 0, 1};
  double circle_err = 0, subst_err = 0;
  const double scale = bc.model.c[3];
  for (int i = 0; i < 6; ++i) circle_err = std::max(circle_err, std::abs(bc.model.c[i] - scale * circle[i]));
  circle_err /= std::abs(scale);
  for (const auto& v : bc.sample(200)) {
    subst_err = std::max(subst_err, std::abs(v[3] - (2 - v[0])));
    subst_err = std::max(subst_err, std::abs(v[2] - (v[1] + 2)));
  }
  o.detail << " strip determinant err " << det_err << "; chord err " << chord_err << "; beta circle coeff err "
           << circle_err << ", substitution err " << subst_err;
  o.require(det_err <= 1e-10, "determinant = -1/2");
  o.require(chord_err <= 1e-12, "chord determinant = normal dot chord");
  o.require(bc.free_coords == std::array<int, 2>{0, 1} && circle_err <= 1e-12 && subst_err <= 1e-9,
            "beta curve circle");
}

void partitioning(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = Rng(2026).split("acceptance-partition");
  const int n = 10000, D = 8;
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) pts.push_back(rng.in_disk(1.0));
  const auto r = incidence::polynomial_partition(pts, D, rng);
  std::size_t total = r.boundary.size(), maxc = 0;
  for (const auto& c : r.cells) {
    total += c.size();
    maxc = std::max(maxc, c.size());
  }
  o.detail << " n=" << n << " D=" << D << ": cells " << r.cells.size() << " (components " << r.n_components
           << "), max cell " << maxc << ", boundary " << r.boundary.size() << ", total " << total;
  o.require(static_cast<int>(r.cells.size()) <= 4 * D * D && r.n_components <= 4 * D * D, "cells <= 4 D^2");
  o.require(static_cast<double>(maxc) <= 8.0 * n / (D * D), "max cell <= 8 n / D^2");
  o.require(total == pts.size(), "bookkeeping");

  std::vector<Vec2> small(pts.begin(), pts.begin() + 200);
  std::vector<incidence::Curve2> curves;
  while (curves.size() < 200) {
    std::array<Vec2, 5> five;
    for (auto& q : five) q = small[rng.below(small.size())];
    try {
      curves.push_back(incidence::Curve2::through_points(five));
    } catch (const DegeneracyError&) {
    }
  }
  const auto brute = incidence::fuzzy_incidences(small, curves, 1e-2);
  bool equal = true;
  for (int d : {1, 2, 3, 5}) {
    Rng prng = rng.split(static_cast<std::uint64_t>(d));
    equal = equal && incidence::partition_route_incidences(small, curves, 1e-2, d, prng) == brute;
  }
  const double secs = seconds_since(t0);
  o.detail << "; 200 points x 200 conics: brute " << brute << (equal ? " = " : " != ") << "partition route; " << secs
           << " s";
  o.require(equal, "partition route = brute force");
  o.require(secs < 120, "runtime < 2 min");
}

incidence::BivariatePoly conic(const std::array<double, 6>& c) {
  return incidence::Curve2(c).poly();
}

void covering(Outcome& o) {
  // conic corpus: circle, ellipse, hyperbola, parabola, line pair, and random conics
  std::vector<std::pair<std::string, incidence::BivariatePoly>> corpus = {
      {"circle", conic({-0.25, 0, 0, 1, 0, 1})},
      {"ellipse", conic({-0.5, 0.1, 0, 1, 0.3, 4})},
      {"hyperbola", conic({-0.05, 0, 0, 1, 0, -1})},
      {"parabola", conic({-0.3, 0, -1, 2, 0, 0})},
      {"line-pair", conic({0, 0, 0, 1, 0, -0.25})},
  };
  Rng rng = Rng(2026).split("acceptance-covering");
  for (int k = 0; k < 10; ++k) {
    std::array<double, 6> c;
    for (auto& v : c) v = rng.normal();
    corpus.emplace_back("random-" + std::to_string(k), conic(c));
  }
  double worst_c = 0, worst_comp = 0;
  int empty = 0;
  for (const auto& [name, P] : corpus)
    for (double rho : {0.01, 0.03, 0.1}) {
      const auto rep = incidence::zero_set_covering(P, rho, 2);
      worst_c = std::max(worst_c, rep.c);
      worst_comp = std::max(worst_comp, rep.component_c);
      empty += rep.covering == 0;
    }
  o.detail << " " << corpus.size() << " conics x 3 rho (D=2): max c " << worst_c << ", max components/D^2 "
           << worst_comp << " (" << empty << " empty in B(0,1))";
  o.require(worst_c <= 8, "c <= 8");
  o.require(worst_comp <= 2, "components <= 2 D^2");
}

void discrete_st(Outcome& o) {
  const double delta = 1.0 / 256;
  const int A = 4;
  const auto rep = incidence::discrete_st_experiment(delta, A, 7);
  const double ceiling = 8 * std::sqrt(A) * std::pow(delta, -4.0 / 3);
  o.detail << " delta=2^-8 A=4: |P|=" << rep.points.size() << " |C|=" << rep.curves.size() << " I=" << rep.brute
           << " ceiling " << ceiling << " (ratio " << rep.ratio << "), max pair " << rep.max_pair_curves;
  o.require(static_cast<double>(rep.brute) <= ceiling, "I <= 8 A^{1/2} delta^{-4/3}");
  o.require(rep.max_pair_curves <= A, "generator keeps pair multiplicity <= A");
}

void sl2_profile(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const double delta = 1.0 / 256, sq = std::sqrt(delta);
  const auto f = tubes::gen_sl2_family(delta, 1);
  const auto u = tubes::union_volume(f, tubes::VoxelGrid::for_delta(delta));
  const auto prof = tubes::minkowski_profile(f, {delta, sq});
  const double ratio = prof.back().volume / prof.front().volume;
  const double secs = seconds_since(t0);
  o.detail << " delta=2^-8, " << f.size() << " tubes: union " << u.union_volume << " (" << u.union_volume / sq
           << " delta^{1/2}), vol N_delta " << prof.front().volume << ", vol N_{delta^{1/2}} " << prof.back().volume
           << ", ratio " << ratio << "; " << secs << " s";
  o.require(u.union_volume >= sq / 8 && u.union_volume <= 8 * sq, "union in [delta^{1/2}/8, 8 delta^{1/2}]");
  o.require(prof.back().volume >= 1.0 / 8, "coarse neighborhood >= 1/8");
  o.require(ratio >= std::pow(delta, -0.5) / 64, "ratio >= delta^{-1/2}/64");
  o.require(secs < 600, "runtime < 10 min");
}

void decomposition(Outcome& o) {
  struct Case {
    std::string family;
    double delta;
    std::uint64_t seed;
  };
  const std::vector<Case> cases = {{"dirsep", 1.0 / 16, 1}, {"dirsep", 1.0 / 32, 2}, {"sl2", 1.0 / 16, 3},
                                   {"sl2", 1.0 / 32, 4},    {"sl2", 1.0 / 64, 5},    {"sl2", 1.0 / 64, 6}};
  for (const auto& c : cases) {
    const auto f = c.family == "sl2" ? tubes::gen_sl2_family(c.delta, c.seed)
                                     : tubes::gen_direction_separated(c.delta, c.seed);
    Rng rng = Rng(c.seed).split("candidates");
    const auto cands = tubes::candidate_strips(f, rng, 200);
    const auto d = tubes::decompose_heisenberg_sl2(f, 0.05, cands);
    const auto chk = tubes::verify_decomposition(f, cands, d);
    o.detail << " " << c.family << "@1/" << static_cast<int>(1 / c.delta) << ": |T1|=" << d.t1.size()
             << " |T2|=" << d.t2.size() << " strips " << d.strips.size() << ";";
    const std::string tag = c.family + " seed " + std::to_string(c.seed);
    o.require(chk.partition, "T1 + T2 = T for " + tag);
    o.require(chk.residual_below, "no residual strip over threshold for " + tag);
    o.require(chk.extracted_above, "extracted strips over threshold for " + tag);
    o.require(chk.terminated_in_bound, "iteration bound for " + tag);
  }
}

// Runs each command through the CLI, then replays its manifest.
void reproducibility(Outcome& o) {
  const fs::path root = fs::temp_directory_path() / "kakeya_acceptance_replay";
  fs::remove_all(root);
  unsetenv("KAKEYA_SEED");
  const std::vector<std::vector<std::string>> runs = {
      {"sl2-ring", "--p", "2"},
      {"regulus", "--generate", "200", "--seed", "11"},
      {"tubes", "--family", "sl2", "--delta", "1/32", "--experiments", "volume,profile,decompose,planiness",
       "--seed", "12"},
      {"tubes", "--family", "dirsep", "--delta", "1/16", "--experiments", "wolff,hairbrush,two-ends", "--seed",
       "13"},
      {"incidence", "--generate", "--delta", "1/64", "--oracle", "--seed", "14"},
  };
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const fs::path out = root / std::to_string(i);
    auto args = runs[i];
    args.insert(args.end(), {"--out", out.string()});
    std::ostringstream sink, err;
    lab::run(args, sink, err);
    std::vector<fs::path> dirs;
    if (fs::exists(out))
      for (const auto& e : fs::directory_iterator(out)) dirs.push_back(e.path());
    if (dirs.size() != 1) {
      o.require(false, runs[i][0] + " produced a run directory");
      continue;
    }
    std::ostringstream rout, rerr;
    const int code = lab::run({"replay", (dirs[0] / "manifest.json").string()}, rout, rerr);
    o.detail << " " << runs[i][0] << ": replay exit " << code << ";";
    o.require(code == 0, runs[i][0] + " replay byte-identical");
  }
  fs::remove_all(root);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"finite-ring exactness", ring_exactness},
      {"ring axiom suite", ring_axioms},
      {"curvature identity", curvature_identity},
      {"regulus fit", regulus_fit},
      {"Heisenberg containment", heisenberg},
      {"SL2 parameter-space identities", sl2_identities},
      {"partitioning contract", partitioning},
      {"covering bounds", covering},
      {"discrete ST experiment", discrete_st},
      {"SL2 tube family profile", sl2_profile},
      {"decomposition invariants", decomposition},
      {"reproducibility", reproducibility},
  };

  CLI::App app{"acceptance criteria"};
  int which = 0;
  app.add_option("--criterion", which, "criterion number (default: all)")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (which != 0 && static_cast<int>(i) + 1 != which) continue;
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ":" << o.detail.str()
              << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
