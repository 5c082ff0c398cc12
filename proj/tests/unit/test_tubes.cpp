#include <doctest.h>

#include <fstream>
#include <set>

#include "kakeya/tubes.hpp"

using namespace kakeya;
using namespace kakeya::tubes;

namespace {

double capsule_volume(double R, double L) { return kPi * R * R * L + 4.0 / 3.0 * kPi * R * R * R; }

// Brute-force voxel set over the whole lattice.
std::set<std::uint64_t> brute_voxels(const Tube& t, const VoxelGrid& g) {
  std::set<std::uint64_t> out;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      for (int k = 0; k < g.n; ++k) {
        const Vec3 p(g.coord(i), g.coord(j), g.coord(k));
        if (t.distance_to(p) <= t.delta) out.insert(g.index(i, j, k));
      }
  return out;
}

TubeFamily slab_family(double delta) {
  std::vector<Tube> tubes;
  const int n = static_cast<int>(std::lround(1 / delta));
  for (int i = 0; i < n; ++i) {
    const double x = -0.25 + (i + 0.5) * delta / 2;
    tubes.push_back(make_tube(i, Vec3(x, 0, 0), Vec3::UnitZ(), delta));
  }
  return TubeFamily::from_tubes(tubes, delta, "file", 0);
}

TubeFamily bush(int n, const Vec3& q, double delta, Rng& rng, int first_id = 0) {
  std::vector<Tube> tubes;
  for (int i = 0; i < n; ++i) tubes.push_back(make_tube(first_id + i, q, rng.unit_vector3(), delta));
  return TubeFamily::from_tubes(tubes, delta, "file", 0);
}

}  // namespace

TEST_CASE("rasterize: capsule volume and brute-force lattice agreement") {
  const double delta = 1.0 / 8;
  const VoxelGrid g(1.0 / 32);
  const Tube t = make_tube(0, Vec3::Zero(), Vec3::UnitZ(), delta);
  CHECK(t.axis.length == doctest::Approx(1.0));
  const auto vox = rasterize(t, g);
  const double vol = vox.size() * g.voxel_volume();
  CHECK(vol == doctest::Approx(capsule_volume(delta, 1.0)).epsilon(0.3));
  const auto brute = brute_voxels(t, g);
  CHECK(std::set<std::uint64_t>(vox.begin(), vox.end()) == brute);
  CHECK(std::is_sorted(vox.begin(), vox.end()));

  Rng rng(1);
  const Tube s = make_tube(1, rng.in_ball3(0.3), rng.unit_vector3(), delta);
  const auto vs = rasterize(s, g);
  CHECK(std::set<std::uint64_t>(vs.begin(), vs.end()) == brute_voxels(s, g));
  CHECK(rasterize(s, g) == vs);

  CHECK_THROWS_AS(rasterize(make_tube(2, Vec3::Zero(), Vec3::UnitX(), 1.0 / 128), g), PreconditionError);
}

TEST_CASE("tubes are clipped to the unit ball") {
  const Tube t = make_tube(0, Vec3(0.9, 0, 0), Vec3::UnitX(), 1.0 / 16);
  CHECK(t.axis.end().norm() <= 1 - 1.0 / 16 + 1e-12);
  CHECK(t.axis.length < 1.0);
  CHECK_THROWS_AS(make_tube(0, Vec3(3, 0, 0), Vec3::UnitY(), 0.1), PreconditionError);
}

TEST_CASE("union volume bookkeeping") {
  const double delta = 1.0 / 16;
  const VoxelGrid g = VoxelGrid::for_delta(delta);
  const Tube a = make_tube(0, Vec3(-0.3, 0, 0), Vec3::UnitZ(), delta);
  const Tube b = make_tube(1, Vec3(0.3, 0, 0), Vec3::UnitZ(), delta);
  const auto one = union_volume(TubeFamily::from_tubes({a}, delta, "file", 0), g);
  CHECK(one.union_voxels == static_cast<std::int64_t>(rasterize(a, g).size()));
  const auto two = union_volume(TubeFamily::from_tubes({a, b}, delta, "file", 0), g);
  CHECK(two.union_voxels == static_cast<std::int64_t>(rasterize(a, g).size() + rasterize(b, g).size()));
  CHECK(two.max_multiplicity == 1);

  const TubeFamily f = gen_direction_separated(delta, 5);
  const auto st = union_volume(f, g);
  std::int64_t per_tube = 0;
  for (std::size_t t = 0; t < f.size(); ++t) per_tube += static_cast<std::int64_t>(shading_voxels(f, t, g).size());
  CHECK(st.sum_voxels == per_tube);  // double counting
  CHECK(st.union_volume <= st.sum_volume);
  CHECK(st.sum_volume <= st.max_multiplicity * st.union_volume);
  std::int64_t hist_total = 0;
  for (auto h : st.histogram) hist_total += h;
  CHECK(hist_total == st.union_voxels);
}

TEST_CASE("union volume against the Wolff prediction") {
  const double delta = 1.0 / 64;
  TubeFamily f = gen_direction_separated(delta, 11, 100);
  REQUIRE(f.size() == 100);
  const auto st = union_volume(f, VoxelGrid::for_delta(delta));
  const double pred = wolff_prediction(delta, 1.0, f.size());
  const double C = st.union_volume / pred;
  MESSAGE("union " << st.union_volume << " prediction " << pred << " fitted C " << C);
  CHECK(C >= 1.0);
}

TEST_CASE("Wolff axioms") {
  const double delta = 1.0 / 16;
  SUBCASE("single tube") {
    const auto f = TubeFamily::from_tubes({make_tube(0, Vec3::Zero(), Vec3(1, 2, 3), delta)}, delta, "file", 0);
    WolffOptions opt;
    opt.samples = 200;
    const auto rep = check_wolff_axioms(f, opt);
    CHECK(rep.max_ratio == doctest::Approx(1.0));
    CHECK(rep.pass);
  }
  SUBCASE("direction-separated family") {
    const auto f = gen_direction_separated(delta, 3);
    const auto rep = check_wolff_axioms(f, {});
    MESSAGE(rep.to_json().dump());
    CHECK(rep.samples == 10000);
    CHECK(rep.max_ratio <= 1.5);
    CHECK(rep.pass);
  }
  SUBCASE("parallel tubes packed in a slab") {
    const double d = 1.0 / 32;
    const auto f = slab_family(d);
    CHECK(prism_count(f, Vec3::Zero(), Vec3::UnitZ(), Vec3::UnitY(), d, 0.5) == 32);
    const double ratio = 32 / (d * 0.5 / (d * d));
    CHECK(ratio == doctest::Approx(2.0));
    const auto rep = check_wolff_axioms(f, {});
    MESSAGE(rep.to_json().dump());
    CHECK_FALSE(rep.pass);
    CHECK(rep.violations > 0);
    CHECK(rep.max_ratio >= 2.0);
  }
}

TEST_CASE("hairbrush") {
  const double delta = 1.0 / 32;
  const VoxelGrid g = VoxelGrid::for_delta(delta);
  Rng rng(4);
  SUBCASE("common voxel") {
    const auto f = bush(20, Vec3(0.1, 0.05, -0.02), delta, rng);
    CHECK(hairbrush(f, {3}, g).size() == 20);
  }
  SUBCASE("disjoint family") {
    const auto f = TubeFamily::from_tubes({make_tube(0, Vec3(-0.4, 0, 0), Vec3::UnitZ(), delta),
                                           make_tube(1, Vec3(0, 0, 0), Vec3::UnitZ(), delta),
                                           make_tube(2, Vec3(0.4, 0, 0), Vec3::UnitZ(), delta)},
                                          delta, "file", 0);
    CHECK(hairbrush(f, {1}, g) == std::vector<int>{1});
    CHECK(hairbrush(f, {1}, g, false).empty());
    CHECK_THROWS_AS(hairbrush(f, {7}, g), InvalidArgument);
  }
  SUBCASE("bush plus far tubes") {
    auto f = bush(50, Vec3(-0.3, 0, 0), delta, rng);
    for (int i = 0; i < 50; ++i) {
      const Tube t = make_tube(100 + i, Vec3(0.35, -0.4 + 0.8 * i / 49, 0), Vec3::UnitZ(), delta);
      f.tubes.push_back(t);
      f.shadings.push_back(Shading{t.id, true, {}});
    }
    f.validate();
    const auto h = hairbrush(f, {0}, g);
    REQUIRE(h.size() == 50);
    for (int id : h) CHECK(id < 50);
  }
  SUBCASE("joint hairbrush of two anchors") {
    auto f = bush(10, Vec3(0, 0, 0), delta, rng);
    const auto h1 = hairbrush(f, {0}, g), h2 = hairbrush(f, {0, 1}, g);
    CHECK(h2.size() <= h1.size());
  }
}

TEST_CASE("two-ends reduction") {
  const double delta = 1.0 / 32;
  const VoxelGrid g = VoxelGrid::for_delta(delta);
  const Tube t = make_tube(0, Vec3::Zero(), Vec3::UnitZ(), delta);
  const auto all = rasterize(t, g);

  SUBCASE("shading inside one small ball") {
    const Vec3 q(0, 0, 0.2);
    std::vector<std::uint64_t> sub;
    for (auto v : all)
      if ((g.center(v) - q).norm() <= delta) sub.push_back(v);
    TubeFamily f = TubeFamily::from_tubes({t}, delta, "file", 0);
    f.shadings[0] = make_partial_shading(t, sub);
    const auto r = two_ends_reduce(f, 0, 0.5);
    CHECK((r.center - q).norm() <= 2 * delta);
    CHECK(r.radius <= 2 * delta + 1e-12);
    CHECK(r.capture_ok);
    CHECK(r.nonconcentration_ok);
  }
  SUBCASE("full shading") {
    const auto f = TubeFamily::from_tubes({t}, delta, "file", 0);
    const auto r = two_ends_reduce(f, 0, 0.1);
    CHECK(r.radius >= 0.5 - 1e-12);
    CHECK(r.capture_ok);
    CHECK(r.nonconcentration_ok);
    // captured mass by direct count
    std::int64_t n = 0;
    for (auto v : all) n += (g.center(v) - r.center).norm() <= r.radius;
    CHECK(r.captured == doctest::Approx(n * g.voxel_volume()));
  }
  SUBCASE("two clumps at distance one") {
    std::vector<std::uint64_t> sub;
    for (auto v : all)
      if ((g.center(v) - t.axis.base).norm() <= delta || (g.center(v) - t.axis.end()).norm() <= delta) sub.push_back(v);
    TubeFamily f = TubeFamily::from_tubes({t}, delta, "file", 0);
    f.shadings[0] = make_partial_shading(t, sub);
    const auto r = two_ends_reduce(f, 0, 0.1);
    CHECK(r.radius >= 0.5 - 1e-12);
    CHECK(r.capture_ok);
    CHECK(r.nonconcentration_ok);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(two_ends_reduce(std::vector<Vec3>{}, 1e-6, delta, 0.1), PreconditionError);
    CHECK_THROWS_AS(two_ends_reduce(std::vector<Vec3>{Vec3::Zero()}, 1e-12, delta, 0.1), PreconditionError);
  }
}

TEST_CASE("planiness statistic") {
  const double delta = 1.0 / 16;
  const VoxelGrid g = VoxelGrid::for_delta(delta);
  SUBCASE("parallel tubes") {
    std::vector<Tube> tubes;
    for (int i = 0; i < 5; ++i) tubes.push_back(make_tube(i, Vec3(0.01 * i, 0, 0), Vec3::UnitZ(), delta));
    CHECK(planiness_statistic(TubeFamily::from_tubes(tubes, delta, "file", 0), g).value == 0.0);
  }
  SUBCASE("three orthogonal tubes") {
    const auto f = TubeFamily::from_tubes({make_tube(0, Vec3::Zero(), Vec3::UnitX(), delta),
                                           make_tube(1, Vec3::Zero(), Vec3::UnitY(), delta),
                                           make_tube(2, Vec3::Zero(), Vec3::UnitZ(), delta)},
                                          delta, "file", 0);
    const auto a = rasterize(f.tubes[0], g), b = rasterize(f.tubes[1], g), c = rasterize(f.tubes[2], g);
    std::vector<std::uint64_t> ab, abc;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(ab));
    std::set_intersection(ab.begin(), ab.end(), c.begin(), c.end(), std::back_inserter(abc));
    REQUIRE(!abc.empty());
    const double direct = abc.size() * std::sqrt(6.0) * g.voxel_volume();
    const auto rep = planiness_statistic(f, g);
    CHECK(rep.value > 0);
    CHECK(rep.value == doctest::Approx(direct).epsilon(1e-12));
  }
  SUBCASE("sampled and exact triple sums agree") {
    Rng rng(6);
    const auto f = bush(40, Vec3::Zero(), delta, rng);
    PlaninessOptions exact, sampled;
    exact.exact_limit = 64;
    sampled.exact_limit = 32;
    const auto e = planiness_statistic(f, g, exact), s = planiness_statistic(f, g, sampled);
    CHECK(e.sampled_voxels == 0);
    CHECK(s.sampled_voxels > 0);
    CHECK(s.value == doctest::Approx(e.value).epsilon(0.05));
  }
  SUBCASE("direction-separated family") {
    const auto f = gen_direction_separated(delta, 8);
    const auto rep = planiness_statistic(f, g);
    MESSAGE(rep.to_json().dump());
    CHECK(rep.normalized <= 8.0 * std::pow(delta, -0.1));
  }
}

TEST_CASE("direction-separated generator") {
  const double delta = 1.0 / 16;
  const auto f = gen_direction_separated(delta, 2);
  CHECK(f.size() >= 128);
  CHECK(f.size() <= 512);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(f.tubes[i].axis.base.norm() <= 1 - delta + 1e-9);
    CHECK(f.tubes[i].axis.end().norm() <= 1 - delta + 1e-9);
    for (std::size_t j = i + 1; j < f.size(); ++j)
      CHECK(geom::line_angle(f.tubes[i].axis.dir, f.tubes[j].axis.dir) >= delta * (1 - 1e-9));
  }
  CHECK(gen_direction_separated(delta, 2).tubes[7].axis.base == f.tubes[7].axis.base);
  CHECK_THROWS_AS(gen_direction_separated(0.1, 2), PreconditionError);
}

TEST_CASE("SL2 family generator") {
  const double delta = 1.0 / 64;
  const auto f = gen_sl2_family(delta, 1);
  std::set<int> groups;
  for (const auto& t : f.tubes) groups.insert(t.group);
  MESSAGE("fat tubes " << groups.size() << " thin tubes " << f.size());
  CHECK(groups.size() >= 512 / 4);
  CHECK(groups.size() <= 512 * 4);
  CHECK(f.size() == groups.size() * 8);
  for (const auto& t : f.tubes) CHECK(t.axis.end().norm() <= 1 + 1e-12);

  const auto st = union_volume(f, VoxelGrid::for_delta(delta));
  const double r = st.union_volume / std::sqrt(delta);
  MESSAGE("thin union " << st.union_volume << " = " << r << " delta^{1/2}");
  CHECK(r >= 1.0 / 8);
  CHECK(r <= 8.0);

  CHECK_THROWS_AS(gen_sl2_family(std::ldexp(1.0, -11), 1), ResourceError);
  CHECK_THROWS_AS(gen_sl2_family(0.3, 1), PreconditionError);
}

TEST_CASE("Minkowski profile") {
  const double delta = 1.0 / 32;
  SUBCASE("single tube") {
    const auto f = TubeFamily::from_tubes({make_tube(0, Vec3::Zero(), Vec3(1, 1, 0), delta)}, delta, "file", 0);
    const auto prof = minkowski_profile(f, {delta, 2 * delta, 4 * delta, 8 * delta});
    double prev = 0;
    for (const auto& e : prof) {
      CHECK(e.volume == doctest::Approx(capsule_volume(delta + e.r, 1.0)).epsilon(0.3));
      CHECK(e.volume >= prev);
      prev = e.volume;
    }
    CHECK_THROWS_AS(minkowski_profile(f, {delta / 2}), PreconditionError);
  }
  SUBCASE("partial shading dilation") {
    const Tube t = make_tube(0, Vec3::Zero(), Vec3::UnitZ(), delta);
    TubeFamily f = TubeFamily::from_tubes({t}, delta, "file", 0);
    const VoxelGrid g = VoxelGrid::for_delta(delta);
    std::vector<std::uint64_t> sub;
    for (auto v : rasterize(t, g))
      if (g.center(v).z() > 0) sub.push_back(v);
    f.shadings[0] = make_partial_shading(t, sub);
    const auto prof = minkowski_profile(f, {2 * delta});
    CHECK(prof[0].volume == doctest::Approx(capsule_volume(3 * delta, 0.5)).epsilon(0.3));
  }
  SUBCASE("SL2 family contrast") {
    const double d = 1.0 / 64;
    const auto f = gen_sl2_family(d, 1);
    const auto prof = minkowski_profile(f, {d, std::sqrt(d)});
    const double ratio = prof[1].volume / prof[0].volume;
    MESSAGE("vol(delta^{1/2}) " << prof[1].volume << " vol(delta) " << prof[0].volume << " ratio " << ratio);
    CHECK(ratio >= std::pow(d, -0.5) / 64);
    CHECK(prof[1].volume >= 1.0 / 8);
  }
}

TEST_CASE("Heisenberg / SL2 decomposition") {
  SUBCASE("no strip over threshold") {
    const double delta = 1.0 / 16;
    const auto f = gen_direction_separated(delta, 9);
    Rng rng(1);
    const auto c = candidate_strips(f, rng, 100);
    const auto d = decompose_heisenberg_sl2(f, 0.1, c);
    CHECK(d.t2.empty());
    CHECK(d.t1.size() == f.size());
    CHECK(verify_decomposition(f, c, d).ok());
    const auto e = decompose_heisenberg_sl2(f, 0.1, {});
    CHECK(e.t2.empty());
  }
  SUBCASE("SL2 family with matching candidates") {
    const double delta = 1.0 / 64;
    const auto f = gen_sl2_family(delta, 2);
    Rng rng(2);
    const auto c = candidate_strips(f, rng, 100);
    const auto d = decompose_heisenberg_sl2(f, 0.05, c);
    MESSAGE(d.to_json().dump().substr(0, 160));
    CHECK(d.t2.size() * 2 >= f.size());
    const auto chk = verify_decomposition(f, c, d);
    CHECK(chk.partition);
    CHECK(chk.residual_below);
    CHECK(chk.extracted_above);
    CHECK(chk.terminated_in_bound);
    CHECK(d.iterations <= d.iteration_bound);
  }
  SUBCASE("members of a generated strip lie on one quadric") {
    const double delta = 1.0 / 64;
    const auto f = gen_sl2_family(delta, 3, {20, 0});
    Rng rng(3);
    const auto c = candidate_strips(f, rng, 0);
    REQUIRE(c.size() == 20);
    for (std::size_t k = 0; k < c.size(); ++k) {
      int inside = 0;
      for (const auto& t : f.tubes)
        if (t.group == static_cast<int>(k)) inside += strip_contains(c[k], t);
      CHECK(inside == 8);
    }
  }
}

TEST_CASE("covered entropy") {
  const auto tri = geom::canonical_triple();
  const geom::Regulus R = geom::fit_regulus(tri[0], tri[1], tri[2]);
  SUBCASE("hyperboloid with tangent planes") {
    const double rho = 1.0 / 64;
    // a generator of R through B(0,1), as a unit segment
    const Line3 g(tri[1].base, tri[1].dir);
    const auto chord = g.ball_chord(Vec3::Zero(), 1.0);
    REQUIRE(chord);
    const double mid = 0.5 * (chord->first + chord->second);
    const Line3 ell(g.point(mid - 0.5), g.dir, 1.0);
    const auto normals = tangent_plane_normals(R, ell, rho);
    const auto rep = covered_entropy(R, ell, normals, rho);
    MESSAGE(rep.to_json().dump());
    CHECK(rep.covering > 0);
    CHECK(rep.ratio <= 8.0);
    CHECK(rep.covering <= rep.surface_covering);
  }
  SUBCASE("surface away from the ball") {
    // rulings of x^2 + y^2 - z^2 = 4, which stays outside B(0,1)
    auto gen = [](double th) {
      return Line3(Vec3(2 * std::cos(th), 2 * std::sin(th), 0), Vec3(-2 * std::sin(th), 2 * std::cos(th), 2));
    };
    const geom::Regulus far = geom::fit_regulus(gen(0.0), gen(2.0), gen(4.0));
    const Line3 ell(Vec3(0, 0, -0.5), Vec3::UnitZ(), 1.0);
    const double rho = 1.0 / 16;
    const std::vector<Vec3> normals(16, Vec3::UnitX());
    const auto rep = covered_entropy(far, ell, normals, rho);
    CHECK(rep.covering == 0);
    CHECK(rep.surface_covering == 0);
  }
  SUBCASE("curvature precondition") {
    const Line3 ell(Vec3(0, 0, -0.5), Vec3::UnitZ(), 1.0);
    CoveredEntropyOptions opt;
    opt.min_curvature = 1e6;
    CHECK_THROWS_AS(covered_entropy(R, ell, std::vector<Vec3>(16, Vec3::UnitX()), 1.0 / 16, opt), PreconditionError);
    CHECK_THROWS_AS(covered_entropy(R, ell, std::vector<Vec3>(3, Vec3::UnitX()), 1.0 / 16), PreconditionError);
  }
}

TEST_CASE("fat hairbrush and robust transversality") {
  const double delta = 1.0 / 32;
  const auto f = gen_direction_separated(delta, 12);
  Rng rng(5);
  const Line3 L(rng.in_ball3(0.2), rng.unit_vector3());
  const auto fh = fat_hairbrush_check(f, L);
  MESSAGE(fh.to_json().dump());
  CHECK(fh.pass);
  CHECK(fh.counts[0] <= fh.counts[1]);
  CHECK(fh.counts[1] <= fh.counts[2]);

  const double d16 = 1.0 / 16;
  const auto f16 = gen_direction_separated(d16, 12);
  const auto tr = robust_transversality(f16, VoxelGrid::for_delta(d16));
  MESSAGE(tr.to_json().dump());
  CHECK(tr.kept_voxels > 0);
  CHECK(tr.c <= 4.0);
  CHECK(tr.c <= std::pow(d16, -0.1) + 1e-12);
  CHECK(tr.kept_mass_fraction > 0);
}

TEST_CASE("family JSON lines round trip") {
  const double delta = 1.0 / 16;
  TubeFamily f = gen_direction_separated(delta, 4, 20);
  const VoxelGrid g = VoxelGrid::for_delta(delta);
  auto vox = rasterize(f.tubes[3], g);
  vox.resize(vox.size() / 2);
  f.shadings[3] = make_partial_shading(f.tubes[3], vox);
  f.write_jsonl("family_rt.jsonl");
  const auto h = TubeFamily::read_jsonl("family_rt.jsonl");
  REQUIRE(h.size() == 20);
  CHECK(h.tubes[5].axis.base == f.tubes[5].axis.base);
  CHECK(h.tubes[5].axis.dir == f.tubes[5].axis.dir);
  CHECK_FALSE(h.shadings[3].full);
  CHECK(h.shadings[3].voxels == f.shadings[3].voxels);
  CHECK(union_volume(h, g).union_voxels == union_volume(f, g).union_voxels);

  std::ofstream bad("family_bad.jsonl");
  bad << R"({"id":0,"base":[0,0,0],"dir":[0,0,1],"delta":0.0625,"shading":"full"})" << "\n";
  bad << R"({"id":1,"base":[0,0,0],"delta":0.0625,"shading":"full"})" << "\n";
  bad.close();
  try {
    TubeFamily::read_jsonl("family_bad.jsonl");
    FAIL("expected a parse error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  std::remove("family_rt.jsonl");
  std::remove("family_bad.jsonl");
}
