#include <doctest.h>

#include <set>

#include "kakeya/ring.hpp"

using namespace kakeya;
using namespace kakeya::ring;

TEST_CASE("nilpotent t squares to zero") {
  RingElem t(0, 1, 5);
  CHECK((t * t).is_zero());
}

TEST_CASE("(1+t)(1-t) = 1") {
  RingElem a(1, 1, 7), b(1, -1, 7);
  CHECK(a * b == RingElem(1, 0, 7));
}

TEST_CASE("inverse of 2+t mod 5 matches brute force") {
  const int p = 5;
  RingElem x(2, 1, p);
  RingElem found;
  int hits = 0;
  for (int i = 0; i < p * p; ++i) {
    RingElem y = RingElem::from_index(i, p);
    if (x * y == RingElem(1, 0, p)) found = y, ++hits;
  }
  REQUIRE(hits == 1);
  CHECK(found == RingElem(3, 1, p));
  CHECK(x.inverse() == found);
}

TEST_CASE("mismatched modulus is rejected") {
  CHECK_THROWS_AS(RingElem(1, 0, 3) * RingElem(1, 0, 5), InvalidArgument);
  CHECK_THROWS_AS(RingElem(1, 0, 3) + RingElem(1, 0, 5), InvalidArgument);
}

TEST_CASE("ring laws hold exhaustively") {
  for (int p : {2, 3}) {
    const int q = p * p;
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j)
        for (int k = 0; k < q; ++k) {
          auto a = RingElem::from_index(i, p), b = RingElem::from_index(j, p),
               c = RingElem::from_index(k, p);
          CHECK((a * b) * c == a * (b * c));
          CHECK(a * (b + c) == a * b + a * c);
          CHECK(a * b == b * a);
        }
    for (int i = 0; i < q; ++i) {
      auto a = RingElem::from_index(i, p);
      bool has_inverse = false;
      for (int j = 0; j < q; ++j)
        if (a * RingElem::from_index(j, p) == RingElem(1, 0, p)) has_inverse = true;
      CHECK(has_inverse == a.is_unit());
      if (a.is_nilpotent()) CHECK((a * a).is_zero());
    }
  }
}

TEST_CASE("sl2 set cardinality and defining congruence") {
  for (int p : {2, 3, 5}) {
    const auto X = build_sl2_set(p);
    int expect = p * p * p * p * p;
    CHECK(static_cast<int>(X.size()) == expect);
    for (const auto& q : X) CHECK(q.in_sl2_set());
    CHECK(static_cast<int>(coarse_projection(X).size()) == p * p * p);
  }
}

TEST_CASE("sl2 set preconditions") {
  CHECK_THROWS_AS(build_sl2_set(4), InvalidArgument);
  CHECK_THROWS_AS(build_sl2_set(11), ResourceError);
  RingLimits lim;
  lim.max_set_p = 11;
  CHECK_NOTHROW(build_sl2_lines(11, lim));
}

TEST_CASE("line family counts and containment") {
  CHECK(build_sl2_lines(3).size() == 72);
  CHECK(build_sl2_lines(2).size() == 12);
  for (int p : {2, 3, 5}) {
    const auto lines = build_sl2_lines(p);
    CHECK(static_cast<int>(lines.size()) == p * p * p * p - p * p);
    for (const auto& l : lines) {
      auto pts = l.points();
      std::set<std::int64_t> distinct;
      for (const auto& q : pts) {
        CHECK(q.in_sl2_set());
        distinct.insert(q.index());
      }
      CHECK(static_cast<int>(distinct.size()) == p * p);
    }
  }
}

TEST_CASE("coarse projection edge cases") {
  CHECK(coarse_projection({}).empty());
  RPoint3 q{RingElem(0, 1, 3), RingElem(0, 1, 3), RingElem(0, 0, 3)};
  auto pr = coarse_projection({q});
  REQUIRE(pr.size() == 1);
  CHECK(*pr.begin() == std::array<int, 3>{0, 0, 0});
}

TEST_CASE("planes have p^4 solutions and canonical forms are distinct point sets") {
  for (int p : {2, 3}) {
    const auto planes = all_planes(p);
    CHECK(static_cast<int>(planes.size()) == p * p * p * p * p * p + p * p * p * p * p + p * p * p * p);
    std::set<std::vector<std::int64_t>> sets;
    for (const auto& pl : planes) {
      auto sol = pl.solutions();
      CHECK(static_cast<int>(sol.size()) == p * p * p * p);
      std::vector<std::int64_t> idx;
      for (const auto& q : sol) idx.push_back(q.index());
      sets.insert(idx);
    }
    CHECK(sets.size() == planes.size());
  }
}

TEST_CASE("brute-force plane enumeration agrees with canonical planes at p=2") {
  const int p = 2, q = 4;
  std::set<std::vector<std::int64_t>> brute;
  for (int u = 0; u < q; ++u)
    for (int v = 0; v < q; ++v)
      for (int w = 0; w < q; ++w)
        for (int s = 0; s < q; ++s) {
          std::vector<std::int64_t> idx;
          for (std::int64_t i = 0; i < 64; ++i) {
            auto pt = RPoint3::from_index(i, p);
            if (RingElem::from_index(u, p) * pt.x + RingElem::from_index(v, p) * pt.y +
                    RingElem::from_index(w, p) * pt.z ==
                RingElem::from_index(s, p))
              idx.push_back(i);
          }
          if (idx.size() == 16) brute.insert(idx);
        }
  CHECK(brute.size() == all_planes(p).size());
}

TEST_CASE("non-unit plane coefficients are rejected") {
  RingElem z(0, 1, 3);
  CHECK_THROWS_AS(RPlane(z, z, z, RingElem(0, 0, 3)), InvalidArgument);
}

TEST_CASE("ring axioms at p=2") {
  const auto lines = build_sl2_lines(2);
  const auto rep = verify_ring_axioms(lines, 2);
  CHECK(rep.all_pass());
  const auto* lpp = rep.find("lines_per_plane");
  REQUIRE(lpp);
  CHECK(lpp->detail["max_lines_in_plane"].get<int>() <= 4);
  CHECK(rep.find("pair_intersection")->pass);
  CHECK(rep.card_X == 32);
  CHECK(rep.card_union == 24);
  auto j = rep.to_json();
  CHECK(j["cardinalities"]["L"] == 12);
  CHECK(j["axioms"].size() == 6);
}

TEST_CASE("ring axioms at p=3 report exact cardinalities and a triple witness") {
  const auto lines = build_sl2_lines(3);
  const auto rep = verify_ring_axioms(lines, 3);
  CHECK(rep.card_X == 243);
  CHECK(rep.card_union == 216);
  CHECK(rep.card_projection == 27);
  CHECK(rep.find("line_count")->pass);
  CHECK(rep.find("lines_per_plane")->pass);
  CHECK(rep.find("pair_intersection")->pass);
  CHECK(rep.find("intersecting_pairs_coplanar")->pass);
  CHECK(rep.find("plane_pair_lines")->pass);
  const auto* tri = rep.find("triples_one_plane");
  REQUIRE(tri);
  // 432 pairwise-meeting non-concurrent triples, none in a common plane.
  CHECK(tri->detail["triples"].get<int>() == 432);
  CHECK_FALSE(tri->pass);
  CHECK(tri->witness.has_value());
}

TEST_CASE("axiom limits name the skipped check") {
  const auto lines = build_sl2_lines(5);
  try {
    verify_ring_axioms(lines, 5, {"lines_per_plane"});
    FAIL("expected resource error");
  } catch (const ResourceError& e) {
    CHECK(std::string(e.what()).find("lines_per_plane") != std::string::npos);
  }
  auto rep = verify_ring_axioms(lines, 5, {"pair_intersection", "line_count"});
  CHECK(rep.all_pass());
  CHECK_THROWS_AS(verify_ring_axioms(lines, 5, {"bogus"}), InvalidArgument);
}
