#include <cmath>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace crystal_flow;
using testing::square;

TEST_CASE("square preset facets") {
  const auto a = square();
  REQUIRE(a->facet_count() == 4);
  for (const Facet& f : a->facets()) {
    CHECK(f.length == doctest::Approx(2.0));
    CHECK(f.support == doctest::Approx(1.0));
    CHECK(std::abs(f.normal.x()) + std::abs(f.normal.y()) == doctest::Approx(1.0));
    CHECK(perp(f.tangent).isApprox(f.normal));
  }
}

TEST_CASE("vertex order is normalized to clockwise") {
  const std::vector<Vec2> ccw{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  const Anisotropy a = build_wulff(ccw);
  for (const Facet& f : a.facets()) {
    // outward: the facet midpoint lies on the positive side of its normal
    CHECK(f.normal.dot(0.5 * (f.start + f.end)) > 0.0);
    CHECK(f.normal.dot(f.start) == doctest::Approx(f.support));
  }
}

TEST_CASE("non-symmetric triangle has distinct supports") {
  const std::vector<Vec2> v{{-1, -1}, {2, -1}, {0, 1}};
  const Anisotropy a = build_wulff(v);
  REQUIRE(a.facet_count() == 3);
  CHECK(a.facet(0).support != doctest::Approx(a.facet(1).support));
  CHECK(a.facet(1).support != doctest::Approx(a.facet(2).support));
  CHECK(a.facet(0).support != doctest::Approx(a.facet(2).support));
}

TEST_CASE("invalid Wulff shapes") {
  const std::vector<Vec2> collinear{{-1, -1}, {0, -1}, {1, -1}, {0, 1}};
  bool degenerate = false;
  try {
    build_wulff(collinear);
  } catch (const Error& e) {
    degenerate = e.kind() == ErrorKind::DegenerateFacet || e.kind() == ErrorKind::NonConvexWulff;
  }
  CHECK(degenerate);

  const std::vector<Vec2> dart{{-1, -1}, {0, 0.2}, {1, -1}, {0, 1}};
  CHECK_ERROR_KIND(build_wulff(dart), ErrorKind::NonConvexWulff);

  const std::vector<Vec2> shifted{{1, 1}, {3, 1}, {3, 3}, {1, 3}};
  CHECK_ERROR_KIND(build_wulff(shifted), ErrorKind::OriginOutside);

  const std::vector<Vec2> on_boundary{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  CHECK_ERROR_KIND(build_wulff(on_boundary), ErrorKind::OriginOutside);

  const std::vector<Vec2> two{{-1, 0}, {1, 0}};
  CHECK_THROWS_AS(build_wulff(two), Error);
}

TEST_CASE("near-coincident vertices collapse") {
  const std::vector<Vec2> v{{-1, 1}, {1, 1}, {1, 1 + 1e-14}, {1, -1}, {-1, -1}};
  CHECK(build_wulff(v).facet_count() == 4);
}

TEST_CASE("gauge and support on the square") {
  const auto& a = *square();
  CHECK(phi(a, Vec2(1, 0)) == doctest::Approx(1.0));
  CHECK(phi(a, Vec2::Zero()) == 0.0);
  CHECK(phi(a, Vec2(2, 2)) == doctest::Approx(oracle::sup_norm(2, 2)));
  CHECK(phi_dual(a, Vec2(1, 0)) == doctest::Approx(1.0));
  CHECK(phi_dual(a, Vec2::Zero()) == 0.0);
  CHECK(phi_dual(a, Vec2(1, 1)) == doctest::Approx(2.0));

  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int k = 0; k < 500; ++k) {
    const Vec2 x(g(rng), g(rng));
    CHECK(phi(a, x) == doctest::Approx(oracle::sup_norm(x.x(), x.y())).epsilon(1e-12));
    CHECK(phi_dual(a, x) == doctest::Approx(oracle::l1_norm(x.x(), x.y())).epsilon(1e-12));
  }
}

TEST_CASE("facet adjacency") {
  const auto& a = *square();
  CHECK(facets_adjacent(a, 0, 1));
  CHECK_FALSE(facets_adjacent(a, 0, 2));
  CHECK(facets_adjacent(a, 0, 3));
  CHECK_FALSE(facets_adjacent(a, 1, 1));
  CHECK_ERROR_KIND(facets_adjacent(a, 0, 4), ErrorKind::IndexOutOfRange);
  CHECK_ERROR_KIND(facets_adjacent(a, -1, 0), ErrorKind::IndexOutOfRange);
}

TEST_CASE("facet lookup by normal") {
  const auto& a = *square();
  for (int j = 0; j < 4; ++j) CHECK(a.facet_with_normal(a.facet(j).normal) == j);
  CHECK_FALSE(a.facet_with_normal(Vec2(1, 1).normalized()).has_value());
}

namespace {

std::vector<Anisotropy> shapes() {
  std::vector<Anisotropy> out{Anisotropy::square()};
  for (int n = 3; n <= 12; ++n) out.push_back(Anisotropy::regular(n, 0.7 + 0.1 * n));
  out.push_back(*testing::pentagon());
  const std::vector<Vec2> lopsided{{-0.3, -1}, {2.5, -0.4}, {1.0, 1.5}, {-1.2, 0.8}, {-1.5, -0.2}};
  out.push_back(build_wulff(lopsided));
  return out;
}

std::vector<std::pair<double, double>> as_pairs(const Anisotropy& a) {
  std::vector<std::pair<double, double>> p;
  for (const Vec2& v : a.vertices()) p.emplace_back(v.x(), v.y());
  return p;
}

}  // namespace

TEST_CASE("property: gauge matches ray intersection, support matches vertex enumeration") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (const Anisotropy& a : shapes()) {
    const auto poly = as_pairs(a);
    for (int k = 0; k < 300; ++k) {
      const Vec2 x(g(rng), g(rng));
      CHECK(phi(a, x) == doctest::Approx(oracle::ray_gauge(poly, x.x(), x.y())).epsilon(1e-11));
      double best = -1e300;
      for (const Vec2& v : a.vertices()) best = std::max(best, x.dot(v));
      CHECK(phi_dual(a, x) == doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: homogeneity, convexity, duality, norm bounds") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (const Anisotropy& a : shapes()) {
    for (const Facet& f : a.facets()) {
      CHECK(phi(a, f.start) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(phi(a, 0.5 * (f.start + f.end)) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(phi_dual(a, f.normal) == doctest::Approx(f.support).epsilon(1e-12));
      CHECK(f.support > 0.0);
    }
    for (int k = 0; k < 200; ++k) {
      const Vec2 x(g(rng), g(rng)), y(g(rng), g(rng));
      const double t = u(rng);
      CHECK(phi(a, t * x) == doctest::Approx(t * phi(a, x)).epsilon(1e-12));
      CHECK(phi(a, 0.5 * (x + y)) <= 0.5 * (phi(a, x) + phi(a, y)) + 1e-12);
      CHECK(phi(a, x) >= a.c_phi() * x.norm() * (1 - 1e-12));
      CHECK(phi(a, x) <= a.big_c_phi() * x.norm() * (1 + 1e-12));
    }
  }
}

TEST_CASE("property: consecutive facets share a vertex and normals turn clockwise") {
  for (const Anisotropy& a : shapes()) {
    for (int j = 0; j < a.facet_count(); ++j) {
      const Facet &f = a.facet(j), &g = a.facet(a.next(j));
      CHECK((f.end - g.start).norm() < 1e-14);
      CHECK(cross(f.normal, g.normal) < 0.0);
    }
  }
}
