#include <cmath>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace crystal_flow;
using testing::square;
using testing::wulff_square;

namespace {

AdmissibleCurve stationary(StationaryKind k, bool closed, int m, double alpha, std::vector<double> connectors = {}) {
  StationaryParams sp;
  sp.cls = {k, closed, m};
  sp.connectors = std::move(connectors);
  return make_stationary_square_aniso(sp, alpha);
}

// Length of the half-line piece inside the disc, from the quadratic |b + s d| = r.
double chord(const Vec2& base, const Vec2& dir, double r) {
  const double bd = base.dot(dir);
  return -bd + std::sqrt(bd * bd - base.squaredNorm() + r * r);
}

}  // namespace

TEST_CASE("Wulff square energy closed form") {
  for (double alpha : {0.5, 1.0, 2.0})
    for (double R : {0.3, 1.0, 2.0, 3.5}) {
      const FlowParams p{alpha, 1e3};
      CHECK(elastic_energy(wulff_square(R), p) == doctest::Approx(8 * R + 8 * alpha / R).epsilon(1e-14));
    }
  const double alpha = 1.7;
  const double emin = elastic_energy(wulff_square(std::sqrt(alpha)), {alpha, 1e3});
  CHECK(emin == doctest::Approx(16 * std::sqrt(alpha)));
  for (double R : {0.9, 1.2, 1.4, 2.0}) CHECK(elastic_energy(wulff_square(R), {alpha, 1e3}) >= emin);
}

TEST_CASE("rectangle energy matches the hand formula") {
  CHECK(elastic_energy(testing::rectangle(3, 1), {0.7, 1e3}) == doctest::Approx(oracle::rectangle_energy(3, 1, 0.7)));
}

TEST_CASE("staircase energy is windowed length") {
  StationaryParams sp;
  sp.cls.kind = StationaryKind::Staircase;
  sp.stair = {1.0, 0.5, 2.0, 0.7, 1.3};
  const AdmissibleCurve c = make_stationary_square_aniso(sp, 1.0);
  const double r = 20.0;
  double expect = 0.0;
  for (int i = 1; i + 1 < c.size(); ++i) expect += c.support(i) * c.length(i);
  expect += c.support(0) * chord(c.vertex(1), -c.tangent(0), r);
  expect += c.support(c.size() - 1) * chord(c.vertex(c.size() - 1), c.tangent(c.size() - 1), r);
  CHECK(elastic_energy(c, {1.0, r}) == doctest::Approx(expect).epsilon(1e-14));
  CHECK_ERROR_KIND(elastic_energy(c, {1.0, 1.0}), ErrorKind::WindowTooSmall);
}

TEST_CASE("first variation examples") {
  for (double R : {0.5, 1.0, 2.0}) {
    const double alpha = 1.0;
    const Vector g = first_variation(wulff_square(R), {alpha, 1e3});
    for (int i = 0; i < 4; ++i) CHECK(g[i] == doctest::Approx(1 / R - alpha / (R * R * R)));
  }
  StationaryParams sp;
  sp.cls.kind = StationaryKind::Staircase;
  const AdmissibleCurve stair = make_stationary_square_aniso(sp, 1.0);
  CHECK(first_variation(stair, {1.0, 1e3}).cwiseAbs().maxCoeff() == 0.0);

  for (double alpha : {0.5, 1.0, 3.0})
    for (int m = 1; m <= 3; ++m) {
      const AdmissibleCurve chain = stationary(StationaryKind::RightAngleChain, false, m, alpha);
      CHECK(first_variation(chain, {alpha, 1e3}).cwiseAbs().maxCoeff() < 1e-12);
    }

  Vector L = wulff_square(1.0).lengths();
  L[2] = 0.0;
  CHECK_ERROR_KIND(stationarity_terms(wulff_square(1.0), L, 1.0), ErrorKind::ZeroLengthSegment);
}

TEST_CASE("delta is facet length squared times support") {
  const AdmissibleCurve c = wulff_square(1.0);
  for (int i = 0; i < 4; ++i) CHECK(delta(c, i) == doctest::Approx(4.0));
}

TEST_CASE("facet identity examples") {
  const Anisotropy& a = *square();
  CHECK(std::abs(facet_identity_residual(a, {3, 0, 1})) < 1e-15);
  CHECK(std::abs(facet_identity_residual(a, {1, 0, 3})) < 1e-15);
  CHECK(std::abs(facet_identity_residual(a, {3, 0, 3})) < 1e-15);
  CHECK(std::abs(facet_identity_residual(a, {1, 0, 1})) < 1e-15);
  CHECK_ERROR_KIND(facet_identity_residual(a, {2, 0, 1}), ErrorKind::InvalidTriple);
  CHECK_ERROR_KIND(facet_identity_residual(a, {0, 0, 1}), ErrorKind::InvalidTriple);
}

TEST_CASE("property: facet identity over regular and irregular Wulff shapes") {
  std::vector<Anisotropy> shapes;
  for (int n = 3; n <= 12; ++n) shapes.push_back(Anisotropy::regular(n));
  shapes.push_back(*testing::pentagon());
  const std::vector<Vec2> lopsided{{-0.3, -1}, {2.5, -0.4}, {1.0, 1.5}, {-1.2, 0.8}, {-1.5, -0.2}};
  shapes.push_back(build_wulff(lopsided));
  for (const Anisotropy& a : shapes)
    for (int j = 0; j < a.facet_count(); ++j) {
      const int p = a.prev(j), n = a.next(j);
      for (const FacetTriple t : {FacetTriple{p, j, n}, FacetTriple{n, j, p}, FacetTriple{p, j, p}, FacetTriple{n, j, n}})
        CHECK(std::abs(facet_identity_residual(a, t)) <= 1e-12);
    }
}

TEST_CASE("stationary energy gap examples") {
  const double alpha = 1.0;
  const FlowParams p{alpha, 1e3};
  const AdmissibleCurve w = wulff_square(std::sqrt(alpha));
  CHECK(stationary_energy_gap(w, w, p) == 0.0);
  for (double R : {0.6, 1.5, 3.0}) {
    const double gap = stationary_energy_gap(w, wulff_square(R), p);
    CHECK(gap == doctest::Approx(8 * R + 8 * alpha / R - 16 * std::sqrt(alpha)).epsilon(1e-12));
    CHECK(gap >= 0.0);
  }

  StationaryParams sp;
  sp.cls.kind = StationaryKind::Staircase;
  const AdmissibleCurve s1 = make_stationary_square_aniso(sp, alpha);
  Vector h = Vector::Zero(s1.size());
  h[2] = 0.3;
  h[3] = -0.2;
  const AdmissibleCurve s2 = reconstruct_parallel(s1, h);
  CHECK(stationary_energy_gap(s1, s2, p) == 0.0);

  CHECK_ERROR_KIND(stationary_energy_gap(w, testing::notched_rectangle(), p), ErrorKind::NotParallel);
  CHECK_ERROR_KIND(stationary_energy_gap(wulff_square(2.0), w, p), ErrorKind::NotStationary);
}

TEST_CASE("property: gap formula equals energy difference") {
  std::mt19937_64 rng(17);
  for (double alpha : {0.5, 1.0, 2.0}) {
    const FlowParams p{alpha, 1e3};
    std::vector<AdmissibleCurve> bases{
        wulff_square(std::sqrt(alpha)),
        stationary(StationaryKind::RightAngleChain, true, 1, alpha),
        stationary(StationaryKind::RightAngleChain, true, 2, alpha, {1.5 * std::sqrt(2 * alpha), 2.5 * std::sqrt(2 * alpha)}),
        stationary(StationaryKind::DoubleRightAngleChain, true, 1, alpha, {1.0}),
        stationary(StationaryKind::RightAngleChain, false, 3, alpha, {1.0, 2.0}),
    };
    for (const AdmissibleCurve& base : bases) {
      const double scale = 0.1 * base.lengths().minCoeff();
      std::uniform_real_distribution<double> u(-scale, scale);
      for (int trial = 0; trial < 10; ++trial) {
        Vector h(base.size());
        for (int i = 0; i < base.size(); ++i) h[i] = base.is_half_line(i) ? 0.0 : u(rng);
        const AdmissibleCurve other = reconstruct_parallel(base, h);
        const double e0 = elastic_energy(base, p), e1 = elastic_energy(other, p);
        const double gap = stationary_energy_gap(base, other, p);
        CHECK(std::abs(gap - (e1 - e0)) <= 1e-9 * std::max(1.0, e0));
        CHECK(gap >= 0.0);
      }
    }
  }
}

TEST_CASE("property: first variation matches finite differences") {
  std::vector<std::shared_ptr<const Anisotropy>> shapes{square(), testing::regular(6), testing::pentagon()};
  for (const auto& a : shapes)
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const int index = seed % 2 ? 1 : 0;
      const int segments = a->facet_count() == 5 ? 10 + index : 12;
      const AdmissibleCurve c = random_closed_curve(a, segments, index, seed);
      const FlowParams p{0.8, 1e3};
      const Vector g = first_variation(c, p);
      for (int i = 0; i < c.size(); ++i) {
        auto F = [&](double eps) {
          Vector h = Vector::Zero(c.size());
          h[i] = eps;
          return elastic_energy(reconstruct_parallel(c, h), p);
        };
        const double fd = oracle::central(F, 1e-6);
        const double exact = g[i] * c.length(i);
        CHECK(std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact)));
      }
    }
}

TEST_CASE("property: energy dominates weighted length") {
  for (const auto& a : {square(), testing::regular(6), testing::pentagon()})
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const AdmissibleCurve c = random_closed_curve(a, a->facet_count() == 5 ? 11 : 10, 1, seed);
      CHECK(elastic_energy(c, {1.0, 1e3}) >= c.anisotropy().c_phi() * c.total_bounded_length());
    }
}
