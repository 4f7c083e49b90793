#include <cmath>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace crystal_flow;
using testing::square;
using testing::wulff_square;

namespace {

// Half-line / one segment / half-line on facets 3, 0, 1 of the square (both end angles convex).
AdmissibleCurve cap(double L = 1.0) {
  const std::vector<int> f{3, 0, 1};
  const std::vector<double> len{L};
  return make_unbounded_from_facets(square(), f, len, Vec2(-0.5 * L, 0.0));
}

IntegratorOptions quick(double max_time) {
  IntegratorOptions o;
  o.max_time = max_time;
  return o;
}

}  // namespace

TEST_CASE("rhs examples") {
  for (double alpha : {0.5, 1.0, 2.0}) {
    const FlowParams p{alpha, 1e3};
    CHECK(rhs(FlowState::start(wulff_square(std::sqrt(alpha))), p).cwiseAbs().maxCoeff() < 1e-15);
    for (double R : {0.4, 1.3, 2.0}) {
      const Vector r = rhs(FlowState::start(wulff_square(R)), p);
      for (int i = 0; i < 4; ++i) CHECK(r[i] == doctest::Approx(-1 / R + alpha / (R * R * R)));
    }
  }
  const Vector r = rhs(FlowState::start(cap()), {1.0, 1e3});
  CHECK(r[0] == 0.0);
  CHECK(r[2] == 0.0);
  CHECK(r[1] < 0.0);
}

TEST_CASE("single steps") {
  const FlowParams p{1.0, 1e3};
  IntegratorOptions o;
  const FlowState still = FlowState::start(wulff_square(1.0));
  const StepResult a = step(still, p, o);
  CHECK(a.dt > 0.0);
  CHECK(a.state.h.cwiseAbs().maxCoeff() < 1e-15);

  const StepResult b = step(FlowState::start(wulff_square(2.0)), p, o);
  CHECK(b.state.t > 0.0);
  for (int i = 0; i < 4; ++i) {
    CHECK(b.state.h[i] < 0.0);
    CHECK(b.state.h[i] == doctest::Approx(b.state.h[0]).epsilon(1e-14));
  }
  CHECK(b.error_estimate <= 1.0);

  const StepResult c = step(FlowState::start(cap()), p, o, 0.01);
  CHECK(c.state.h[0] == 0.0);
  CHECK(c.state.h[2] == 0.0);

  IntegratorOptions strict;
  strict.rel_tol = 1e-16;
  strict.abs_tol = 1e-30;
  strict.min_step = 1e-2;
  strict.initial_step = 1e-2;
  CHECK_ERROR_KIND(step(FlowState::start(wulff_square(0.3)), p, strict), ErrorKind::StepUnderflow);
}

TEST_CASE("a priori bounds") {
  for (double R : {0.5, 1.0, 3.0}) CHECK(apriori_bounds(wulff_square(R), 1.0).delta1 == doctest::Approx(R / 2));
  for (double alpha : {0.5, 1.0, 2.0}) {
    const AprioriBounds b = apriori_bounds(testing::rectangle(3.0, 1.2), alpha);
    CHECK(b.delta1 == doctest::Approx(1.2 / 4));
    CHECK(b.delta2 == doctest::Approx(oracle::rectangle_delta2(3.0, 1.2, alpha)));
    CHECK(b.t_guarantee > 0.0);
  }
  CHECK(apriori_bounds(wulff_square(1.0), 1.0).t_guarantee > 0.0);

  // no segment halves before the guaranteed time
  const AdmissibleCurve c = testing::notched_rectangle();
  const AprioriBounds b = apriori_bounds(c, 1.0);
  const Trajectory tr = evolve(c, {1.0, 1e3}, quick(b.t_guarantee));
  for (const Sample& s : tr.samples)
    for (int i = 0; i < c.size(); ++i) CHECK(s.lengths[i] > 0.5 * c.length(i));
}

TEST_CASE("vanishing detection") {
  IntegratorOptions o;
  CHECK(detect_vanishing(FlowState::start(wulff_square(1.0)), o).empty());

  FlowState s = FlowState::start(testing::stepped_rectangle(0.2));
  REQUIRE(s.reference.transition(1) == 0);
  s.h[0] = -(0.2 - 1e-9);
  const auto v = detect_vanishing(s, o);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == 1);

  IntegratorOptions greedy;
  greedy.vanish_fraction = 1.0 - 1e-12;
  const StepResult moved = step(FlowState::start(wulff_square(2.0)), {1.0, 1e3}, greedy);
  CHECK_ERROR_KIND(detect_vanishing(moved.state, greedy), ErrorKind::NonzeroCurvatureCollapse);
}

TEST_CASE("restart merges collinear neighbours") {
  const FlowParams p{1.0, 1e3};
  FlowState s = FlowState::start(testing::stepped_rectangle(0.2));
  s.h[0] = -(0.2 - 1e-9);
  s.t = 0.5;
  RestartRecord rec;
  const FlowState r = restart(s, {1}, p, &rec);
  CHECK(r.reference.size() == 4);
  CHECK(r.epoch == s.epoch + 1);
  CHECK(r.t == s.t);
  CHECK(r.h.cwiseAbs().maxCoeff() == 0.0);
  CHECK(rec.segments_before - rec.segments_after >= 2);
  CHECK(rec.index_before == rec.index_after);
  CHECK(rec.energy_after <= rec.energy_before + 1e-9);
  CHECK(rec.merge_map[1] == -1);
  CHECK(rec.merge_map[0] == rec.merge_map[2]);
  for (int i = 0; i < 4; ++i) CHECK(r.reference.transition(i) == 1);

  const FlowState same = restart(s, {}, p);
  CHECK(same.reference.size() == s.reference.size());
  CHECK(same.h == s.h);

  CHECK_ERROR_KIND(restart(s, {0}, p), ErrorKind::NonzeroCurvatureCollapse);
}

TEST_CASE("restart of a closed index-zero chain keeps index zero") {
  StationaryParams sp;
  sp.cls = {StationaryKind::RightAngleChain, true, 2};
  const double s2 = std::sqrt(2.0);
  sp.connectors = {0.5 * s2, 3.0 * s2};
  const AdmissibleCurve c = make_stationary_square_aniso(sp, 1.0);
  REQUIRE(curve_index(c) == 0);
  // push one connector's neighbours until the connector is nearly gone, then restart
  int k = -1;
  for (int i = 0; i < c.size(); ++i)
    if (c.transition(i) == 0 && (k < 0 || c.length(i) < c.length(k))) k = i;
  REQUIRE(k >= 0);
  FlowState st = FlowState::start(c);
  const Vector L0 = st.lengths();
  // shift the previous piece so the connector shrinks to 1e-9 of its length
  const int prev = c.prev(k);
  Vector probe = Vector::Zero(c.size());
  probe[prev] = 1.0;
  const double rate = (lengths_from_heights(c, probe) - L0)[k];
  REQUIRE(rate != 0.0);
  st.h[prev] = -(L0[k] * (1 - 1e-9)) / rate;
  RestartRecord rec;
  const FlowState r = restart(st, {k}, {1.0, 1e3}, &rec);
  CHECK(rec.index_before == 0);
  CHECK(rec.index_after == 0);
  CHECK(r.reference.size() < c.size());
}

TEST_CASE("evolve examples") {
  const FlowParams p{1.0, 1e3};
  const Trajectory w = evolve(wulff_square(2.0), p, quick(50));
  CHECK(w.status == FlowStatus::Converged);
  const AdmissibleCurve last = w.curve_at(w.samples.size() - 1);
  for (int i = 0; i < 4; ++i) CHECK(last.length(i) == doctest::Approx(2.0).epsilon(5e-5));
  REQUIRE(w.limit.has_value());
  CHECK(classify_stationary_square(w.limit->curve, 1.0).kind == StationaryKind::WulffSquare);

  const Trajectory t = evolve(cap(), p, quick(1000));
  CHECK(t.status == FlowStatus::TranslatingDivergence);
  CHECK(t.last().rates[1] == doctest::Approx(-2.0).epsilon(1e-6));

  const Trajectory still = evolve(wulff_square(1.0), p, quick(50));
  CHECK(still.status == FlowStatus::Converged);
  CHECK(still.last().t <= 0.05 * 50 * 1.5);
}

TEST_CASE("dissipation residual") {
  const FlowParams p{1.0, 1e3};
  const Trajectory still = evolve(wulff_square(1.0), p, quick(5));
  CHECK(dissipation_residual(still, p) < 1e-13);

  IntegratorOptions o = quick(50);
  o.rel_tol = 1e-8;
  const double fine = dissipation_residual(evolve(wulff_square(2.0), p, o), p);
  CHECK(fine <= 1e-6);
  o.rel_tol = 1e-5;
  const double coarse = dissipation_residual(evolve(wulff_square(2.0), p, o), p);
  CHECK(coarse > fine);

  Trajectory one = still;
  one.samples.resize(1);
  CHECK_ERROR_KIND(dissipation_residual(one, p), ErrorKind::InsufficientSamples);
}

namespace {

std::vector<AdmissibleCurve> flow_cases() {
  return {testing::stepped_rectangle(), testing::notched_rectangle(), testing::rectangle(3, 1),
          random_closed_curve(square(), 12, 1, 4), random_closed_curve(testing::regular(6), 12, 1, 2)};
}

}  // namespace

TEST_CASE("property: trajectory invariants") {
  const FlowParams p{1.0, 1e3};
  for (const AdmissibleCurve& c : flow_cases()) {
    const Trajectory tr = evolve(c, p, quick(10));
    const double e0 = tr.samples.front().energy;
    CHECK(tr.restarts.size() < static_cast<std::size_t>(c.size()));
    for (std::size_t k = 1; k < tr.samples.size(); ++k) {
      const Sample &a = tr.samples[k - 1], &b = tr.samples[k];
      if (a.epoch == b.epoch) {
        CHECK(b.t > a.t);
        CHECK(b.energy <= a.energy + 1e-10 * e0);
      } else {
        CHECK(b.t == a.t);
        CHECK(b.epoch == a.epoch + 1);
      }
    }
    for (std::size_t k = 0; k < tr.samples.size(); k += 7) {
      const Sample& s = tr.samples[k];
      const AdmissibleCurve& ref = tr.epochs[s.epoch];
      const AdmissibleCurve cur = tr.curve_at(k);
      CHECK((heights_between(ref, cur) - s.h).cwiseAbs().maxCoeff() < 1e-9);
      for (int i = 0; i < ref.size(); ++i) {
        CHECK(cur.transition(i) == ref.transition(i));
        if (ref.transition(i) != 0)
          CHECK(s.lengths[i] >= p.alpha * ref.support(i) * ref.facet_length(i) * ref.facet_length(i) / e0);
      }
    }
    for (const RestartRecord& r : tr.restarts) {
      CHECK(r.index_before == r.index_after);
      CHECK(r.energy_after <= r.energy_before + 1e-9);
    }
  }
}

TEST_CASE("property: convex curves stay convex and never restart") {
  const FlowParams p{1.0, 1e3};
  for (const AdmissibleCurve& c : {testing::rectangle(3, 1), testing::rectangle(0.5, 4), wulff_square(2.5)}) {
    const Trajectory tr = evolve(c, p, quick(30));
    CHECK(tr.restarts.empty());
    for (std::size_t k = 0; k < tr.samples.size(); k += 5) CHECK(is_convex(tr.curve_at(k)));
  }
}

TEST_CASE("property: semigroup") {
  const FlowParams p{1.0, 1e3};
  for (const AdmissibleCurve& c : flow_cases()) {
    for (auto [s, t] : {std::pair{0.1, 0.4}, std::pair{0.25, 0.25}}) {
      IntegratorOptions o = quick(s + t);
      o.stop_on_convergence = false;
      const Trajectory whole = evolve(c, p, o);
      o.max_time = s;
      const Trajectory first = evolve(c, p, o);
      o.max_time = t;
      const Trajectory second = evolve(first.curve_at(first.samples.size() - 1), p, o);
      const AdmissibleCurve a = whole.curve_at(whole.samples.size() - 1);
      const AdmissibleCurve b = second.curve_at(second.samples.size() - 1);
      if (whole.restarts.empty() && first.restarts.empty() && second.restarts.empty())
        CHECK(heights_between(a, b).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("output times are hit exactly") {
  IntegratorOptions o = quick(3);
  o.output_times = {0.5, 1.25, 2.0};
  const Trajectory tr = evolve(wulff_square(2.0), {1.0, 1e3}, o);
  for (double t : o.output_times) {
    bool found = false;
    for (const Sample& s : tr.samples) found = found || s.t == t;
    CHECK(found);
  }
}

TEST_CASE("flow tracks the Wulff radius oracle") {
  const double alpha = 1.0;
  for (double R0 : {2.0, 0.5}) {
    IntegratorOptions o = quick(5);
    const Trajectory tr = evolve(wulff_square(R0), {alpha, 1e3}, o);
    double worst = 0.0;
    for (const Sample& s : tr.samples) {
      const double R = oracle::wulff_radius(s.t, R0, alpha);
      for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(s.h[i] - (R - R0)));
    }
    CHECK(worst <= 1e-6);
  }
  // the closed-form inversion and a direct RK4 integration agree
  for (double t : {0.5, 2.0, 5.0})
    for (double R0 : {2.0, 0.5})
      CHECK(oracle::wulff_radius(t, R0, alpha) == doctest::Approx(oracle::wulff_radius_rk4(t, R0, alpha)).epsilon(1e-10));
}
