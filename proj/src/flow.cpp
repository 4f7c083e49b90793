#include "crystal_flow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "crystal_flow/analysis.hpp"
#include "crystal_flow/error.hpp"

namespace crystal_flow {

const char* to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Running: return "Running";
    case FlowStatus::Converged: return "Converged";
    case FlowStatus::MaxTime: return "MaxTime";
    case FlowStatus::TranslatingDivergence: return "TranslatingDivergence";
  }
  return "Unknown";
}

FlowState FlowState::start(const AdmissibleCurve& c, double t0) {
  return FlowState{c, HeightVector::Zero(c.size()), t0, 0};
}

AdmissibleCurve FlowState::materialize() const {
  return reconstruct_parallel(reference, h, std::numeric_limits<double>::min());
}

FlowState Trajectory::state_at(std::size_t k) const {
  const Sample& s = samples.at(k);
  return FlowState{epochs.at(s.epoch), s.h, s.t, s.epoch};
}

AdmissibleCurve Trajectory::curve_at(std::size_t k) const { return state_at(k).materialize(); }

Vector rhs(const AdmissibleCurve& reference, const HeightVector& h, double alpha, Vector* lengths_out) {
  const Vector L = lengths_from_heights(reference, h);
  Vector g = first_variation(reference, L, alpha);
  for (int i = 0; i < reference.size(); ++i) g[i] = reference.is_half_line(i) ? 0.0 : -reference.support(i) * g[i];
  if (lengths_out) *lengths_out = L;
  return g;
}

Vector rhs(const FlowState& s, const FlowParams& p) { return rhs(s.reference, s.h, p.alpha); }

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

// State y = (h, D) with D the accumulated dissipation.
struct Augmented {
  const AdmissibleCurve& ref;
  double alpha;
  int n;

  // False when some bounded length is not positive.
  bool operator()(const Vector& y, Vector& dy) const {
    const Vector h = y.head(n);
    const Vector L = lengths_from_heights(ref, h);
    for (int i = 0; i < n; ++i)
      if (!ref.is_half_line(i) && !(L[i] > 0.0)) return false;
    dy.resize(n + 1);
    dy.head(n) = rhs(ref, h, alpha);
    double d = 0.0;
    for (int i = 0; i < n; ++i)
      if (!ref.is_half_line(i)) d += L[i] * dy[i] * dy[i] / ref.support(i);
    dy[n] = d;
    return std::isfinite(d);
  }
};

struct Attempt {
  bool valid = false;
  Vector y5;
  double err = 0.0;
};

Attempt dp_attempt(const Augmented& f, const Vector& y, const Vector& k1, double dt, const IntegratorOptions& o) {
  Attempt out;
  Vector k2, k3, k4, k5, k6, k7;
  if (!f(y + dt * a21 * k1, k2)) return out;
  if (!f(y + dt * (a31 * k1 + a32 * k2), k3)) return out;
  if (!f(y + dt * (a41 * k1 + a42 * k2 + a43 * k3), k4)) return out;
  if (!f(y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5)) return out;
  if (!f(y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6)) return out;
  out.y5 = y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  if (!f(out.y5, k7)) return out;
  const Vector e = dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  const Vector scale =
      (o.abs_tol + o.rel_tol * y.cwiseAbs().cwiseMax(out.y5.cwiseAbs()).array()).matrix();
  out.err = e.cwiseQuotient(scale).cwiseAbs().maxCoeff();
  out.valid = std::isfinite(out.err);
  return out;
}

Vector augmented_start(const FlowState& s) {
  Vector y(s.h.size() + 1);
  y.head(s.h.size()) = s.h;
  y[s.h.size()] = 0.0;
  return y;
}

// Pin half-line heights to exactly zero.
void pin(const AdmissibleCurve& ref, Vector& h) {
  if (ref.closed()) return;
  h[0] = 0.0;
  h[ref.size() - 1] = 0.0;
}

}  // namespace

StepResult step(const FlowState& s, const FlowParams& p, const IntegratorOptions& opts, double dt_try) {
  const int n = s.reference.size();
  Augmented f{s.reference, p.alpha, n};
  const Vector y = augmented_start(s);
  Vector k1;
  if (!f(y, k1)) throw Error(ErrorKind::ZeroLengthSegment, "step started from a collapsed state");

  StepResult r;
  double dt = std::min(dt_try, opts.max_step);
  for (;;) {
    if (dt < opts.min_step)
      throw Error(ErrorKind::StepUnderflow, "no acceptable step above min_step at t = " + std::to_string(s.t));
    Attempt a = dp_attempt(f, y, k1, dt, opts);
    if (!a.valid) {
      dt *= 0.25;
      ++r.rejected;
      continue;
    }
    if (a.err > 1.0) {
      dt *= std::max(0.1, 0.9 * std::pow(a.err, -0.2));
      ++r.rejected;
      continue;
    }
    Vector h = a.y5.head(n);
    pin(s.reference, h);
    r.state = FlowState{s.reference, h, s.t + dt, s.epoch};
    r.error_estimate = a.err;
    r.dt = dt;
    r.dissipation = a.y5[n];
    const double grow = a.err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(a.err, -0.2), 0.2, 5.0);
    r.next_dt = std::min(dt * grow, opts.max_step);
    return r;
  }
}

StepResult step(const FlowState& s, const FlowParams& p, const IntegratorOptions& opts) {
  return step(s, p, opts, opts.initial_step);
}

namespace {

// Fixed step of size dt without error control; nullopt when a stage collapses.
std::optional<std::pair<Vector, double>> fixed_step(const FlowState& s, const FlowParams& p,
                                                    const IntegratorOptions& o, double dt) {
  const int n = s.reference.size();
  Augmented f{s.reference, p.alpha, n};
  const Vector y = augmented_start(s);
  Vector k1;
  if (!f(y, k1)) return std::nullopt;
  Attempt a = dp_attempt(f, y, k1, dt, o);
  if (!a.y5.size() || !std::isfinite(a.y5.sum())) return std::nullopt;
  Vector h = a.y5.head(n);
  pin(s.reference, h);
  return std::make_pair(h, a.y5[n]);
}

}  // namespace

AprioriBounds apriori_bounds(const AdmissibleCurve& c, double alpha) {
  const int n = c.size();
  AprioriBounds b;
  b.delta1 = std::numeric_limits<double>::infinity();
  b.delta2 = 0.0;
  auto nb = [&](int j, double s) {
    if (j < 0 || c.transition(j) == 0) return 0.0;
    return 4.0 * delta(c, j) / (c.length(j) * c.length(j) * std::abs(s));
  };
  for (int i = 0; i < n; ++i) {
    if (c.is_half_line(i)) continue;
    const int k1 = c.closed() ? (i + 1) % n : i + 1;
    const double L = c.length(i);
    const double K = c.cot_theta(i) + c.cot_theta(k1);
    const double denom = 1.0 / std::abs(c.sin_theta(i)) + std::abs(K) + 1.0 / std::abs(c.sin_theta(k1));
    b.delta1 = std::min(b.delta1, 0.5 * L / denom);
    const int ci = c.transition(i);
    const double inner = nb(c.prev(i), c.sin_theta(i)) + 4.0 * ci * ci * delta(c, i) * std::abs(K) / (L * L) +
                         nb(c.next(i), c.sin_theta(k1));
    b.delta2 = std::max(b.delta2, c.support(i) * (2.0 * c.facet_length(i) / L + 2.0 * alpha / L * inner));
  }
  b.t_guarantee = b.delta2 > 0.0 ? b.delta1 / b.delta2 : std::numeric_limits<double>::infinity();
  return b;
}

Vector vanish_thresholds(const FlowState& s, const IntegratorOptions& opts, double absolute_floor) {
  const int n = s.reference.size();
  Vector thr = Vector::Zero(n);
  for (int i = 0; i < n; ++i)
    if (!s.reference.is_half_line(i)) thr[i] = std::max(opts.vanish_fraction * s.reference.length(i), absolute_floor);
  return thr;
}

std::vector<int> detect_vanishing(const FlowState& s, const IntegratorOptions& opts, double absolute_floor) {
  const Vector thr = vanish_thresholds(s, opts, absolute_floor);
  const Vector L = s.lengths();
  std::vector<int> out;
  for (int i = 0; i < s.reference.size(); ++i) {
    if (s.reference.is_half_line(i) || L[i] >= thr[i]) continue;
    if (s.reference.transition(i) != 0)
      throw Error(ErrorKind::NonzeroCurvatureCollapse,
                  "segment " + std::to_string(i) + " with nonzero transition number reached the vanish threshold");
    out.push_back(i);
  }
  return out;
}

FlowState restart(const FlowState& s, const std::vector<int>& vanished, const FlowParams& p, RestartRecord* record) {
  const AdmissibleCurve& ref = s.reference;
  const int n = ref.size();
  if (vanished.empty()) {
    if (record) *record = RestartRecord{};
    return s;
  }
  for (int i : vanished) {
    if (i < 0 || i >= n) throw Error(ErrorKind::IndexOutOfRange, "vanished index " + std::to_string(i));
    if (ref.transition(i) != 0)
      throw Error(ErrorKind::NonzeroCurvatureCollapse, "cannot delete segment " + std::to_string(i));
  }
  const AdmissibleCurve cur = s.materialize();

  struct Piece {
    int facet;
    double offset;
    double weight;
    bool half;
    std::vector<int> sources;
  };
  std::vector<bool> gone(n, false);
  for (int i : vanished) gone[i] = true;
  std::vector<Piece> pieces;
  for (int i = 0; i < n; ++i) {
    if (gone[i]) continue;
    const bool half = cur.is_half_line(i);
    const double w = half ? 0.0 : cur.length(i);
    if (!pieces.empty() && pieces.back().facet == cur.facet(i)) {
      Piece& q = pieces.back();
      if (q.half) {
      } else if (half) {
        q.offset = cur.offset(i);
        q.half = true;
      } else {
        q.offset = (q.offset * q.weight + cur.offset(i) * w) / (q.weight + w);
      }
      q.weight += w;
      q.sources.push_back(i);
    } else {
      pieces.push_back(Piece{cur.facet(i), cur.offset(i), w, half, {i}});
    }
  }
  if (ref.closed()) {
    while (pieces.size() > 1 && pieces.front().facet == pieces.back().facet) {
      Piece last = pieces.back();
      pieces.pop_back();
      Piece& q = pieces.front();
      q.offset = (q.offset * q.weight + last.offset * last.weight) / (q.weight + last.weight);
      q.weight += last.weight;
      q.sources.insert(q.sources.begin(), last.sources.begin(), last.sources.end());
    }
  }

  const int m = static_cast<int>(pieces.size());
  const auto aniso = ref.anisotropy_ptr();
  std::vector<int> facets;
  for (const auto& q : pieces) facets.push_back(q.facet);
  std::vector<Vec2> verts;
  const Topology topo = ref.topology();
  for (int k = 0; k < m; ++k) {
    if (topo == Topology::Unbounded && k == 0) continue;
    const Piece& a = pieces[(k + m - 1) % m];
    const Piece& b = pieces[k];
    if (a.facet == b.facet || !facets_adjacent(*aniso, a.facet, b.facet))
      throw Error(ErrorKind::NotAdmissibleAfterMerge, "merged neighbours are not adjacent facets");
    verts.push_back(intersect_lines(aniso->facet(a.facet).normal, a.offset, aniso->facet(b.facet).normal, b.offset));
  }
  AdmissibleCurve next = [&] {
    try {
      return AdmissibleCurve::assemble(aniso, topo, facets, verts);
    } catch (const Error& e) {
      throw Error(ErrorKind::NotAdmissibleAfterMerge, e.what());
    }
  }();

  if (record) {
    RestartRecord r;
    r.t = s.t;
    r.epoch_before = s.epoch;
    r.vanished = vanished;
    r.merge_map.assign(n, -1);
    for (int k = 0; k < m; ++k)
      for (int i : pieces[k].sources) r.merge_map[i] = k;
    r.segments_before = n;
    r.segments_after = m;
    if (ref.closed()) {
      r.index_before = curve_index(ref);
      r.index_after = curve_index(next);
    }
    auto energy = [&](const AdmissibleCurve& c) {
      try {
        return elastic_energy(c, p);
      } catch (const Error&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    };
    r.energy_before = energy(cur);
    r.energy_after = energy(next);
    *record = r;
  }
  return FlowState{next, HeightVector::Zero(m), s.t, s.epoch + 1};
}

namespace {

Sample make_sample(const FlowState& s, const FlowParams& p, double dissipation) {
  Sample out;
  out.t = s.t;
  out.epoch = s.epoch;
  out.h = s.h;
  out.rates = rhs(s.reference, s.h, p.alpha, &out.lengths);
  out.dissipation = dissipation;
  try {
    out.energy = elastic_energy(s.materialize(), p);
  } catch (const Error&) {
    out.energy = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

bool below_threshold(const AdmissibleCurve& ref, const Vector& h, const Vector& thr) {
  const Vector L = lengths_from_heights(ref, h);
  for (int i = 0; i < ref.size(); ++i)
    if (!ref.is_half_line(i) && L[i] < thr[i]) return true;
  return false;
}

}  // namespace

Trajectory evolve(const AdmissibleCurve& c, const FlowParams& p, const IntegratorOptions& opts) {
  if (!(opts.min_step > 0.0) || opts.min_step > opts.max_step || !(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0))
    throw Error(ErrorKind::ParamOutOfRange, "invalid integrator options");
  Trajectory traj;
  traj.params = p;
  traj.epochs.push_back(c);
  const double abs_floor = 1e-10 * c.total_bounded_length();

  std::vector<double> outputs = opts.output_times;
  std::sort(outputs.begin(), outputs.end());
  std::size_t next_out = 0;
  while (next_out < outputs.size() && outputs[next_out] <= 0.0) ++next_out;

  FlowState s = FlowState::start(c);
  double dissipation = 0.0;
  traj.samples.push_back(make_sample(s, p, dissipation));
  ConvergenceMonitor monitor(opts);
  double dt = opts.initial_step;
  double last_sample_t = 0.0;
  const double eps_t = 1e-12 * std::max(1.0, opts.max_time);

  while (s.t < opts.max_time - eps_t) {
    if (traj.steps >= opts.max_steps) break;
    double limit = opts.max_time - s.t;
    bool hits_output = false;
    if (next_out < outputs.size() && outputs[next_out] - s.t <= std::min(dt, limit)) {
      limit = outputs[next_out] - s.t;
      hits_output = true;
    }
    const double dt_try = std::min(dt, limit);
    StepResult r = step(s, p, opts, dt_try);
    ++traj.steps;
    traj.rejected += r.rejected;
    if (hits_output && r.dt < dt_try) hits_output = false;

    const Vector thr = vanish_thresholds(s, opts, abs_floor);
    if (below_threshold(s.reference, r.state.h, thr)) {
      double lo = 0.0, hi = r.dt;
      for (int it = 0; it < 200 && hi - lo > opts.abs_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        auto trial = fixed_step(s, p, opts, mid);
        if (!trial || below_threshold(s.reference, trial->first, thr)) hi = mid;
        else lo = mid;
      }
      FlowState at = s;
      double d_at = 0.0;
      if (lo > 0.0) {
        auto trial = fixed_step(s, p, opts, lo);
        at.h = trial->first;
        at.t = s.t + lo;
        d_at = trial->second;
      }
      std::vector<int> vanished;
      if (auto past = fixed_step(s, p, opts, hi)) {
        FlowState after = s;
        after.h = past->first;
        vanished = detect_vanishing(after, opts, abs_floor);
      }
      if (vanished.empty()) {
        // The step past the event is not representable; fall back to the segments closest to their threshold.
        const Vector L = at.lengths();
        double worst = std::numeric_limits<double>::infinity();
        for (int i = 0; i < s.reference.size(); ++i)
          if (!s.reference.is_half_line(i)) worst = std::min(worst, L[i] / thr[i]);
        for (int i = 0; i < s.reference.size(); ++i)
          if (!s.reference.is_half_line(i) && L[i] / thr[i] <= worst * (1.0 + 1e-6)) vanished.push_back(i);
        for (int i : vanished)
          if (s.reference.transition(i) != 0)
            throw Error(ErrorKind::NonzeroCurvatureCollapse,
                        "segment " + std::to_string(i) + " with nonzero transition number collapsed");
      }
      dissipation += d_at;
      if (at.t > traj.samples.back().t) traj.samples.push_back(make_sample(at, p, dissipation));
      RestartRecord rec;
      s = restart(at, vanished, p, &rec);
      traj.restarts.push_back(rec);
      traj.epochs.push_back(s.reference);
      dissipation = 0.0;
      traj.samples.push_back(make_sample(s, p, dissipation));
      last_sample_t = s.t;
      dt = std::max(opts.initial_step, opts.min_step);
      continue;
    }

    s = r.state;
    dissipation += r.dissipation;
    if (hits_output) {
      s.t = outputs[next_out];
      while (next_out < outputs.size() && outputs[next_out] <= s.t + eps_t) ++next_out;
    }
    dt = r.next_dt;
    const bool final_step = s.t >= opts.max_time - eps_t;
    if (hits_output || final_step || opts.sample_stride <= 0.0 || s.t - last_sample_t >= opts.sample_stride) {
      traj.samples.push_back(make_sample(s, p, dissipation));
      last_sample_t = s.t;
      const FlowStatus st = monitor.update(traj);
      if (st == FlowStatus::Converged && opts.stop_on_convergence) {
        traj.status = st;
        break;
      }
      if (st == FlowStatus::TranslatingDivergence && opts.detect_divergence) {
        traj.status = st;
        break;
      }
    }
  }
  if (traj.status == FlowStatus::Running) traj.status = FlowStatus::MaxTime;
  if (monitor.update(traj) == FlowStatus::Converged || traj.status == FlowStatus::Converged)
    traj.limit = monitor.limit(traj);
  return traj;
}

double dissipation_residual(const Trajectory& traj, const FlowParams&) {
  double worst = 0.0;
  bool any = false;
  std::size_t k = 0;
  while (k < traj.samples.size()) {
    const int epoch = traj.samples[k].epoch;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    int count = 0;
    for (; k < traj.samples.size() && traj.samples[k].epoch == epoch; ++k) {
      const Sample& s = traj.samples[k];
      if (!std::isfinite(s.energy)) continue;
      const double invariant = s.energy + s.dissipation;
      lo = std::min(lo, invariant);
      hi = std::max(hi, invariant);
      ++count;
    }
    if (count >= 2) {
      any = true;
      worst = std::max(worst, hi - lo);
    }
  }
  if (!any) throw Error(ErrorKind::InsufficientSamples, "no epoch has two samples with finite energy");
  return worst;
}

}  // namespace crystal_flow
