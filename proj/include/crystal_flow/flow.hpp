#pragma once

#include <optional>
#include <vector>

#include "crystal_flow/curve.hpp"
#include "crystal_flow/energy.hpp"

namespace crystal_flow {

enum class FlowStatus { Running, Converged, MaxTime, TranslatingDivergence };
const char* to_string(FlowStatus s);

struct IntegratorOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double vanish_fraction = 1e-6;
  double max_step = 0.1;
  double min_step = 1e-14;
  double initial_step = 1e-4;
  double max_time = 50.0;
  double stationarity_tol = 1e-8;
  double sample_stride = 0.0;  // minimum spacing of stored samples, 0 keeps every accepted step
  double window_fraction = 0.05;
  int window_min_samples = 10;
  bool stop_on_convergence = true;
  bool detect_divergence = true;
  std::vector<double> output_times;  // steps are shortened to land on these exactly
  long max_steps = 20'000'000;
};

struct FlowState {
  AdmissibleCurve reference;
  HeightVector h;
  double t = 0.0;
  int epoch = 0;

  static FlowState start(const AdmissibleCurve& c, double t0 = 0.0);
  Vector lengths() const { return lengths_from_heights(reference, h); }
  AdmissibleCurve materialize() const;
};

struct Sample {
  double t = 0.0;
  int epoch = 0;
  HeightVector h;
  Vector lengths;
  Vector rates;
  double energy = 0.0;       // NaN when an unbounded curve leaves the energy window
  double dissipation = 0.0;  // integral of sum L_i h_i'^2 / phi_dual_i since the epoch started
};

struct RestartRecord {
  double t = 0.0;
  int epoch_before = 0;
  std::vector<int> vanished;
  std::vector<int> merge_map;  // old segment index -> new index, -1 if deleted
  std::optional<int> index_before, index_after;
  int segments_before = 0, segments_after = 0;
  double energy_before = 0.0, energy_after = 0.0;
};

struct LimitReport {
  double t = 0.0;
  AdmissibleCurve curve;
  bool generalized = false;  // some zero-transition segments degenerated
  std::vector<int> degenerate;
  double residual = 0.0;     // stationarity residual over nondegenerate segments
};

struct Trajectory {
  FlowParams params;
  std::vector<AdmissibleCurve> epochs;  // reference curve of each epoch
  std::vector<Sample> samples;
  std::vector<RestartRecord> restarts;
  FlowStatus status = FlowStatus::Running;
  std::optional<LimitReport> limit;
  long steps = 0;
  long rejected = 0;

  const Sample& last() const { return samples.back(); }
  FlowState state_at(std::size_t sample) const;
  AdmissibleCurve curve_at(std::size_t sample) const;
};

// Velocity of the heights at h; lengths_out receives the current lengths.
Vector rhs(const AdmissibleCurve& reference, const HeightVector& h, double alpha, Vector* lengths_out = nullptr);
Vector rhs(const FlowState& s, const FlowParams& p);

struct StepResult {
  FlowState state;
  double error_estimate = 0.0;
  double dt = 0.0;       // accepted step
  double next_dt = 0.0;  // controller suggestion
  double dissipation = 0.0;
  int rejected = 0;
};

// One accepted adaptive Dormand-Prince 4(5) step starting with dt_try.
StepResult step(const FlowState& s, const FlowParams& p, const IntegratorOptions& opts, double dt_try);
StepResult step(const FlowState& s, const FlowParams& p, const IntegratorOptions& opts);

struct AprioriBounds {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double t_guarantee = 0.0;
};
AprioriBounds apriori_bounds(const AdmissibleCurve& c, double alpha);

// Per-segment vanish thresholds of the current epoch.
Vector vanish_thresholds(const FlowState& s, const IntegratorOptions& opts, double absolute_floor = 0.0);
std::vector<int> detect_vanishing(const FlowState& s, const IntegratorOptions& opts, double absolute_floor = 0.0);

FlowState restart(const FlowState& s, const std::vector<int>& vanished, const FlowParams& p,
                  RestartRecord* record = nullptr);

Trajectory evolve(const AdmissibleCurve& c, const FlowParams& p, const IntegratorOptions& opts);

double dissipation_residual(const Trajectory& traj, const FlowParams& p);

}  // namespace crystal_flow
