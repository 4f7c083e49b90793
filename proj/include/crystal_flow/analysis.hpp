#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crystal_flow/flow.hpp"

namespace crystal_flow {

double stationarity_residual(const AdmissibleCurve& c, const FlowParams& p);

// --- square anisotropy catalog ---

enum class StationaryKind { Staircase, RightAngleChain, DoubleRightAngleChain, WulffSquare, Unclassified };
const char* to_string(StationaryKind k);

struct StationaryClass {
  StationaryKind kind = StationaryKind::Unclassified;
  bool closed = false;
  int m = 0;
  double a = 0.0;  // double-right-angle chain horizontal sides
  double b = 0.0;
  bool operator==(const StationaryClass& o) const {
    return kind == o.kind && closed == o.closed && m == o.m;
  }
};

struct StationaryParams {
  StationaryClass cls;
  std::vector<double> connectors;  // free zero-transition lengths; empty picks defaults
  std::vector<double> stair;       // staircase bounded lengths; empty picks 5 unit segments
  Vec2 origin = Vec2::Zero();
};

std::shared_ptr<const Anisotropy> square_anisotropy();

AdmissibleCurve make_stationary_square_aniso(const StationaryParams& params, double alpha);
AdmissibleCurve make_stationary_square_aniso(const StationaryClass& cls, double alpha);
StationaryClass classify_stationary_square(const AdmissibleCurve& c, double alpha, double tol = 1e-8);

// --- translating curves ---

struct TranslationReport {
  bool accepted = false;
  Vec2 eta = Vec2(0.0, 1.0);
  double lambda = 0.0;
  double residual = 0.0;
  std::string reason;
};

TranslationReport translation_check(const AdmissibleCurve& c, const FlowParams& p, const Vec2& eta,
                                    double tol = 1e-10);

enum class TranslatingKind { SingleStep, ConvexRect, Pocket, ConvexChain };
const char* to_string(TranslatingKind k);

struct TranslatingParams {
  TranslatingKind kind = TranslatingKind::SingleStep;
  double lambda = 1.0;  // SingleStep, Pocket
  double a = 0.0;       // ConvexRect, Pocket, ConvexChain
  int m = 2;            // ConvexChain
  Vec2 origin = Vec2::Zero();
};

struct TranslatingCurve {
  AdmissibleCurve curve;
  double lambda = 0.0;
};

TranslatingCurve make_translating_square_aniso(const TranslatingParams& params, double alpha);

// Two consecutive convex rectangles between vertical half-lines; never translating.
AdmissibleCurve make_two_rectangle_square_aniso(const std::vector<double>& bounded_lengths);

// --- random curves ---

// Closed admissible curve from a random +-1 facet-step word with winding `index` turns and
// lengths projected onto the closure constraint; every length is at least min_length.
AdmissibleCurve random_closed_curve(std::shared_ptr<const Anisotropy> a, int segments, int index, std::uint64_t seed,
                                    double min_length = 0.3);

// --- long-time behaviour ---

class ConvergenceMonitor {
 public:
  explicit ConvergenceMonitor(const IntegratorOptions& opts) : opts_(opts) {}
  FlowStatus update(const Trajectory& traj);
  LimitReport limit(const Trajectory& traj) const;

 private:
  IntegratorOptions opts_;
};

FlowStatus convergence_monitor(const Trajectory& traj, const IntegratorOptions& opts);

}  // namespace crystal_flow
