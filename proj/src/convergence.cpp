#include <cmath>

#include "crystal_flow/analysis.hpp"

namespace crystal_flow {

FlowStatus ConvergenceMonitor::update(const Trajectory& traj) {
  if (traj.samples.size() < 2) return FlowStatus::Running;
  const Sample& last = traj.samples.back();
  const double window = opts_.window_fraction * opts_.max_time;

  std::size_t first = traj.samples.size() - 1;
  while (first > 0 && traj.samples[first - 1].epoch == last.epoch && traj.samples[first - 1].t >= last.t - window)
    --first;
  const bool epoch_covers = first > 0 && traj.samples[first - 1].epoch == last.epoch;
  const int count = static_cast<int>(traj.samples.size() - first);
  if (!epoch_covers || count < opts_.window_min_samples) return FlowStatus::Running;

  const double tol = opts_.stationarity_tol;
  const double last_rate = last.rates.size() ? last.rates.cwiseAbs().maxCoeff() : 0.0;
  if (last_rate < tol) {
    double worst = 0.0, tv = 0.0;
    for (std::size_t k = first; k < traj.samples.size(); ++k) {
      const Sample& s = traj.samples[k];
      if (s.rates.size()) worst = std::max(worst, s.rates.cwiseAbs().maxCoeff());
      if (k > first && s.h.size()) tv += (s.h - traj.samples[k - 1].h).cwiseAbs().maxCoeff();
    }
    if (worst < tol && tv < tol * window) return FlowStatus::Converged;
  }

  const double diam = std::max(traj.epochs[last.epoch].diameter(), 1.0);
  if (last.h.size() && last.h.cwiseAbs().maxCoeff() > 1e3 * diam) {
    const Vector& base = traj.samples[first].rates;
    double drift = 0.0;
    for (std::size_t k = first; k < traj.samples.size(); ++k)
      drift = std::max(drift, (traj.samples[k].rates - base).cwiseAbs().maxCoeff());
    if (drift < tol) return FlowStatus::TranslatingDivergence;
  }
  return FlowStatus::Running;
}

LimitReport ConvergenceMonitor::limit(const Trajectory& traj) const {
  LimitReport rep;
  const Sample& last = traj.samples.back();
  const AdmissibleCurve& ref = traj.epochs[last.epoch];
  rep.t = last.t;
  rep.curve = traj.curve_at(traj.samples.size() - 1);
  const double cut = std::sqrt(opts_.vanish_fraction);
  for (int i = 0; i < ref.size(); ++i)
    if (!ref.is_half_line(i) && ref.transition(i) == 0 && last.lengths[i] < cut * ref.length(i))
      rep.degenerate.push_back(i);
  rep.generalized = !rep.degenerate.empty();
  const Vector r = stationarity_terms(ref, last.lengths, traj.params.alpha);
  for (int i = 0; i < ref.size(); ++i) {
    bool skip = ref.is_half_line(i);
    for (int d : rep.degenerate) skip = skip || d == i;
    if (!skip) rep.residual = std::max(rep.residual, std::abs(r[i]));
  }
  return rep;
}

FlowStatus convergence_monitor(const Trajectory& traj, const IntegratorOptions& opts) {
  return ConvergenceMonitor(opts).update(traj);
}

}  // namespace crystal_flow
