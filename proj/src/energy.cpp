#include "crystal_flow/energy.hpp"

#include <cmath>
#include <string>

#include "crystal_flow/error.hpp"

namespace crystal_flow {

double delta(const AdmissibleCurve& c, int i) {
  const double hf = c.facet_length(i);
  return hf * hf * c.support(i);
}

double elastic_energy(const AdmissibleCurve& c, const FlowParams& p) {
  double e = 0.0;
  for (int i = 0; i < c.size(); ++i) {
    if (c.is_half_line(i)) continue;
    const double L = c.length(i);
    const double hf = c.facet_length(i);
    const int ci = c.transition(i);
    e += c.support(i) * (L + p.alpha * ci * ci * hf * hf / L);
  }
  if (!c.closed()) {
    for (const auto& v : c.vertices())
      if (!(v.norm() < p.window_radius))
        throw Error(ErrorKind::WindowTooSmall, "bounded part of the curve leaves the energy window");
    e += c.support(0) * clipped_half_line_length(c, 0, p.window_radius);
    e += c.support(c.size() - 1) * clipped_half_line_length(c, c.size() - 1, p.window_radius);
  }
  return e;
}

Vector stationarity_terms(const AdmissibleCurve& c, const Vector& L, double alpha) {
  const int n = c.size();
  if (L.size() != n) throw Error(ErrorKind::DimensionMismatch, "length vector has wrong size");
  Vector out = Vector::Zero(n);
  auto neighbor = [&](int j, double sin_k) {
    if (j < 0 || c.transition(j) == 0) return 0.0;
    return delta(c, j) / (L[j] * L[j] * sin_k);
  };
  for (int i = 0; i < n; ++i) {
    if (c.is_half_line(i)) continue;
    if (!(L[i] > 0.0)) throw Error(ErrorKind::ZeroLengthSegment, "segment " + std::to_string(i) + " has no length");
  }
  for (int i = 0; i < n; ++i) {
    if (c.is_half_line(i)) continue;
    const int k1 = c.closed() ? (i + 1) % n : i + 1;
    const int ci = c.transition(i);
    double bracket = neighbor(c.prev(i), c.sin_theta(i)) + neighbor(c.next(i), c.sin_theta(k1));
    if (ci != 0) bracket += delta(c, i) * (c.cot_theta(i) + c.cot_theta(k1)) / (L[i] * L[i]);
    out[i] = ci * c.facet_length(i) + alpha * bracket;
  }
  return out;
}

Vector first_variation(const AdmissibleCurve& c, const Vector& lengths, double alpha) {
  Vector g = stationarity_terms(c, lengths, alpha);
  for (int i = 0; i < c.size(); ++i) g[i] = c.is_half_line(i) ? 0.0 : g[i] / lengths[i];
  return g;
}

Vector first_variation(const AdmissibleCurve& c, const FlowParams& p) {
  return first_variation(c, c.lengths(), p.alpha);
}

double facet_identity_residual(const Anisotropy& a, const FacetTriple& t) {
  const int nf = a.facet_count();
  for (int j : {t.prev, t.mid, t.next})
    if (j < 0 || j >= nf) throw Error(ErrorKind::InvalidTriple, "facet index out of range");
  if (!facets_adjacent(a, t.prev, t.mid) || !facets_adjacent(a, t.mid, t.next))
    throw Error(ErrorKind::InvalidTriple, "consecutive facets of the triple are not adjacent");
  const Facet& fp = a.facet(t.prev);
  const Facet& fm = a.facet(t.mid);
  const Facet& fn = a.facet(t.next);
  const double s1 = cross(fp.normal, fm.normal), s2 = cross(fm.normal, fn.normal);
  const double cot1 = -fp.normal.dot(fm.normal) / s1, cot2 = -fm.normal.dot(fn.normal) / s2;
  const int turn1 = t.mid == a.next(t.prev) ? 1 : -1;
  const int turn2 = t.next == a.next(t.mid) ? 1 : -1;
  const int c = turn1 == turn2 ? turn1 : 0;
  return fp.support / s1 + fm.support * (cot1 + cot2) + fn.support / s2 + c * fm.length;
}

double stationary_energy_gap(const AdmissibleCurve& stationary, const AdmissibleCurve& other, const FlowParams& p,
                             double stationarity_tol) {
  if (!is_parallel(stationary, other)) throw Error(ErrorKind::NotParallel, "energy gap needs parallel curves");
  const Vector r = stationarity_terms(stationary, stationary.lengths(), p.alpha);
  if (r.size() > 0 && r.cwiseAbs().maxCoeff() > stationarity_tol)
    throw Error(ErrorKind::NotStationary, "reference curve is not stationary");
  double gap = 0.0;
  for (int i = 0; i < stationary.size(); ++i) {
    if (stationary.is_half_line(i)) continue;
    const int ci = stationary.transition(i);
    if (ci == 0) continue;
    const double L = stationary.length(i), Lb = other.length(i);
    gap += delta(stationary, i) * (Lb - L) * (Lb - L) / (L * L * Lb);
  }
  return p.alpha * gap;
}

}  // namespace crystal_flow
