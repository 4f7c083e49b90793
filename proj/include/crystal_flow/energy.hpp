#pragma once

#include "crystal_flow/curve.hpp"

namespace crystal_flow {

struct FlowParams {
  double alpha = 1.0;
  double window_radius = 1e3;  // disc centered at the origin, only used by unbounded curves
};

// delta_j = H1(F_j)^2 phi_dual(nu_j)
double delta(const AdmissibleCurve& c, int i);

double elastic_energy(const AdmissibleCurve& c, const FlowParams& p);

// Gradient g at the curve's own lengths, or at an explicit length vector with the curve's combinatorics.
Vector first_variation(const AdmissibleCurve& c, const FlowParams& p);
Vector first_variation(const AdmissibleCurve& c, const Vector& lengths, double alpha);

// L_i g_i, the quantity that vanishes on stationary curves.
Vector stationarity_terms(const AdmissibleCurve& c, const Vector& lengths, double alpha);

struct FacetTriple {
  int prev = 0;
  int mid = 0;
  int next = 0;
};
double facet_identity_residual(const Anisotropy& a, const FacetTriple& t);

double stationary_energy_gap(const AdmissibleCurve& stationary, const AdmissibleCurve& other, const FlowParams& p,
                             double stationarity_tol = 1e-8);

}  // namespace crystal_flow
