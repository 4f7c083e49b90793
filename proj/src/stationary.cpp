#include <algorithm>
#include <cmath>
#include <string>

#include "crystal_flow/analysis.hpp"
#include "crystal_flow/error.hpp"

namespace crystal_flow {

const char* to_string(StationaryKind k) {
  switch (k) {
    case StationaryKind::Staircase: return "Staircase";
    case StationaryKind::RightAngleChain: return "RightAngleChain";
    case StationaryKind::DoubleRightAngleChain: return "DoubleRightAngleChain";
    case StationaryKind::WulffSquare: return "WulffSquare";
    case StationaryKind::Unclassified: return "Unclassified";
  }
  return "Unknown";
}

std::shared_ptr<const Anisotropy> square_anisotropy() {
  static const auto a = std::make_shared<const Anisotropy>(Anisotropy::square());
  return a;
}

double stationarity_residual(const AdmissibleCurve& c, const FlowParams& p) {
  const Vector r = stationarity_terms(c, c.lengths(), p.alpha);
  return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
}

namespace {

// Square facets: 0 right (normal +y), 1 down (+x), 2 left (-y), 3 up (-x).
// A clockwise turn steps the facet index by +1.
std::vector<int> facet_word(int first, const std::vector<int>& turns) {
  std::vector<int> f{first};
  for (int t : turns) f.push_back(((f.back() + t) % 4 + 4) % 4);
  return f;
}

int group_sign(int g) { return g % 2 == 0 ? 1 : -1; }

std::vector<double> free_connectors(const StationaryParams& prm, int count, double fallback) {
  if (prm.connectors.empty()) return std::vector<double>(count, fallback);
  if (static_cast<int>(prm.connectors.size()) != count)
    throw Error(ErrorKind::InvalidClassParams, "expected " + std::to_string(count) + " free connector lengths");
  for (double v : prm.connectors)
    if (!(v > 0.0)) throw Error(ErrorKind::InvalidClassParams, "connector lengths must be positive");
  return prm.connectors;
}

// Walk the closed word and solve the listed unknown lengths so that the polygon closes.
AdmissibleCurve close_and_build(const std::vector<int>& facets, std::vector<double> lengths, std::vector<int> unknown,
                                const Vec2& origin) {
  const auto a = square_anisotropy();
  Vec2 rest = Vec2::Zero();
  for (std::size_t i = 0; i < facets.size(); ++i)
    if (std::find(unknown.begin(), unknown.end(), static_cast<int>(i)) == unknown.end())
      rest += lengths[i] * a->facet(facets[i]).tangent;
  Vec2 remaining = -rest;
  for (int u : unknown) {
    const Vec2 t = a->facet(facets[u]).tangent;
    lengths[u] = remaining.dot(t);
    remaining -= lengths[u] * t;
    if (!(lengths[u] > 0.0))
      throw Error(ErrorKind::InvalidClassParams, "closing connector " + std::to_string(u) + " would be non-positive");
  }
  double total = 0.0;
  for (double l : lengths) total += l;
  if (remaining.norm() > 1e-12 * total) throw Error(ErrorKind::InvalidClassParams, "parameters do not close the chain");
  try {
    return make_closed_from_facets(a, facets, lengths, origin, 1e-12);
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidClassParams, e.what());
  }
}

}  // namespace

AdmissibleCurve make_stationary_square_aniso(const StationaryParams& prm, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidClassParams, "alpha must be positive");
  const auto a = square_anisotropy();
  const StationaryClass& cls = prm.cls;
  const double s = std::sqrt(2.0 * alpha);
  const int m = cls.m;

  switch (cls.kind) {
    case StationaryKind::WulffSquare: {
      if (!cls.closed) throw Error(ErrorKind::InvalidClassParams, "the Wulff square is closed");
      const double side = 2.0 * std::sqrt(alpha);
      const std::vector<int> f{0, 1, 2, 3};
      const std::vector<double> L(4, side);
      return make_closed_from_facets(a, f, L, prm.origin + Vec2(-side / 2, side / 2), 1e-12);
    }
    case StationaryKind::Staircase: {
      if (cls.closed) throw Error(ErrorKind::InvalidClassParams, "staircases are unbounded");
      std::vector<double> L = prm.stair.empty() ? std::vector<double>(5, 1.0) : prm.stair;
      for (double v : L)
        if (!(v > 0.0)) throw Error(ErrorKind::InvalidClassParams, "staircase lengths must be positive");
      std::vector<int> turns;
      for (std::size_t k = 0; k <= L.size(); ++k) turns.push_back(k % 2 == 0 ? 1 : -1);
      return make_unbounded_from_facets(a, facet_word(0, turns), L, prm.origin);
    }
    case StationaryKind::RightAngleChain: {
      if (m < 1) throw Error(ErrorKind::InvalidClassParams, "right-angle chain needs m >= 1");
      if (!cls.closed) {
        const int n = 3 * m + 1;
        std::vector<int> turns;
        for (int k = 1; k < n; ++k) turns.push_back(group_sign((k - 1) / 3));
        const auto conn = free_connectors(prm, m - 1, s);
        std::vector<double> L;
        for (int g = 0; g < m; ++g) {
          L.push_back(s);
          L.push_back(s);
          if (g + 1 < m) L.push_back(conn[g]);
        }
        return make_unbounded_from_facets(a, facet_word(0, turns), L, prm.origin);
      }
      const int n = 6 * m;
      std::vector<int> turns;
      for (int k = 1; k < n; ++k) turns.push_back(group_sign(k / 3));
      const auto f = facet_word(0, turns);
      const auto conn = free_connectors(prm, 2 * m - 2, 2.0 * s);
      std::vector<double> L(n, s);
      for (int g = 0; g < 2 * m - 2; ++g) L[3 * g + 2] = conn[g];
      return close_and_build(f, L, {3 * (2 * m - 2) + 2, 3 * (2 * m - 1) + 2}, prm.origin);
    }
    case StationaryKind::DoubleRightAngleChain: {
      if (m < 1) throw Error(ErrorKind::InvalidClassParams, "double-right-angle chain needs m >= 1");
      double A = cls.a, B = cls.b;
      if (cls.closed) {
        if (A == 0.0 && B == 0.0) A = B = 2.0 * std::sqrt(alpha);
        const double side = 2.0 * std::sqrt(alpha);
        if (std::abs(A - side) > 1e-12 * side || std::abs(B - side) > 1e-12 * side)
          throw Error(ErrorKind::InvalidClassParams, "closed double-right-angle chains need a = b = sqrt(4 alpha)");
        const int n = 8 * m;
        std::vector<int> turns;
        for (int k = 1; k < n; ++k) turns.push_back(group_sign((k - 1) / 4));
        const auto f = facet_word(3, turns);
        const auto conn = free_connectors(prm, 2 * m - 1, s);
        std::vector<double> L(n);
        for (int g = 0; g < 2 * m; ++g) {
          L[4 * g] = g < 2 * m - 1 ? conn[g] : 0.0;
          L[4 * g + 1] = g % 2 == 0 ? A : B;
          L[4 * g + 2] = s;
          L[4 * g + 3] = g % 2 == 0 ? B : A;
        }
        return close_and_build(f, L, {4 * (2 * m - 1)}, prm.origin);
      }
      if (A > 0.0 && B == 0.0) {
        const double inv = 1.0 / (2.0 * alpha) - 1.0 / (A * A);
        if (!(inv > 0.0)) throw Error(ErrorKind::InvalidClassParams, "a too small for 1/a^2 + 1/b^2 = 1/(2 alpha)");
        B = 1.0 / std::sqrt(inv);
      }
      if (!(A > 0.0) || !(B > 0.0)) throw Error(ErrorKind::InvalidClassParams, "a and b must be positive");
      if (std::abs(1.0 / (A * A) + 1.0 / (B * B) - 1.0 / (2.0 * alpha)) > 1e-12 / alpha)
        throw Error(ErrorKind::InvalidClassParams, "1/a^2 + 1/b^2 must equal 1/(2 alpha)");
      const int n = 4 * m + 1;
      std::vector<int> turns;
      for (int k = 1; k < n; ++k) turns.push_back(group_sign((k - 1) / 4));
      const auto conn = free_connectors(prm, m - 1, s);
      std::vector<double> L;
      for (int g = 0; g < m; ++g) {
        L.push_back(g % 2 == 0 ? A : B);
        L.push_back(s);
        L.push_back(g % 2 == 0 ? B : A);
        if (g + 1 < m) L.push_back(conn[g]);
      }
      return make_unbounded_from_facets(a, facet_word(1, turns), L, prm.origin);
    }
    case StationaryKind::Unclassified: break;
  }
  throw Error(ErrorKind::InvalidClassParams, "cannot generate an unclassified curve");
}

AdmissibleCurve make_stationary_square_aniso(const StationaryClass& cls, double alpha) {
  StationaryParams prm;
  prm.cls = cls;
  return make_stationary_square_aniso(prm, alpha);
}

namespace {

bool is_square(const Anisotropy& a) {
  if (a.facet_count() != 4) return false;
  const auto& ref = square_anisotropy()->facets();
  for (int j = 0; j < 4; ++j) {
    bool found = false;
    for (const auto& f : ref)
      if ((f.normal - a.facet(j).normal).norm() < 1e-12 && std::abs(f.support - a.facet(j).support) < 1e-12)
        found = true;
    if (!found) return false;
  }
  return true;
}

}  // namespace

StationaryClass classify_stationary_square(const AdmissibleCurve& c, double alpha, double tol) {
  StationaryClass out;
  out.closed = c.closed();
  if (!is_square(c.anisotropy())) return out;
  if (stationarity_residual(c, FlowParams{alpha, 1e300}) > tol)
    throw Error(ErrorKind::NotStationary, "curve is not stationary");
  const int n = c.size();
  const auto& tr = c.transitions();

  if (c.closed()) {
    bool uniform = true;
    for (int t : tr) uniform = uniform && t == tr[0] && t != 0;
    if (uniform) {
      if (n == 4) out.kind = StationaryKind::WulffSquare;
      return out;
    }
    int start = -1;
    for (int k = 0; k < n; ++k)
      if (tr[(k + n - 1) % n] == 0 && tr[k] != 0) {
        start = k;
        break;
      }
    if (start < 0) return out;
    const int sign = tr[start];
    auto d = [&](int j) { return tr[(start + j) % n] * sign; };
    if (n % 6 == 0) {
      bool ok = true;
      for (int g = 0; g < n / 3 && ok; ++g)
        ok = d(3 * g) == group_sign(g) && d(3 * g + 1) == group_sign(g) && d(3 * g + 2) == 0;
      if (ok) {
        out.kind = StationaryKind::RightAngleChain;
        out.m = n / 6;
        return out;
      }
    }
    if (n % 8 == 0) {
      bool ok = true;
      for (int g = 0; g < n / 4 && ok; ++g)
        ok = d(4 * g) == group_sign(g) && d(4 * g + 1) == group_sign(g) && d(4 * g + 2) == group_sign(g) &&
             d(4 * g + 3) == 0;
      if (ok) {
        out.kind = StationaryKind::DoubleRightAngleChain;
        out.m = n / 8;
        out.a = c.length(start);
        out.b = c.length((start + 2) % n);
      }
    }
    return out;
  }

  int sign = 0;
  for (int t : tr)
    if (t != 0) {
      sign = t;
      break;
    }
  if (sign == 0) {
    out.kind = StationaryKind::Staircase;
    return out;
  }
  auto d = [&](int j) { return j < n ? tr[j] * sign : 0; };
  if ((n - 1) % 3 == 0) {
    const int m = (n - 1) / 3;
    bool ok = true;
    for (int g = 0; g < m && ok; ++g)
      ok = d(3 * g + 1) == group_sign(g) && d(3 * g + 2) == group_sign(g) && d(3 * g + 3) == 0;
    if (ok) {
      out.kind = StationaryKind::RightAngleChain;
      out.m = m;
      return out;
    }
  }
  if ((n - 1) % 4 == 0) {
    const int m = (n - 1) / 4;
    bool ok = true;
    for (int g = 0; g < m && ok; ++g)
      ok = d(4 * g + 1) == group_sign(g) && d(4 * g + 2) == group_sign(g) && d(4 * g + 3) == group_sign(g) &&
           d(4 * g + 4) == 0;
    if (ok) {
      out.kind = StationaryKind::DoubleRightAngleChain;
      out.m = m;
      out.a = c.length(1);
      out.b = c.length(3);
    }
  }
  return out;
}

}  // namespace crystal_flow
