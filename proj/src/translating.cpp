#include <cmath>
#include <string>

#include "crystal_flow/analysis.hpp"
#include "crystal_flow/error.hpp"

namespace crystal_flow {

const char* to_string(TranslatingKind k) {
  switch (k) {
    case TranslatingKind::SingleStep: return "SingleStep";
    case TranslatingKind::ConvexRect: return "ConvexRect";
    case TranslatingKind::Pocket: return "Pocket";
    case TranslatingKind::ConvexChain: return "ConvexChain";
  }
  return "Unknown";
}

TranslationReport translation_check(const AdmissibleCurve& c, const FlowParams& p, const Vec2& eta_in, double tol) {
  TranslationReport rep;
  rep.eta = eta_in.normalized();
  if (c.closed()) {
    rep.reason = "bounded curves cannot translate";
    return rep;
  }
  const int n = c.size();
  if (std::abs(cross(c.tangent(0), rep.eta)) > 1e-9 || std::abs(cross(c.tangent(n - 1), rep.eta)) > 1e-9)
    throw Error(ErrorKind::HalfLinesNotParallel, "half-lines are not parallel to the translation direction");

  const Vector r = rhs(FlowState::start(c), p);
  double num = 0.0, den = 0.0;
  for (int i = 1; i + 1 < n; ++i) {
    const double a = rep.eta.dot(c.normal(i));
    num += r[i] * a;
    den += a * a;
  }
  rep.lambda = den > 0.0 ? num / den : 0.0;
  for (int i = 1; i + 1 < n; ++i) rep.residual = std::max(rep.residual, std::abs(r[i] - rep.lambda * rep.eta.dot(c.normal(i))));
  rep.accepted = rep.lambda > 0.0 && rep.residual <= tol;
  if (!rep.accepted) rep.reason = rep.lambda > 0.0 ? "rates are not a rigid translation" : "no positive velocity";
  return rep;
}

namespace {

// Square facets: 0 right, 1 down, 2 left, 3 up. Clockwise turn = +1.
std::vector<int> word(int first, const std::vector<int>& turns) {
  std::vector<int> f{first};
  for (int t : turns) f.push_back(((f.back() + t) % 4 + 4) % 4);
  return f;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::ParamOutOfRange, what);
}

}  // namespace

TranslatingCurve make_translating_square_aniso(const TranslatingParams& prm, double alpha) {
  require(alpha > 0.0, "alpha must be positive");
  const auto a = square_anisotropy();
  const double s = std::sqrt(2.0 * alpha);
  TranslatingCurve out;

  switch (prm.kind) {
    case TranslatingKind::SingleStep: {
      const double lam = prm.lambda;
      require(lam > 0.0 && lam < 2.0 / s, "SingleStep needs 0 < lambda < 2/sqrt(2 alpha)");
      const std::vector<double> L{s, std::sqrt(2.0 * alpha / (1.0 - lam * s / 2.0)), 2.0 / lam - s};
      out.curve = make_unbounded_from_facets(a, word(1, {-1, -1, -1, 1}), L, prm.origin);
      out.lambda = lam;
      return out;
    }
    case TranslatingKind::ConvexRect: {
      const double A = prm.a;
      require(A > s && A < 2.0 * std::sqrt(alpha), "ConvexRect needs sqrt(2 alpha) < a < sqrt(4 alpha)");
      const double p = 1.0 - 2.0 * alpha / (A * A);
      const double q = 4.0 * alpha / (A * A) - 1.0;
      const double lam = std::sqrt((1.0 / (2.0 * alpha)) / (1.0 / (4.0 * p * p) + 1.0 / (4.0 * q * q)));
      const double l2 = 2.0 * p / lam, l4 = 2.0 * q / lam;
      const std::vector<double> L{l2, A, l4, A, l2};
      out.curve = make_unbounded_from_facets(a, word(1, {-1, -1, -1, -1, -1, -1}), L, prm.origin);
      out.lambda = lam;
      return out;
    }
    case TranslatingKind::Pocket: {
      const double A = prm.a, lam = prm.lambda;
      require(A > 0.0, "Pocket needs a > 0");
      require(lam > 0.0 && lam < 2.0 / (A + s), "Pocket needs 0 < lambda < 2/(a + sqrt(2 alpha))");
      const double rest = 2.0 - lam * s - lam * A;
      const std::vector<double> L{A, std::sqrt(4.0 * alpha / (lam * A)), s, std::sqrt(4.0 * alpha / rest), rest / lam};
      out.curve = make_unbounded_from_facets(a, word(1, {-1, 1, 1, 1, 1, -1}), L, prm.origin);
      out.lambda = lam;
      return out;
    }
    case TranslatingKind::ConvexChain: {
      const int m = prm.m;
      const double A = prm.a;
      require(m >= 2, "ConvexChain needs m >= 2");
      require(A > 1.0 / (2.0 * alpha) && A < (m + 1.0) / (2.0 * m * alpha),
              "ConvexChain needs 1/(2 alpha) < a < (m+1)/(2 m alpha)");
      const double B = m * A / (m + 1.0);
      const double up = 2.0 * A * alpha - 1.0;  // horizontal pieces at 1-based indices divisible by 4
      const double dn = 1.0 - 2.0 * B * alpha;  // horizontal pieces at indices 2 mod 4
      const double lam = std::sqrt((1.0 / (2.0 * alpha)) / (1.0 / (4.0 * dn * dn) + 1.0 / (4.0 * up * up)));
      const int n = 4 * m + 3;
      std::vector<double> L;
      double x = B;
      int pair = 0;
      for (int i = 2; i <= n - 1; ++i) {  // 1-based bounded indices
        if (i % 2 == 0) {
          L.push_back(i % 4 == 0 ? 2.0 * up / lam : 2.0 * dn / lam);
        } else {
          if (i > 3) {
            x = (pair % 2 == 0 ? A : B) - x;
            ++pair;
          }
          require(x > 0.0, "ConvexChain produced a non-positive inverse square length");
          L.push_back(1.0 / std::sqrt(x));
        }
      }
      out.curve = make_unbounded_from_facets(a, word(1, std::vector<int>(n - 1, -1)), L, prm.origin);
      out.lambda = lam;
      return out;
    }
  }
  throw Error(ErrorKind::ParamOutOfRange, "unknown translating kind");
}

AdmissibleCurve make_two_rectangle_square_aniso(const std::vector<double>& bounded_lengths) {
  const std::vector<int> turns{-1, 1, 1, 1, 1, -1, -1, -1, -1, -1};
  std::vector<double> L = bounded_lengths.empty() ? std::vector<double>(9, 1.0) : bounded_lengths;
  if (L.size() != 9) throw Error(ErrorKind::DimensionMismatch, "two-rectangle curve has 9 bounded segments");
  return make_unbounded_from_facets(square_anisotropy(), word(1, turns), L, Vec2::Zero());
}

}  // namespace crystal_flow
