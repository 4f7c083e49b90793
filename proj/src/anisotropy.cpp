#include "crystal_flow/anisotropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "crystal_flow/error.hpp"

namespace crystal_flow {

namespace {

double polygon_diameter(std::span<const Vec2> pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).norm());
  return d;
}

}  // namespace

Anisotropy Anisotropy::from_vertices(std::span<const Vec2> input) {
  if (input.size() < 3) throw Error(ErrorKind::DegenerateFacet, "Wulff shape needs at least 3 vertices");
  const double diam = polygon_diameter(input);
  if (!(diam > 0.0)) throw Error(ErrorKind::DegenerateFacet, "all Wulff vertices coincide");
  const double merge_tol = 1e-12 * diam;

  std::vector<Vec2> pts;
  for (const auto& p : input) {
    if (!pts.empty() && (p - pts.back()).norm() <= merge_tol) continue;
    pts.push_back(p);
  }
  while (pts.size() > 1 && (pts.front() - pts.back()).norm() <= merge_tol) pts.pop_back();
  const int n = static_cast<int>(pts.size());
  if (n < 3) throw Error(ErrorKind::DegenerateFacet, "fewer than 3 distinct Wulff vertices");

  double area2 = 0.0;
  for (int i = 0; i < n; ++i) area2 += cross(pts[i], pts[(i + 1) % n]);
  if (area2 > 0.0) std::reverse(pts.begin() + 1, pts.end());

  double turning = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2 e0 = pts[(i + 1) % n] - pts[i];
    const Vec2 e1 = pts[(i + 2) % n] - pts[(i + 1) % n];
    const double c = cross(e0, e1);
    if (std::abs(c) <= 1e-12 * e0.norm() * e1.norm())
      throw Error(ErrorKind::DegenerateFacet, "collinear Wulff vertices at index " + std::to_string((i + 1) % n));
    if (c > 0.0) throw Error(ErrorKind::NonConvexWulff, "reflex Wulff vertex at index " + std::to_string((i + 1) % n));
    turning += std::atan2(c, e0.dot(e1));
  }
  if (std::abs(turning + 2.0 * std::numbers::pi) > 1e-9)
    throw Error(ErrorKind::NonConvexWulff, "Wulff boundary winds more than once");

  Anisotropy a;
  a.vertices_ = pts;
  a.facets_.resize(n);
  for (int j = 0; j < n; ++j) {
    Facet& f = a.facets_[j];
    f.start = pts[j];
    f.end = pts[(j + 1) % n];
    f.length = (f.end - f.start).norm();
    f.tangent = (f.end - f.start) / f.length;
    f.normal = perp(f.tangent);
    f.support = f.normal.dot(f.start);
    if (!(f.support > 1e-12 * diam)) throw Error(ErrorKind::OriginOutside, "origin not strictly inside the Wulff shape");
  }

  a.vertex_angles_.resize(n);
  for (int k = 0; k < n; ++k) a.vertex_angles_[k] = std::atan2(pts[k].y(), pts[k].x());
  a.angle_origin_ = static_cast<int>(std::min_element(a.vertex_angles_.begin(), a.vertex_angles_.end()) -
                                     a.vertex_angles_.begin());
  return a;
}

Anisotropy Anisotropy::square() {
  const std::vector<Vec2> v{{-1.0, 1.0}, {1.0, 1.0}, {1.0, -1.0}, {-1.0, -1.0}};
  return from_vertices(v);
}

Anisotropy Anisotropy::regular(int sides, double circumradius) {
  if (sides < 3) throw Error(ErrorKind::DegenerateFacet, "regular polygon needs at least 3 sides");
  std::vector<Vec2> v;
  for (int k = 0; k < sides; ++k) {
    const double t = std::numbers::pi / 2.0 - 2.0 * std::numbers::pi * k / sides;
    v.emplace_back(circumradius * std::cos(t), circumradius * std::sin(t));
  }
  return from_vertices(v);
}

const Facet& Anisotropy::facet(int j) const {
  if (j < 0 || j >= facet_count()) throw Error(ErrorKind::IndexOutOfRange, "facet index " + std::to_string(j));
  return facets_[j];
}

std::optional<int> Anisotropy::facet_with_normal(const Vec2& nu, double angle_tol) const {
  const double len = nu.norm();
  if (!(len > 0.0)) return std::nullopt;
  for (int j = 0; j < facet_count(); ++j) {
    const Vec2& m = facets_[j].normal;
    if (std::abs(std::atan2(cross(m, nu), m.dot(nu))) < angle_tol) return j;
  }
  return std::nullopt;
}

int Anisotropy::facet_containing_direction(const Vec2& x) const {
  // Clockwise storage means polar angles decrease along the vertex list, starting
  // from angle_origin_ and walking backwards gives ascending angles.
  const int n = facet_count();
  const double t = std::atan2(x.y(), x.x());
  auto ascending = [&](int k) { return (angle_origin_ - k + n) % n; };
  int lo = 0, hi = n;  // find the last ascending position with angle <= t
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (vertex_angles_[ascending(mid)] <= t) lo = mid;
    else hi = mid;
  }
  int lower = ascending(lo);
  if (vertex_angles_[lower] > t) lower = ascending(n - 1);  // wrapped below the smallest angle
  // Facet j runs from v_j (larger angle) to v_{j+1} (smaller angle).
  return prev(lower);
}

double Anisotropy::c_phi() const {
  double r = 0.0;
  for (const auto& v : vertices_) r = std::max(r, v.norm());
  return 1.0 / r;
}

double Anisotropy::big_c_phi() const {
  double s = facets_.front().support;
  for (const auto& f : facets_) s = std::min(s, f.support);
  return 1.0 / s;
}

double Anisotropy::diameter() const { return polygon_diameter(vertices_); }

Anisotropy build_wulff(std::span<const Vec2> vertices) { return Anisotropy::from_vertices(vertices); }

double phi(const Anisotropy& a, const Vec2& x) {
  if (x.x() == 0.0 && x.y() == 0.0) return 0.0;
  const int j = a.facet_containing_direction(x);
  double best = 0.0;
  for (int k : {a.prev(j), j, a.next(j)}) {
    const Facet& f = a.facet(k);
    best = std::max(best, x.dot(f.normal) / f.support);
  }
  return best;
}

double phi_dual(const Anisotropy& a, const Vec2& x) {
  double best = x.dot(a.vertices().front());
  for (const auto& v : a.vertices()) best = std::max(best, x.dot(v));
  return best;
}

bool facets_adjacent(const Anisotropy& a, int j, int k) {
  const int n = a.facet_count();
  if (j < 0 || j >= n || k < 0 || k >= n)
    throw Error(ErrorKind::IndexOutOfRange, "facet pair (" + std::to_string(j) + "," + std::to_string(k) + ")");
  return a.next(j) == k || a.prev(j) == k;
}

}  // namespace crystal_flow
