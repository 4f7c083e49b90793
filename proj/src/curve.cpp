#include "crystal_flow/curve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "crystal_flow/error.hpp"

namespace crystal_flow {

namespace {

double points_diameter(const std::vector<Vec2>& pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).norm());
  return d;
}

// Parameter interval {s >= 0 : |g + s*d| <= r} for unit d, as a length.
double ray_in_disc(const Vec2& g, const Vec2& d, double r) {
  const double b = g.dot(d);
  const double disc = b * b - (g.squaredNorm() - r * r);
  if (disc <= 0.0) return 0.0;
  const double root = std::sqrt(disc);
  const double s_hi = -b + root;
  const double s_lo = std::max(0.0, -b - root);
  return std::max(0.0, s_hi - s_lo);
}

}  // namespace

int AdmissibleCurve::check(int i) const {
  if (i < 0 || i >= size()) throw Error(ErrorKind::IndexOutOfRange, "segment index " + std::to_string(i));
  return i;
}

int AdmissibleCurve::next(int i) const {
  check(i);
  if (closed()) return (i + 1) % size();
  return i + 1 < size() ? i + 1 : -1;
}

int AdmissibleCurve::prev(int i) const {
  check(i);
  if (closed()) return (i + size() - 1) % size();
  return i - 1;
}

const Vec2& AdmissibleCurve::vertex(int k) const {
  if (!has_vertex(k)) throw Error(ErrorKind::IndexOutOfRange, "vertex index " + std::to_string(k));
  return closed() ? vertices_[k] : vertices_[k - 1];
}

Vec2 AdmissibleCurve::point_on_line(int i) const {
  check(i);
  if (!closed() && i == 0) return vertex(1);
  return vertex(i);
}

double AdmissibleCurve::total_bounded_length() const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i)
    if (!is_half_line(i)) s += lengths_[i];
  return s;
}

double AdmissibleCurve::diameter() const { return points_diameter(vertices_); }

AdmissibleCurve AdmissibleCurve::build(std::shared_ptr<const Anisotropy> a, Topology topology,
                                       std::span<const Vec2> vertices, std::optional<std::pair<Vec2, Vec2>> rays) {
  AdmissibleCurve c;
  c.aniso_ = std::move(a);
  c.topology_ = topology;
  c.vertices_.assign(vertices.begin(), vertices.end());
  const int m = static_cast<int>(c.vertices_.size());

  std::vector<Vec2> tangents;
  const double tol = 1e-12 * std::max(points_diameter(c.vertices_), 1e-300);
  auto edge = [&](const Vec2& p, const Vec2& q, int idx) {
    const Vec2 e = q - p;
    const double len = e.norm();
    if (!(len > tol)) throw Error(ErrorKind::DegenerateSegment, "zero-length segment " + std::to_string(idx));
    tangents.push_back(e / len);
    return len;
  };

  std::vector<double> lens;
  if (topology == Topology::Closed) {
    if (rays) throw Error(ErrorKind::BadTopology, "closed curve cannot carry half-line directions");
    if (m < 3) throw Error(ErrorKind::BadTopology, "closed curve needs at least 3 segments");
    for (int i = 0; i < m; ++i) lens.push_back(edge(c.vertices_[i], c.vertices_[(i + 1) % m], i));
  } else {
    if (!rays) throw Error(ErrorKind::BadTopology, "unbounded curve needs two half-line directions");
    if (m < 1) throw Error(ErrorKind::BadTopology, "unbounded curve needs at least one vertex");
    const double rin = rays->first.norm(), rout = rays->second.norm();
    if (!(rin > 0.0) || !(rout > 0.0)) throw Error(ErrorKind::BadTopology, "zero half-line direction");
    tangents.push_back(rays->first / rin);
    lens.push_back(kInf);
    for (int k = 0; k + 1 < m; ++k) lens.push_back(edge(c.vertices_[k], c.vertices_[k + 1], k + 1));
    tangents.push_back(rays->second / rout);
    lens.push_back(kInf);
  }

  const int n = static_cast<int>(tangents.size());
  c.facet_.resize(n);
  for (int i = 0; i < n; ++i) {
    auto f = c.aniso_->facet_with_normal(perp(tangents[i]));
    if (!f) throw Error(ErrorKind::NotAdmissible, "normal of segment " + std::to_string(i) + " is not a facet normal");
    c.facet_[i] = *f;
  }
  c.lengths_ = Eigen::Map<const Vector>(lens.data(), n);
  c.derive_combinatorics();
  return c;
}

void AdmissibleCurve::derive_combinatorics() {
  const int n = size();
  const Anisotropy& a = *aniso_;
  turn_.assign(n, 0);
  theta_.assign(n, 0.0);
  sin_.assign(n, 0.0);
  cot_.assign(n, 0.0);
  for (int k = 0; k < n; ++k) {
    if (!has_vertex(k)) continue;
    const int fp = facet_[prev(k)], fk = facet_[k];
    if (fp == fk) throw Error(ErrorKind::DegenerateSegment, "collinear consecutive segments at vertex " + std::to_string(k));
    if (!facets_adjacent(a, fp, fk))
      throw Error(ErrorKind::NotAdmissible, "non-adjacent facets at vertex " + std::to_string(k));
    turn_[k] = (fk == a.next(fp)) ? 1 : -1;
    const Vec2& n0 = a.facet(fp).normal;
    const Vec2& n1 = a.facet(fk).normal;
    const double s = cross(n0, n1);
    const double cth = -n0.dot(n1);
    sin_[k] = s;
    cot_[k] = cth / s;
    theta_[k] = std::numbers::pi - std::atan2(s, n0.dot(n1));
  }
  transition_.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    if (is_half_line(i)) continue;
    const int k1 = closed() ? (i + 1) % n : i + 1;
    if (turn_[i] == turn_[k1]) transition_[i] = turn_[i];
  }
}

AdmissibleCurve AdmissibleCurve::assemble(std::shared_ptr<const Anisotropy> a, Topology topology,
                                          std::vector<int> facets, std::vector<Vec2> vertices) {
  AdmissibleCurve c;
  c.aniso_ = std::move(a);
  c.topology_ = topology;
  c.facet_ = std::move(facets);
  c.vertices_ = std::move(vertices);
  const int n = c.size();
  const int nv = static_cast<int>(c.vertices_.size());
  if (topology == Topology::Closed ? (n < 3 || nv != n) : (n < 2 || nv != n - 1))
    throw Error(ErrorKind::BadTopology, "facet word and vertex list do not match");
  for (int f : c.facet_)
    if (f < 0 || f >= c.aniso_->facet_count()) throw Error(ErrorKind::IndexOutOfRange, "facet index");
  c.lengths_.resize(n);
  for (int i = 0; i < n; ++i) {
    if (c.is_half_line(i)) {
      c.lengths_[i] = kInf;
      continue;
    }
    const int k1 = c.closed() ? (i + 1) % n : i + 1;
    c.lengths_[i] = (c.vertex(k1) - c.vertex(i)).dot(c.tangent(i));
    if (!(c.lengths_[i] > 0.0))
      throw Error(ErrorKind::DegenerateSegment, "segment " + std::to_string(i) + " has non-positive length");
  }
  c.derive_combinatorics();
  return c;
}

AdmissibleCurve AdmissibleCurve::with_vertices(const AdmissibleCurve& pattern, std::vector<Vec2> vertices,
                                               Vector lengths) {
  AdmissibleCurve c = pattern;
  c.vertices_ = std::move(vertices);
  c.lengths_ = std::move(lengths);
  return c;
}

int transition_number(const AdmissibleCurve& c, int i) { return c.transition(i); }

double crystalline_curvature(const AdmissibleCurve& c, int i) {
  if (c.is_half_line(i)) return 0.0;
  return c.transition(i) * c.facet_length(i) / c.length(i);
}

Vector lengths_from_heights(const AdmissibleCurve& c, const HeightVector& h) {
  const int n = c.size();
  if (h.size() != n) throw Error(ErrorKind::DimensionMismatch, "height vector has wrong length");
  auto hh = [&](int j) { return (j < 0 || c.is_half_line(j)) ? 0.0 : h[j]; };
  Vector out(n);
  for (int i = 0; i < n; ++i) {
    if (c.is_half_line(i)) {
      out[i] = AdmissibleCurve::kInf;
      continue;
    }
    const int k0 = i, k1 = c.closed() ? (i + 1) % n : i + 1;
    const int p = c.prev(i), q = c.next(i);
    out[i] = c.length(i) - (hh(p) / c.sin_theta(k0) + hh(i) * (c.cot_theta(k0) + c.cot_theta(k1)) +
                            hh(q) / c.sin_theta(k1));
  }
  return out;
}

AdmissibleCurve reconstruct_parallel(const AdmissibleCurve& c, const HeightVector& h, double length_floor) {
  const int n = c.size();
  if (h.size() != n) throw Error(ErrorKind::DimensionMismatch, "height vector has wrong length");
  if (length_floor <= 0.0) length_floor = 1e-12 * c.total_bounded_length();
  std::vector<double> offset(n);
  for (int i = 0; i < n; ++i) offset[i] = c.offset(i) + (c.is_half_line(i) ? 0.0 : h[i]);

  std::vector<Vec2> verts;
  for (int k = 0; k < n; ++k) {
    if (!c.has_vertex(k)) continue;
    const int p = c.prev(k);
    verts.push_back(intersect_lines(c.normal(p), offset[p], c.normal(k), offset[k]));
  }
  auto vtx = [&](int k) -> const Vec2& { return c.closed() ? verts[k] : verts[k - 1]; };

  Vector lens(n);
  for (int i = 0; i < n; ++i) {
    if (c.is_half_line(i)) {
      lens[i] = AdmissibleCurve::kInf;
      continue;
    }
    const int k1 = c.closed() ? (i + 1) % n : i + 1;
    lens[i] = (vtx(k1) - vtx(i)).dot(c.tangent(i));
    if (!(lens[i] > length_floor))
      throw Error(ErrorKind::SegmentCollapse, "segment " + std::to_string(i) + " collapses under the given heights");
  }
  return AdmissibleCurve::with_vertices(c, std::move(verts), std::move(lens));
}

bool is_parallel(const AdmissibleCurve& a, const AdmissibleCurve& b) {
  if (a.topology() != b.topology() || a.size() != b.size()) return false;
  if (a.anisotropy_ptr() != b.anisotropy_ptr() && a.anisotropy().vertices() != b.anisotropy().vertices()) return false;
  for (int i = 0; i < a.size(); ++i)
    if (a.facet(i) != b.facet(i)) return false;
  return true;
}

HeightVector heights_between(const AdmissibleCurve& reference, const AdmissibleCurve& other) {
  if (!is_parallel(reference, other)) throw Error(ErrorKind::NotParallel, "curves are not parallel");
  HeightVector h(reference.size());
  for (int i = 0; i < reference.size(); ++i) h[i] = other.offset(i) - reference.offset(i);
  return h;
}

int curve_index(const AdmissibleCurve& c) {
  if (!c.closed()) throw Error(ErrorKind::NotClosed, "index is defined for closed curves");
  int steps = 0;
  for (int k = 0; k < c.size(); ++k) steps += c.turn(k);
  const int nf = c.anisotropy().facet_count();
  if (steps % nf != 0) throw Error(ErrorKind::NotAdmissible, "facet steps do not close up");
  return steps / nf;
}

bool is_convex(const AdmissibleCurve& c) {
  int sign = 0;
  for (int i = 0; i < c.size(); ++i) {
    if (c.is_half_line(i)) continue;
    const int t = c.transition(i);
    if (t == 0) return false;
    if (sign == 0) sign = t;
    else if (t != sign) return false;
  }
  return sign != 0;
}

AdmissibleCurve make_closed_from_facets(std::shared_ptr<const Anisotropy> a, std::span<const int> facets,
                                        std::span<const double> lengths, const Vec2& start, double closure_tol) {
  if (facets.size() != lengths.size()) throw Error(ErrorKind::DimensionMismatch, "facet word and lengths differ");
  std::vector<Vec2> verts{start};
  double total = 0.0;
  for (std::size_t i = 0; i < facets.size(); ++i) {
    verts.push_back(verts.back() + lengths[i] * a->facet(facets[i]).tangent);
    total += std::abs(lengths[i]);
  }
  if ((verts.back() - start).norm() > closure_tol * std::max(total, 1.0))
    throw Error(ErrorKind::NotClosed, "facet word does not close");
  verts.pop_back();
  return AdmissibleCurve::build(std::move(a), Topology::Closed, verts);
}

AdmissibleCurve make_unbounded_from_facets(std::shared_ptr<const Anisotropy> a, std::span<const int> facets,
                                           std::span<const double> bounded_lengths, const Vec2& first_vertex) {
  if (facets.size() < 2 || bounded_lengths.size() + 2 != facets.size())
    throw Error(ErrorKind::DimensionMismatch, "unbounded facet word needs n-2 bounded lengths");
  std::vector<Vec2> verts{first_vertex};
  for (std::size_t i = 0; i < bounded_lengths.size(); ++i)
    verts.push_back(verts.back() + bounded_lengths[i] * a->facet(facets[i + 1]).tangent);
  const Vec2 rin = a->facet(facets.front()).tangent;
  const Vec2 rout = a->facet(facets.back()).tangent;
  return AdmissibleCurve::build(std::move(a), Topology::Unbounded, verts, std::make_pair(rin, rout));
}

double clipped_half_line_length(const AdmissibleCurve& c, int i, double r) {
  if (!c.is_half_line(i)) throw Error(ErrorKind::IndexOutOfRange, "piece " + std::to_string(i) + " is bounded");
  if (i == 0) return ray_in_disc(c.vertex(1), -c.tangent(0), r);
  return ray_in_disc(c.vertex(c.size() - 1), c.tangent(i), r);
}

std::vector<Vec2> polyline(const AdmissibleCurve& c, double window_radius) {
  if (c.closed()) return c.vertices();
  const int n = c.size();
  auto reach = [&](int i) {
    const double s = clipped_half_line_length(c, i, window_radius);
    return s > 0.0 ? s : window_radius;
  };
  std::vector<Vec2> out;
  out.push_back(c.vertex(1) - reach(0) * c.tangent(0));
  for (const auto& v : c.vertices()) out.push_back(v);
  out.push_back(c.vertex(n - 1) + reach(n - 1) * c.tangent(n - 1));
  return out;
}

}  // namespace crystal_flow
