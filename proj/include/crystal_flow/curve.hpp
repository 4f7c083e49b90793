#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "crystal_flow/anisotropy.hpp"
#include "crystal_flow/types.hpp"

namespace crystal_flow {

enum class Topology { Closed, Unbounded };

// Piece i of an n-piece curve. Closed: piece i runs from vertex i to vertex i+1 (mod n).
// Unbounded: piece 0 is a half-line arriving at vertex 1, piece n-1 a half-line leaving
// vertex n-1, and piece i (0 < i < n-1) runs from vertex i to vertex i+1.
// Vertex i is the start of piece i; theta at vertex i is the angle between pieces i-1 and i.
class AdmissibleCurve {
 public:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  static AdmissibleCurve build(std::shared_ptr<const Anisotropy> a, Topology topology, std::span<const Vec2> vertices,
                               std::optional<std::pair<Vec2, Vec2>> rays = std::nullopt);

  // Facets given explicitly; vertices as in vertices(). Lengths are measured along the facet tangents.
  static AdmissibleCurve assemble(std::shared_ptr<const Anisotropy> a, Topology topology, std::vector<int> facets,
                                  std::vector<Vec2> vertices);

  // Same combinatorics as pattern, new vertex positions (already known to be parallel).
  static AdmissibleCurve with_vertices(const AdmissibleCurve& pattern, std::vector<Vec2> vertices, Vector lengths);

  const Anisotropy& anisotropy() const { return *aniso_; }
  const std::shared_ptr<const Anisotropy>& anisotropy_ptr() const { return aniso_; }
  Topology topology() const { return topology_; }
  bool closed() const { return topology_ == Topology::Closed; }
  int size() const { return static_cast<int>(facet_.size()); }

  bool is_half_line(int i) const { return !closed() && (i == 0 || i == size() - 1); }
  bool has_vertex(int k) const { return closed() ? (k >= 0 && k < size()) : (k >= 1 && k < size()); }
  // Cyclic for closed curves, -1 past an unbounded end.
  int next(int i) const;
  int prev(int i) const;

  int facet(int i) const { return facet_[check(i)]; }
  const Vec2& normal(int i) const { return anisotropy().facet(facet(i)).normal; }
  const Vec2& tangent(int i) const { return anisotropy().facet(facet(i)).tangent; }
  double support(int i) const { return anisotropy().facet(facet(i)).support; }
  double facet_length(int i) const { return anisotropy().facet(facet(i)).length; }
  double length(int i) const { return lengths_[check(i)]; }
  const Vector& lengths() const { return lengths_; }
  int transition(int i) const { return transition_[check(i)]; }
  const std::vector<int>& transitions() const { return transition_; }

  // Turn at vertex k: +1 clockwise (facet index steps +1), -1 counter-clockwise, 0 if no vertex.
  int turn(int k) const { return turn_[check(k)]; }
  double theta(int k) const { return theta_[check(k)]; }
  double sin_theta(int k) const { return sin_[check(k)]; }
  double cot_theta(int k) const { return cot_[check(k)]; }

  const Vec2& vertex(int k) const;
  const std::vector<Vec2>& vertices() const { return vertices_; }  // closed: n; unbounded: vertices 1..n-1
  Vec2 point_on_line(int i) const;
  double offset(int i) const { return normal(i).dot(point_on_line(i)); }

  double total_bounded_length() const;
  double diameter() const;

 private:
  int check(int i) const;
  void derive_combinatorics();

  std::shared_ptr<const Anisotropy> aniso_;
  Topology topology_ = Topology::Closed;
  std::vector<Vec2> vertices_;
  std::vector<int> facet_;
  std::vector<int> turn_;
  std::vector<int> transition_;
  std::vector<double> theta_, sin_, cot_;
  Vector lengths_;
};

using HeightVector = Vector;

int transition_number(const AdmissibleCurve& c, int i);
double crystalline_curvature(const AdmissibleCurve& c, int i);

// Length formula for parallel curves; half-line entries are +inf.
Vector lengths_from_heights(const AdmissibleCurve& c, const HeightVector& h);

// Vertices by intersecting translated lines. length_floor <= 0 selects 1e-12 x total length.
AdmissibleCurve reconstruct_parallel(const AdmissibleCurve& c, const HeightVector& h, double length_floor = 0.0);

// Signed heights of `other` relative to `reference`; throws NotParallel.
HeightVector heights_between(const AdmissibleCurve& reference, const AdmissibleCurve& other);
bool is_parallel(const AdmissibleCurve& a, const AdmissibleCurve& b);

int curve_index(const AdmissibleCurve& c);
bool is_convex(const AdmissibleCurve& c);

// Walk a facet word: piece i lies on facet facets[i]; lengths cover bounded pieces only.
AdmissibleCurve make_closed_from_facets(std::shared_ptr<const Anisotropy> a, std::span<const int> facets,
                                        std::span<const double> lengths, const Vec2& start, double closure_tol = 1e-9);
AdmissibleCurve make_unbounded_from_facets(std::shared_ptr<const Anisotropy> a, std::span<const int> facets,
                                           std::span<const double> bounded_lengths, const Vec2& first_vertex);

// Half-line piece clipped to the disc of radius r centered at the origin; 0 if it misses.
double clipped_half_line_length(const AdmissibleCurve& c, int i, double r);
// Materialized polyline; half-lines end on the circle of radius r (or at length r if they miss it).
std::vector<Vec2> polyline(const AdmissibleCurve& c, double window_radius);

}  // namespace crystal_flow
