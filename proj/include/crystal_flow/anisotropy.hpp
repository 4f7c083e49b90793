#pragma once

#include <optional>
#include <span>
#include <vector>

#include "crystal_flow/types.hpp"

namespace crystal_flow {

struct Facet {
  Vec2 start;    // clockwise traversal start vertex
  Vec2 end;
  Vec2 normal;   // outward unit normal
  Vec2 tangent;  // unit direction start -> end
  double length = 0.0;
  double support = 0.0;  // phi_dual(normal), distance from origin to the facet line
};

// Polygonal Wulff shape, stored clockwise so that perp(tangent) is the outward normal.
class Anisotropy {
 public:
  static Anisotropy from_vertices(std::span<const Vec2> vertices);
  static Anisotropy square();
  static Anisotropy regular(int sides, double circumradius = 1.0);

  int facet_count() const { return static_cast<int>(facets_.size()); }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const Facet& facet(int j) const;
  const std::vector<Facet>& facets() const { return facets_; }

  int next(int j) const { return (j + 1) % facet_count(); }
  int prev(int j) const { return (j + facet_count() - 1) % facet_count(); }

  // Facet whose outward normal is within angle_tol radians of nu.
  std::optional<int> facet_with_normal(const Vec2& nu, double angle_tol = 1e-9) const;

  // Facet j such that x lies in the cone spanned by its two endpoints.
  int facet_containing_direction(const Vec2& x) const;

  double c_phi() const;      // min of phi on the unit circle
  double big_c_phi() const;  // max of phi on the unit circle
  double diameter() const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<Facet> facets_;
  std::vector<double> vertex_angles_;  // polar angles, ascending after rotation
  int angle_origin_ = 0;               // vertex index with the smallest polar angle
};

Anisotropy build_wulff(std::span<const Vec2> vertices);

double phi(const Anisotropy& a, const Vec2& x);
double phi_dual(const Anisotropy& a, const Vec2& x);
bool facets_adjacent(const Anisotropy& a, int j, int k);

}  // namespace crystal_flow
