#pragma once

#include <Eigen/Dense>

namespace crystal_flow {

using Vec2 = Eigen::Vector2d;
using Vector = Eigen::VectorXd;

template <typename Scalar>
using Vec2T = Eigen::Matrix<Scalar, 2, 1>;

// Counter-clockwise quarter turn: the normal of a tangent.
template <typename Derived>
Vec2T<typename Derived::Scalar> perp(const Eigen::MatrixBase<Derived>& v) {
  return Vec2T<typename Derived::Scalar>(-v.y(), v.x());
}

// Clockwise quarter turn: the tangent of a normal.
template <typename Derived>
Vec2T<typename Derived::Scalar> perp_cw(const Eigen::MatrixBase<Derived>& v) {
  return Vec2T<typename Derived::Scalar>(v.y(), -v.x());
}

template <typename A, typename B>
typename A::Scalar cross(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Intersection of the lines <n1,x> = d1 and <n2,x> = d2.
template <typename A, typename B>
Vec2T<typename A::Scalar> intersect_lines(const Eigen::MatrixBase<A>& n1, typename A::Scalar d1,
                                          const Eigen::MatrixBase<B>& n2, typename A::Scalar d2) {
  const auto det = cross(n1, n2);
  return Vec2T<typename A::Scalar>((d1 * n2.y() - d2 * n1.y()) / det,
                                   (n1.x() * d2 - n2.x() * d1) / det);
}

}  // namespace crystal_flow
