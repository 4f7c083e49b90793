#pragma once

#include <memory>
#include <vector>

#include <doctest.h>

#include "crystal_flow/analysis.hpp"
#include "crystal_flow/error.hpp"

#define CHECK_ERROR_KIND(expr, expected)                  \
  do {                                                    \
    bool thrown_ = false;                                 \
    try {                                                 \
      (void)(expr);                                       \
    } catch (const crystal_flow::Error& e_) {             \
      thrown_ = true;                                     \
      CHECK_MESSAGE(e_.kind() == (expected), e_.what());  \
    }                                                     \
    CHECK_MESSAGE(thrown_, "expected an exception");      \
  } while (0)

namespace testing {

using namespace crystal_flow;

inline std::shared_ptr<const Anisotropy> square() { return square_anisotropy(); }

inline std::shared_ptr<const Anisotropy> regular(int n) {
  return std::make_shared<const Anisotropy>(Anisotropy::regular(n));
}

// Clockwise axis-aligned rectangle with top-left corner (x0, y0).
inline AdmissibleCurve rectangle(double W, double H, double x0 = 0.0, double y0 = 0.0) {
  const std::vector<Vec2> v{{x0, y0}, {x0 + W, y0}, {x0 + W, y0 - H}, {x0, y0 - H}};
  return AdmissibleCurve::build(square(), Topology::Closed, v);
}

inline AdmissibleCurve wulff_square(double R, Vec2 c = Vec2::Zero()) { return rectangle(2 * R, 2 * R, c.x() - R, c.y() + R); }

// Rectangle with a small step down on the top side; one concave vertex.
inline AdmissibleCurve stepped_rectangle(double step = 0.2) {
  const std::vector<Vec2> v{{-3, 2}, {0, 2}, {0, 2 - step}, {3, 2 - step}, {3, -2}, {-3, -2}};
  return AdmissibleCurve::build(square(), Topology::Closed, v);
}

// Rectangle with a rectangular notch cut into the top side.
inline AdmissibleCurve notched_rectangle() {
  const std::vector<Vec2> v{{-3, 2}, {-1, 2}, {-1, 1}, {1, 1}, {1, 2}, {3, 2}, {3, -2}, {-3, -2}};
  return AdmissibleCurve::build(square(), Topology::Closed, v);
}

// Pentagon with a bottom facet whose end angles sum to less than pi.
inline std::shared_ptr<const Anisotropy> pentagon() {
  const std::vector<Vec2> v{{-1, -1}, {1, -1}, {0.487, 0.41}, {0, 1.2}, {-0.487, 0.41}};
  return std::make_shared<const Anisotropy>(Anisotropy::from_vertices(v));
}

}  // namespace testing
