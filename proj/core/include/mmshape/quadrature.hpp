#pragma once

#include <vector>

#include "mmshape/mesh.hpp"

namespace mmshape {

struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  void append(const QuadratureRule& other);

  template <typename F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t q = 0; q < weights.size(); ++q) s += weights[q] * f(points[q]);
    return s;
  }
};

/// Symmetric rule with non-negative weights, exact for total degree <= `degree` (1..6).
QuadratureRule triangle_quadrature(const Triangle& tri, int degree);

/// Two-point Gauss rule on the segment [a, b].
QuadratureRule segment_gauss2(const Vec2& a, const Vec2& b);

}  // namespace mmshape
