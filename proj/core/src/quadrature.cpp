#include "mmshape/quadrature.hpp"

#include <array>
#include <cmath>

#include "mmshape/errors.hpp"

namespace mmshape {

namespace {

struct BaryPoint {
  double l0, l1, l2, w;  // weights sum to one
};

// Symmetric orbits of the Dunavant family (all weights positive).
std::vector<BaryPoint> reference_rule(int degree) {
  std::vector<BaryPoint> r;
  auto orbit3 = [&r](double a, double w) {  // (a, a, 1 - 2a) and permutations
    const double b = 1.0 - 2.0 * a;
    r.push_back({a, a, b, w});
    r.push_back({a, b, a, w});
    r.push_back({b, a, a, w});
  };
  auto orbit6 = [&r](double a, double b, double w) {
    const double c = 1.0 - a - b;
    r.push_back({a, b, c, w});
    r.push_back({b, c, a, w});
    r.push_back({c, a, b, w});
    r.push_back({b, a, c, w});
    r.push_back({a, c, b, w});
    r.push_back({c, b, a, w});
  };
  switch (degree) {
    case 1:
      r.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0});
      break;
    case 2:
      orbit3(1.0 / 6.0, 1.0 / 3.0);
      break;
    case 3:  // the degree-3 Dunavant rule has a negative weight; use the degree-4 one
    case 4:
      orbit3(0.445948490915964886318329253883, 0.223381589678011465944640984100);
      orbit3(0.091576213509770743459571463402, 0.109951743655321867388692349233);
      break;
    case 5: {
      const double s15 = std::sqrt(15.0);
      r.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0});
      orbit3((6.0 - s15) / 21.0, (155.0 - s15) / 1200.0);
      orbit3((6.0 + s15) / 21.0, (155.0 + s15) / 1200.0);
      break;
    }
    case 6:
      orbit3(0.063089014491502228340331602870, 0.050844906370206816920936809106);
      orbit3(0.249286745170910421291638553107, 0.116786275726379366030690538687);
      orbit6(0.053145049844816947353249671631, 0.310352451033784405416607733956,
             0.082851075618373575193553456421);
      break;
    default:
      throw InvalidArgument("triangle_quadrature: degree must be in 1..6");
  }
  return r;
}

}  // namespace

void QuadratureRule::append(const QuadratureRule& other) {
  points.insert(points.end(), other.points.begin(), other.points.end());
  weights.insert(weights.end(), other.weights.begin(), other.weights.end());
}

QuadratureRule triangle_quadrature(const Triangle& tri, int degree) {
  const double area = std::abs(signed_area(tri[0], tri[1], tri[2]));
  QuadratureRule q;
  for (const auto& p : reference_rule(degree)) {
    q.points.push_back(p.l0 * tri[0] + p.l1 * tri[1] + p.l2 * tri[2]);
    q.weights.push_back(p.w * area);
  }
  return q;
}

QuadratureRule segment_gauss2(const Vec2& a, const Vec2& b) {
  const double len = (b - a).norm();
  const double s = 0.5 / std::sqrt(3.0);
  QuadratureRule q;
  q.points = {a + (0.5 - s) * (b - a), a + (0.5 + s) * (b - a)};
  q.weights = {0.5 * len, 0.5 * len};
  return q;
}

}  // namespace mmshape
