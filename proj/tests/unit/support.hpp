#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mmshape/mesh.hpp"

namespace testing {

// Uniform doubles from a fixed-seed Mersenne twister; the mantissa is built by
// hand so the sequence does not depend on the standard library's distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 gen_;
};

inline double sum_cell_areas(const mmshape::Mesh& m) {
  double s = 0.0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) s += m.cell_area(static_cast<int>(c));
  return s;
}

// Area enclosed by the boundary loops (outer minus holes).
inline double loop_area(const mmshape::Mesh& m) {
  double s = 0.0;
  for (const auto& l : mmshape::boundary_loops(m)) s += l.signed_area;
  return s;
}

}  // namespace testing

namespace testing {

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Exact ∫_P x^p y^q over a simple CCW polygon from the edge-sum (Green's theorem)
// moment formula; independent of any quadrature.
inline double polygon_moment(const std::vector<mmshape::Vec2>& v, int p, int q) {
  double s = 0.0;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % n];
    const double w = a.x() * b.y() - b.x() * a.y();
    double inner = 0.0;
    for (int k = 0; k <= p; ++k)
      for (int l = 0; l <= q; ++l)
        inner += binomial(k + l, l) * binomial(p + q - k - l, q - l) * std::pow(a.x(), k) * std::pow(b.x(), p - k) *
                 std::pow(a.y(), l) * std::pow(b.y(), q - l);
    s += w * inner;
  }
  return s / ((p + q + 2) * (p + q + 1) * binomial(p + q, p));
}

// Random convex polygon: 3..10 points on a random ellipse, sorted by angle.
inline std::vector<mmshape::Vec2> random_convex_polygon(Rng& rng) {
  const int n = 3 + static_cast<int>(rng.uniform() * 8);
  const mmshape::Vec2 c(rng.uniform(-1, 1), rng.uniform(-1, 1));
  const double ax = rng.uniform(0.1, 1.0), ay = rng.uniform(0.1, 1.0), rot = rng.uniform(0, 6.283185307179586);
  std::vector<double> angles(n);
  for (auto& t : angles) t = rng.uniform(0, 6.283185307179586);
  std::sort(angles.begin(), angles.end());
  std::vector<mmshape::Vec2> out;
  for (double t : angles) {
    const mmshape::Vec2 e(ax * std::cos(t), ay * std::sin(t));
    out.emplace_back(c.x() + std::cos(rot) * e.x() - std::sin(rot) * e.y(),
                     c.y() + std::sin(rot) * e.x() + std::cos(rot) * e.y());
  }
  return out;
}

}  // namespace testing
