/// @file quadrature.hpp
/// @brief Gauss rules on [0,1], the bilinear cell map and triangle integration.
#pragma once

#include "stagflow/mesh.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <type_traits>

namespace stagflow::quad {

struct Rule1D {
  std::array<double, 3> points;
  std::array<double, 3> weights;
};

/// 3-point Gauss-Legendre on [0,1]; exact up to degree 5.
inline constexpr Rule1D kGauss3{
    {0.5 - 0.3872983346207416885, 0.5, 0.5 + 0.3872983346207416885},
    {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};

/// Bilinear (Q1) map of a quadrilateral from the reference square.
class BilinearMap {
 public:
  BilinearMap(const Mesh& mesh, int cell) {
    const auto& v = mesh.cell(cell).vertices;
    for (int a = 0; a < 4; ++a) x_[a] = mesh.vertex(v[a]);
  }

  Vec2 operator()(double xi, double eta) const {
    return (1 - xi) * (1 - eta) * x_[0] + xi * (1 - eta) * x_[1] + xi * eta * x_[2] +
           (1 - xi) * eta * x_[3];
  }

  /// Columns are dx/dxi and dx/deta.
  Eigen::Matrix2d jacobian(double xi, double eta) const {
    Eigen::Matrix2d j;
    j.col(0) = (1 - eta) * (x_[1] - x_[0]) + eta * (x_[2] - x_[3]);
    j.col(1) = (1 - xi) * (x_[3] - x_[0]) + xi * (x_[2] - x_[1]);
    return j;
  }

 private:
  std::array<Vec2, 4> x_;
};

/// Integral over cell k of f(x), with f called as f(x, xi, eta).
template <class F>
auto integrate_cell(const Mesh& mesh, int k, F&& f) {
  const BilinearMap map(mesh, k);
  decltype(f(Vec2(), 0.0, 0.0)) acc{};
  bool first = true;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double xi = kGauss3.points[i], eta = kGauss3.points[j];
      const double w = kGauss3.weights[i] * kGauss3.weights[j] * map.jacobian(xi, eta).determinant();
      if (first) {
        acc = w * f(map(xi, eta), xi, eta);
        first = false;
      } else {
        acc += w * f(map(xi, eta), xi, eta);
      }
    }
  return acc;
}

/// Integral of f over the segment [a, b].
template <class F>
auto integrate_segment(const Vec2& a, const Vec2& b, F&& f) {
  const double len = (b - a).norm();
  std::decay_t<decltype(f(a))> acc = kGauss3.weights[0] * f(a + kGauss3.points[0] * (b - a));
  for (int q = 1; q < 3; ++q) acc += kGauss3.weights[q] * f(a + kGauss3.points[q] * (b - a));
  acc *= len;
  return acc;
}

/// Integral of f over a triangle by the collapsed (Duffy) 3x3 Gauss rule.
template <class F>
auto integrate_triangle(const Vec2& a, const Vec2& b, const Vec2& c, F&& f) {
  const double area2 = std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
  decltype(f(Vec2())) acc{};
  bool first = true;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double s = kGauss3.points[i], t = kGauss3.points[j];
      const Vec2 x = a + s * (b - a) + (1 - s) * t * (c - a);
      const double w = kGauss3.weights[i] * kGauss3.weights[j] * (1 - s) * area2;
      if (first) {
        acc = w * f(x);
        first = false;
      } else {
        acc += w * f(x);
      }
    }
  return acc;
}

}  // namespace stagflow::quad
