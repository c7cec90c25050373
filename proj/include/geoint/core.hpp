// SPDX-License-Identifier: Apache-2.0
//
// Fixed-size linear algebra and unit-interval quadrature.

#ifndef GEOINT_CORE_HPP
#define GEOINT_CORE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "geoint/errors.hpp"

namespace geoint {

/// Point or tangent vector in the plane.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double norm_inf(const Vec2& a) { return std::max(std::abs(a.x), std::abs(a.y)); }
inline bool is_finite(const Vec2& a) { return std::isfinite(a.x) && std::isfinite(a.y); }

/// Dense N x N matrix, row-major.
template <std::size_t N>
struct Mat {
  std::array<double, N * N> a{};

  static constexpr Mat identity() {
    Mat m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }
  static constexpr Mat zero() { return Mat{}; }

  constexpr double& operator()(std::size_t i, std::size_t j) { return a[i * N + j]; }
  constexpr double operator()(std::size_t i, std::size_t j) const { return a[i * N + j]; }

  constexpr Mat transposed() const {
    Mat t;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  constexpr Mat& operator+=(const Mat& o) {
    for (std::size_t k = 0; k < N * N; ++k) a[k] += o.a[k];
    return *this;
  }
  constexpr Mat& operator-=(const Mat& o) {
    for (std::size_t k = 0; k < N * N; ++k) a[k] -= o.a[k];
    return *this;
  }
  constexpr Mat& operator*=(double s) {
    for (auto& v : a) v *= s;
    return *this;
  }

  friend constexpr Mat operator+(Mat l, const Mat& r) { return l += r; }
  friend constexpr Mat operator-(Mat l, const Mat& r) { return l -= r; }
  friend constexpr Mat operator*(double s, Mat m) { return m *= s; }
  friend constexpr Mat operator*(Mat m, double s) { return m *= s; }

  friend constexpr Mat operator*(const Mat& l, const Mat& r) {
    Mat out;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < N; ++k) {
        const double lik = l(i, k);
        for (std::size_t j = 0; j < N; ++j) out(i, j) += lik * r(k, j);
      }
    return out;
  }

  friend constexpr bool operator==(const Mat&, const Mat&) = default;
};

using Mat2 = Mat<2>;
using Mat4 = Mat<4>;

constexpr Mat2 make_mat2(double a00, double a01, double a10, double a11) {
  Mat2 m;
  m(0, 0) = a00;
  m(0, 1) = a01;
  m(1, 0) = a10;
  m(1, 1) = a11;
  return m;
}

constexpr Vec2 operator*(const Mat2& m, const Vec2& v) {
  return {m(0, 0) * v.x + m(0, 1) * v.y, m(1, 0) * v.x + m(1, 1) * v.y};
}

/// Outer product a b^T.
constexpr Mat2 outer(const Vec2& a, const Vec2& b) {
  return make_mat2(a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y);
}

constexpr double det(const Mat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

template <std::size_t N>
double norm_inf(const Mat<N>& m) {
  double r = 0.0;
  for (double v : m.a) r = std::max(r, std::abs(v));
  return r;
}

/// Determinant by Gaussian elimination with partial pivoting.
template <std::size_t N>
double det(Mat<N> m) {
  double d = 1.0;
  for (std::size_t c = 0; c < N; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < N; ++r)
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    if (m(piv, c) == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t j = 0; j < N; ++j) std::swap(m(c, j), m(piv, j));
      d = -d;
    }
    d *= m(c, c);
    for (std::size_t r = c + 1; r < N; ++r) {
      const double f = m(r, c) / m(c, c);
      for (std::size_t j = c; j < N; ++j) m(r, j) -= f * m(c, j);
    }
  }
  return d;
}

/// Solves m x = rhs by explicit inverse. Throws SingularOperator when
/// |det m| < det_guard.
inline Vec2 solve(const Mat2& m, const Vec2& rhs, double det_guard = 1e-14) {
  const double d = det(m);
  if (!(std::abs(d) >= det_guard)) throw SingularOperator(d);
  return {(m(1, 1) * rhs.x - m(0, 1) * rhs.y) / d, (-m(1, 0) * rhs.x + m(0, 0) * rhs.y) / d};
}

/// Counter-clockwise rotation by theta. Since J = [[0,1],[-1,0]] squares to
/// -I, this is also exp(-theta J).
inline Mat2 rotation_matrix(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return make_mat2(c, -s, s, c);
}

/// Quarter turn, exact.
inline constexpr Mat2 kQuarterTurn = make_mat2(0.0, -1.0, 1.0, 0.0);

/// Applies the exact quarter turn (-y, x).
constexpr Vec2 quarter_turn(const Vec2& v) { return {-v.y, v.x}; }

/// Gauss-Legendre nodes and weights mapped to [0, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Builds the n-point rule by Newton iteration on P_n.
inline QuadratureRule gauss_legendre_rule(std::size_t n) {
  if (n == 0) throw DomainError("gauss_legendre_rule: node count must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        const double jd = static_cast<double>(j);
        p0 = ((2.0 * jd - 1.0) * z * p1 - (jd - 1.0) * p2) / jd;
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Nodes on [-1, 1] are +-z; map to [0, 1] and halve the weights.
    const double w = 1.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = 0.5 * (1.0 - z);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + z);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

/// Integral over [0, 1] with the n-point Gauss-Legendre rule; exact for
/// polynomials of degree <= 2n - 1.
template <class F>
double gauss_legendre_unit(F&& f, std::size_t n) {
  const QuadratureRule rule = gauss_legendre_rule(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += rule.weights[i] * f(rule.nodes[i]);
  return sum;
}

/// The five-point rule used by all chord integrals, built once.
inline const QuadratureRule& chord_rule() {
  static const QuadratureRule rule = gauss_legendre_rule(5);
  return rule;
}

}  // namespace geoint

#endif  // GEOINT_CORE_HPP
