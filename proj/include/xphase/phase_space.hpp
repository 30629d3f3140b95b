#pragma once

// The doubled phase space X = (x, y, p, q) and the constant structure
// matrices acting on it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace xphase {

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<Vec4, 4>;

struct PhasePoint {
  double x = 0.0;
  double y = 0.0;
  double p = 0.0;
  double q = 0.0;

  static PhasePoint from(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
  Vec4 to_array() const { return {x, y, p, q}; }

  double max_norm() const {
    return std::max({std::abs(x), std::abs(y), std::abs(p), std::abs(q)});
  }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(p) && std::isfinite(q);
  }

  PhasePoint& operator+=(const PhasePoint& o) {
    x += o.x; y += o.y; p += o.p; q += o.q;
    return *this;
  }
  friend PhasePoint operator+(PhasePoint a, const PhasePoint& b) { return a += b; }
  friend PhasePoint operator-(const PhasePoint& a, const PhasePoint& b) {
    return {a.x - b.x, a.y - b.y, a.p - b.p, a.q - b.q};
  }
  friend PhasePoint operator*(double s, const PhasePoint& a) {
    return {s * a.x, s * a.y, s * a.p, s * a.q};
  }
  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

/// A point of the real 2D phase space (x, p).
struct CanonicalPair {
  double x = 0.0;
  double p = 0.0;
  friend bool operator==(const CanonicalPair&, const CanonicalPair&) = default;
};

inline Vec4 mat_vec(const Mat4& m, const Vec4& v) {
  Vec4 out{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) out[i] += m[i][j] * v[j];
  return out;
}

inline Mat4 multiply(const Mat4& a, const Mat4& b) {
  Mat4 out{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t j = 0; j < 4; ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

inline bool is_antisymmetric(const Mat4& m) {
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (m[i][j] != -m[j][i]) return false;
  return true;
}

/// Constant matrices of the extended phase space, index order (x, y, p, q).
namespace structure {

/// Symplectic form [[0, I], [-I, 0]]: pairs x with p and y with q.
inline constexpr Mat4 omega{{{0, 0, 1, 0}, {0, 0, 0, 1}, {-1, 0, 0, 0}, {0, -1, 0, 0}}};

/// block-diag(sigma_1, sigma_1): grad H- = Gamma grad H+.
inline constexpr Mat4 gamma{{{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}}};

/// block-diag(-i sigma_2, i sigma_2) = block-diag([[0,-1],[1,0]], [[0,1],[-1,0]]).
/// Both blocks are real, so grad H_I = Lambda grad H_R is a real relation; the
/// signs are pinned by the Cauchy-Riemann equations for Z = x + iy, P = p - iq.
inline constexpr Mat4 lambda{{{0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, -1, 0}}};

/// i sigma_2 = [[0, 1], [-1, 0]], the real 2D symplectic form on (x, p).
inline constexpr std::array<std::array<double, 2>, 2> omega2{{{0, 1}, {-1, 0}}};

}  // namespace structure
}  // namespace xphase
