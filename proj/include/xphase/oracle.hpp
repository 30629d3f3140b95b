#pragma once

// Finite-difference 1D Schrodinger eigensolver. The three-point Laplacian on
// the interior grid points with psi = 0 at both ends gives a symmetric
// tridiagonal matrix; eigenvalues come from Sturm-count bisection, vectors
// from inverse iteration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "potential.hpp"

namespace xphase {

struct Grid1D {
  double x_min = -3.0;
  double x_max = 3.0;
  std::size_t n = 2001;
  /// Treat the edges as infinite walls: skips the confinement check, for
  /// box problems where V need not rise at the boundary.
  bool hard_walls = false;

  double spacing() const { return (x_max - x_min) / static_cast<double>(n - 1); }
  /// Measured from the centre: mirrored points of a symmetric grid are
  /// exact negatives.
  double at(std::size_t i) const {
    const double mid = 0.5 * (x_min + x_max);
    return mid + (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1)) * spacing();
  }

  void validate() const {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min))
      throw usage_error("grid: x_max must exceed x_min");
    if (n < 64) throw usage_error("grid: n must be at least 64");
  }
  friend bool operator==(const Grid1D&, const Grid1D&) = default;
};

struct SpectrumResult {
  std::vector<double> energies;
  /// One vector of length grid.n per level, zero at both ends, sum psi^2 h = 1.
  std::vector<std::vector<double>> wavefunctions;
  Grid1D grid;
  double hbar = 1.0;
  double mass = 1.0;

  std::size_t levels() const noexcept { return energies.size(); }
};

namespace detail {

struct Tridiagonal {
  std::vector<double> d;  // diagonal, size m
  std::vector<double> e;  // off-diagonal, size m - 1 (all equal here, kept general)

  std::size_t size() const noexcept { return d.size(); }

  /// Number of eigenvalues strictly below s (LDL^T inertia).
  std::size_t count_below(double s) const {
    // Pivots below pivmin are replaced by -pivmin, which keeps e^2/q finite.
    double pivmin = 1.0;
    for (double v : e) pivmin = std::max(pivmin, v * v);
    pivmin *= std::numeric_limits<double>::min();
    std::size_t c = 0;
    double q = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      q = i == 0 ? d[0] - s : d[i] - s - e[i - 1] * e[i - 1] / q;
      if (std::abs(q) < pivmin) q = -pivmin;
      if (q < 0) ++c;
    }
    return c;
  }

  std::pair<double, double> gershgorin() const {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < d.size(); ++i) {
      double r = 0.0;
      if (i > 0) r += std::abs(e[i - 1]);
      if (i + 1 < d.size()) r += std::abs(e[i]);
      lo = std::min(lo, d[i] - r);
      hi = std::max(hi, d[i] + r);
    }
    return {lo, hi};
  }

  double norm() const {
    const auto [lo, hi] = gershgorin();
    return std::max(std::abs(lo), std::abs(hi));
  }

  /// j-th smallest eigenvalue (0-based), bisected to working precision.
  double eigenvalue(std::size_t j) const {
    auto [lo, hi] = gershgorin();
    const double eps = std::numeric_limits<double>::epsilon();
    for (int it = 0; it < 2000; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (hi - lo <= 2.0 * eps * std::max(std::abs(lo), std::abs(hi))) break;
      if (count_below(mid) > j) hi = mid;
      else lo = mid;
    }
    return 0.5 * (lo + hi);
  }

  /// Residual max-norm of (T - s) v.
  double residual(double s, const std::vector<double>& v) const {
    double r = 0.0;
    const std::size_t m = d.size();
    for (std::size_t i = 0; i < m; ++i) {
      double a = (d[i] - s) * v[i];
      if (i > 0) a += e[i - 1] * v[i - 1];
      if (i + 1 < m) a += e[i] * v[i + 1];
      r = std::max(r, std::abs(a));
    }
    return r;
  }

  /// Solves (T - s) x = b in place by Gaussian elimination with partial
  /// pivoting; zero pivots are nudged to eps * |T|, as inverse iteration
  /// expects a nearly singular system.
  void shifted_solve(double s, std::vector<double>& b) const {
    const std::size_t m = d.size();
    const double nudge = std::numeric_limits<double>::epsilon() * norm();
    // Row i of U holds u0 (diagonal), u1, u2 (two superdiagonals).
    std::vector<double> u0(m), u1(m, 0.0), u2(m, 0.0);
    double a0 = d[0] - s, a1 = m > 1 ? e[0] : 0.0, a2 = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      // Current pivot row (a0, a1, a2) against next row (e[i], d[i+1]-s, e[i+1]).
      double n0 = e[i], n1 = d[i + 1] - s, n2 = i + 2 < m ? e[i + 1] : 0.0;
      if (std::abs(n0) > std::abs(a0)) {
        std::swap(a0, n0);
        std::swap(a1, n1);
        std::swap(a2, n2);
        std::swap(b[i], b[i + 1]);
      }
      if (a0 == 0.0) a0 = nudge;
      const double f = n0 / a0;
      u0[i] = a0;
      u1[i] = a1;
      u2[i] = a2;
      b[i + 1] -= f * b[i];
      a0 = n1 - f * a1;
      a1 = n2 - f * a2;
      a2 = 0.0;
    }
    u0[m - 1] = a0 == 0.0 ? nudge : a0;
    for (std::size_t k = m; k-- > 0;) {
      double acc = b[k];
      if (k + 1 < m) acc -= u1[k] * b[k + 1];
      if (k + 2 < m) acc -= u2[k] * b[k + 2];
      b[k] = acc / u0[k];
    }
  }
};

inline double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

/// Eigenvector for the (already accurate) eigenvalue s, orthogonal to the
/// vectors in `against`.
inline std::vector<double> inverse_iteration(const Tridiagonal& t, double s,
                                             const std::vector<std::vector<double>>& against,
                                             std::size_t level) {
  const std::size_t m = t.size();
  const double tol = 1e3 * static_cast<double>(m) * std::numeric_limits<double>::epsilon() *
                     t.norm();
  double best = std::numeric_limits<double>::infinity();
  for (double offset : {0.0, 1e-12, -1e-12}) {
    const double shift = s + offset * std::max(1.0, std::abs(s));
    std::vector<double> v(m);
    // Deterministic start with components in every direction.
    for (std::size_t i = 0; i < m; ++i) v[i] = 1.0 + 0.5 * std::sin(0.7 * double(i) + 0.3);
    for (int it = 0; it < 8; ++it) {
      for (const auto& w : against) {
        double dot = 0.0;
        for (std::size_t i = 0; i < m; ++i) dot += w[i] * v[i];
        for (std::size_t i = 0; i < m; ++i) v[i] -= dot * w[i];
      }
      const double nv = norm2(v);
      for (double& a : v) a /= nv;
      t.shifted_solve(shift, v);
      for (const auto& w : against) {
        double dot = 0.0;
        for (std::size_t i = 0; i < m; ++i) dot += w[i] * v[i];
        for (std::size_t i = 0; i < m; ++i) v[i] -= dot * w[i];
      }
      const double nn = norm2(v);
      if (!std::isfinite(nn) || nn == 0.0) break;
      for (double& a : v) a /= nn;
      const double r = t.residual(s, v);
      best = std::min(best, r);
      if (it >= 1 && r <= tol) return v;
    }
  }
  std::ostringstream msg;
  msg << "inverse iteration did not converge for level " << level << " (E=" << s
      << ", best residual " << best << ", tolerance " << tol << ")";
  throw numeric_error(msg.str());
}

struct Eigenpairs {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
};

/// Lowest k eigenpairs of t (k clamped to its size).
inline Eigenpairs lowest_pairs(const Tridiagonal& t, std::size_t k) {
  k = std::min(k, t.size());
  Eigenpairs out;
  for (std::size_t j = 0; j < k; ++j) out.values.push_back(t.eigenvalue(j));
  // Levels closer than this are treated as a cluster and orthogonalized.
  auto clustered = [](double a, double b) {
    return std::abs(a - b) < 1e-6 * std::max({1.0, std::abs(a), std::abs(b)});
  };
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<std::vector<double>> against;
    for (std::size_t i = 0; i < j; ++i)
      if (clustered(out.values[j], out.values[i])) against.push_back(out.vectors[i]);
    out.vectors.push_back(inverse_iteration(t, out.values[j], against, j));
  }
  return out;
}

/// Splits a persymmetric tridiagonal matrix into its even and odd blocks,
/// solves each and unfolds the vectors to full length. Near-degenerate
/// doublets then come out with exact parity instead of a rounding-level mix.
inline Eigenpairs parity_pairs(const Tridiagonal& t, std::size_t k) {
  const std::size_t m = t.size(), half = m / 2;
  const double e = t.e[0];
  Tridiagonal even, odd;
  // Maps block vector w to the full vector (sign = +1 even, -1 odd).
  std::function<std::vector<double>(const std::vector<double>&, double)> unfold;
  if (m % 2 == 1) {
    const std::size_t c = half;
    even.d.assign(t.d.begin() + c, t.d.end());
    even.e.assign(half, e);
    if (half > 0) even.e[0] = std::sqrt(2.0) * e;
    odd.d.assign(t.d.begin() + c + 1, t.d.end());
    odd.e.assign(half > 0 ? half - 1 : 0, e);
    unfold = [c, m](const std::vector<double>& w, double sign) {
      std::vector<double> v(m, 0.0);
      const bool is_even = sign > 0;
      if (is_even) v[c] = std::sqrt(2.0) * w[0];
      const std::size_t shift = is_even ? 0 : 1;
      for (std::size_t k = 1; k <= c; ++k) {
        v[c + k] = w[k - shift];
        v[c - k] = sign * w[k - shift];
      }
      return v;
    };
  } else {
    const std::size_t c = half;
    even.d.assign(t.d.begin() + c, t.d.end());
    even.e.assign(half - 1, e);
    odd = even;
    even.d[0] += e;
    odd.d[0] -= e;
    unfold = [c, m](const std::vector<double>& w, double sign) {
      std::vector<double> v(m, 0.0);
      for (std::size_t k = 0; k < c; ++k) {
        v[c + k] = w[k];
        v[c - 1 - k] = sign * w[k];
      }
      return v;
    };
  }
  const auto pe = lowest_pairs(even, k);
  const auto po = odd.size() > 0 ? lowest_pairs(odd, k) : Eigenpairs{};
  Eigenpairs out;
  std::size_t a = 0, b = 0;
  while (out.values.size() < k && (a < pe.values.size() || b < po.values.size())) {
    const bool take_even =
        b >= po.values.size() || (a < pe.values.size() && pe.values[a] <= po.values[b]);
    auto v = take_even ? unfold(pe.vectors[a], 1.0) : unfold(po.vectors[b], -1.0);
    const double nv = norm2(v);
    for (double& x : v) x /= nv;
    out.values.push_back(take_even ? pe.values[a++] : po.values[b++]);
    out.vectors.push_back(std::move(v));
  }
  return out;
}

inline bool even_polynomial(const Potential& v) {
  const auto& c = v.coefficients();
  for (std::size_t i = 1; i < c.size(); i += 2)
    if (c[i] != 0.0) return false;
  return true;
}

}  // namespace detail

/// Lowest k eigenpairs of -hbar^2/(2m) d^2/dx^2 + V on the grid. An even
/// potential on a grid symmetric about 0 is solved parity block by parity
/// block unless use_parity is false.
inline SpectrumResult eigensolve(const Potential& v, const Grid1D& grid, double hbar,
                                 double mass, std::size_t k, bool use_parity = true) {
  grid.validate();
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw usage_error("hbar must be positive");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw usage_error("mass must be positive");
  if (k == 0 || k > grid.n / 4)
    throw usage_error("levels must be between 1 and n/4 = " + std::to_string(grid.n / 4));

  const double h = grid.spacing();
  const double kin = hbar * hbar / (mass * h * h);
  const std::size_t m = grid.n - 2;
  detail::Tridiagonal t;
  t.d.resize(m);
  t.e.assign(m - 1, -0.5 * kin);
  for (std::size_t i = 0; i < m; ++i) t.d[i] = kin + v(grid.at(i + 1));

  if (!grid.hard_walls) {
    const double wall = std::min(v(grid.x_min), v(grid.x_max));
    const double top = t.eigenvalue(k - 1);
    if (top >= wall) {
      std::ostringstream msg;
      msg << "potential does not confine level " << k - 1 << " on [" << grid.x_min << ", "
          << grid.x_max << "]: E=" << top << " >= edge value " << wall;
      throw domain_error(msg.str());
    }
  }

  const bool symmetric = use_parity && grid.x_min == -grid.x_max && detail::even_polynomial(v);
  auto pairs = symmetric ? detail::parity_pairs(t, k) : detail::lowest_pairs(t, k);

  SpectrumResult out;
  out.grid = grid;
  out.hbar = hbar;
  out.mass = mass;
  out.energies = std::move(pairs.values);
  const double scale = 1.0 / std::sqrt(h);
  for (auto& u : pairs.vectors) {
    // Sign convention: first component above 1e-6 of the peak is positive.
    double peak = 0.0;
    for (double a : u) peak = std::max(peak, std::abs(a));
    double sign = 1.0;
    for (double a : u)
      if (std::abs(a) > 1e-6 * peak) {
        sign = a > 0 ? 1.0 : -1.0;
        break;
      }
    std::vector<double> psi(grid.n, 0.0);
    for (std::size_t i = 0; i < m; ++i) psi[i + 1] = sign * scale * u[i];
    out.wavefunctions.push_back(std::move(psi));
  }
  return out;
}

/// Weight of a grid function left and right of split_at. A grid point that
/// sits exactly on split_at contributes half to each side.
inline std::pair<double, double> well_probabilities(const std::vector<double>& psi,
                                                    const Grid1D& grid, double split_at) {
  if (psi.size() != grid.n) throw usage_error("wavefunction length does not match the grid");
  const double h = grid.spacing();
  double left = 0.0, total = 0.0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double w = psi[i] * psi[i] * h;
    total += w;
    const double x = grid.at(i);
    if (x < split_at) left += w;
    else if (x == split_at) left += 0.5 * w;
  }
  if (total == 0.0) throw usage_error("wavefunction is identically zero");
  left /= total;
  return {left, 1.0 - left};
}

inline std::pair<double, double> well_probabilities(const SpectrumResult& r, std::size_t level,
                                                    double split_at) {
  if (level >= r.levels())
    throw usage_error("level " + std::to_string(level) + " not computed (have " +
                      std::to_string(r.levels()) + ")");
  return well_probabilities(r.wavefunctions[level], r.grid, split_at);
}

/// (psi_a + sign psi_b)/sqrt2. With the positive-first sign convention,
/// sign = +1 on the ground doublet localizes in the left well.
inline std::vector<double> doublet_combination(const SpectrumResult& r, std::size_t a,
                                               std::size_t b, double sign = 1.0) {
  if (a >= r.levels() || b >= r.levels()) throw usage_error("doublet level not computed");
  std::vector<double> out(r.grid.n);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (r.wavefunctions[a][i] + sign * r.wavefunctions[b][i]) / std::sqrt(2.0);
  return out;
}

/// Sign changes of psi, ignoring entries below 1e-8 of the peak.
inline std::size_t node_count(const std::vector<double>& psi) {
  double peak = 0.0;
  for (double a : psi) peak = std::max(peak, std::abs(a));
  std::size_t nodes = 0;
  int last = 0;
  for (double a : psi) {
    if (std::abs(a) <= 1e-8 * peak) continue;
    const int s = a > 0 ? 1 : -1;
    if (last != 0 && s != last) ++nodes;
    last = s;
  }
  return nodes;
}

}  // namespace xphase
