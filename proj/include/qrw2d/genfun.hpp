#pragma once
// Denominator H = xy det(I - z M U) and numerators G^(i,j) of the spacetime
// generating function F = (I - z M U)^{-1} = G / H, plus root finding in z.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qrw2d/laurent.hpp"
#include "qrw2d/model.hpp"

namespace qrw2d {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

/// Point of the unit 3-torus given by its angles.
struct TorusPoint3 {
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  cplx x{1.0, 0.0}, y{1.0, 0.0}, z{1.0, 0.0};

  TorusPoint3() = default;
  TorusPoint3(double a, double b, double g)
      : alpha(wrap_angle(a)), beta(wrap_angle(b)), gamma(wrap_angle(g)),
        x(std::polar(1.0, alpha)), y(std::polar(1.0, beta)), z(std::polar(1.0, gamma)) {}
};

/// Flat-torus distance between angle triples.
inline double torus_distance(const TorusPoint3& p, const TorusPoint3& q) {
  auto d = [](double a, double b) {
    const double t = std::abs(wrap_angle(a - b));
    return std::min(t, kTwoPi - t);
  };
  const double da = d(p.alpha, q.alpha), db = d(p.beta, q.beta), dg = d(p.gamma, q.gamma);
  return std::sqrt(da * da + db * db + dg * dg);
}

namespace detail {

using LaurentMatrix = std::array<std::array<LaurentPoly3, 4>, 4>;

// A = I - z M U with M = diag(x, 1/x, y, 1/y).
inline LaurentMatrix kernel_matrix(const Coin& u) {
  static constexpr std::array<Exponent, 4> diag{{{1, 0, 1}, {-1, 0, 1}, {0, 1, 1}, {0, -1, 1}}};
  LaurentMatrix a;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      LaurentPoly3 e = LaurentPoly3::monomial(diag[i], -u(static_cast<int>(i), static_cast<int>(j)));
      if (i == j) e = e + LaurentPoly3::constant(1.0);
      a[i][j] = e;
    }
  return a;
}

// Determinant of the submatrix on `rows` x `cols` by cofactor expansion.
inline LaurentPoly3 minor_det(const LaurentMatrix& a, const std::vector<std::size_t>& rows,
                              const std::vector<std::size_t>& cols) {
  if (rows.size() == 1) return a[rows[0]][cols[0]];
  LaurentPoly3 acc;
  const std::vector<std::size_t> sub_rows(rows.begin() + 1, rows.end());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    std::vector<std::size_t> sub_cols;
    for (std::size_t c = 0; c < cols.size(); ++c)
      if (c != k) sub_cols.push_back(cols[c]);
    const LaurentPoly3 term = a[rows[0]][cols[k]] * minor_det(a, sub_rows, sub_cols);
    acc = (k % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

}  // namespace detail

/// xy det(I - z M U).
inline LaurentPoly3 build_H(const CoinModel& model) {
  const auto a = detail::kernel_matrix(model.coin);
  return detail::minor_det(a, {0, 1, 2, 3}, {0, 1, 2, 3}).shifted({1, 1, 0});
}

/// xy times the (j, i) cofactor of I - z M U, so that F_ij = G_ij / H.
/// Indices are 0-based chiralities.
inline LaurentPoly3 build_G(const CoinModel& model, int i, int j) {
  if (i < 0 || i > 3 || j < 0 || j > 3) throw DomainError("build_G: chirality must be in 0..3");
  const auto a = detail::kernel_matrix(model.coin);
  std::vector<std::size_t> rows, cols;
  for (std::size_t k = 0; k < 4; ++k) {
    if (k != static_cast<std::size_t>(j)) rows.push_back(k);
    if (k != static_cast<std::size_t>(i)) cols.push_back(k);
  }
  LaurentPoly3 c = detail::minor_det(a, rows, cols);
  if ((i + j) % 2 == 1) c = cplx(-1.0) * c;
  return c.shifted({1, 1, 0});
}

struct ZRoots {
  std::vector<cplx> roots;      // sorted by argument in [0, 2pi)
  bool degree_dropped = false;  // leading or trailing z-coefficient vanished
};

inline constexpr double kDegreeDropTol = 1e-13;

/// Nonzero roots in z of p(x, y, .): companion-matrix eigenvalues, then one
/// Newton step each.
inline ZRoots roots_in_z(const LaurentPoly3& p, cplx x, cplx y) {
  ZRoots out;
  std::vector<cplx> c = p.z_coefficients(x, y);
  double scale = 0.0;
  for (const auto& v : c) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) {
    out.degree_dropped = true;
    return out;
  }
  const double cut = kDegreeDropTol * scale;
  while (!c.empty() && std::abs(c.back()) <= cut) {
    c.pop_back();
    out.degree_dropped = true;
  }
  std::size_t lo = 0;
  while (lo < c.size() && std::abs(c[lo]) <= cut) ++lo;
  if (lo > 0) {
    out.degree_dropped = true;
    c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(lo));
  }
  const int deg = static_cast<int>(c.size()) - 1;
  if (deg < 1) return out;

  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
  for (int k = 0; k < deg; ++k) comp(0, k) = -c[static_cast<std::size_t>(deg - 1 - k)] / c.back();
  for (int k = 1; k < deg; ++k) comp(k, k - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);

  auto horner = [&](cplx z, cplx& dval) {
    cplx v = c.back();
    dval = 0.0;
    for (int k = deg - 1; k >= 0; --k) {
      dval = dval * z + v;
      v = v * z + c[static_cast<std::size_t>(k)];
    }
    return v;
  };
  for (int k = 0; k < deg; ++k) {
    cplx z = es.eigenvalues()(k);
    cplx d;
    const cplx v = horner(z, d);
    if (std::abs(d) > 0.0) {
      const cplx zn = z - v / d;
      cplx d2;
      if (std::isfinite(zn.real()) && std::isfinite(zn.imag()) && std::abs(horner(zn, d2)) <= std::abs(v)) z = zn;
    }
    out.roots.push_back(z);
  }
  std::sort(out.roots.begin(), out.roots.end(),
            [](cplx a, cplx b) { return wrap_angle(std::arg(a)) < wrap_angle(std::arg(b)); });
  return out;
}

struct ToralityReport {
  double max_deviation = 0.0;  // max ||z| - 1| over all roots
  double worst_alpha = 0.0, worst_beta = 0.0;
  std::size_t samples = 0;
  bool degree_dropped = false;
  bool passed = false;
};

inline ToralityReport check_torality(const LaurentPoly3& h, std::size_t samples, double tol, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  ToralityReport rep;
  rep.samples = samples;
  for (std::size_t k = 0; k < samples; ++k) {
    const double a = ang(rng), b = ang(rng);
    const ZRoots zr = roots_in_z(h, std::polar(1.0, a), std::polar(1.0, b));
    rep.degree_dropped = rep.degree_dropped || zr.degree_dropped;
    for (const auto& z : zr.roots) {
      const double dev = std::abs(std::abs(z) - 1.0);
      if (dev > rep.max_deviation) {
        rep.max_deviation = dev;
        rep.worst_alpha = a;
        rep.worst_beta = b;
      }
    }
  }
  rep.passed = rep.max_deviation < tol;
  return rep;
}

inline ToralityReport check_torality(const CoinModel& model, std::size_t samples, double tol, std::uint64_t seed = 1) {
  return check_torality(build_H(model), samples, tol, seed);
}

/// H, all sixteen G^(i,j), and the torus-real rescaling of H.
struct GenFun {
  CoinModel model;
  LaurentPoly3 H;
  std::array<std::array<LaurentPoly3, 4>, 4> G;
  /// c x^{-1} y^{-1} z^{-2} H with c = det(U)^{-1/2}; real-valued on the torus
  /// for unitary U.
  LaurentPoly3 H_real;

  explicit GenFun(const CoinModel& m) : model(m), H(build_H(m)) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) G[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = build_G(m, i, j);
    const cplx det = m.coin.determinant();
    const cplx c = 1.0 / std::sqrt(det);
    LaurentPoly3 r = c * H.shifted({-1, -1, -2});
    double big = 0.0;
    for (const auto& t : r.terms()) big = std::max(big, std::abs(t.c));
    H_real = big > 0.0 ? cplx(1.0 / big) * r : r;
  }

  /// Sum_j G_ij u_j: numerator of the chirality-i amplitude for start vector u.
  LaurentPoly3 numerator(int i, const std::array<cplx, 4>& u) const {
    LaurentPoly3 acc;
    for (std::size_t j = 0; j < 4; ++j)
      if (u[j] != 0.0) acc = acc + u[j] * G[static_cast<std::size_t>(i)][j];
    return acc;
  }
};

}  // namespace qrw2d
