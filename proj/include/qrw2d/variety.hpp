#pragma once
// The unit-torus part V1 of {H = 0}: sheets over (alpha, beta), logarithmic
// Gauss map, Gauss-Kronecker curvature, singular points, S-family symmetries.
//
// Angles: x = e^{i alpha}, y = e^{i beta}, z = e^{i gamma}. Near a smooth
// point V1 is the graph gamma(alpha, beta) and the Gauss map sends it to the
// velocity v = -grad gamma = Re(x H_x / z H_z, y H_y / z H_z).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qrw2d/genfun.hpp"

namespace qrw2d {

class VerticalTangentError : public DomainError {
 public:
  using DomainError::DomainError;
};

class SingularPointError : public DomainError {
 public:
  using DomainError::DomainError;
};

inline constexpr double kCoincidentGap = 1e-7;
inline constexpr double kVerticalTangentTol = 1e-10;
inline constexpr double kSingularGradientTol = 1e-10;

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

struct SheetPoint {
  TorusPoint3 base;
  int sheet = 0;
  std::array<cplx, 3> grad_log_H{};
  Vec2 velocity{NAN, NAN};
  double curvature = NAN;
  bool near_coincident = false;
};

/// Gradient and Hessian of gamma(alpha, beta) on the sheet through p.
struct SheetJet {
  Vec2 grad_gamma{};
  Mat2 hess_gamma{};
  cplx dz{};  // z H_z
  std::array<cplx, 3> grad_log{};
};

inline SheetJet sheet_jet(const LaurentPoly3& h, const TorusPoint3& p) {
  const LogJet j = h.log_jet(p.x, p.y, p.z);
  if (std::abs(j.d[2]) < kVerticalTangentTol)
    throw VerticalTangentError("vertical tangent: |z H_z| below tolerance");
  SheetJet s;
  s.dz = j.d[2];
  s.grad_log = j.d;
  const cplx ga = -j.d[0] / j.d[2];
  const cplx gb = -j.d[1] / j.d[2];
  const cplx mi(0.0, -1.0);
  const cplx gaa = mi * (j.dd[0][0] + 2.0 * j.dd[0][2] * ga + j.dd[2][2] * ga * ga) / j.d[2];
  const cplx gbb = mi * (j.dd[1][1] + 2.0 * j.dd[1][2] * gb + j.dd[2][2] * gb * gb) / j.d[2];
  const cplx gab = mi * (j.dd[0][1] + j.dd[0][2] * gb + j.dd[1][2] * ga + j.dd[2][2] * ga * gb) / j.d[2];
  s.grad_gamma = {ga.real(), gb.real()};
  s.hess_gamma = {{{gaa.real(), gab.real()}, {gab.real(), gbb.real()}}};
  return s;
}

inline double det2(const Mat2& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

/// det Hess(gamma) / (1 + |grad gamma|^2)^2
inline double graph_curvature(const SheetJet& s) {
  const double g2 = s.grad_gamma[0] * s.grad_gamma[0] + s.grad_gamma[1] * s.grad_gamma[1];
  return det2(s.hess_gamma) / ((1.0 + g2) * (1.0 + g2));
}

/// Newton in z from z0 with x, y fixed. Returns nullopt if it fails to settle.
inline std::optional<cplx> track_z(const LaurentPoly3& h, cplx x, cplx y, cplx z0, int max_iter = 30) {
  cplx z = z0;
  for (int it = 0; it < max_iter; ++it) {
    const auto g = h.grad_log(x, y, z);
    const cplx v = h.eval(x, y, z);
    if (g[2] == 0.0) return std::nullopt;
    const cplx dz = v * z / g[2];
    z -= dz;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) < 1e-3) return std::nullopt;
    if (std::abs(dz) < 1e-15) return z;
  }
  const cplx v = h.eval(x, y, z);
  if (std::abs(v) < 1e-12) return z;
  return std::nullopt;
}

/// The point of V1 over (alpha, beta) continued from gamma0.
inline std::optional<TorusPoint3> track_point(const LaurentPoly3& h, double alpha, double beta, double gamma0) {
  const auto z = track_z(h, std::polar(1.0, alpha), std::polar(1.0, beta), std::polar(1.0, gamma0));
  if (!z) return std::nullopt;
  return TorusPoint3(alpha, beta, std::arg(*z));
}

inline double angle_gap(double a, double b) {
  const double d = std::abs(wrap_angle(a - b));
  return std::min(d, kTwoPi - d);
}

/// All points of V1 over (alpha, beta), ordered by gamma in [0, 2pi).
inline std::vector<SheetPoint> sheets(const GenFun& gf, double alpha, double beta) {
  const ZRoots zr = roots_in_z(gf.H, std::polar(1.0, alpha), std::polar(1.0, beta));
  std::vector<SheetPoint> out;
  const std::size_t m = zr.roots.size();
  for (std::size_t k = 0; k < m; ++k) {
    SheetPoint sp;
    sp.base = TorusPoint3(alpha, beta, std::arg(zr.roots[k]));
    sp.sheet = static_cast<int>(k);
    const LogJet j = gf.H.log_jet(sp.base.x, sp.base.y, sp.base.z);
    sp.grad_log_H = j.d;
    if (m > 1) {
      const double prev = std::arg(zr.roots[(k + m - 1) % m]);
      const double next = std::arg(zr.roots[(k + 1) % m]);
      sp.near_coincident = std::min(angle_gap(prev, sp.base.gamma), angle_gap(next, sp.base.gamma)) < kCoincidentGap;
    }
    if (std::abs(j.d[2]) >= kVerticalTangentTol) {
      const SheetJet s = sheet_jet(gf.H, sp.base);
      sp.velocity = {-s.grad_gamma[0], -s.grad_gamma[1]};
      sp.curvature = graph_curvature(s);
    }
    out.push_back(sp);
  }
  return out;
}

inline Vec2 gauss_velocity(const LaurentPoly3& h, const TorusPoint3& p) {
  const auto g = h.grad_log(p.x, p.y, p.z);
  if (std::abs(g[2]) < kVerticalTangentTol) throw VerticalTangentError("vertical tangent: |z H_z| below tolerance");
  return {(g[0] / g[2]).real(), (g[1] / g[2]).real()};
}

inline Vec2 gauss_velocity(const GenFun& gf, const SheetPoint& p) { return gauss_velocity(gf.H, p.base); }

// ---------------------------------------------------------------------------
// Real sections

struct SectionJet {
  double value = 0.0;
  std::array<double, 3> grad{};
  std::array<std::array<double, 3>, 3> hess{};
};

/// A real function L(alpha, beta, gamma) on the flat torus with {L = 0} = V1.
/// S and B use their trigonometric forms; every other coin uses the real
/// rescaling of H from GenFun.
class RealSection {
 public:
  enum class Kind { S, B, Generic };

  explicit RealSection(const GenFun& gf) : poly_(gf.H_real) {
    if (gf.model.t && gf.model.family == Family::S) kind_ = Kind::S;
    if (gf.model.t && gf.model.family == Family::B) kind_ = Kind::B;
    if (gf.model.t) cs_ = std::sqrt(2.0 * *gf.model.t);
    if (gf.model.t) t_ = *gf.model.t;
  }

  Kind kind() const { return kind_; }

  double value(double a, double b, double g) const { return jet(a, b, g).value; }

  SectionJet jet(double a, double b, double g) const {
    switch (kind_) {
      case Kind::S: return jet_S(a, b, g);
      case Kind::B: return jet_B(a, b, g);
      case Kind::Generic: break;
    }
    return jet_generic(a, b, g);
  }

 private:
  SectionJet jet_S(double a, double b, double g) const {
    const double sa = std::sin(a), ca = std::cos(a), sb = std::sin(b), cb = std::cos(b);
    const double sg = std::sin(g), cg = std::cos(g), c = cs_;
    SectionJet j;
    j.value = 2.0 * sg * cg - c * (sb * cg + ca * sg) + ca * sb;
    j.grad = {c * sa * sg - sa * sb, -c * cb * cg + ca * cb, 2.0 * std::cos(2.0 * g) + c * sb * sg - c * ca * cg};
    const double aa = c * ca * sg - ca * sb, ab = -sa * cb, ag = c * sa * cg;
    const double bb = c * sb * cg - ca * sb, bg = c * cb * sg;
    const double gg = -4.0 * std::sin(2.0 * g) + c * sb * cg + c * ca * sg;
    j.hess = {{{aa, ab, ag}, {ab, bb, bg}, {ag, bg, gg}}};
    return j;
  }

  SectionJet jet_B(double a, double b, double g) const {
    const double sa = std::sin(a), ca = std::cos(a), sb = std::sin(b), cb = std::cos(b);
    const double sg = std::sin(g), cg = std::cos(g), c = cs_;
    SectionJet j;
    j.value = 2.0 * cg * cg - c * (ca + cb) * cg + ca * cb + t_ - 1.0;
    j.grad = {c * sa * cg - sa * cb, c * sb * cg - ca * sb, -2.0 * std::sin(2.0 * g) + c * (ca + cb) * sg};
    const double aa = c * ca * cg - ca * cb, ab = sa * sb, ag = -c * sa * sg;
    const double bb = c * cb * cg - ca * cb, bg = -c * sb * sg;
    const double gg = -4.0 * std::cos(2.0 * g) + c * (ca + cb) * cg;
    j.hess = {{{aa, ab, ag}, {ab, bb, bg}, {ag, bg, gg}}};
    return j;
  }

  // d/d(angle_k) = i theta_k on the torus
  SectionJet jet_generic(double a, double b, double g) const {
    const LogJet lj = poly_.log_jet(std::polar(1.0, a), std::polar(1.0, b), std::polar(1.0, g));
    SectionJet j;
    j.value = lj.value.real();
    for (std::size_t k = 0; k < 3; ++k) {
      j.grad[k] = -lj.d[k].imag();
      for (std::size_t l = 0; l < 3; ++l) j.hess[k][l] = -lj.dd[k][l].real();
    }
    return j;
  }

  Kind kind_ = Kind::Generic;
  LaurentPoly3 poly_;
  double cs_ = 0.0;
  double t_ = 0.0;
};

/// det(P^T Hess L P) / |grad L|^2 with P an orthonormal basis of grad L^perp.
inline double implicit_curvature(const SectionJet& j) {
  const Eigen::Vector3d n(j.grad[0], j.grad[1], j.grad[2]);
  const double len = n.norm();
  if (len < kSingularGradientTol) throw SingularPointError("singular point: |grad L| below tolerance");
  const Eigen::Vector3d nh = n / len;
  Eigen::Index k = 0;
  nh.cwiseAbs().minCoeff(&k);
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  e(k) = 1.0;
  const Eigen::Vector3d u1 = (e - e.dot(nh) * nh).normalized();
  const Eigen::Vector3d u2 = nh.cross(u1);
  Eigen::Matrix3d hess;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) hess(a, b) = j.hess[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  Eigen::Matrix<double, 3, 2> p;
  p << u1, u2;
  const Eigen::Matrix2d shape = p.transpose() * hess * p;
  return shape.determinant() / (len * len);
}

struct CurvaturePair {
  double implicit = NAN;
  double graph = NAN;
};

inline CurvaturePair curvature(const GenFun& gf, const RealSection& section, const TorusPoint3& p) {
  CurvaturePair c;
  c.implicit = implicit_curvature(section.jet(p.alpha, p.beta, p.gamma));
  c.graph = graph_curvature(sheet_jet(gf.H, p));
  return c;
}

inline double curvature(const GenFun& gf, const SheetPoint& p) {
  return curvature(gf, RealSection(gf), p.base).implicit;
}

/// det of the central-difference Jacobian of (alpha, beta) -> v along the
/// sheet, divided by (1 + |v|^2)^2.
inline double area_ratio_curvature(const LaurentPoly3& h, const TorusPoint3& p, double step = 1e-5) {
  auto vel = [&](double da, double db) {
    const auto q = track_point(h, p.alpha + da, p.beta + db, p.gamma);
    if (!q) throw DomainError("area_ratio_curvature: sheet tracking failed");
    return gauss_velocity(h, *q);
  };
  const Vec2 ap = vel(step, 0.0), am = vel(-step, 0.0), bp = vel(0.0, step), bm = vel(0.0, -step);
  const Mat2 jac{{{(ap[0] - am[0]) / (2 * step), (bp[0] - bm[0]) / (2 * step)},
                  {(ap[1] - am[1]) / (2 * step), (bp[1] - bm[1]) / (2 * step)}}};
  const Vec2 v = gauss_velocity(h, p);
  const double q = 1.0 + v[0] * v[0] + v[1] * v[1];
  return det2(jac) / (q * q);
}

// ---------------------------------------------------------------------------
// Singular points

/// |grad H| at a point (ordinary partials; equals |grad_log H| on the torus).
inline double gradient_norm(const LaurentPoly3& h, cplx x, cplx y, cplx z) {
  const auto g = h.grad(x, y, z);
  return std::sqrt(std::norm(g[0]) + std::norm(g[1]) + std::norm(g[2]));
}

/// Minimum of |grad H| over all points of V1 above a grid x grid sample.
inline double min_gradient_on_grid(const GenFun& gf, int grid) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i)
    for (int k = 0; k < grid; ++k) {
      const double a = kTwoPi * i / grid, b = kTwoPi * k / grid;
      const cplx x = std::polar(1.0, a), y = std::polar(1.0, b);
      for (const auto& z : roots_in_z(gf.H, x, y).roots) best = std::min(best, gradient_norm(gf.H, x, y, z));
    }
  return best;
}

struct SingularPoint {
  TorusPoint3 point;
  double grad_norm = 0.0;
};

struct SingularSearch {
  std::vector<SingularPoint> points;  // |grad H| below the acceptance threshold
  double min_grad_seen = std::numeric_limits<double>::infinity();
};

namespace detail {

// Newton on grad H = 0 in C^3; the Jacobian is the Hessian of H.
inline std::optional<std::array<cplx, 3>> polish_singular(const LaurentPoly3& h, std::array<cplx, 3> p) {
  for (int it = 0; it < 40; ++it) {
    const LogJet j = h.log_jet(p[0], p[1], p[2]);
    Eigen::Vector3cd g;
    Eigen::Matrix3cd hess;
    for (std::size_t k = 0; k < 3; ++k) {
      g(static_cast<Eigen::Index>(k)) = j.d[k] / p[k];
      for (std::size_t l = 0; l < 3; ++l) {
        cplx v = j.dd[k][l];
        if (k == l) v -= j.d[k];
        hess(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = v / (p[k] * p[l]);
      }
    }
    if (g.norm() < 1e-14) return p;
    Eigen::FullPivLU<Eigen::Matrix3cd> lu(hess);
    if (!lu.isInvertible()) return std::nullopt;
    const Eigen::Vector3cd d = lu.solve(g);
    for (std::size_t k = 0; k < 3; ++k) p[k] -= d(static_cast<Eigen::Index>(k));
    if (d.norm() < 1e-15) return p;
    for (const auto& c : p)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()) || std::abs(c) < 1e-6) return std::nullopt;
  }
  return p;
}

}  // namespace detail

/// Multi-start search for zeros of grad H on V1: local minima of |grad H| on a
/// grid x grid x sheets sample, descent on |grad H|^2 along V1, then a complex
/// Newton polish. Points with |grad H| < accept_tol on the torus are kept.
inline SingularSearch singular_points(const GenFun& gf, int grid = 32, double accept_tol = 1e-8) {
  const LaurentPoly3& h = gf.H;
  struct Node {
    double gamma;
    double f;
  };
  std::vector<std::vector<Node>> nodes(static_cast<std::size_t>(grid * grid));
  auto at = [&](int i, int k) -> std::vector<Node>& {
    return nodes[static_cast<std::size_t>(((i + grid) % grid) * grid + (k + grid) % grid)];
  };
  for (int i = 0; i < grid; ++i)
    for (int k = 0; k < grid; ++k) {
      const double a = kTwoPi * i / grid, b = kTwoPi * k / grid;
      const cplx x = std::polar(1.0, a), y = std::polar(1.0, b);
      for (const auto& z : roots_in_z(h, x, y).roots) at(i, k).push_back({std::arg(z), gradient_norm(h, x, y, z)});
    }

  SingularSearch out;
  auto objective = [&](double a, double b, double& g0) -> double {
    const auto p = track_point(h, a, b, g0);
    if (!p) return std::numeric_limits<double>::infinity();
    g0 = p->gamma;
    const double n = gradient_norm(h, p->x, p->y, p->z);
    return n * n;
  };

  for (int i = 0; i < grid; ++i)
    for (int k = 0; k < grid; ++k)
      for (const auto& node : at(i, k)) {
        bool is_min = true;
        for (int di = -1; di <= 1 && is_min; ++di)
          for (int dk = -1; dk <= 1 && is_min; ++dk) {
            if (di == 0 && dk == 0) continue;
            const auto& nb = at(i + di, k + dk);
            const Node* best = nullptr;
            for (const auto& m : nb)
              if (!best || angle_gap(m.gamma, node.gamma) < angle_gap(best->gamma, node.gamma)) best = &m;
            if (best && best->f < node.f) is_min = false;
          }
        if (!is_min) continue;

        // BFGS on (alpha, beta) with finite-difference gradients.
        double a = kTwoPi * i / grid, b = kTwoPi * k / grid, g = node.gamma;
        double f = objective(a, b, g);
        Eigen::Matrix2d hinv = Eigen::Matrix2d::Identity();
        auto fd_grad = [&](double a0, double b0, double gam) {
          const double e = 1e-7;
          double g1 = gam, g2 = gam, g3 = gam, g4 = gam;
          return Eigen::Vector2d((objective(a0 + e, b0, g1) - objective(a0 - e, b0, g2)) / (2 * e),
                                 (objective(a0, b0 + e, g3) - objective(a0, b0 - e, g4)) / (2 * e));
        };
        Eigen::Vector2d grad = fd_grad(a, b, g);
        for (int it = 0; it < 60 && std::isfinite(f) && grad.norm() > 1e-14; ++it) {
          const Eigen::Vector2d dir = -hinv * grad;
          double step = 1.0;
          double fa = 0, na = a, nb = b, ng = g;
          for (int ls = 0; ls < 30; ++ls, step *= 0.5) {
            na = a + step * dir(0);
            nb = b + step * dir(1);
            ng = g;
            fa = objective(na, nb, ng);
            if (fa < f) break;
          }
          if (!(fa < f)) break;
          const Eigen::Vector2d s(na - a, nb - b);
          a = na;
          b = nb;
          g = ng;
          f = fa;
          const Eigen::Vector2d ng2 = fd_grad(a, b, g);
          const Eigen::Vector2d yv = ng2 - grad;
          grad = ng2;
          const double sy = s.dot(yv);
          if (sy > 1e-300) {
            const double rho = 1.0 / sy;
            const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
            hinv = (id - rho * s * yv.transpose()) * hinv * (id - rho * yv * s.transpose()) + rho * s * s.transpose();
          }
          if (s.norm() < 1e-14) break;
        }
        if (std::isfinite(f)) out.min_grad_seen = std::min(out.min_grad_seen, std::sqrt(f));

        const auto pol = detail::polish_singular(h, {std::polar(1.0, a), std::polar(1.0, b), std::polar(1.0, g)});
        if (!pol) continue;
        const auto& q = *pol;
        bool on_torus = true;
        for (const auto& c : q) on_torus = on_torus && std::abs(std::abs(c) - 1.0) < 1e-8;
        if (!on_torus || std::abs(h.eval(q[0], q[1], q[2])) > 1e-10) continue;
        const double gn = gradient_norm(h, q[0], q[1], q[2]);
        out.min_grad_seen = std::min(out.min_grad_seen, gn);
        if (gn >= accept_tol) continue;
        const TorusPoint3 tp(std::arg(q[0]), std::arg(q[1]), std::arg(q[2]));
        bool dup = false;
        for (const auto& s : out.points) dup = dup || torus_distance(s.point, tp) < 1e-6;
        if (!dup) out.points.push_back({tp, gn});
      }
  std::sort(out.points.begin(), out.points.end(), [](const SingularPoint& l, const SingularPoint& r) {
    return std::tie(l.point.alpha, l.point.beta, l.point.gamma) < std::tie(r.point.alpha, r.point.beta, r.point.gamma);
  });
  return out;
}

// ---------------------------------------------------------------------------
// S-family structure

struct TorusMap {
  const char* name;
  TorusPoint3 (*apply)(const TorusPoint3&);
  Vec2 (*velocity)(const Vec2&);  // image of the velocity of p
};

inline const std::array<TorusMap, 7>& s_family_isometries() {
  using P = TorusPoint3;
  constexpr double pi = std::numbers::pi;
  static const std::array<TorusMap, 7> maps{{
      {"phi_A", [](const P& p) { return P(-p.alpha, -p.beta, -p.gamma); }, [](const Vec2& v) { return v; }},
      {"phi_B", [](const P& p) { return P(p.beta + pi / 2, p.alpha + pi / 2, p.gamma + pi / 2); },
       [](const Vec2& v) { return Vec2{v[1], v[0]}; }},
      {"phi_C", [](const P& p) { return P(p.alpha + pi, p.beta + pi, p.gamma + pi); }, [](const Vec2& v) { return v; }},
      {"phi_D", [](const P& p) { return P(p.beta + 3 * pi / 2, p.alpha + 3 * pi / 2, p.gamma + 3 * pi / 2); },
       [](const Vec2& v) { return Vec2{v[1], v[0]}; }},
      {"phi_1", [](const P& p) { return P(p.alpha, p.beta + pi, -p.gamma); },
       [](const Vec2& v) { return Vec2{-v[0], -v[1]}; }},
      {"phi_2", [](const P& p) { return P(-p.alpha, p.beta, p.gamma); }, [](const Vec2& v) { return Vec2{-v[0], v[1]}; }},
      {"phi_3", [](const P& p) { return P(p.alpha, pi - p.beta, p.gamma); }, [](const Vec2& v) { return Vec2{v[0], -v[1]}; }},
  }};
  return maps;
}

struct SymmetryReport {
  std::size_t samples = 0;
  std::array<double, 7> max_residual{};        // |L(phi(p))| per map
  std::array<double, 7> max_velocity_error{};  // |v(phi(p)) - table(v(p))| per map
  double worst_residual = 0.0;
  double worst_velocity_error = 0.0;
};

inline SymmetryReport symmetry_check(const GenFun& gf, std::size_t samples, std::uint64_t seed = 1) {
  if (gf.model.family != Family::S) throw DomainError("symmetry_check: S-family models only");
  const RealSection section(gf);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  SymmetryReport rep;
  const auto& maps = s_family_isometries();
  while (rep.samples < samples) {
    const auto pts = sheets(gf, ang(rng), ang(rng));
    for (const auto& sp : pts) {
      if (rep.samples >= samples) break;
      if (std::isnan(sp.velocity[0])) continue;
      ++rep.samples;
      for (std::size_t m = 0; m < maps.size(); ++m) {
        const TorusPoint3 q = maps[m].apply(sp.base);
        rep.max_residual[m] = std::max(rep.max_residual[m], std::abs(section.value(q.alpha, q.beta, q.gamma)));
        const Vec2 vq = gauss_velocity(gf.H, q);
        const Vec2 expect = maps[m].velocity(sp.velocity);
        rep.max_velocity_error[m] =
            std::max(rep.max_velocity_error[m], std::hypot(vq[0] - expect[0], vq[1] - expect[1]));
      }
    }
  }
  for (std::size_t m = 0; m < maps.size(); ++m) {
    rep.worst_residual = std::max(rep.worst_residual, rep.max_residual[m]);
    rep.worst_velocity_error = std::max(rep.worst_velocity_error, rep.max_velocity_error[m]);
  }
  return rep;
}

/// Component of V1 for S(t) by gamma band: A around 0, B around pi/2,
/// C around pi, D around 3pi/2. A band edge belongs to the band above it.
inline char component_classify(const TorusPoint3& p) {
  constexpr double q = std::numbers::pi / 4;
  const double g = wrap_angle(p.gamma + q);  // A-band starts at 0 now
  const int band = std::min(3, static_cast<int>(g / (2 * q)));
  return static_cast<char>('A' + band);
}

inline char component_classify(const SheetPoint& p) { return component_classify(p.base); }

/// Isolated points (alpha, beta) where some sheet has gamma == gamma0:
/// critical points of L(., ., gamma0) on which L vanishes.
inline std::vector<std::array<double, 2>> gamma_level_points(const GenFun& gf, double gamma0, int grid = 64,
                                                             double tol = 1e-9) {
  const RealSection section(gf);
  std::vector<std::array<double, 2>> out;
  for (int i = 0; i < grid; ++i)
    for (int k = 0; k < grid; ++k) {
      double a = kTwoPi * (i + 0.5) / grid, b = kTwoPi * (k + 0.5) / grid;
      bool ok = false;
      for (int it = 0; it < 50; ++it) {
        const SectionJet j = section.jet(a, b, gamma0);
        const Eigen::Matrix2d hm{{j.hess[0][0], j.hess[0][1]}, {j.hess[1][0], j.hess[1][1]}};
        const Eigen::Vector2d g(j.grad[0], j.grad[1]);
        if (std::abs(hm.determinant()) < 1e-14) break;
        Eigen::Vector2d d = hm.inverse() * g;
        if (d.norm() > 0.5) d *= 0.5 / d.norm();
        a -= d(0);
        b -= d(1);
        if (d.norm() < 1e-14) {
          ok = true;
          break;
        }
      }
      if (!ok) continue;
      const SectionJet j = section.jet(a, b, gamma0);
      if (std::abs(j.value) > tol || std::hypot(j.grad[0], j.grad[1]) > tol) continue;
      const std::array<double, 2> p{wrap_angle(a), wrap_angle(b)};
      bool dup = false;
      for (const auto& q : out) dup = dup || (angle_gap(q[0], p[0]) < 1e-6 && angle_gap(q[1], p[1]) < 1e-6);
      if (!dup) out.push_back(p);
    }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Point cloud of the Gauss map

struct CloudPoint {
  double alpha, beta;
  int sheet;
  double gamma, v1, v2, K;
};

/// Gauss image of the grid_n x grid_n grid, all sheets, skipping points within
/// `ball` of any listed singular point and vertical tangents.
inline std::vector<CloudPoint> gauss_cloud(const GenFun& gf, int grid_n, const std::vector<SingularPoint>& singular = {},
                                           double ball = 1e-3) {
  std::vector<CloudPoint> out;
  out.reserve(static_cast<std::size_t>(grid_n * grid_n * 4));
  for (int i = 0; i < grid_n; ++i)
    for (int k = 0; k < grid_n; ++k) {
      const double a = kTwoPi * i / grid_n, b = kTwoPi * k / grid_n;
      for (const auto& sp : sheets(gf, a, b)) {
        if (std::isnan(sp.velocity[0])) continue;
        bool near = false;
        for (const auto& s : singular) near = near || torus_distance(s.point, sp.base) < ball;
        if (near) continue;
        out.push_back({sp.base.alpha, sp.base.beta, sp.sheet, sp.base.gamma, sp.velocity[0], sp.velocity[1], sp.curvature});
      }
    }
  return out;
}

inline void write_cloud_csv(std::ostream& os, const std::vector<CloudPoint>& cloud) {
  os << "alpha,beta,sheet,gamma,v1,v2,K\n";
  for (const auto& p : cloud)
    os << format_double(p.alpha) << ',' << format_double(p.beta) << ',' << p.sheet << ',' << format_double(p.gamma) << ','
       << format_double(p.v1) << ',' << format_double(p.v2) << ',' << format_double(p.K) << '\n';
}

}  // namespace qrw2d
