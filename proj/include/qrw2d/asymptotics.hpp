#pragma once
// Stationary-phase asymptotics of walk amplitudes.
//
// For a direction (r, s, n) the contributing points W are the points of V1
// whose Gauss velocity equals (r/n, s/n). With N = sum_j G_ij u_j the
// numerator for start vector u, the chirality-i amplitude is estimated by
//
//   a_i ~ -1/(2 pi n) sum_W z^{-(r,s,n)} N / (z H_z) |det Hess gamma|^{-1/2} e^{-i pi tau / 4}
//
// where tau is the signature of Hess gamma. Since |(r,s,n)| = n sqrt(1+|v|^2)
// and |K| = |det Hess gamma| / (1+|v|^2)^2 this is the same as
// 1/(2 pi |(r,s,n)|) sum z^{-(r,s,n)} N / mu |K|^{-1/2} e^{-i pi tau/4} with
// mu = z H_z sqrt(1+|v|^2), whose modulus is |grad_log H|. The overall sign
// is not fixed; only |a_i| is compared against simulation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qrw2d/variety.hpp"

namespace qrw2d {

struct Tolerances {
  double newton_residual = 1e-10;
  double dedup = 1e-6;
  double k_degenerate = 1e-8;
  double singular_ball = 1e-3;
  double inside_k = 1e-6;
  double outside_margin = 1e-2;
  double seed_radius = 1.0;  // local-minimum seeds farther than this from the target are skipped
  double seed_near = 0.1;    // every seed this close to the target is tried
  int seed_grid = 64;
  int max_newton_iter = 40;
  int raster_grid = 256;
  double raster_pitch = 0.005;

  /// Sets a field by name; unknown names or invalid values throw ConfigError.
  void set(const std::string& name, double value) {
    auto positive = [&](double& field) {
      if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError("tolerance '" + name + "' must be positive");
      field = value;
    };
    auto count = [&](int& field) {
      if (!(value >= 1.0) || value != std::floor(value) || value > 1e5)
        throw ConfigError("tolerance '" + name + "' must be a positive integer");
      field = static_cast<int>(value);
    };
    if (name == "newton_residual") return positive(newton_residual);
    if (name == "dedup") return positive(dedup);
    if (name == "k_degenerate") return positive(k_degenerate);
    if (name == "singular_ball") return positive(singular_ball);
    if (name == "inside_k") return positive(inside_k);
    if (name == "outside_margin") return positive(outside_margin);
    if (name == "seed_radius") return positive(seed_radius);
    if (name == "seed_near") return positive(seed_near);
    if (name == "raster_pitch") return positive(raster_pitch);
    if (name == "seed_grid") return count(seed_grid);
    if (name == "max_newton_iter") return count(max_newton_iter);
    if (name == "raster_grid") return count(raster_grid);
    throw ConfigError("unknown tolerance '" + name + "'");
  }

  nlohmann::json to_json() const {
    return {{"newton_residual", newton_residual}, {"dedup", dedup},
            {"k_degenerate", k_degenerate},       {"singular_ball", singular_ball},
            {"inside_k", inside_k},               {"outside_margin", outside_margin},
            {"seed_radius", seed_radius},         {"seed_near", seed_near},
            {"seed_grid", seed_grid},
            {"max_newton_iter", max_newton_iter}, {"raster_grid", raster_grid},
            {"raster_pitch", raster_pitch}};
  }
};

struct Direction {
  long r = 0, s = 0, n = 1;

  Direction() = default;
  Direction(long r_, long s_, long n_) : r(r_), s(s_), n(n_) {
    if (n < 1) throw DomainError("Direction: n must be at least 1");
  }
  Vec2 velocity() const { return {static_cast<double>(r) / n, static_cast<double>(s) / n}; }
  double norm() const { return std::sqrt(double(r) * r + double(s) * s + double(n) * n); }
  bool parity_ok() const { return ((r + s - n) % 2 + 2) % 2 == 0; }
};

enum class Status { Inside, Outside, NearBoundary, NearSingularDirection };

inline std::string status_name(Status s) {
  switch (s) {
    case Status::Inside: return "Inside";
    case Status::Outside: return "Outside";
    case Status::NearBoundary: return "NearBoundary";
    case Status::NearSingularDirection: return "NearSingularDirection";
  }
  return "NearBoundary";
}

class DegenerateCriticalPoint : public DomainError {
 public:
  using DomainError::DomainError;
};

struct CriticalEntry {
  SheetPoint point;
  double K = 0.0;
  int tau = 0;
  std::array<cplx, 4> terms{};  // contribution to each chirality amplitude
};

struct CriticalPointReport {
  Direction direction;
  std::vector<CriticalEntry> points;
  std::optional<std::array<cplx, 4>> amplitudes;  // absent when no estimate is made
  double predicted_probability = 0.0;
  Status status = Status::Outside;
};

/// sum of signs of the eigenvalues of a symmetric 2x2 matrix; throws when an
/// eigenvalue is within `tol` of zero.
inline int signature_of(const Mat2& m, double tol) {
  const double tr = m[0][0] + m[1][1];
  const double disc = std::sqrt(std::max(0.0, 0.25 * (m[0][0] - m[1][1]) * (m[0][0] - m[1][1]) + m[0][1] * m[1][0]));
  const double l1 = 0.5 * tr + disc, l2 = 0.5 * tr - disc;
  if (std::abs(l1) < tol || std::abs(l2) < tol) throw DegenerateCriticalPoint("degenerate critical point (fold)");
  return (l1 > 0 ? 1 : -1) + (l2 > 0 ? 1 : -1);
}

/// Hess gamma at p by central second differences of the tracked sheet.
inline Mat2 fd_hessian_gamma(const LaurentPoly3& h, const TorusPoint3& p, double step = 1e-4) {
  auto g = [&](double da, double db) {
    const auto q = track_point(h, p.alpha + da, p.beta + db, p.gamma);
    if (!q) throw DomainError("fd_hessian_gamma: sheet tracking failed");
    return p.gamma + std::remainder(q->gamma - p.gamma, kTwoPi);
  };
  const double g0 = p.gamma;
  const double gaa = (g(step, 0) - 2 * g0 + g(-step, 0)) / (step * step);
  const double gbb = (g(0, step) - 2 * g0 + g(0, -step)) / (step * step);
  const double gab = (g(step, step) - g(step, -step) - g(-step, step) + g(-step, -step)) / (4 * step * step);
  return {{{gaa, gab}, {gab, gbb}}};
}

/// tau in {-2, 0, 2}: the signature of the phase Hessian at a critical point,
/// which for n > 0 equals the signature of Hess gamma.
inline int signature(const LaurentPoly3& h, const TorusPoint3& p, double tol = 1e-8) {
  return signature_of(fd_hessian_gamma(h, p), tol);
}

/// True iff |v|^2 differs from (2 - t)/((1 - t) sqrt t) by more than 1e-6.
inline bool normal_cone_check_B(double t, const Vec2& v) {
  const double threshold = (2.0 - t) / ((1.0 - t) * std::sqrt(t));
  return std::abs(v[0] * v[0] + v[1] * v[1] - threshold) > 1e-6;
}

// ---------------------------------------------------------------------------
// Filled Gauss image on a velocity raster

class GaussRaster {
 public:
  GaussRaster() = default;
  explicit GaussRaster(double pitch) : pitch_(pitch), bins_(static_cast<int>(std::ceil(2.0 / pitch))) {
    cells_.assign(static_cast<std::size_t>(bins_) * static_cast<std::size_t>(bins_), 0);
  }

  double pitch() const { return pitch_; }
  int bins() const { return bins_; }

  int bin_of(double v) const { return std::clamp(static_cast<int>(std::floor((v + 1.0) / pitch_)), 0, bins_ - 1); }
  bool filled(int i, int k) const { return cells_[index(i, k)] != 0; }
  void set(int i, int k) { cells_[index(i, k)] = 1; }

  void mark(const Vec2& v) { set(bin_of(v[0]), bin_of(v[1])); }

  /// Marks every bin whose centre lies in the triangle, plus the corners.
  void fill_triangle(const Vec2& a, const Vec2& b, const Vec2& c) {
    mark(a);
    mark(b);
    mark(c);
    const int i0 = bin_of(std::min({a[0], b[0], c[0]})), i1 = bin_of(std::max({a[0], b[0], c[0]}));
    const int k0 = bin_of(std::min({a[1], b[1], c[1]})), k1 = bin_of(std::max({a[1], b[1], c[1]}));
    auto edge = [](const Vec2& p, const Vec2& q, double x, double y) {
      return (q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (x - p[0]);
    };
    for (int i = i0; i <= i1; ++i)
      for (int k = k0; k <= k1; ++k) {
        const double x = -1.0 + (i + 0.5) * pitch_, y = -1.0 + (k + 0.5) * pitch_;
        const double e1 = edge(a, b, x, y), e2 = edge(b, c, x, y), e3 = edge(c, a, x, y);
        if ((e1 >= 0 && e2 >= 0 && e3 >= 0) || (e1 <= 0 && e2 <= 0 && e3 <= 0)) set(i, k);
      }
  }

  /// Distance from v to the union of filled bins (0 inside a filled bin).
  double distance(const Vec2& v) const {
    if (filled(bin_of(v[0]), bin_of(v[1])) && std::abs(v[0]) <= 1.0 && std::abs(v[1]) <= 1.0) return 0.0;
    ensure_boundary();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [i, k] : boundary_) best = std::min(best, box_distance(i, k, v));
    return best;
  }

  /// Raster of all bins within `margin` of a filled bin.
  GaussRaster dilated(double margin) const {
    GaussRaster out = *this;
    ensure_boundary();
    const int reach = static_cast<int>(std::ceil(margin / pitch_)) + 1;
    for (const auto& [i, k] : boundary_)
      for (int di = -reach; di <= reach; ++di)
        for (int dk = -reach; dk <= reach; ++dk) {
          const int a = i + di, b = k + dk;
          if (a < 0 || b < 0 || a >= bins_ || b >= bins_ || out.filled(a, b)) continue;
          const double gx = std::max(0, std::abs(di) - 1) * pitch_, gy = std::max(0, std::abs(dk) - 1) * pitch_;
          if (std::hypot(gx, gy) <= margin) out.set(a, b);
        }
    out.boundary_valid_ = false;
    return out;
  }

  bool contains(const Vec2& v) const { return filled(bin_of(v[0]), bin_of(v[1])); }

  std::size_t filled_count() const {
    std::size_t c = 0;
    for (auto b : cells_) c += b;
    return c;
  }

 private:
  std::size_t index(int i, int k) const { return static_cast<std::size_t>(i) * static_cast<std::size_t>(bins_) + static_cast<std::size_t>(k); }

  double box_distance(int i, int k, const Vec2& v) const {
    const double x0 = -1.0 + i * pitch_, y0 = -1.0 + k * pitch_;
    const double dx = std::max({x0 - v[0], 0.0, v[0] - (x0 + pitch_)});
    const double dy = std::max({y0 - v[1], 0.0, v[1] - (y0 + pitch_)});
    return std::hypot(dx, dy);
  }

  void ensure_boundary() const {
    if (boundary_valid_) return;
    boundary_.clear();
    for (int i = 0; i < bins_; ++i)
      for (int k = 0; k < bins_; ++k) {
        if (!filled(i, k)) continue;
        bool edge = false;
        for (int d = 0; d < 4 && !edge; ++d) {
          const int a = i + (d == 0) - (d == 1), b = k + (d == 2) - (d == 3);
          edge = a < 0 || b < 0 || a >= bins_ || b >= bins_ || !filled(a, b);
        }
        if (edge) boundary_.emplace_back(i, k);
      }
    boundary_valid_ = true;
  }

  double pitch_ = 0.005;
  int bins_ = 0;
  std::vector<std::uint8_t> cells_;
  mutable std::vector<std::pair<int, int>> boundary_;
  mutable bool boundary_valid_ = false;
};

/// Rasterizes the Gauss image of a grid x grid parameter mesh. Each mesh
/// quad is followed along one sheet (corners matched by nearest gamma) and
/// filled as two triangles; quads that tear (large gamma or velocity jumps,
/// vertical tangents) contribute only their corner points.
inline GaussRaster build_gauss_raster(const GenFun& gf, int grid, double pitch) {
  GaussRaster ras(pitch);
  struct Node {
    std::vector<double> gamma;
    std::vector<Vec2> v;
  };
  std::vector<Node> nodes(static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid));
  auto at = [&](int i, int k) -> Node& {
    return nodes[static_cast<std::size_t>(((i % grid + grid) % grid) * grid + (k % grid + grid) % grid)];
  };
  for (int i = 0; i < grid; ++i)
    for (int k = 0; k < grid; ++k) {
      Node& nd = at(i, k);
      for (const auto& sp : sheets(gf, kTwoPi * i / grid, kTwoPi * k / grid)) {
        nd.gamma.push_back(sp.base.gamma);
        nd.v.push_back(sp.velocity);
        if (!std::isnan(sp.velocity[0])) ras.mark(sp.velocity);
      }
    }
  const double max_gamma_jump = 4.0 * kTwoPi / grid + 0.05;
  const double max_v_jump = 0.25;
  for (int i = 0; i < grid; ++i)
    for (int k = 0; k < grid; ++k) {
      const Node& n0 = at(i, k);
      const std::array<const Node*, 3> others{&at(i + 1, k), &at(i + 1, k + 1), &at(i, k + 1)};
      for (std::size_t s = 0; s < n0.gamma.size(); ++s) {
        if (std::isnan(n0.v[s][0])) continue;
        std::array<Vec2, 4> c{n0.v[s]};
        bool ok = true;
        for (std::size_t q = 0; q < 3 && ok; ++q) {
          const Node& o = *others[q];
          std::size_t best = o.gamma.size();
          double gap = 1e9;
          for (std::size_t m = 0; m < o.gamma.size(); ++m)
            if (angle_gap(o.gamma[m], n0.gamma[s]) < gap) {
              gap = angle_gap(o.gamma[m], n0.gamma[s]);
              best = m;
            }
          ok = best < o.gamma.size() && gap < max_gamma_jump && !std::isnan(o.v[best][0]) &&
               std::hypot(o.v[best][0] - c[0][0], o.v[best][1] - c[0][1]) < max_v_jump;
          if (ok) c[q + 1] = o.v[best];
        }
        if (!ok) continue;
        ras.fill_triangle(c[0], c[1], c[2]);
        ras.fill_triangle(c[0], c[2], c[3]);
      }
    }
  return ras;
}

// ---------------------------------------------------------------------------

/// Everything needed to answer direction queries for one model.
class Asymptotics {
 public:
  explicit Asymptotics(const CoinModel& model, Tolerances tol = {})
      : gf_(model), tol_(tol), singular_(singular_points(gf_).points) {}

  const GenFun& genfun() const { return gf_; }
  const Tolerances& tolerances() const { return tol_; }
  const std::vector<SingularPoint>& singular() const { return singular_; }

  struct CriticalSearch {
    std::vector<SheetPoint> points;
    bool singular_hit = false;  // some Newton run ended inside a singular ball
  };

  /// All points of V1 with Gauss velocity v, for v in the open square.
  CriticalSearch critical_points(const Vec2& v) const {
    if (!(std::abs(v[0]) < 1.0 && std::abs(v[1]) < 1.0))
      throw DomainError("critical_points: velocity must lie in (-1, 1)^2");
    const SeedGrid& sg = seed_grid();
    CriticalSearch out;
    std::vector<TorusPoint3> found;
    const std::size_t count = sg.points.size();
    std::vector<double> dist(count);
    for (std::size_t k = 0; k < count; ++k)
      dist[k] = std::hypot(sg.points[k].velocity[0] - v[0], sg.points[k].velocity[1] - v[1]);
    for (std::size_t k = 0; k < count; ++k) {
      // Newton starts from seeds close to the target and from seeds that are
      // local minima of |v_seed - v| over the 8 neighbouring nodes on the same sheet.
      if (dist[k] > tol_.seed_radius) continue;
      bool is_min = dist[k] <= tol_.seed_near;
      if (!is_min) {
        is_min = true;
        for (const int nb : sg.neighbours[k])
          if (nb >= 0 && dist[static_cast<std::size_t>(nb)] < dist[k]) is_min = false;
      }
      if (!is_min) continue;
      const auto p = newton(sg.points[k].base, v);
      if (!p) continue;
      bool near_singular = false;
      for (const auto& s : singular_) near_singular = near_singular || torus_distance(s.point, *p) < tol_.singular_ball;
      if (near_singular) {
        out.singular_hit = true;
        continue;
      }
      bool dup = false;
      for (const auto& q : found) dup = dup || torus_distance(q, *p) < tol_.dedup;
      if (!dup) found.push_back(*p);
    }
    std::sort(found.begin(), found.end(), [](const TorusPoint3& a, const TorusPoint3& b) {
      return std::tie(a.alpha, a.beta, a.gamma) < std::tie(b.alpha, b.beta, b.gamma);
    });
    // Near a degenerate critical point the residual is flat, so Newton lands
    // on a cloud of nearby solutions; keep one per cluster.
    std::vector<SheetPoint> pts;
    for (const auto& p : found) pts.push_back(make_sheet_point(p));
    std::vector<bool> drop(pts.size(), false);
    auto flat = [&](const SheetPoint& p) { return !(std::abs(p.curvature) > tol_.k_degenerate); };
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(pts[a].curvature) < std::abs(pts[b].curvature);
    });
    for (const std::size_t i : order) {
      if (drop[i] || !flat(pts[i])) continue;
      for (std::size_t k = 0; k < pts.size(); ++k)
        if (k != i && flat(pts[k]) && torus_distance(pts[i].base, pts[k].base) < tol_.singular_ball) drop[k] = true;
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (!drop[i]) out.points.push_back(pts[i]);
    return out;
  }

  /// Estimated amplitudes for start vector u at (r, s, n).
  CriticalPointReport amplitude(const Direction& d, const std::array<cplx, 4>& u) const {
    CriticalPointReport rep;
    rep.direction = d;
    const Vec2 v = d.velocity();
    if (!(std::abs(v[0]) < 1.0 && std::abs(v[1]) < 1.0)) {
      rep.status = (std::abs(d.r) + std::abs(d.s) > d.n) ? Status::Outside : Status::NearBoundary;
      if (rep.status == Status::Outside || !d.parity_ok()) rep.amplitudes = std::array<cplx, 4>{};
      return rep;
    }
    const CriticalSearch cs = critical_points(v);
    rep.status = classify(v, cs);
    std::array<LaurentPoly3, 4> numer;
    for (int i = 0; i < 4; ++i) numer[static_cast<std::size_t>(i)] = gf_.numerator(i, u);
    bool degenerate = false;
    for (const auto& p : cs.points) {
      CriticalEntry e;
      e.point = p;
      e.K = p.curvature;
      if (std::abs(e.K) < tol_.k_degenerate) {
        degenerate = true;
        rep.points.push_back(e);
        continue;
      }
      try {
        e.tau = signature(gf_.H, p.base, tol_.k_degenerate);
      } catch (const DomainError&) {
        degenerate = true;
        rep.points.push_back(e);
        continue;
      }
      const SheetJet sj = sheet_jet(gf_.H, p.base);
      const double detg = std::abs(det2(sj.hess_gamma));
      const double phase = -(double(d.r) * p.base.alpha + double(d.s) * p.base.beta + double(d.n) * p.base.gamma) -
                           std::numbers::pi * e.tau / 4.0;
      const cplx common = -std::polar(1.0, phase) / (2.0 * std::numbers::pi * double(d.n) * sj.dz * std::sqrt(detg));
      for (std::size_t i = 0; i < 4; ++i) e.terms[i] = common * numer[i].eval(p.base.x, p.base.y, p.base.z);
      rep.points.push_back(e);
    }
    if (!d.parity_ok()) {
      rep.amplitudes = std::array<cplx, 4>{};
      rep.predicted_probability = 0.0;
      return rep;
    }
    if (degenerate) {
      rep.status = rep.status == Status::NearSingularDirection ? rep.status : Status::NearBoundary;
      return rep;
    }
    std::array<cplx, 4> a{};
    for (const auto& e : rep.points)
      for (std::size_t i = 0; i < 4; ++i) a[i] += e.terms[i];
    rep.amplitudes = a;
    for (const auto& c : a) rep.predicted_probability += std::norm(c);
    return rep;
  }

  Status classify_direction(const Vec2& v) const {
    if (!(std::abs(v[0]) < 1.0 && std::abs(v[1]) < 1.0))
      return raster().distance(v) > tol_.outside_margin ? Status::Outside : Status::NearBoundary;
    return classify(v, critical_points(v));
  }

  const GaussRaster& raster() const {
    if (!raster_) raster_ = build_gauss_raster(gf_, tol_.raster_grid, tol_.raster_pitch);
    return *raster_;
  }

  std::vector<CloudPoint> feasible_region_image(int grid_n) const {
    return gauss_cloud(gf_, grid_n, singular_, tol_.singular_ball);
  }

 private:
  Status classify(const Vec2& v, const CriticalSearch& cs) const {
    if (cs.singular_hit) return Status::NearSingularDirection;
    if (cs.points.empty()) return raster().distance(v) > tol_.outside_margin ? Status::Outside : Status::NearBoundary;
    for (const auto& p : cs.points)
      if (!(std::abs(p.curvature) > tol_.inside_k)) return Status::NearBoundary;
    return Status::Inside;
  }

  SheetPoint make_sheet_point(const TorusPoint3& p) const {
    SheetPoint sp;
    sp.base = p;
    const ZRoots zr = roots_in_z(gf_.H, p.x, p.y);
    double gap = 1e9;
    for (std::size_t k = 0; k < zr.roots.size(); ++k) {
      const double g = angle_gap(std::arg(zr.roots[k]), p.gamma);
      if (g < gap) {
        gap = g;
        sp.sheet = static_cast<int>(k);
      }
    }
    sp.grad_log_H = gf_.H.grad_log(p.x, p.y, p.z);
    const SheetJet sj = sheet_jet(gf_.H, p);
    sp.velocity = {-sj.grad_gamma[0], -sj.grad_gamma[1]};
    sp.curvature = graph_curvature(sj);
    return sp;
  }

  // Damped Newton on v(alpha, beta) = target along V1; the Jacobian of the
  // velocity is -Hess gamma. Steps are halved until the residual decreases.
  std::optional<TorusPoint3> newton(TorusPoint3 p, const Vec2& v) const {
    auto residual = [&](const TorusPoint3& q, SheetJet& sj) {
      try {
        sj = sheet_jet(gf_.H, q);
      } catch (const DomainError&) {
        return std::numeric_limits<double>::infinity();
      }
      return std::hypot(-sj.grad_gamma[0] - v[0], -sj.grad_gamma[1] - v[1]);
    };
    SheetJet sj;
    double res = residual(p, sj);
    for (int it = 0; it < tol_.max_newton_iter && std::isfinite(res); ++it) {
      if (res < tol_.newton_residual) return p;
      const double r0 = -sj.grad_gamma[0] - v[0], r1 = -sj.grad_gamma[1] - v[1];
      const Mat2& hg = sj.hess_gamma;
      const double det = det2(hg);
      if (std::abs(det) < 1e-14) return std::nullopt;
      double da = (hg[1][1] * r0 - hg[0][1] * r1) / det;
      double db = (-hg[1][0] * r0 + hg[0][0] * r1) / det;
      const double len = std::hypot(da, db);
      if (len > 0.3) {
        da *= 0.3 / len;
        db *= 0.3 / len;
      }
      bool moved = false;
      for (int half = 0; half < 12; ++half, da *= 0.5, db *= 0.5) {
        const auto q = track_point(gf_.H, p.alpha + da, p.beta + db, p.gamma);
        if (!q) continue;
        SheetJet qj;
        const double qres = residual(*q, qj);
        if (qres < res) {
          p = *q;
          sj = qj;
          res = qres;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (res < tol_.newton_residual) return p;
    return std::nullopt;
  }

  struct SeedGrid {
    std::vector<SheetPoint> points;
    std::vector<std::array<int, 8>> neighbours;  // nearest-gamma match at each adjacent node, -1 if none
  };

  const SeedGrid& seed_grid() const {
    if (!seeds_.points.empty()) return seeds_;
    const int g = tol_.seed_grid;
    std::vector<std::vector<int>> node(static_cast<std::size_t>(g * g));
    for (int i = 0; i < g; ++i)
      for (int k = 0; k < g; ++k)
        for (const auto& sp : sheets(gf_, kTwoPi * (i + 0.5) / g, kTwoPi * (k + 0.5) / g)) {
          if (std::isnan(sp.velocity[0])) continue;
          node[static_cast<std::size_t>(i * g + k)].push_back(static_cast<int>(seeds_.points.size()));
          seeds_.points.push_back(sp);
        }
    seeds_.neighbours.assign(seeds_.points.size(), {});
    for (int i = 0; i < g; ++i)
      for (int k = 0; k < g; ++k)
        for (const int idx : node[static_cast<std::size_t>(i * g + k)]) {
          const double gam = seeds_.points[static_cast<std::size_t>(idx)].base.gamma;
          int slot = 0;
          for (int di = -1; di <= 1; ++di)
            for (int dk = -1; dk <= 1; ++dk) {
              if (di == 0 && dk == 0) continue;
              const auto& nb = node[static_cast<std::size_t>(((i + di + g) % g) * g + (k + dk + g) % g)];
              int best = -1;
              double gap = 1e9;
              for (const int m : nb) {
                const double d = angle_gap(seeds_.points[static_cast<std::size_t>(m)].base.gamma, gam);
                if (d < gap) {
                  gap = d;
                  best = m;
                }
              }
              seeds_.neighbours[static_cast<std::size_t>(idx)][static_cast<std::size_t>(slot++)] = best;
            }
        }
    return seeds_;
  }

  GenFun gf_;
  Tolerances tol_;
  std::vector<SingularPoint> singular_;
  mutable SeedGrid seeds_;
  mutable std::optional<GaussRaster> raster_;
};

inline nlohmann::json report_to_json(const CriticalPointReport& rep, std::optional<double> exact = std::nullopt) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& e : rep.points)
    pts.push_back({{"alpha", e.point.base.alpha}, {"beta", e.point.base.beta}, {"gamma", e.point.base.gamma},
                   {"sheet", e.point.sheet}, {"K", e.K}, {"tau", e.tau}});
  const Vec2 v = rep.direction.velocity();
  nlohmann::json j = {{"r", rep.direction.r},
                      {"s", rep.direction.s},
                      {"n", rep.direction.n},
                      {"v", {v[0], v[1]}},
                      {"status", status_name(rep.status)},
                      {"points", pts}};
  j["predicted_probability"] = rep.amplitudes ? nlohmann::json(rep.predicted_probability) : nlohmann::json(nullptr);
  if (exact) j["exact_probability"] = *exact;
  return j;
}

}  // namespace qrw2d
