#pragma once
// Exact evolution of the walk Q = sigma . (Id (x) U) on a dense lattice box.
//
// One step applies the coin and then moves chirality i by step i:
//   psi_{n+1}(r, i) = sum_j U_ij psi_n(r - v_i, j).
// Starting from chirality j at the origin, the amplitude at (r, s) in
// chirality i after n steps is therefore the x^r y^s coefficient of
// [(M U)^n]_ij, the z^n term of (I - z M U)^{-1}.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "qrw2d/io.hpp"
#include "qrw2d/model.hpp"

namespace qrw2d {

using Chirality = std::array<cplx, 4>;

inline Chirality basis_state(int j) {
  if (j < 0 || j > 3) throw DomainError("basis_state: chirality must be in 0..3");
  Chirality e{};
  e[static_cast<std::size_t>(j)] = 1.0;
  return e;
}

inline double norm2(const Chirality& c) {
  double s = 0.0;
  for (const auto& a : c) s += std::norm(a);
  return s;
}

/// Amplitudes psi_n(r, s, j) for r, s in [-n, n], j in 0..3.
class WaveField {
 public:
  WaveField() = default;
  explicit WaveField(int n) : n_(n), width_(2 * n + 1), amps_(static_cast<std::size_t>(4 * (2 * n + 1) * (2 * n + 1))) {
    if (n < 0) throw DomainError("WaveField: negative time");
  }

  int n() const { return n_; }
  int width() const { return width_; }

  bool in_box(int r, int s) const { return std::abs(r) <= n_ && std::abs(s) <= n_; }

  cplx& at(int r, int s, int j) { return amps_[index(r, s, j)]; }
  const cplx& at(int r, int s, int j) const { return amps_[index(r, s, j)]; }

  double total_probability() const {
    double sum = 0.0;
    for (const auto& a : amps_) sum += std::norm(a);
    return sum;
  }

  const std::vector<cplx>& raw() const { return amps_; }

 private:
  std::size_t index(int r, int s, int j) const {
    return static_cast<std::size_t>(((r + n_) * width_ + (s + n_)) * 4 + j);
  }

  int n_ = 0;
  int width_ = 1;
  std::vector<cplx> amps_ = std::vector<cplx>(4);
};

inline constexpr double kStartNormTol = 1e-12;

inline WaveField initial(const Chirality& start) {
  const double norm = std::sqrt(norm2(start));
  if (std::abs(norm - 1.0) > kStartNormTol)
    throw DomainError("initial: start vector must have unit norm (|start| = " +
                      std::to_string(norm) + ")");
  WaveField f(0);
  for (int j = 0; j < 4; ++j) f.at(0, 0, j) = start[static_cast<std::size_t>(j)];
  return f;
}

namespace detail {

// Writes psi_{n+1} into `out` (whose box must contain the n+1 light cone)
// from psi_n held in `in`. Only sites with |r|+|s| <= n+1 and the right parity
// are written; everything else in `out` is left untouched.
inline void step_into(const WaveField& in, int n, const Coin& u, WaveField& out) {
  const int m = n + 1;
  for (int r = -m; r <= m; ++r) {
    const int smax = m - std::abs(r);
    for (int s = -smax; s <= smax; s += 2) {
      for (int i = 0; i < 4; ++i) {
        const Step st = kNearestNeighbour[static_cast<std::size_t>(i)];
        const int pr = r - st.dr;
        const int ps = s - st.ds;
        cplx acc{};
        if (std::abs(pr) + std::abs(ps) <= n) {
          const cplx* src = &in.at(pr, ps, 0);
          acc = u(i, 0) * src[0] + u(i, 1) * src[1] + u(i, 2) * src[2] + u(i, 3) * src[3];
        }
        out.at(r, s, i) = acc;
      }
    }
  }
}

}  // namespace detail

/// Sites with |r| + |s| > n or r + s of the wrong parity stay exactly zero.
inline WaveField step(const WaveField& field, const CoinModel& model) {
  WaveField next(field.n() + 1);
  detail::step_into(field, field.n(), model.coin, next);
  return next;
}

inline WaveField evolve(const CoinModel& model, const Chirality& start, int n) {
  if (n < 0) throw DomainError("evolve: negative step count");
  if (n == 0) return initial(start);
  (void)initial(start);  // validates the start vector
  WaveField a(n), b(n);
  for (int j = 0; j < 4; ++j) a.at(0, 0, j) = start[static_cast<std::size_t>(j)];
  // Each buffer alternates parity classes; writing the full n+1 cone of one
  // parity overwrites every stale entry from two steps before.
  WaveField* cur = &a;
  WaveField* nxt = &b;
  for (int k = 0; k < n; ++k) {
    detail::step_into(*cur, k, model.coin, *nxt);
    std::swap(cur, nxt);
  }
  return std::move(*cur);
}

/// Calls `visit(k, field)` after every step k = 1..n_max (and once for k = 0).
template <typename Visitor>
void evolve_visit(const CoinModel& model, const Chirality& start, int n_max, Visitor&& visit) {
  WaveField field = initial(start);
  visit(0, static_cast<const WaveField&>(field));
  for (int k = 1; k <= n_max; ++k) {
    field = step(field, model);
    visit(k, static_cast<const WaveField&>(field));
  }
}

inline cplx amplitude_at(const WaveField& field, int r, int s, int j) {
  if (j < 0 || j > 3 || !field.in_box(r, s)) return {};
  return field.at(r, s, j);
}

/// P(r, s) = sum_j |psi(r, s, j)|^2 on the [-n, n]^2 box.
class ProbabilityGrid {
 public:
  ProbabilityGrid() = default;
  explicit ProbabilityGrid(int n) : n_(n), width_(2 * n + 1), p_(static_cast<std::size_t>((2 * n + 1) * (2 * n + 1))) {}

  int n() const { return n_; }
  int width() const { return width_; }
  bool in_box(int r, int s) const { return std::abs(r) <= n_ && std::abs(s) <= n_; }

  double at(int r, int s) const { return in_box(r, s) ? p_[index(r, s)] : 0.0; }
  double& at(int r, int s) { return p_[index(r, s)]; }

  double total() const {
    double sum = 0.0;
    for (double v : p_) sum += v;
    return sum;
  }
  double max() const {
    double m = 0.0;
    for (double v : p_) m = std::max(m, v);
    return m;
  }

 private:
  std::size_t index(int r, int s) const { return static_cast<std::size_t>((r + n_) * width_ + (s + n_)); }

  int n_ = 0;
  int width_ = 1;
  std::vector<double> p_ = std::vector<double>(1);
};

inline ProbabilityGrid probability_profile(const WaveField& field) {
  ProbabilityGrid grid(field.n());
  const int n = field.n();
  for (int r = -n; r <= n; ++r)
    for (int s = -n; s <= n; ++s) {
      const cplx* a = &field.at(r, s, 0);
      grid.at(r, s) = std::norm(a[0]) + std::norm(a[1]) + std::norm(a[2]) + std::norm(a[3]);
    }
  return grid;
}

inline constexpr double kDefaultCsvThreshold = 1e-16;

/// CSV `r,s,p`, rows ordered by r then s, only sites with p > threshold.
inline void write_probability_csv(std::ostream& os, const ProbabilityGrid& grid,
                                  double threshold = kDefaultCsvThreshold) {
  os << "r,s,p\n";
  const int n = grid.n();
  for (int r = -n; r <= n; ++r)
    for (int s = -n; s <= n; ++s) {
      const double p = grid.at(r, s);
      if (p > threshold) os << r << ',' << s << ',' << format_double(p) << '\n';
    }
}

/// Image of P: column = r + n, row = n - s (s increases upwards).
inline void write_probability_pgm(std::ostream& os, const ProbabilityGrid& grid, Scale scale) {
  const int n = grid.n();
  const int w = grid.width();
  const double pmax = grid.max();
  std::vector<std::uint16_t> pix(static_cast<std::size_t>(w) * static_cast<std::size_t>(w));
  for (int row = 0; row < w; ++row) {
    const int s = n - row;
    for (int col = 0; col < w; ++col) {
      const int r = col - n;
      pix[static_cast<std::size_t>(row * w + col)] = grey_level(grid.at(r, s), kLogFloor, pmax, scale);
    }
  }
  write_pgm16(os, w, w, pix);
}

}  // namespace qrw2d
