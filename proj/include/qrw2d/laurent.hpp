#pragma once
// Sparse Laurent polynomials in (x, y, z) with complex coefficients.

#include <algorithm>
#include <array>
#include <complex>
#include <map>
#include <ostream>
#include <vector>

#include "qrw2d/io.hpp"
#include "qrw2d/model.hpp"

namespace qrw2d {

using Exponent = std::array<int, 3>;

inline constexpr double kCoefficientDropTol = 1e-15;

/// Integer power by repeated squaring; negative exponents invert first.
inline cplx ipow(cplx base, int e) {
  if (e < 0) {
    base = 1.0 / base;
    e = -e;
  }
  cplx result = 1.0;
  while (e > 0) {
    if (e & 1) result *= base;
    base *= base;
    e >>= 1;
  }
  return result;
}

/// Value and logarithmic derivatives theta_k = z_k d/dz_k up to second order.
/// d[k] = theta_k P, dd[k][l] = theta_k theta_l P.
struct LogJet {
  cplx value{};
  std::array<cplx, 3> d{};
  std::array<std::array<cplx, 3>, 3> dd{};
};

class LaurentPoly3 {
 public:
  struct Term {
    Exponent e;
    cplx c;
  };

  LaurentPoly3() = default;

  explicit LaurentPoly3(const std::map<Exponent, cplx>& coeffs) {
    for (const auto& [e, c] : coeffs)
      if (std::abs(c) >= kCoefficientDropTol) terms_.push_back({e, c});
  }

  static LaurentPoly3 monomial(Exponent e, cplx c = 1.0) { return LaurentPoly3(std::map<Exponent, cplx>{{e, c}}); }
  static LaurentPoly3 constant(cplx c) { return monomial({0, 0, 0}, c); }

  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  cplx coefficient(Exponent e) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), e,
                               [](const Term& t, const Exponent& key) { return t.e < key; });
    return (it != terms_.end() && it->e == e) ? it->c : cplx{};
  }

  int min_exponent(int var) const { return extreme(var, true); }
  int max_exponent(int var) const { return extreme(var, false); }

  friend LaurentPoly3 operator+(const LaurentPoly3& a, const LaurentPoly3& b) { return combine(a, b, 1.0); }
  friend LaurentPoly3 operator-(const LaurentPoly3& a, const LaurentPoly3& b) { return combine(a, b, -1.0); }

  friend LaurentPoly3 operator*(const LaurentPoly3& a, const LaurentPoly3& b) {
    std::map<Exponent, cplx> acc;
    for (const auto& ta : a.terms_)
      for (const auto& tb : b.terms_)
        acc[{ta.e[0] + tb.e[0], ta.e[1] + tb.e[1], ta.e[2] + tb.e[2]}] += ta.c * tb.c;
    return LaurentPoly3(acc);
  }

  friend LaurentPoly3 operator*(cplx k, const LaurentPoly3& a) {
    std::map<Exponent, cplx> acc;
    for (const auto& t : a.terms_) acc[t.e] = k * t.c;
    return LaurentPoly3(acc);
  }

  /// Multiplies by x^e0 y^e1 z^e2.
  LaurentPoly3 shifted(Exponent e) const {
    LaurentPoly3 out = *this;
    for (auto& t : out.terms_)
      for (int k = 0; k < 3; ++k) t.e[static_cast<std::size_t>(k)] += e[static_cast<std::size_t>(k)];
    return out;
  }

  cplx eval(cplx x, cplx y, cplx z) const {
    require_nonzero(x, y, z);
    cplx sum{};
    for (const auto& t : terms_) sum += t.c * ipow(x, t.e[0]) * ipow(y, t.e[1]) * ipow(z, t.e[2]);
    return sum;
  }

  /// (dP/dx, dP/dy, dP/dz)
  std::array<cplx, 3> grad(cplx x, cplx y, cplx z) const {
    const auto g = grad_log(x, y, z);
    return {g[0] / x, g[1] / y, g[2] / z};
  }

  /// (x dP/dx, y dP/dy, z dP/dz)
  std::array<cplx, 3> grad_log(cplx x, cplx y, cplx z) const {
    require_nonzero(x, y, z);
    std::array<cplx, 3> g{};
    for (const auto& t : terms_) {
      const cplx m = t.c * ipow(x, t.e[0]) * ipow(y, t.e[1]) * ipow(z, t.e[2]);
      for (std::size_t k = 0; k < 3; ++k) g[k] += static_cast<double>(t.e[k]) * m;
    }
    return g;
  }

  LogJet log_jet(cplx x, cplx y, cplx z) const {
    require_nonzero(x, y, z);
    LogJet j;
    for (const auto& t : terms_) {
      const cplx m = t.c * ipow(x, t.e[0]) * ipow(y, t.e[1]) * ipow(z, t.e[2]);
      j.value += m;
      for (std::size_t k = 0; k < 3; ++k) {
        const double ek = t.e[k];
        j.d[k] += ek * m;
        for (std::size_t l = 0; l < 3; ++l) j.dd[k][l] += ek * static_cast<double>(t.e[l]) * m;
      }
    }
    return j;
  }

  /// Coefficients c_k(x, y) of P = sum_k c_k z^k for k = min..max z-exponent;
  /// index 0 corresponds to the lowest power.
  std::vector<cplx> z_coefficients(cplx x, cplx y) const {
    if (terms_.empty()) return {};
    const int lo = min_exponent(2);
    const int hi = max_exponent(2);
    std::vector<cplx> c(static_cast<std::size_t>(hi - lo + 1));
    for (const auto& t : terms_)
      c[static_cast<std::size_t>(t.e[2] - lo)] += t.c * ipow(x, t.e[0]) * ipow(y, t.e[1]);
    return c;
  }

  /// One line per term, `a b c re im`, lexicographic in (a, b, c).
  void dump(std::ostream& os) const {
    for (const auto& t : terms_)
      os << t.e[0] << ' ' << t.e[1] << ' ' << t.e[2] << ' ' << format_double(t.c.real()) << ' '
         << format_double(t.c.imag()) << '\n';
  }

 private:
  static void require_nonzero(cplx x, cplx y, cplx z) {
    if (x == 0.0 || y == 0.0 || z == 0.0)
      throw DomainError("LaurentPoly3: evaluation at a zero coordinate");
  }

  static LaurentPoly3 combine(const LaurentPoly3& a, const LaurentPoly3& b, double sign) {
    std::map<Exponent, cplx> acc;
    for (const auto& t : a.terms_) acc[t.e] += t.c;
    for (const auto& t : b.terms_) acc[t.e] += sign * t.c;
    return LaurentPoly3(acc);
  }

  int extreme(int var, bool lowest) const {
    if (terms_.empty()) return 0;
    int v = terms_.front().e[static_cast<std::size_t>(var)];
    for (const auto& t : terms_) {
      const int e = t.e[static_cast<std::size_t>(var)];
      v = lowest ? std::min(v, e) : std::max(v, e);
    }
    return v;
  }

  std::vector<Term> terms_;  // sorted by exponent, no |c| < kCoefficientDropTol
};

}  // namespace qrw2d
