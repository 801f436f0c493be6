#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "oracle/series_oracle.hpp"
#include "qrw2d/genfun.hpp"

using namespace qrw2d;

namespace {

std::vector<CoinModel> builtins() {
  return {make_S(0.125), make_S(0.5), make_A(1.0 / 3.0), make_B(0.5), make_grover()};
}

// Printed forms, written out term by term.
LaurentPoly3 printed_HB(double t) {
  const double c = std::sqrt(2.0 * t);
  std::map<Exponent, cplx> m;
  m[{1, 1, 4}] += 2.0;
  m[{1, 1, 0}] += 2.0;
  for (Exponent e : {Exponent{1, 0, 0}, Exponent{0, 1, 0}, Exponent{1, 2, 0}, Exponent{2, 1, 0}}) {
    m[{e[0], e[1], 3}] += -c;
    m[{e[0], e[1], 1}] += -c;
  }
  m[{1, 1, 2}] += 4.0 * t;
  m[{2, 0, 2}] += 1.0;
  m[{2, 2, 2}] += 1.0;
  m[{0, 0, 2}] += 1.0;
  m[{0, 2, 2}] += 1.0;
  return LaurentPoly3(m);
}

LaurentPoly3 printed_HS(double t) {
  const double c = std::sqrt(2.0 * t);
  std::map<Exponent, cplx> m;
  m[{2, 2, 2}] += 1.0;
  m[{0, 2, 2}] += 1.0;
  m[{2, 0, 2}] += -1.0;
  m[{0, 0, 2}] += -1.0;
  m[{1, 1, 4}] += 2.0;
  m[{1, 1, 0}] += -2.0;
  // -c z (xy^2 - y - x + z^2 y - z^2 x + z^2 xy^2 + z^2 x^2 y - x^2 y)
  m[{1, 2, 1}] += -c;
  m[{0, 1, 1}] += c;
  m[{1, 0, 1}] += c;
  m[{0, 1, 3}] += -c;
  m[{1, 0, 3}] += c;
  m[{1, 2, 3}] += -c;
  m[{2, 1, 3}] += -c;
  m[{2, 1, 1}] += c;
  return LaurentPoly3(m);
}

// Returns k if a == k * b coefficientwise (same support), NaN otherwise.
cplx proportionality(const LaurentPoly3& a, const LaurentPoly3& b, double tol) {
  if (a.terms().size() != b.terms().size()) return {NAN, NAN};
  const cplx k = a.terms().front().c / b.terms().front().c;
  for (std::size_t i = 0; i < a.terms().size(); ++i) {
    if (a.terms()[i].e != b.terms()[i].e) return {NAN, NAN};
    if (std::abs(a.terms()[i].c - k * b.terms()[i].c) > tol) return {NAN, NAN};
  }
  return k;
}

cplx direct_xy_det(const Coin& u, cplx x, cplx y, cplx z) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = x;
  m(1, 1) = 1.0 / x;
  m(2, 2) = y;
  m(3, 3) = 1.0 / y;
  return x * y * (Eigen::Matrix4cd::Identity() - z * m * u).determinant();
}

cplx random_torus(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(0.0, kTwoPi);
  return std::polar(1.0, a(rng));
}

}  // namespace

TEST(Laurent, MonomialBasics) {
  const LaurentPoly3 p = LaurentPoly3::monomial({2, 1, 3}, cplx(1.5, -0.5));
  const cplx x(0.3, 0.8), y(-1.2, 0.1), z(0.7, -0.4);
  const cplx v = p.eval(x, y, z);
  EXPECT_LT(std::abs(v - cplx(1.5, -0.5) * x * x * y * z * z * z), 1e-14);
  const auto g = p.grad_log(x, y, z);
  EXPECT_LT(std::abs(g[0] - 2.0 * v), 1e-14);
  EXPECT_LT(std::abs(g[1] - 1.0 * v), 1e-14);
  EXPECT_LT(std::abs(g[2] - 3.0 * v), 1e-14);
}

TEST(Laurent, GradLogRandomMonomials) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> e(-3, 4);
  for (int k = 0; k < 50; ++k) {
    const Exponent ex{e(rng), e(rng), e(rng)};
    const LaurentPoly3 p = LaurentPoly3::monomial(ex, 1.0);
    const cplx x = 1.1 * random_torus(rng), y = 0.9 * random_torus(rng), z = random_torus(rng);
    const auto g = p.grad_log(x, y, z);
    const cplx v = p.eval(x, y, z);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(std::abs(g[i] - double(ex[i]) * v), 1e-12 * std::abs(v) + 1e-14);
  }
}

TEST(Laurent, EvalAtOnesIsCoefficientSum) {
  const LaurentPoly3 h = build_H(make_S(0.3));
  cplx sum{};
  for (const auto& t : h.terms()) sum += t.c;
  EXPECT_LT(std::abs(h.eval(1.0, 1.0, 1.0) - sum), 1e-14);
}

TEST(Laurent, ZeroCoordinateRejected) {
  const LaurentPoly3 h = build_H(make_grover());
  EXPECT_THROW(h.eval(0.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(h.grad(1.0, 1.0, 0.0), DomainError);
  EXPECT_THROW(h.grad_log(1.0, 0.0, 1.0), DomainError);
}

TEST(Laurent, DropsTinyCoefficients) {
  const LaurentPoly3 a = LaurentPoly3::monomial({1, 0, 0}, 1.0);
  const LaurentPoly3 b = a - LaurentPoly3::monomial({1, 0, 0}, 1.0 + 1e-17);
  EXPECT_TRUE(b.empty());
}

TEST(Laurent, GradMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  for (const auto& m : builtins()) {
    const LaurentPoly3 h = build_H(m);
    for (int k = 0; k < 100; ++k) {
      const cplx x = random_torus(rng), y = random_torus(rng), z = random_torus(rng);
      const auto g = h.grad(x, y, z);
      const double step = 1e-6;
      const std::array<cplx, 3> fd{(h.eval(x + step, y, z) - h.eval(x - step, y, z)) / (2 * step),
                                   (h.eval(x, y + step, z) - h.eval(x, y - step, z)) / (2 * step),
                                   (h.eval(x, y, z + step) - h.eval(x, y, z - step)) / (2 * step)};
      for (std::size_t i = 0; i < 3; ++i)
        EXPECT_LE(std::abs(g[i] - fd[i]), 1e-6 * std::max(1.0, std::abs(g[i])));
    }
  }
}

TEST(Laurent, LogJetConsistent) {
  const LaurentPoly3 h = build_H(make_A(0.3));
  const cplx x(0.6, 0.8), y(0.0, 1.0), z(-0.28, 0.96);
  const LogJet j = h.log_jet(x, y, z);
  const auto g = h.grad_log(x, y, z);
  EXPECT_LT(std::abs(j.value - h.eval(x, y, z)), 1e-14);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_LT(std::abs(j.d[k] - g[k]), 1e-14);
  // theta_z theta_z via finite differences of z dH/dz along z -> z e^{ih}
  const double step = 1e-5;
  const cplx up = h.grad_log(x, y, z * std::polar(1.0, step))[2];
  const cplx dn = h.grad_log(x, y, z * std::polar(1.0, -step))[2];
  EXPECT_LT(std::abs((up - dn) / (2.0 * step) - cplx(0.0, 1.0) * j.dd[2][2]), 1e-8);
}

TEST(GenFun, HExponentWindow) {
  for (const auto& m : builtins()) {
    const LaurentPoly3 h = build_H(m);
    EXPECT_GE(h.min_exponent(0), 0);
    EXPECT_LE(h.max_exponent(0), 2);
    EXPECT_GE(h.min_exponent(1), 0);
    EXPECT_LE(h.max_exponent(1), 2);
    EXPECT_GE(h.min_exponent(2), 0);
    EXPECT_LE(h.max_exponent(2), 4);
  }
}

TEST(GenFun, HMatchesPrintedBForm) {
  for (double t : {1.0 / 3.0, 0.5, 2.0 / 3.0}) {
    const cplx k = proportionality(printed_HB(t), build_H(make_B(t)), 1e-12);
    EXPECT_LT(std::abs(k - 2.0), 1e-12) << t;
  }
}

TEST(GenFun, HMatchesPrintedSFormUpToSign) {
  for (double t : {0.125, 0.5, 0.875}) {
    const cplx k = proportionality(printed_HS(t), build_H(make_S(t)), 1e-12);
    EXPECT_LT(std::abs(k + 2.0), 1e-12) << t;
  }
}

TEST(GenFun, HMatchesDirectDeterminant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> rad(0.5, 1.5);
  for (const auto& m : builtins()) {
    const LaurentPoly3 h = build_H(m);
    for (int k = 0; k < 100; ++k) {
      const cplx x = rad(rng) * random_torus(rng), y = rad(rng) * random_torus(rng), z = rad(rng) * random_torus(rng);
      EXPECT_LE(std::abs(h.eval(x, y, z) - direct_xy_det(m.coin, x, y, z)), 1e-11);
    }
  }
}

TEST(GenFun, GoldenDumpBHalf) {
  std::ifstream in(std::string(QRW2D_GOLDEN_DIR) + "/H_B_half.txt");
  ASSERT_TRUE(in.good());
  std::ostringstream os;
  build_H(make_B(0.5)).dump(os);
  std::istringstream got(os.str());
  int a, b, c, a2, b2, c2;
  double re, im, re2, im2;
  int lines = 0;
  while (in >> a >> b >> c >> re >> im) {
    ASSERT_TRUE(static_cast<bool>(got >> a2 >> b2 >> c2 >> re2 >> im2)) << "dump ended early";
    EXPECT_EQ(std::tie(a, b, c), std::tie(a2, b2, c2));
    EXPECT_NEAR(re, re2, 1e-12);
    EXPECT_NEAR(im, im2, 1e-12);
    ++lines;
  }
  EXPECT_FALSE(static_cast<bool>(got >> a2)) << "dump has extra lines";
  EXPECT_EQ(lines, 15);
}

TEST(GenFun, SeriesConsistency) {
  // G - H * (sum_{n<=4} (MU)^n_ij z^n) has no terms of z-degree <= 4.
  for (const auto& m : builtins()) {
    const GenFun gf(m);
    std::array<oracle::LMatrix, 5> pw;
    for (int n = 0; n <= 4; ++n) pw[static_cast<std::size_t>(n)] = oracle::power(m.coin, n);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        std::map<Exponent, cplx> series;
        for (int n = 0; n <= 4; ++n)
          for (const auto& [site, v] : pw[static_cast<std::size_t>(n)][i][j]) series[{site.first, site.second, n}] += v;
        const LaurentPoly3 diff = gf.G[i][j] - gf.H * LaurentPoly3(series);
        for (const auto& t : diff.terms())
          if (t.e[2] <= 4) EXPECT_LE(std::abs(t.c), 1e-11) << m.label() << " " << i << j;
      }
  }
}

TEST(GenFun, ZeroOrderIsIdentity) {
  const GenFun gf(make_A(0.2));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      // z^0 part of G/H equals G_0 / H_0 with H_0 = xy
      cplx g0 = 0.0;
      for (const auto& t : gf.G[i][j].terms())
        if (t.e[2] == 0) g0 += t.c * (t.e[0] == 1 && t.e[1] == 1 ? 1.0 : 100.0);
      EXPECT_LT(std::abs(g0 - (i == j ? 1.0 : 0.0)), 1e-14) << i << j;
    }
}

TEST(GenFun, GVanishesAtBSingularPoints) {
  for (double t : {1.0 / 3.0, 0.5, 2.0 / 3.0}) {
    const GenFun gf(make_B(t));
    for (double sgn : {1.0, -1.0})
      for (double im_sign : {1.0, -1.0}) {
        const cplx z = sgn * cplx(std::sqrt(t / 2.0), im_sign * std::sqrt(1.0 - t / 2.0));
        const cplx x = sgn, y = sgn;
        EXPECT_LT(std::abs(gf.H.eval(x, y, z)), 1e-13);
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) EXPECT_LT(std::abs(gf.G[i][j].eval(x, y, z)), 1e-12) << t << i << j;
      }
  }
}

TEST(GenFun, RealSectionIsReal) {
  std::mt19937_64 rng(5);
  for (const auto& m : builtins()) {
    const GenFun gf(m);
    for (int k = 0; k < 100; ++k) {
      const cplx v = gf.H_real.eval(random_torus(rng), random_torus(rng), random_torus(rng));
      EXPECT_LT(std::abs(v.imag()), 1e-13) << m.label();
    }
  }
}

TEST(Roots, UnitModulusAndResidual) {
  std::mt19937_64 rng(9);
  for (const auto& m : builtins()) {
    const LaurentPoly3 h = build_H(m);
    for (int k = 0; k < 200; ++k) {
      const cplx x = random_torus(rng), y = random_torus(rng);
      const ZRoots zr = roots_in_z(h, x, y);
      EXPECT_LE(zr.roots.size(), 4u);
      for (const auto& z : zr.roots) {
        EXPECT_LT(std::abs(std::abs(z) - 1.0), 1e-8);
        EXPECT_LT(std::abs(h.eval(x, y, z)), 1e-9);
      }
      for (std::size_t i = 1; i < zr.roots.size(); ++i)
        EXPECT_LE(wrap_angle(std::arg(zr.roots[i - 1])), wrap_angle(std::arg(zr.roots[i])));
    }
  }
}

TEST(Roots, ReciprocalEigenvaluesAtOne) {
  for (const auto& m : builtins()) {
    const ZRoots zr = roots_in_z(build_H(m), 1.0, 1.0);
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(m.coin);
    ASSERT_EQ(zr.roots.size(), 4u);
    std::vector<bool> used(4, false);
    for (int k = 0; k < 4; ++k) {
      const cplx inv = 1.0 / es.eigenvalues()(k);
      double best = 1e9;
      int at = -1;
      for (int i = 0; i < 4; ++i)
        if (!used[static_cast<std::size_t>(i)] && std::abs(zr.roots[static_cast<std::size_t>(i)] - inv) < best) {
          best = std::abs(zr.roots[static_cast<std::size_t>(i)] - inv);
          at = i;
        }
      used[static_cast<std::size_t>(at)] = true;
      int mult = 0;
      for (int q = 0; q < 4; ++q) mult += std::abs(es.eigenvalues()(q) - es.eigenvalues()(k)) < 1e-6 ? 1 : 0;
      // a root of multiplicity m is only determined to about eps^(1/m)
      EXPECT_LT(best, mult == 1 ? 1e-7 : 1e-4) << m.label();
    }
  }
}

TEST(Torality, UnitaryModelsPass) {
  for (const auto& m : {make_S(0.125), make_grover()}) {
    const ToralityReport rep = check_torality(m, 10000, 1e-8);
    EXPECT_TRUE(rep.passed) << m.label() << " " << rep.max_deviation;
  }
}

TEST(Torality, NonUnitaryFlagged) {
  Coin u = Coin::Identity();
  u(3, 3) = 0.9;
  const ToralityReport rep = check_torality(make_unchecked(u), 1000, 1e-8);
  EXPECT_FALSE(rep.passed);
  EXPECT_GT(rep.max_deviation, 1e-3);
}
