#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracle/series_oracle.hpp"
#include "qrw2d/simulate.hpp"

using namespace qrw2d;

namespace {

std::vector<CoinModel> builtins() {
  return {make_S(0.125), make_S(0.5), make_A(1.0 / 3.0), make_B(0.5), make_grover()};
}

double oracle_error(const CoinModel& m, int n) {
  const auto pw = oracle::power(m.coin, n);
  double worst = 0.0;
  for (int j = 0; j < 4; ++j) {
    const WaveField f = evolve(m, basis_state(j), n);
    for (int r = -n; r <= n; ++r)
      for (int s = -n; s <= n; ++s)
        for (int i = 0; i < 4; ++i)
          worst = std::max(worst, std::abs(f.at(r, s, i) - oracle::coeff(pw, i, j, r, s)));
  }
  return worst;
}

}  // namespace

TEST(Simulate, InitialState) {
  const WaveField f = initial(basis_state(0));
  EXPECT_EQ(f.n(), 0);
  EXPECT_EQ(f.at(0, 0, 0), cplx(1.0));
  EXPECT_EQ(f.at(0, 0, 1), cplx(0.0));
  const double h = 1.0 / std::sqrt(2.0);
  EXPECT_NO_THROW(initial({cplx(h), cplx(0.0, h), 0.0, 0.0}));
  EXPECT_THROW(initial({1.0, 1.0, 1.0, 1.0}), DomainError);
}

TEST(Simulate, OneStepAlternativeHadamard) {
  const WaveField f = step(initial(basis_state(0)), make_S(0.5));
  int nonzero_sites = 0;
  for (int r = -1; r <= 1; ++r)
    for (int s = -1; s <= 1; ++s) {
      double p = 0.0;
      for (int i = 0; i < 4; ++i) p += std::norm(f.at(r, s, i));
      if (p > 0.0) ++nonzero_sites;
    }
  EXPECT_EQ(nonzero_sites, 4);
  const std::array<std::array<int, 2>, 4> pos{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(f.at(pos[i][0], pos[i][1], i)), 0.5, 1e-15);
}

TEST(Simulate, NormPreservedPerStep) {
  WaveField f = initial(basis_state(2));
  for (int k = 0; k < 20; ++k) {
    const double before = f.total_probability();
    f = step(f, make_A(0.3));
    EXPECT_NEAR(f.total_probability(), before, 1e-14);
  }
}

TEST(Simulate, EvolveZeroIsInitial) {
  const WaveField f = evolve(make_grover(), basis_state(0), 0);
  EXPECT_EQ(f.raw(), initial(basis_state(0)).raw());
}

TEST(Simulate, GroverTwoStepsMatchOracle) { EXPECT_LT(oracle_error(make_grover(), 2), 1e-15); }

TEST(Simulate, SeriesOracleAllFamilies) {
  for (double t : {0.125, 0.5, 2.0 / 3.0}) {
    for (const auto& m : {make_S(t), make_B(t)})
      for (int n = 0; n <= 8; ++n) EXPECT_LE(oracle_error(m, n), 1e-12) << m.label() << " n=" << n;
  }
  for (double t : {0.125, 0.5}) {
    for (int n = 0; n <= 8; ++n) EXPECT_LE(oracle_error(make_A(t), n), 1e-12) << t << " n=" << n;
  }
  for (int n = 0; n <= 8; ++n) EXPECT_LE(oracle_error(make_grover(), n), 1e-12);
}

TEST(Simulate, LightConeAndParityExactlyZero) {
  for (const auto& m : builtins()) {
    const int n = 9;
    const WaveField f = evolve(m, basis_state(1), n);
    for (int r = -n; r <= n; ++r)
      for (int s = -n; s <= n; ++s)
        if (std::abs(r) + std::abs(s) > n || ((r + s - n) % 2 + 2) % 2 != 0)
          for (int i = 0; i < 4; ++i) EXPECT_EQ(f.at(r, s, i), cplx(0.0));
  }
}

TEST(Simulate, NormAfter200) {
  const WaveField f = evolve(make_B(0.5), basis_state(0), 200);
  EXPECT_NEAR(f.total_probability(), 1.0, 1e-10);
}

TEST(Simulate, Linearity) {
  const CoinModel m = make_S(0.3);
  const Chirality u{cplx(0.6), cplx(0.0, 0.8), 0.0, 0.0};
  const Chirality v{0.0, 0.0, cplx(0.0, 1.0), 0.0};
  const cplx a(0.6, 0.0), b(0.0, 0.8);
  Chirality w;
  for (std::size_t k = 0; k < 4; ++k) w[k] = a * u[k] + b * v[k];
  const int n = 30;
  const WaveField fu = evolve(m, u, n), fv = evolve(m, v, n), fw = evolve(m, w, n);
  double worst = 0.0;
  for (std::size_t k = 0; k < fw.raw().size(); ++k)
    worst = std::max(worst, std::abs(fw.raw()[k] - (a * fu.raw()[k] + b * fv.raw()[k])));
  EXPECT_LT(worst, 1e-12);
}

TEST(Simulate, EvolveMatchesRepeatedStep) {
  const CoinModel m = make_B(0.4);
  WaveField f = initial(basis_state(3));
  for (int k = 0; k < 25; ++k) f = step(f, m);
  EXPECT_EQ(f.raw(), evolve(m, basis_state(3), 25).raw());
}

TEST(Simulate, AmplitudeAt) {
  const WaveField f = evolve(make_S(0.5), basis_state(0), 3);
  EXPECT_EQ(amplitude_at(f, 4, 0, 0), cplx(0.0));
  EXPECT_EQ(amplitude_at(f, 2, 2, 0), cplx(0.0));
  EXPECT_EQ(amplitude_at(f, 1, 1, 0), cplx(0.0));
  EXPECT_EQ(amplitude_at(initial(basis_state(0)), 0, 0, 0), cplx(1.0));
  EXPECT_EQ(amplitude_at(f, 0, 0, 7), cplx(0.0));
}

TEST(Simulate, ProbabilityProfile) {
  const ProbabilityGrid p0 = probability_profile(initial(basis_state(0)));
  EXPECT_EQ(p0.at(0, 0), 1.0);
  const ProbabilityGrid p = probability_profile(evolve(make_grover(), basis_state(0), 50));
  EXPECT_NEAR(p.total(), 1.0, 1e-10);
}

TEST(Simulate, CsvExport) {
  std::ostringstream os;
  write_probability_csv(os, probability_profile(evolve(make_S(0.5), basis_state(0), 1)));
  EXPECT_EQ(os.str(), "r,s,p\n-1,0,0.25\n0,-1,0.25\n0,1,0.25\n1,0,0.25\n");
  std::ostringstream hi;
  write_probability_csv(hi, probability_profile(evolve(make_S(0.5), basis_state(0), 1)), 0.5);
  EXPECT_EQ(hi.str(), "r,s,p\n");
}

TEST(Simulate, PgmExport) {
  std::ostringstream os;
  write_probability_pgm(os, probability_profile(initial(basis_state(0))), Scale::Linear);
  const std::string s = os.str();
  EXPECT_EQ(s, std::string("P5\n1 1\n65535\n\xff\xff", 15));

  std::ostringstream one;
  write_probability_pgm(one, probability_profile(evolve(make_S(0.5), basis_state(0), 1)), Scale::Log);
  const std::string img = one.str();
  const std::string header = "P5\n3 3\n65535\n";
  ASSERT_EQ(img.size(), header.size() + 18);
  // row 0 is s = +1: only the centre column is lit
  auto px = [&](int row, int col) {
    const auto k = header.size() + static_cast<std::size_t>(2 * (row * 3 + col));
    return (static_cast<unsigned char>(img[k]) << 8) | static_cast<unsigned char>(img[k + 1]);
  };
  EXPECT_EQ(px(0, 1), 65535);
  EXPECT_EQ(px(0, 0), 0);
  EXPECT_EQ(px(1, 1), 0);
  EXPECT_EQ(px(1, 0), 65535);
}

TEST(Simulate, Evolve400Timing) {
  for (const auto& m : builtins()) {
    const WaveField f = evolve(m, basis_state(0), 400);
    EXPECT_NEAR(f.total_probability(), 1.0, 1e-10) << m.label();
  }
}
