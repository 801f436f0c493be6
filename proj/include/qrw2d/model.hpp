#pragma once
// Coin models for nearest-neighbour quantum random walks on Z^2.
//
// Chirality j in {0,1,2,3} is tied to the diagonal of M(x,y) = diag(x, 1/x, y, 1/y),
// i.e. to the steps (1,0), (-1,0), (0,1), (0,-1) in that order. Every other
// module relies on this ordering.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

namespace qrw2d {

using cplx = std::complex<double>;
using Coin = Eigen::Matrix4cd;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Step {
  int dr;
  int ds;
};

struct StepSet {
  static constexpr std::size_t size() { return 4; }
  std::array<Step, 4> steps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  const Step& operator[](std::size_t j) const { return steps[j]; }
};

inline constexpr StepSet kNearestNeighbour{};

enum class Family { S, A, B, Grover, Custom };

inline std::string family_name(Family f) {
  switch (f) {
    case Family::S: return "S";
    case Family::A: return "A";
    case Family::B: return "B";
    case Family::Grover: return "grover";
    case Family::Custom: return "custom";
  }
  return "custom";
}

/// max_ij |(U^H U - I)_ij|
inline double unitarity_defect(const Coin& u) {
  return (u.adjoint() * u - Coin::Identity()).cwiseAbs().maxCoeff();
}

struct CoinModel {
  StepSet step_set{};
  Coin coin = Coin::Identity();
  Family family = Family::Custom;
  std::optional<double> t;

  std::string label() const {
    if (!t) return family_name(family);
    return family_name(family) + "(" + std::to_string(*t) + ")";
  }
};

namespace detail {

inline void require_open_interval(const char* name, double t, double lo, double hi) {
  if (!(t > lo && t < hi)) {
    throw DomainError(std::string(name) + ": parameter t=" + std::to_string(t) +
                      " outside (" + std::to_string(lo) + ", " + std::to_string(hi) + ")");
  }
}

inline Coin real_coin(const std::array<std::array<double, 4>, 4>& rows) {
  Coin u;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) u(i, j) = cplx(rows[i][j], 0.0);
  return u;
}

}  // namespace detail

/// S(t), 0 < t < 1. The (4,4) entry is sqrt(t)/sqrt(2); the only choice that
/// keeps the printed matrix orthogonal.
inline CoinModel make_S(double t) {
  detail::require_open_interval("make_S", t, 0.0, 1.0);
  const double a = std::sqrt(t / 2.0);
  const double b = std::sqrt((1.0 - t) / 2.0);
  CoinModel m;
  m.coin = detail::real_coin({{{a, a, b, b}, {-a, a, -b, b}, {b, -b, -a, a}, {-b, -b, a, a}}});
  m.family = Family::S;
  m.t = t;
  return m;
}

/// A(t), 0 < t < 1/sqrt(3).
inline CoinModel make_A(double t) {
  detail::require_open_interval("make_A", t, 0.0, 1.0 / std::sqrt(3.0));
  const double q = std::sqrt(1.0 - 3.0 * t * t);
  CoinModel m;
  m.coin = detail::real_coin({{{t, t, t, q}, {-t, t, -q, t}, {t, -q, -t, t}, {-q, -t, t, t}}});
  m.family = Family::A;
  m.t = t;
  return m;
}

/// B(t): S(t) with its third row negated.
inline CoinModel make_B(double t) {
  detail::require_open_interval("make_B", t, 0.0, 1.0);
  CoinModel m = make_S(t);
  m.coin.row(2) *= -1.0;
  m.family = Family::B;
  return m;
}

inline CoinModel make_grover() {
  CoinModel m;
  m.coin = detail::real_coin({{{0.5, -0.5, -0.5, -0.5},
                               {-0.5, 0.5, -0.5, -0.5},
                               {-0.5, -0.5, 0.5, -0.5},
                               {-0.5, -0.5, -0.5, 0.5}}});
  m.family = Family::Grover;
  return m;
}

inline constexpr double kCustomUnitarityTol = 1e-10;

inline CoinModel make_custom(const Coin& u) {
  const double defect = unitarity_defect(u);
  if (!(defect < kCustomUnitarityTol)) {
    throw DomainError("make_custom: coin is not unitary (max |U^H U - I| = " +
                      std::to_string(defect) + ")");
  }
  CoinModel m;
  m.coin = u;
  m.family = Family::Custom;
  return m;
}

/// Wraps an arbitrary matrix without the unitarity check. Only diagnostics
/// (torality and the `check` suite) should see such models.
inline CoinModel make_unchecked(const Coin& u) {
  CoinModel m;
  m.coin = u;
  m.family = Family::Custom;
  return m;
}

// JSON model descriptor:
//   {"family": "S"|"A"|"B"|"grover"|"custom", "t": number?, "coin": [[[re,im] x4] x4]?}

inline nlohmann::json coin_to_json(const Coin& u) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < 4; ++j) row.push_back({u(i, j).real(), u(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

inline nlohmann::json to_json(const CoinModel& m) {
  nlohmann::json j;
  j["family"] = family_name(m.family);
  if (m.t) j["t"] = *m.t;
  if (m.family == Family::Custom) j["coin"] = coin_to_json(m.coin);
  return j;
}

inline Coin coin_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw ConfigError("coin: expected 4 rows");
  Coin u;
  for (int i = 0; i < 4; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || row.size() != 4) throw ConfigError("coin: each row needs 4 entries");
    for (int k = 0; k < 4; ++k) {
      const auto& e = row[k];
      if (e.is_number()) {
        u(i, k) = cplx(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        u(i, k) = cplx(e[0].get<double>(), e[1].get<double>());
      } else {
        throw ConfigError("coin: entries must be [re, im] pairs");
      }
    }
  }
  return u;
}

/// Parses a descriptor. Unknown keys are rejected. With `validate == false` a
/// custom coin is accepted even if it is not unitary.
inline CoinModel model_from_json(const nlohmann::json& j, bool validate = true) {
  if (!j.is_object()) throw ConfigError("model descriptor must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "family" && key != "t" && key != "coin")
      throw ConfigError("model descriptor: unknown field '" + key + "'");
  }
  if (!j.contains("family") || !j["family"].is_string())
    throw ConfigError("model descriptor: missing string field 'family'");
  const auto fam = j["family"].get<std::string>();
  auto need_t = [&]() {
    if (!j.contains("t") || !j["t"].is_number())
      throw ConfigError("model descriptor: family " + fam + " needs numeric 't'");
    if (j.contains("coin")) throw ConfigError("model descriptor: 'coin' only valid for custom");
    return j["t"].get<double>();
  };
  if (fam == "S") return make_S(need_t());
  if (fam == "A") return make_A(need_t());
  if (fam == "B") return make_B(need_t());
  if (fam == "grover") {
    if (j.contains("t") || j.contains("coin"))
      throw ConfigError("model descriptor: grover takes no parameters");
    return make_grover();
  }
  if (fam == "custom") {
    if (j.contains("t")) throw ConfigError("model descriptor: custom takes no 't'");
    if (!j.contains("coin")) throw ConfigError("model descriptor: custom needs 'coin'");
    const Coin u = coin_from_json(j["coin"]);
    return validate ? make_custom(u) : make_unchecked(u);
  }
  throw ConfigError("model descriptor: unknown family '" + fam + "'");
}

}  // namespace qrw2d
