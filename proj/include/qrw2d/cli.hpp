#pragma once
// Command-line front end: simulate, shape, compare, critical, check.
//
// Exit codes: 0 success, 2 configuration or input error, 3 a numerical check
// failed.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrw2d/asymptotics.hpp"
#include "qrw2d/simulate.hpp"

namespace qrw2d::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCheckFailed = 3;

enum class Format { Csv, Pgm, Json };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "pgm") return Format::Pgm;
  if (s == "json") return Format::Json;
  throw ConfigError("unknown format '" + s + "' (expected csv|pgm|json)");
}

/// Everything a subcommand needs. Filled from an optional JSON config file,
/// then overridden by command-line flags.
struct RunConfig {
  std::optional<CoinModel> model;
  int n = 200;
  Chirality start = basis_state(0);
  int grid = 100;
  int size = 400;
  std::string out;  // empty: standard output
  std::optional<Format> format;
  Scale scale = Scale::Log;
  double threshold = kDefaultCsvThreshold;
  Tolerances tol;
  std::vector<Direction> dirs;
  bool all_starts = false;
};

inline nlohmann::json read_json_text(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(what + ": invalid JSON (" + e.what() + ")");
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// `--model` accepts a path to a JSON descriptor or the descriptor itself.
inline CoinModel load_model(const std::string& arg, bool validate) {
  const bool inline_json = !arg.empty() && arg.front() == '{';
  const std::string text = inline_json ? arg : read_file(arg);
  return model_from_json(read_json_text(text, "model"), validate);
}

inline cplx parse_complex(const std::string& tok) {
  const auto colon = tok.find(':');
  try {
    std::size_t used = 0;
    if (colon == std::string::npos) {
      const double re = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return {re, 0.0};
    }
    const std::string a = tok.substr(0, colon), b = tok.substr(colon + 1);
    const double re = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument(tok);
    const double im = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument(tok);
    return {re, im};
  } catch (const std::logic_error&) {
    throw ConfigError("bad complex number '" + tok + "' (expected re or re:im)");
  }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

/// "1,0,0,0" or "0.7071,0:0.7071,0,0".
inline Chirality parse_start(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 4) throw ConfigError("start needs 4 comma-separated entries");
  Chirality c;
  for (std::size_t k = 0; k < 4; ++k) c[k] = parse_complex(parts[k]);
  if (std::abs(norm2(c) - 1.0) > 2 * kStartNormTol) throw ConfigError("start vector must have unit norm");
  return c;
}

inline Chirality start_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw ConfigError("config 'start': expected 4 entries");
  Chirality c;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& e = j[k];
    if (e.is_number())
      c[k] = {e.get<double>(), 0.0};
    else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
      c[k] = {e[0].get<double>(), e[1].get<double>()};
    else
      throw ConfigError("config 'start': entries must be numbers or [re, im]");
  }
  if (std::abs(norm2(c) - 1.0) > 2 * kStartNormTol) throw ConfigError("start vector must have unit norm");
  return c;
}

inline Direction parse_direction(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 3) throw ConfigError("direction '" + s + "' must be r,s,n");
  long v[3];
  for (int k = 0; k < 3; ++k) {
    try {
      std::size_t used = 0;
      v[k] = std::stol(parts[static_cast<std::size_t>(k)], &used);
      if (used != parts[static_cast<std::size_t>(k)].size()) throw std::invalid_argument(s);
    } catch (const std::logic_error&) {
      throw ConfigError("direction '" + s + "' must be three integers");
    }
  }
  if (v[2] < 1) throw ConfigError("direction '" + s + "': n must be at least 1");
  return Direction(v[0], v[1], v[2]);
}

inline void apply_tolerance(Tolerances& tol, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError("--tol expects name=value, got '" + spec + "'");
  const std::string name = spec.substr(0, eq), value = spec.substr(eq + 1);
  double x = 0.0;
  try {
    std::size_t used = 0;
    x = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
  } catch (const std::logic_error&) {
    throw ConfigError("--tol " + name + ": '" + value + "' is not a number");
  }
  tol.set(name, x);
}

inline void apply_config_file(RunConfig& cfg, const nlohmann::json& j, bool validate_model) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{"model", "n",    "start", "grid", "size", "out",       "format",
                                           "scale", "threshold", "tol", "dirs", "all_starts"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("config: unknown key '" + key + "'");
  auto integer = [&](const char* key) {
    if (!j[key].is_number_integer()) throw ConfigError(std::string("config '") + key + "': expected an integer");
    return j[key].get<long>();
  };
  auto string = [&](const char* key) {
    if (!j[key].is_string()) throw ConfigError(std::string("config '") + key + "': expected a string");
    return j[key].get<std::string>();
  };
  if (j.contains("model")) cfg.model = model_from_json(j["model"], validate_model);
  if (j.contains("n")) cfg.n = static_cast<int>(integer("n"));
  if (j.contains("grid")) cfg.grid = static_cast<int>(integer("grid"));
  if (j.contains("size")) cfg.size = static_cast<int>(integer("size"));
  if (j.contains("start")) cfg.start = start_from_json(j["start"]);
  if (j.contains("out")) cfg.out = string("out");
  if (j.contains("format")) cfg.format = parse_format(string("format"));
  if (j.contains("scale")) {
    const auto s = string("scale");
    if (s != "linear" && s != "log") throw ConfigError("config 'scale': expected linear|log");
    cfg.scale = parse_scale(s);
  }
  if (j.contains("threshold")) {
    if (!j["threshold"].is_number()) throw ConfigError("config 'threshold': expected a number");
    cfg.threshold = j["threshold"].get<double>();
  }
  if (j.contains("all_starts")) {
    if (!j["all_starts"].is_boolean()) throw ConfigError("config 'all_starts': expected a boolean");
    cfg.all_starts = j["all_starts"].get<bool>();
  }
  if (j.contains("tol")) {
    if (!j["tol"].is_object()) throw ConfigError("config 'tol': expected an object");
    for (const auto& [name, value] : j["tol"].items()) {
      if (!value.is_number()) throw ConfigError("config 'tol." + name + "': expected a number");
      cfg.tol.set(name, value.get<double>());
    }
  }
  if (j.contains("dirs")) {
    if (!j["dirs"].is_array()) throw ConfigError("config 'dirs': expected an array of [r, s, n]");
    for (const auto& d : j["dirs"]) {
      if (!d.is_array() || d.size() != 3 || !d[0].is_number_integer() || !d[1].is_number_integer() ||
          !d[2].is_number_integer() || d[2].get<long>() < 1)
        throw ConfigError("config 'dirs': each entry must be [r, s, n] with n >= 1");
      cfg.dirs.emplace_back(d[0].get<long>(), d[1].get<long>(), d[2].get<long>());
    }
  }
}

/// Writes through `write` to the --out path, or to `fallback` when none is set.
template <typename Writer>
void emit(const RunConfig& cfg, std::ostream& fallback, Writer&& write) {
  if (cfg.out.empty()) {
    write(fallback);
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + cfg.out + "' for writing");
  write(f);
  if (!f) throw ConfigError("write to '" + cfg.out + "' failed");
}

inline nlohmann::json start_to_json(const Chirality& c) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& a : c) j.push_back({a.real(), a.imag()});
  return j;
}

// ---------------------------------------------------------------------------
// simulate

inline void cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.n < 0) throw ConfigError("--n must be non-negative");
  const ProbabilityGrid grid = probability_profile(evolve(*cfg.model, cfg.start, cfg.n));
  const Format fmt = cfg.format.value_or(Format::Csv);
  emit(cfg, out, [&](std::ostream& os) {
    if (fmt == Format::Csv) {
      write_probability_csv(os, grid, cfg.threshold);
    } else if (fmt == Format::Pgm) {
      write_probability_pgm(os, grid, cfg.scale);
    } else {
      nlohmann::json sites = nlohmann::json::array();
      for (int r = -cfg.n; r <= cfg.n; ++r)
        for (int s = -cfg.n; s <= cfg.n; ++s)
          if (grid.at(r, s) > cfg.threshold) sites.push_back({r, s, grid.at(r, s)});
      const nlohmann::json j = {{"model", to_json(*cfg.model)},   {"n", cfg.n},
                                {"start", start_to_json(cfg.start)}, {"total_probability", grid.total()},
                                {"max_probability", grid.max()},     {"sites", sites}};
      os << j.dump(2) << '\n';
    }
  });
}

// ---------------------------------------------------------------------------
// shape

/// Counts of cloud points per pixel on [-1, 1]^2, row 0 at v2 = +1.
inline std::vector<std::uint32_t> cloud_density(const std::vector<CloudPoint>& cloud, int size) {
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), 0);
  auto bin = [&](double v) { return std::clamp(static_cast<int>(std::floor((v + 1.0) * 0.5 * size)), 0, size - 1); };
  for (const auto& p : cloud) {
    const int col = bin(p.v1), row = size - 1 - bin(p.v2);
    ++counts[static_cast<std::size_t>(row) * static_cast<std::size_t>(size) + static_cast<std::size_t>(col)];
  }
  return counts;
}

/// Dense pixels are dark: grey = 65535 - level(count).
inline void write_density_pgm(std::ostream& os, const std::vector<std::uint32_t>& counts, int size, Scale scale) {
  const double cmax = counts.empty() ? 0.0 : static_cast<double>(*std::max_element(counts.begin(), counts.end()));
  std::vector<std::uint16_t> pix(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double c = static_cast<double>(counts[k]);
    const std::uint16_t level = scale == Scale::Log ? (c > 0 ? grey_level(c, 1.0, std::max(cmax, 1.0), scale) : 0)
                                                    : grey_level(c, 0.0, cmax, scale);
    // A lone count in log scale would map to level 0 and vanish.
    const std::uint16_t shown = (c > 0 && level == 0) ? 1 : level;
    pix[k] = static_cast<std::uint16_t>(65535 - shown);
  }
  write_pgm16(os, size, size, pix);
}

inline void cmd_shape(const RunConfig& cfg, std::ostream& out) {
  if (cfg.grid < 1) throw ConfigError("--grid must be positive");
  if (cfg.size < 1) throw ConfigError("--size must be positive");
  const Asymptotics as(*cfg.model, cfg.tol);
  const auto cloud = as.feasible_region_image(cfg.grid);
  const Format fmt = cfg.format.value_or(Format::Csv);
  emit(cfg, out, [&](std::ostream& os) {
    if (fmt == Format::Csv) {
      write_cloud_csv(os, cloud);
    } else if (fmt == Format::Pgm) {
      write_density_pgm(os, cloud_density(cloud, cfg.size), cfg.size, cfg.scale);
    } else {
      nlohmann::json pts = nlohmann::json::array();
      for (const auto& p : cloud) pts.push_back({p.v1, p.v2});
      os << nlohmann::json{{"model", to_json(*cfg.model)}, {"grid", cfg.grid}, {"velocities", pts}}.dump(2) << '\n';
    }
  });
}

// ---------------------------------------------------------------------------
// compare / critical

inline double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Exact P(r, s) at every requested time for one start vector.
inline std::vector<double> exact_probabilities(const CoinModel& model, const Chirality& start,
                                               const std::vector<Direction>& dirs) {
  long n_max = 0;
  for (const auto& d : dirs) n_max = std::max(n_max, d.n);
  std::vector<double> out(dirs.size(), 0.0);
  evolve_visit(model, start, static_cast<int>(n_max), [&](int k, const WaveField& f) {
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      if (dirs[i].n != k) continue;
      const int r = static_cast<int>(dirs[i].r), s = static_cast<int>(dirs[i].s);
      if (!f.in_box(r, s)) continue;
      double p = 0.0;
      for (int j = 0; j < 4; ++j) p += std::norm(f.at(r, s, j));
      out[i] = p;
    }
  });
  return out;
}

inline nlohmann::json compare_one_start(const Asymptotics& as, const CoinModel& model, const Chirality& start,
                                        const std::vector<Direction>& dirs) {
  const auto exact = exact_probabilities(model, start, dirs);
  nlohmann::json rows = nlohmann::json::array();
  std::vector<double> errors;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const auto rep = as.amplitude(dirs[i], start);
    nlohmann::json row = report_to_json(rep, exact[i]);
    if (rep.amplitudes && exact[i] > 0.0) {
      const double e = std::abs(rep.predicted_probability - exact[i]) / exact[i];
      row["relative_error"] = e;
      if (rep.status == Status::Inside) errors.push_back(e);
    } else {
      row["relative_error"] = nullptr;
    }
    rows.push_back(row);
  }
  nlohmann::json summary = {{"directions", dirs.size()}, {"inside_compared", errors.size()}};
  summary["median_relative_error"] = errors.empty() ? nlohmann::json(nullptr) : nlohmann::json(median(errors));
  return {{"start", start_to_json(start)}, {"results", rows}, {"summary", summary}};
}

inline void cmd_compare(const RunConfig& cfg, std::ostream& out) {
  if (cfg.dirs.empty()) throw ConfigError("compare needs at least one --dir r,s,n");
  const Asymptotics as(*cfg.model, cfg.tol);
  nlohmann::json j = {{"model", to_json(*cfg.model)}, {"tolerances", cfg.tol.to_json()}};
  if (cfg.all_starts) {
    nlohmann::json runs = nlohmann::json::array();
    for (int s = 0; s < 4; ++s) runs.push_back(compare_one_start(as, *cfg.model, basis_state(s), cfg.dirs));
    j["runs"] = runs;
  } else {
    j["runs"] = nlohmann::json::array({compare_one_start(as, *cfg.model, cfg.start, cfg.dirs)});
  }
  emit(cfg, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

inline void cmd_critical(const RunConfig& cfg, std::ostream& out) {
  if (cfg.dirs.empty()) throw ConfigError("critical needs at least one --dir r,s,n");
  const Asymptotics as(*cfg.model, cfg.tol);
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& d : cfg.dirs) {
    const auto rep = as.amplitude(d, cfg.start);
    nlohmann::json r = report_to_json(rep);
    if (rep.amplitudes) {
      nlohmann::json amps = nlohmann::json::array();
      for (const auto& a : *rep.amplitudes) amps.push_back({a.real(), a.imag()});
      r["amplitudes"] = amps;
    }
    for (std::size_t k = 0; k < rep.points.size(); ++k) {
      const auto& p = rep.points[k].point;
      r["points"][k]["velocity"] = {p.velocity[0], p.velocity[1]};
    }
    reports.push_back(r);
  }
  const nlohmann::json j = {{"model", to_json(*cfg.model)}, {"start", start_to_json(cfg.start)}, {"reports", reports}};
  emit(cfg, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

// ---------------------------------------------------------------------------
// check

struct CheckResult {
  std::string name;
  enum class Outcome { Pass, Fail, Skip } outcome = Outcome::Pass;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
};

inline std::string outcome_name(CheckResult::Outcome o) {
  switch (o) {
    case CheckResult::Outcome::Pass: return "pass";
    case CheckResult::Outcome::Fail: return "fail";
    case CheckResult::Outcome::Skip: return "skip";
  }
  return "fail";
}

namespace detail {

using PolyMatrix = std::array<std::array<LaurentPoly3, 4>, 4>;

// M U with M = diag(x, 1/x, y, 1/y); no z.
inline PolyMatrix step_matrix(const Coin& u) {
  static constexpr std::array<Exponent, 4> shift{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}}};
  PolyMatrix m;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      m[i][j] = LaurentPoly3::monomial(shift[i], u(static_cast<int>(i), static_cast<int>(j)));
  return m;
}

inline PolyMatrix multiply(const PolyMatrix& a, const PolyMatrix& b) {
  PolyMatrix c;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = 0; k < 4; ++k) c[i][j] = c[i][j] + a[i][k] * b[k][j];
  return c;
}

}  // namespace detail

inline CheckResult check_unitarity(const CoinModel& m) {
  const double d = unitarity_defect(m.coin);
  return {"unitary_coin", d < 1e-10 ? CheckResult::Outcome::Pass : CheckResult::Outcome::Fail, d, 1e-10,
          "max |U^H U - I|"};
}

inline CheckResult check_conservation(const CoinModel& m, int n) {
  double dev = 0.0;
  for (int j = 0; j < 4; ++j) dev = std::max(dev, std::abs(evolve(m, basis_state(j), n).total_probability() - 1.0));
  return {"probability_conserved", dev < 1e-10 ? CheckResult::Outcome::Pass : CheckResult::Outcome::Fail, dev, 1e-10,
          "max |sum P - 1| after " + std::to_string(n) + " steps, all basis starts"};
}

/// Simulated amplitudes against the coefficients of (M U)^n.
inline CheckResult check_series(const CoinModel& m, int n_max) {
  const auto step = detail::step_matrix(m.coin);
  detail::PolyMatrix power = step;
  double worst = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    if (n > 1) power = detail::multiply(power, step);
    for (int j = 0; j < 4; ++j) {
      const WaveField f = evolve(m, basis_state(j), n);
      for (int r = -n; r <= n; ++r)
        for (int s = -n; s <= n; ++s)
          for (int i = 0; i < 4; ++i) {
            const cplx c = power[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].coefficient({r, s, 0});
            worst = std::max(worst, std::abs(f.at(r, s, i) - c));
          }
    }
  }
  return {"series_coefficients", worst <= 1e-12 ? CheckResult::Outcome::Pass : CheckResult::Outcome::Fail, worst,
          1e-12, "max |psi_n - [(MU)^n]| for n <= " + std::to_string(n_max)};
}

inline CheckResult check_torality_result(const GenFun& gf, std::size_t samples) {
  const auto rep = check_torality(gf.H, samples, 1e-8);
  std::string detail = "max ||z| - 1| over " + std::to_string(samples) + " (x, y) samples";
  if (rep.degree_dropped) detail += "; z-degree dropped somewhere";
  return {"torality", rep.passed ? CheckResult::Outcome::Pass : CheckResult::Outcome::Fail, rep.max_deviation, 1e-8,
          detail};
}

inline CheckResult check_smooth_or_singular(const GenFun& gf, const std::vector<SingularPoint>& singular) {
  const auto& m = gf.model;
  if (m.family == Family::B && m.t) {
    const double t = *m.t;
    const cplx zc(std::sqrt(t / 2), std::sqrt(1 - t / 2));
    std::vector<std::array<cplx, 3>> expect;
    for (double sign : {1.0, -1.0})
      for (const cplx z : {zc, std::conj(zc)}) expect.push_back({sign, sign, sign * z});
    double worst = singular.size() == 4 ? 0.0 : 1.0;
    for (const auto& e : expect) {
      double best = 1.0;
      for (const auto& s : singular)
        best = std::min(best, std::max({std::abs(s.point.x - e[0]), std::abs(s.point.y - e[1]), std::abs(s.point.z - e[2])}));
      worst = std::max(worst, best);
    }
    return {"singular_points", worst < 1e-6 ? CheckResult::Outcome::Pass : CheckResult::Outcome::Fail, worst, 1e-6,
            std::to_string(singular.size()) + " singular points; max distance to the expected four"};
  }
  if (m.family == Family::S || m.family == Family::A) {
    const double g = min_gradient_on_grid(gf, 64);
    return {"smooth_variety", g > 1e-3 ? CheckResult::Outcome::Pass : CheckResult::Outcome::Fail, g, 1e-3,
            "min |grad H| over a 64x64 sample of V1"};
  }
  return {"singular_points", CheckResult::Outcome::Skip, static_cast<double>(singular.size()), 0.0,
          std::to_string(singular.size()) + " isolated singular points found; no reference set for this family"};
}

inline CheckResult check_curvature(const GenFun& gf, const std::vector<SingularPoint>& singular, int samples) {
  const RealSection section(gf);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  double worst_pair = 0.0, worst_area = 0.0;
  int used = 0, attempts = 0;
  while (used < samples && attempts < 50 * samples) {
    ++attempts;
    const auto pts = sheets(gf, ang(rng), ang(rng));
    if (pts.empty()) continue;
    const SheetPoint& p = pts[static_cast<std::size_t>(rng() % pts.size())];
    if (p.near_coincident || std::isnan(p.velocity[0])) continue;
    bool near = false;
    for (const auto& s : singular) near = near || torus_distance(s.point, p.base) < 0.05;
    if (near) continue;
    const auto c = curvature(gf, section, p.base);
    if (std::abs(c.graph) < 1e-3) continue;  // relative comparisons are meaningless at folds
    double area = NAN;
    try {
      area = area_ratio_curvature(gf.H, p.base);
    } catch (const DomainError&) {
      continue;
    }
    worst_pair = std::max(worst_pair, std::abs(c.implicit - c.graph) / std::abs(c.graph));
    worst_area = std::max(worst_area, std::abs(area - c.graph) / std::abs(c.graph));
    ++used;
  }
  const bool ok = used == samples && worst_pair < 1e-6 && worst_area < 1e-3;
  std::ostringstream d;
  d << used << " points; implicit vs graph " << format_double(worst_pair) << " (limit 1e-6), finite-difference "
    << format_double(worst_area) << " (limit 1e-3)";
  return {"curvature_consistency", ok ? CheckResult::Outcome::Pass : CheckResult::Outcome::Fail, worst_pair, 1e-6,
          d.str()};
}

inline CheckResult check_symmetry(const GenFun& gf) {
  if (gf.model.family != Family::S)
    return {"s_family_symmetry", CheckResult::Outcome::Skip, 0.0, 0.0, "only defined for S(t)"};
  const auto rep = symmetry_check(gf, 1000);
  const bool ok = rep.worst_residual < 1e-10 && rep.worst_velocity_error < 1e-8;
  return {"s_family_symmetry", ok ? CheckResult::Outcome::Pass : CheckResult::Outcome::Fail, rep.worst_residual, 1e-10,
          "velocity table error " + format_double(rep.worst_velocity_error) + " (limit 1e-8)"};
}

inline CheckResult check_parity(const CoinModel& m, const Asymptotics& as, int n) {
  const WaveField f = evolve(m, basis_state(0), n);
  double worst = 0.0;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pick(-n, n);
  int tested = 0;
  while (tested < 200) {
    const int r = pick(rng), s = pick(rng);
    if (((r + s - n) % 2 + 2) % 2 == 0) continue;
    ++tested;
    for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(f.at(r, s, i)));
    if (tested <= 5) {
      const auto rep = as.amplitude(Direction(r, s, n), basis_state(0));
      if (rep.amplitudes)
        for (const auto& a : *rep.amplitudes) worst = std::max(worst, std::abs(a));
    }
  }
  return {"parity", worst == 0.0 ? CheckResult::Outcome::Pass : CheckResult::Outcome::Fail, worst, 0.0,
          "max |amplitude| at 200 parity-violating sites"};
}

/// Runs the invariant battery. Everything that needs a unitary coin is skipped
/// once unitarity fails.
inline std::vector<CheckResult> run_checks(const CoinModel& m) {
  std::vector<CheckResult> out;
  out.push_back(check_unitarity(m));
  const bool unitary = out.back().outcome == CheckResult::Outcome::Pass;
  out.push_back(check_conservation(m, 100));
  out.push_back(check_series(m, 6));
  const GenFun gf(m);
  out.push_back(check_torality_result(gf, 10000));
  if (!unitary) {
    for (const char* name : {"singular_points", "curvature_consistency", "s_family_symmetry", "parity"})
      out.push_back({name, CheckResult::Outcome::Skip, 0.0, 0.0, "coin is not unitary"});
    return out;
  }
  const Asymptotics as(m);
  out.push_back(check_smooth_or_singular(gf, as.singular()));
  out.push_back(check_curvature(gf, as.singular(), 20));
  out.push_back(check_symmetry(gf));
  out.push_back(check_parity(m, as, 40));
  return out;
}

inline nlohmann::json checks_to_json(const CoinModel& m, const std::vector<CheckResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  bool ok = true;
  for (const auto& r : results) {
    ok = ok && r.outcome != CheckResult::Outcome::Fail;
    arr.push_back({{"name", r.name},
                   {"outcome", outcome_name(r.outcome)},
                   {"value", r.value},
                   {"limit", r.limit},
                   {"detail", r.detail}});
  }
  return {{"model", to_json(m)}, {"passed", ok}, {"checks", arr}};
}

// ---------------------------------------------------------------------------

/// Parses argv and runs one subcommand; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact simulation and generating-function asymptotics of 2D quantum walks", "qrw2d"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string model_arg, config_path, start_arg, format_arg, scale_arg, out_arg;
  std::vector<std::string> tol_args, dir_args;
  int n = 0, grid = 0, size = 0;
  double threshold = 0.0;
  bool all_starts = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--model", model_arg, "model descriptor: JSON file or inline JSON");
    sub->add_option("--config", config_path, "JSON run configuration; flags override it");
    sub->add_option("--tol", tol_args, "tolerance override name=value (repeatable)");
    sub->add_option("--out", out_arg, "output file (default: standard output)");
  };
  CLI::App* sim = app.add_subcommand("simulate", "exact probability profile after n steps");
  common(sim);
  sim->add_option("--n", n, "number of steps");
  sim->add_option("--start", start_arg, "start chirality vector, e.g. 1,0,0,0 or 0.6,0:0.8,0,0");
  sim->add_option("--format", format_arg, "csv|pgm|json");
  sim->add_option("--scale", scale_arg, "linear|log (pgm)");
  sim->add_option("--threshold", threshold, "omit sites with P <= threshold (csv, json)");

  CLI::App* shape = app.add_subcommand("shape", "Gauss-map image of V1 (feasible region)");
  common(shape);
  shape->add_option("--grid", grid, "parameter grid size per angle");
  shape->add_option("--size", size, "image width and height in pixels (pgm)");
  shape->add_option("--format", format_arg, "csv|pgm|json");
  shape->add_option("--scale", scale_arg, "linear|log (pgm)");

  CLI::App* cmp = app.add_subcommand("compare", "predicted vs exact probability per direction");
  common(cmp);
  cmp->add_option("--dir", dir_args, "direction r,s,n (repeatable)");
  cmp->add_option("--start", start_arg, "start chirality vector");
  cmp->add_flag("--all-starts", all_starts, "repeat for each basis start vector");

  CLI::App* crit = app.add_subcommand("critical", "critical points and amplitude terms per direction");
  common(crit);
  crit->add_option("--dir", dir_args, "direction r,s,n (repeatable)");
  crit->add_option("--start", start_arg, "start chirality vector");

  CLI::App* chk = app.add_subcommand("check", "invariant battery; exit 3 on failure");
  common(chk);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  const bool is_check = sub == chk;
  try {
    RunConfig cfg;
    if (!config_path.empty()) apply_config_file(cfg, read_json_text(read_file(config_path), "config"), !is_check);
    if (!model_arg.empty()) cfg.model = load_model(model_arg, !is_check);
    if (!cfg.model) throw ConfigError("no model given (use --model or a config file)");
    auto given = [&](const char* name) {
      const CLI::Option* o = sub->get_option_no_throw(name);
      return o != nullptr && o->count() > 0;
    };
    if (given("--n")) cfg.n = n;
    if (given("--grid")) cfg.grid = grid;
    if (given("--size")) cfg.size = size;
    if (given("--threshold")) cfg.threshold = threshold;
    if (!start_arg.empty()) cfg.start = parse_start(start_arg);
    if (!format_arg.empty()) cfg.format = parse_format(format_arg);
    if (!scale_arg.empty()) {
      if (scale_arg != "linear" && scale_arg != "log") throw ConfigError("--scale must be linear|log");
      cfg.scale = parse_scale(scale_arg);
    }
    if (!out_arg.empty()) cfg.out = out_arg;
    for (const auto& t : tol_args) apply_tolerance(cfg.tol, t);
    for (const auto& d : dir_args) cfg.dirs.push_back(parse_direction(d));
    if (all_starts) cfg.all_starts = true;

    if (sub == sim) {
      cmd_simulate(cfg, out);
    } else if (sub == shape) {
      cmd_shape(cfg, out);
    } else if (sub == cmp) {
      cmd_compare(cfg, out);
    } else if (sub == crit) {
      cmd_critical(cfg, out);
    } else {
      const auto results = run_checks(*cfg.model);
      const auto j = checks_to_json(*cfg.model, results);
      emit(cfg, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
      if (!j.at("passed").get<bool>()) {
        for (const auto& r : results)
          if (r.outcome == CheckResult::Outcome::Fail) err << "check failed: " << r.name << " (" << r.detail << ")\n";
        return kExitCheckFailed;
      }
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}

}  // namespace qrw2d::cli
