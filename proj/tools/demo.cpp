// Predicted vs exact probabilities for a handful of directions of B(1/2).

#include <cstdio>

#include "qrw2d/qrw2d.hpp"

int main() {
  using namespace qrw2d;
  const CoinModel model = make_B(0.5);
  const Asymptotics as(model);
  const int n = 200;
  const ProbabilityGrid exact = probability_profile(evolve(model, basis_state(0), n));

  std::printf("%-14s %-22s %-13s %-13s %s\n", "(r,s,n)", "status", "predicted", "exact", "rel.err");
  for (const auto& [r, s] : {std::pair{0, 0}, {40, 20}, {-60, 30}, {90, -10}, {10, 110}, {150, 0}}) {
    const Direction d(r, s, n);
    const auto rep = as.amplitude(d, basis_state(0));
    const double p = exact.at(r, s);
    char label[32];
    std::snprintf(label, sizeof label, "(%d,%d,%d)", r, s, n);
    if (!rep.amplitudes) {
      std::printf("%-14s %-22s %-13s %-13.4g -\n", label, status_name(rep.status).c_str(), "-", p);
      continue;
    }
    if (rep.status != Status::Inside || p <= 0) {
      std::printf("%-14s %-22s %-13.4g %-13.4g -\n", label, status_name(rep.status).c_str(), rep.predicted_probability, p);
      continue;
    }
    const double rel = std::abs(rep.predicted_probability - p) / p;
    std::printf("%-14s %-22s %-13.4g %-13.4g %.3f\n", label, status_name(rep.status).c_str(), rep.predicted_probability,
                p, rel);
  }
}
