#include "coopfe/gibbs.hpp"

#include <algorithm>
#include <cmath>

#include "coopfe/errors.hpp"

namespace coopfe {

double log_sum_exp(const std::vector<double>& x) {
  double m = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

GibbsDistribution gibbs_distribution(const EnergyTable& e) {
  if (!(e.beta > 0.0)) {
    throw ConfigError("gibbs_distribution: beta must be > 0, got " +
                      std::to_string(e.beta));
  }
  if (e.energies.empty()) {
    throw ConfigError("gibbs_distribution: empty energy table");
  }
  for (double energy : e.energies) {
    if (!std::isfinite(energy)) {
      throw ConfigError("gibbs_distribution: non-finite energy in table");
    }
  }
  std::vector<double> logw(e.energies.size());
  std::transform(e.energies.begin(), e.energies.end(), logw.begin(),
                 [&](double energy) { return -e.beta * energy; });
  GibbsDistribution g;
  g.log_partition = log_sum_exp(logw);
  g.probs.resize(logw.size());
  std::transform(logw.begin(), logw.end(), g.probs.begin(), [&](double lw) {
    return std::exp(lw - g.log_partition);
  });
  return g;
}

FreeEnergyReport collective_free_energy(const std::vector<double>& p,
                                        const EnergyTable& e) {
  if (p.size() != e.energies.size()) {
    throw ConfigError(
        "collective_free_energy: distribution and energy table sizes differ");
  }
  double total = 0.0;
  for (double pi : p) {
    if (pi < 0.0) {
      throw ConfigError("collective_free_energy: negative probability");
    }
    total += pi;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("collective_free_energy: probabilities sum to " +
                      std::to_string(total) + ", expected 1");
  }
  FreeEnergyReport r;
  r.beta = e.beta;
  for (std::size_t i = 0; i < p.size(); ++i) {
    r.expected_energy += p[i] * e.energies[i];
    if (p[i] > 0.0) r.entropy -= p[i] * std::log(p[i]);
  }
  r.free_energy = r.expected_energy - r.entropy / e.beta;
  return r;
}

}  // namespace coopfe
