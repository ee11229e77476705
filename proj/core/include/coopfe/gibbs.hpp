#pragma once

#include <vector>

#include "coopfe/coalition.hpp"

namespace coopfe {

// Probability distribution over the coalition lattice together with the log
// partition function ln Z.  Probabilities are exact softmax weights of
// -beta * E, computed through log-sum-exp so extreme beta (up to 1e6 in the
// experiments) cannot overflow.
struct GibbsDistribution {
  std::vector<double> probs;  // size 2^N, sums to 1
  double log_partition = 0.0;
};

// Free energy of a distribution p over the energy landscape e:
//   F = <E>_p - H(p) / beta
// with H in nats and the 0 * ln 0 := 0 convention.  The Gibbs distribution
// minimises F, where it equals -ln(Z) / beta.
struct FreeEnergyReport {
  double expected_energy = 0.0;
  double entropy = 0.0;  // nats
  double free_energy = 0.0;
  double beta = 0.0;
};

// Numerically stable ln(sum_i exp(x_i)).
double log_sum_exp(const std::vector<double>& x);

// Boltzmann weights p[C] = exp(-beta E[C]) / Z over all 2^N coalitions.
// Requires beta > 0 and finite energies; throws ConfigError otherwise.
GibbsDistribution gibbs_distribution(const EnergyTable& e);

// Evaluates F, <E> and H for an arbitrary distribution p on the same index
// space as e.  p must sum to 1 within 1e-9 and have no negative entries;
// throws ConfigError otherwise.
FreeEnergyReport collective_free_energy(const std::vector<double>& p,
                                        const EnergyTable& e);

}  // namespace coopfe
