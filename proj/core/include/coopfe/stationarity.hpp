#pragma once

#include <functional>
#include <vector>

#include "coopfe/coalition.hpp"

namespace coopfe {

// A per-agent credit curve: agent i's credit as a function of its own
// precision beta_i, with every other agent held at its operating point.
using CreditCurve = std::function<double(double)>;

// First-order optimality check for a precision profile.  At a joint
// stationary point of the total credit sum, each partial derivative
// d(sum_j xi_j)/d(beta_i) vanishes; with the cross terms flat at the peaks
// this reduces to the slope of each agent's own curve.  Returns the largest
// |central difference| over agents (step 1e-4).
double effective_stationarity_check(const std::vector<CreditCurve>& xi_curves,
                                    const std::vector<double>& peaks);

// Synthetic beta-parameterised game family with a known per-agent optimum.
// Each agent has an individual ability that peaks at `peaks[i]`:
//   a_i = 1 - curvature[i] * (beta_i - peaks[i])^2
// and coalitions collect individual abilities plus a pairwise bonus:
//   v(C) = sum_{i in C} a_i  +  coupling * sum_{i<j in C} a_i a_j.
// Every agent's Shapley credit is increasing in its own ability (for
// coupling > -2/(N-1) on abilities near 1), so the credit curves peak
// exactly at `peaks` - which gives the stationarity check a ground truth.
struct SynergyFamilyConfig {
  int n_agents = 4;
  std::vector<double> peaks;      // per-agent optimal beta
  std::vector<double> curvature;  // per-agent concavity, > 0
  double coupling = 0.25;
};

// Characteristic function of the family at a given precision profile.
CharacteristicFunction synergy_family_game(const SynergyFamilyConfig& cfg,
                                           const std::vector<double>& betas);

// Agent i's Shapley credit at the given precision profile (dividend path).
double synergy_family_credit(const SynergyFamilyConfig& cfg,
                             const std::vector<double>& betas, int agent);

}  // namespace coopfe
