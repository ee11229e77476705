#include "coopfe/coalition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "coopfe/errors.hpp"

namespace coopfe {

namespace {

void check_lattice(int n_agents, std::size_t table_size, const char* where) {
  if (n_agents < 1 || n_agents > 20) {
    throw ConfigError(std::string(where) +
                      ": n_agents must be in [1, 20], got " +
                      std::to_string(n_agents));
  }
  if (table_size != (std::size_t{1} << n_agents)) {
    throw ConfigError(std::string(where) + ": table has " +
                      std::to_string(table_size) + " entries, expected 2^" +
                      std::to_string(n_agents));
  }
}

}  // namespace

CharacteristicFunction make_characteristic(int n_agents,
                                           std::vector<double> values) {
  check_lattice(n_agents, values.size(), "make_characteristic");
  if (values[0] != 0.0) {
    throw ConfigError("make_characteristic: v(empty) must be 0, got " +
                      std::to_string(values[0]));
  }
  return CharacteristicFunction{n_agents, std::move(values)};
}

EnergyTable energy_from_values(const CharacteristicFunction& v, double beta) {
  if (!(beta > 0.0)) {
    throw ConfigError("energy_from_values: beta must be > 0");
  }
  EnergyTable e;
  e.n_agents = v.n_agents;
  e.beta = beta;
  e.energies.resize(v.values.size());
  std::transform(v.values.begin(), v.values.end(), e.energies.begin(),
                 [](double val) { return -val; });
  return e;
}

DividendTable mobius_dividends(const CharacteristicFunction& f) {
  check_lattice(f.n_agents, f.values.size(), "mobius_dividends");
  if (f.values[0] != 0.0) {
    throw ConfigError("mobius_dividends: f(empty) must be 0");
  }
  DividendTable d;
  d.n_agents = f.n_agents;
  d.dividends = f.values;
  const Mask size = Mask{1} << f.n_agents;
  // In-place Moebius transform: peel off one element at a time.  After
  // processing bit i, each entry holds the alternating subset sum over the
  // elements seen so far.
  for (int i = 0; i < f.n_agents; ++i) {
    const Mask bit = Mask{1} << i;
    for (Mask m = 0; m < size; ++m) {
      if (m & bit) d.dividends[m] -= d.dividends[m ^ bit];
    }
  }
  return d;
}

CharacteristicFunction reconstruct_setfunction(const DividendTable& d) {
  check_lattice(d.n_agents, d.dividends.size(), "reconstruct_setfunction");
  CharacteristicFunction f;
  f.n_agents = d.n_agents;
  f.values = d.dividends;
  const Mask size = Mask{1} << d.n_agents;
  // Zeta transform: the exact inverse of the loop in mobius_dividends.
  for (int i = 0; i < d.n_agents; ++i) {
    const Mask bit = Mask{1} << i;
    for (Mask m = 0; m < size; ++m) {
      if (m & bit) f.values[m] += f.values[m ^ bit];
    }
  }
  return f;
}

ShapleyVector shapley_from_dividends(const DividendTable& d) {
  check_lattice(d.n_agents, d.dividends.size(), "shapley_from_dividends");
  ShapleyVector xi;
  xi.credits.assign(static_cast<std::size_t>(d.n_agents), 0.0);
  const Mask size = Mask{1} << d.n_agents;
  for (Mask b = 1; b < size; ++b) {
    const double share = d.dividends[b] / coalition_size(b);
    for (int i = 0; i < d.n_agents; ++i) {
      if (b & (Mask{1} << i)) xi.credits[static_cast<std::size_t>(i)] += share;
    }
  }
  return xi;
}

namespace {

ShapleyVector average_over_orderings(const CharacteristicFunction& v,
                                     const std::vector<std::vector<int>>& perms) {
  const int n = v.n_agents;
  ShapleyVector xi;
  xi.credits.assign(static_cast<std::size_t>(n), 0.0);
  for (const auto& order : perms) {
    Mask built = 0;
    for (int player : order) {
      const Mask with = built | (Mask{1} << player);
      xi.credits[static_cast<std::size_t>(player)] +=
          v.values[with] - v.values[built];
      built = with;
    }
  }
  const double inv = 1.0 / static_cast<double>(perms.size());
  for (double& c : xi.credits) c *= inv;
  return xi;
}

std::vector<std::vector<int>> all_permutations(int n) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<int>> perms;
  do {
    perms.push_back(order);
  } while (std::next_permutation(order.begin(), order.end()));
  return perms;
}

}  // namespace

ShapleyVector shapley_exact(const CharacteristicFunction& v) {
  check_lattice(v.n_agents, v.values.size(), "shapley_exact");
  if (v.n_agents > 8) {
    throw ConfigError("shapley_exact: N! enumeration limited to N <= 8, got " +
                      std::to_string(v.n_agents));
  }
  return average_over_orderings(v, all_permutations(v.n_agents));
}

ShapleyVector shapley_monte_carlo(const CharacteristicFunction& v,
                                  int n_perms, std::uint64_t seed,
                                  bool without_replacement) {
  check_lattice(v.n_agents, v.values.size(), "shapley_monte_carlo");
  if (n_perms < 1) {
    throw ConfigError("shapley_monte_carlo: n_perms must be >= 1");
  }
  Rng rng(seed);
  std::vector<std::vector<int>> perms;
  if (without_replacement) {
    if (v.n_agents > 8) {
      throw ConfigError(
          "shapley_monte_carlo: without-replacement sampling enumerates N! "
          "permutations and is limited to N <= 8");
    }
    perms = all_permutations(v.n_agents);
    rng.shuffle(perms);
    if (perms.size() > static_cast<std::size_t>(n_perms)) {
      perms.resize(static_cast<std::size_t>(n_perms));
    }
  } else {
    perms.reserve(static_cast<std::size_t>(n_perms));
    for (int k = 0; k < n_perms; ++k) {
      perms.push_back(rng.permutation(v.n_agents));
    }
  }
  return average_over_orderings(v, perms);
}

}  // namespace coopfe
