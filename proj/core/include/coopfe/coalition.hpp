#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "coopfe/rng.hpp"

namespace coopfe {

// Coalitions over agents 0..N-1 are bitmask integers: bit i set means agent
// i is a member.  The full lattice of 2^N coalitions is stored as a flat
// table indexed by mask, which keeps subset algebra exact for N <= 20.
using Mask = std::uint32_t;

inline int coalition_size(Mask c) { return std::popcount(c); }
inline Mask full_coalition(int n_agents) {
  return (Mask{1} << n_agents) - Mask{1};
}

// Characteristic function v: 2^N -> R with the normalisation v(empty) = 0.
// `values[mask]` is the total value coalition `mask` can achieve.
struct CharacteristicFunction {
  int n_agents = 0;
  std::vector<double> values;  // size 2^n_agents, values[0] == 0

  double operator()(Mask c) const { return values[c]; }
};

// Validates table size and v(empty) = 0; throws ConfigError otherwise.
CharacteristicFunction make_characteristic(int n_agents,
                                           std::vector<double> values);

// Energy view of a characteristic function: E(C) = -v(C), with the inverse
// temperature beta carried as metadata.  Callers evaluate any
// beta-dependence of the task before building the table, so the lattice
// math here stays pure.
struct EnergyTable {
  int n_agents = 0;
  std::vector<double> energies;  // size 2^n_agents
  double beta = 1.0;
};

EnergyTable energy_from_values(const CharacteristicFunction& v, double beta);

// Harsanyi dividends d[B]: the synergy attributable to exactly the
// coalition B, i.e. the Moebius inverse of the set function.  Summing
// dividends over all subsets of C reconstructs the original value:
//   f(C) = sum_{B subset of C} d[B].
struct DividendTable {
  int n_agents = 0;
  std::vector<double> dividends;  // size 2^n_agents, dividends[0] == 0
};

// Per-agent credit vector xi with the efficiency property
// sum_i credits[i] = v(full coalition).
struct ShapleyVector {
  std::vector<double> credits;
};

// Moebius inversion of a set function via the in-place subset transform,
// O(N 2^N).  The textbook double sum
//   d[B] = sum_{A subset of B} (-1)^{|B|-|A|} f(A)
// is O(4^N) and lives in the tests as the oracle.
// Requires f(empty) = 0 and N <= 20; throws ConfigError otherwise.
DividendTable mobius_dividends(const CharacteristicFunction& f);

// Inverse of mobius_dividends: zeta transform accumulating subset sums.
CharacteristicFunction reconstruct_setfunction(const DividendTable& d);

// Shapley credit from dividends: xi_i = sum over coalitions B containing i
// of d[B] / |B|.  Each coalition's synergy is split evenly among its
// members.
ShapleyVector shapley_from_dividends(const DividendTable& d);

// Exact Shapley value as the average marginal contribution over all N!
// player orderings.  Reference implementation; N <= 8 enforced.
ShapleyVector shapley_exact(const CharacteristicFunction& v);

// Permutation-sampling Shapley estimate: averages marginal contributions
// over n_perms random orderings.  Unbiased, deterministic given the seed.
// With `without_replacement` set, the n_perms orderings are drawn from the
// N! distinct permutations without repetition (requires N <= 8); asking for
// all of them reproduces shapley_exact.
ShapleyVector shapley_monte_carlo(const CharacteristicFunction& v,
                                  int n_perms, std::uint64_t seed,
                                  bool without_replacement = false);

}  // namespace coopfe
