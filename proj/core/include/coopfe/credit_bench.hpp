#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "coopfe/coalition.hpp"
#include "coopfe/traj.hpp"

namespace coopfe {

// The four credit-assignment methods under comparison.
enum class CreditMethod {
  uniform,
  difference_rewards,
  shapley_permutation,
  harsanyi,
};

std::string to_string(CreditMethod m);
CreditMethod credit_method_from_string(const std::string& name);

// Empirical characteristic function restricted to small coalitions: values
// are measured for |C| <= max_order only (the paper-scale game never
// samples larger coalitions), everything else stays unmeasured.
struct RestrictedGame {
  int n_agents = 0;
  int max_order = 3;
  std::vector<double> values;  // size 2^N; meaningful where measured
  std::vector<bool> measured;  // true iff |C| <= max_order
  int episodes_per_coalition = 0;
  // Fewer than 10 episodes per coalition leaves wide confidence intervals;
  // the flag travels with the game so downstream reports can surface it.
  bool low_sample_warning = false;
};

// Measures v(C) as the empirical mean of `oracle(C, episode_seed)` over
// episodes_per_coalition draws, for every coalition of size <= max_order.
RestrictedGame estimate_coalition_values(
    const std::function<double(Mask, std::uint64_t)>& oracle, int n_agents,
    int max_order, int episodes_per_coalition, std::uint64_t seed);

// Team-objective coalition value for the supervised task: a predictor is
// fitted on the coalition members' noise-injected training pool and scored
// against the *full team* validation pool.  Unlike the per-coalition
// validation used inside the sweep/APC evaluator, this keeps every value
// on the same target, so values of different coalitions are comparable and
// a pure-noise data source cannot look good by only being tested on its
// own noise.  v(empty) = 0 by convention.
double team_objective_value(const TrajTask& task, Mask coalition, double beta,
                            std::uint64_t noise_seed, double lambda = 1e-6);

// Supervised-task overload: the oracle is team_objective_value at the
// given beta, with a fresh noise stream per episode.
RestrictedGame estimate_coalition_values(const TrajTask& task, double beta,
                                         int max_order,
                                         int episodes_per_coalition,
                                         std::uint64_t seed);

// Harsanyi dividends of the restricted game for all masks of size
// <= max_order, by the direct inclusion-exclusion sum (cheap at order 3).
std::vector<double> truncated_dividends(const RestrictedGame& game);

// Value of an arbitrary coalition imputed from dividends of order <= k:
// f(C) = sum of measured dividends of subsets of C up to order k.  This is
// how the restricted game extends to coalitions it never measured.
double imputed_value(const RestrictedGame& game,
                     const std::vector<double>& dividends, Mask coalition,
                     int order);

// Per-agent credits.
//   uniform:             team_value / N for everyone
//   difference_rewards:  D_i = f3(N) - f3(N minus i), f3 = order-3 imputation
//                        (the grand coalition itself is never measured, so
//                        both terms are imputed proxies)
//   shapley_permutation: Monte Carlo permutation Shapley on the order-2
//                        imputed game (n_perms draws, seeded)
//   harsanyi:            xi_i = sum over measured B containing i of
//                        dividend(B)/|B|
ShapleyVector compute_credits(CreditMethod method, const RestrictedGame& game,
                              double team_value, int n_perms = 20,
                              std::uint64_t seed = 0);

// Sample weights from credits: credits are min-max normalised to [0, 1],
// floored at weight_floor, then rescaled to mean 1.  All-equal credits
// (uniform included) give exactly all-ones weights, so weighting becomes a
// bit-identical no-op; the floor keeps every agent's samples in the fit.
// Normalising first keeps the weight vector invariant under positive
// affine rescaling of the credits.
std::vector<double> credit_weights(const std::vector<double>& credits,
                                   double weight_floor = 0.1);

struct CreditBenchConfig {
  double beta = 2.0;              // observation precision for the task
  int epochs = 30;                // credit re-estimation rounds
  int episodes_per_coalition = 24; // value-estimation repeats per coalition
  int n_perms = 20;               // permutations for the Shapley method
  double lambda = 1e-6;           // ridge strength
  double weight_floor = 0.1;
};

// Credit-weighted training: the training set (noise-injected once per run)
// is refit each epoch with sample weights from that epoch's fresh credit
// estimates, and scored on the clean validation set.  Returns the
// per-epoch validation MAE curve.  The uniform method yields identical
// weights every epoch and therefore an exactly constant curve.
std::vector<double> credit_weighted_training(const TrajTask& task,
                                             CreditMethod method,
                                             const CreditBenchConfig& cfg,
                                             std::uint64_t seed);

struct SynergyEntry {
  Mask mask = 0;
  int order = 0;
  double dividend = 0.0;
};

// Pair and triple dividends of the restricted game, sorted by decreasing
// magnitude — positive entries are synergies, negative ones redundancies.
struct SynergyReport {
  std::vector<SynergyEntry> entries;
  bool low_sample_warning = false;
};

SynergyReport synergy_report(const RestrictedGame& game);

// Appends one pure-noise track (i.i.d. Gaussian positions, so its windows
// carry no predictable structure) to a table; used to build the benchmark
// task where one agent only hurts the pooled fit.
TrackTable with_noise_track(TrackTable table, int points, double scale,
                            std::uint64_t seed);

}  // namespace coopfe
