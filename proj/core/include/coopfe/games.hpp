#pragma once

#include <cstdint>
#include <vector>

#include "coopfe/coalition.hpp"

namespace coopfe {

// Finite normal-form game.  Joint action profiles are flattened to a single
// index with player 0 as the least-significant digit (mixed radix given by
// actions_per_player); utilities[profile][i] is player i's payoff.
// default_actions is the fixed action a non-member of a coalition plays.
struct NormalFormGame {
  int n_players = 0;
  std::vector<int> actions_per_player;
  std::vector<std::vector<double>> utilities;
  std::vector<int> default_actions;

  int profile_count() const;
  int profile_index(const std::vector<int>& actions) const;
};

// Validates shape (utility rows == product of action counts, each row of
// length n_players, defaults in range); throws ConfigError otherwise.
NormalFormGame make_game(int n_players, std::vector<int> actions_per_player,
                         std::vector<std::vector<double>> utilities,
                         std::vector<int> default_actions);

// Result of checking the Gibbs coalition mixture against unilateral
// deviations.  bound = N ln2 / beta.
struct NashCheckReport {
  double max_deviation_gain = 0.0;
  double bound = 0.0;
  double beta = 0.0;
};

// Value a coalition can guarantee when its members coordinate and everyone
// else plays their default action:
//   v(C) = max over pure joint actions of C's members of sum_{i in C} u_i.
// Maximising over pure profiles is exact because the objective is linear in
// the correlated distribution, so the optimum sits at a vertex.
// v(empty) = 0 by convention.  Ties break toward the profile enumerated
// first (members' actions in mixed-radix order).
double coalition_value_from_game(const NormalFormGame& g, Mask coalition);

// Characteristic function of the whole game: coalition_value_from_game
// evaluated on all 2^N masks.
CharacteristicFunction characteristic_from_game(const NormalFormGame& g);

// Builds the mixed profile pi* that first samples a coalition C from the
// Gibbs distribution over coalition values (energy -v(C)) and then plays
// C's optimal pure profile with non-members at defaults.  Reports the best
// unilateral pure-deviation gain any player can realise against pi*, next
// to the theoretical tolerance N ln2 / beta.  Exhaustive deviation search,
// so the game must satisfy N <= 4 and at most 4 actions per player.
NashCheckReport verify_eps_nash(const NormalFormGame& g, double beta);

// Random common-interest game: every player receives the same iid U[0,1)
// payoff for each joint profile, defaults all 0.  Shared payoffs keep any
// unilateral deviation from the Gibbs mixture within the N ln2 / beta
// tolerance, which a general-sum construction does not guarantee.
NormalFormGame random_common_interest_game(int n_players, int n_actions,
                                           std::uint64_t seed);

}  // namespace coopfe
