#include "coopfe/games.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "coopfe/errors.hpp"
#include "coopfe/gibbs.hpp"
#include "coopfe/rng.hpp"

namespace coopfe {

int NormalFormGame::profile_count() const {
  int count = 1;
  for (int a : actions_per_player) count *= a;
  return count;
}

int NormalFormGame::profile_index(const std::vector<int>& actions) const {
  int idx = 0;
  int stride = 1;
  for (int i = 0; i < n_players; ++i) {
    idx += actions[static_cast<std::size_t>(i)] * stride;
    stride *= actions_per_player[static_cast<std::size_t>(i)];
  }
  return idx;
}

NormalFormGame make_game(int n_players, std::vector<int> actions_per_player,
                         std::vector<std::vector<double>> utilities,
                         std::vector<int> default_actions) {
  if (n_players < 1) throw ConfigError("make_game: need at least one player");
  if (actions_per_player.size() != static_cast<std::size_t>(n_players) ||
      default_actions.size() != static_cast<std::size_t>(n_players)) {
    throw ConfigError("make_game: per-player sequences must have length N");
  }
  NormalFormGame g;
  g.n_players = n_players;
  g.actions_per_player = std::move(actions_per_player);
  g.utilities = std::move(utilities);
  g.default_actions = std::move(default_actions);
  for (int i = 0; i < n_players; ++i) {
    const int a = g.actions_per_player[static_cast<std::size_t>(i)];
    const int d = g.default_actions[static_cast<std::size_t>(i)];
    if (a < 1) throw ConfigError("make_game: player needs >= 1 action");
    if (d < 0 || d >= a) {
      throw ConfigError("make_game: default action out of range for player " +
                        std::to_string(i));
    }
  }
  if (g.utilities.size() != static_cast<std::size_t>(g.profile_count())) {
    throw ConfigError("make_game: utility table has " +
                      std::to_string(g.utilities.size()) +
                      " profiles, expected " +
                      std::to_string(g.profile_count()));
  }
  for (const auto& row : g.utilities) {
    if (row.size() != static_cast<std::size_t>(n_players)) {
      throw ConfigError("make_game: every profile needs exactly N utilities");
    }
  }
  return g;
}

namespace {

struct BestProfile {
  double value = 0.0;
  std::vector<int> actions;
};

// Enumerates the pure joint actions of the coalition's members (everyone
// else pinned at defaults) and keeps the first profile attaining the
// maximal member-sum payoff.
BestProfile best_profile_for(const NormalFormGame& g, Mask coalition) {
  std::vector<int> members;
  for (int i = 0; i < g.n_players; ++i) {
    if (coalition & (Mask{1} << i)) members.push_back(i);
  }
  BestProfile best;
  best.actions = g.default_actions;
  if (members.empty()) return best;  // v(empty) = 0 convention

  long combos = 1;
  for (int m : members) combos *= g.actions_per_player[static_cast<std::size_t>(m)];

  bool first = true;
  std::vector<int> profile = g.default_actions;
  for (long k = 0; k < combos; ++k) {
    long rest = k;
    for (int m : members) {
      const int a = g.actions_per_player[static_cast<std::size_t>(m)];
      profile[static_cast<std::size_t>(m)] = static_cast<int>(rest % a);
      rest /= a;
    }
    const auto& u = g.utilities[static_cast<std::size_t>(g.profile_index(profile))];
    double total = 0.0;
    for (int m : members) total += u[static_cast<std::size_t>(m)];
    if (first || total > best.value) {
      best.value = total;
      best.actions = profile;
      first = false;
    }
  }
  return best;
}

}  // namespace

double coalition_value_from_game(const NormalFormGame& g, Mask coalition) {
  if (g.utilities.empty()) {
    throw ConfigError("coalition_value_from_game: empty utility table");
  }
  return best_profile_for(g, coalition).value;
}

CharacteristicFunction characteristic_from_game(const NormalFormGame& g) {
  if (g.n_players > 20) {
    throw ConfigError("characteristic_from_game: N <= 20 required");
  }
  const Mask size = full_coalition(g.n_players) + 1;
  std::vector<double> values(size);
  for (Mask c = 0; c < size; ++c) {
    values[c] = coalition_value_from_game(g, c);
  }
  return make_characteristic(g.n_players, std::move(values));
}

NashCheckReport verify_eps_nash(const NormalFormGame& g, double beta) {
  if (g.n_players > 4) {
    throw ConfigError("verify_eps_nash: exhaustive search limited to N <= 4");
  }
  for (int a : g.actions_per_player) {
    if (a > 4) {
      throw ConfigError("verify_eps_nash: at most 4 actions per player");
    }
  }
  if (!(beta > 0.0)) {
    throw ConfigError("verify_eps_nash: beta must be > 0");
  }

  // Mixture weights: Gibbs over coalition values with E(C) = -v(C).
  const CharacteristicFunction v = characteristic_from_game(g);
  const GibbsDistribution gibbs = gibbs_distribution(energy_from_values(v, beta));

  // Component pure profile for each coalition in the mixture.
  const Mask n_coalitions = static_cast<Mask>(gibbs.probs.size());
  std::vector<std::vector<int>> component(n_coalitions);
  for (Mask c = 0; c < n_coalitions; ++c) {
    component[c] = best_profile_for(g, c).actions;
  }

  NashCheckReport report;
  report.beta = beta;
  report.bound = g.n_players * std::numbers::ln2 / beta;

  for (int i = 0; i < g.n_players; ++i) {
    double base = 0.0;
    for (Mask c = 0; c < n_coalitions; ++c) {
      const int idx = g.profile_index(component[c]);
      base += gibbs.probs[c] *
              g.utilities[static_cast<std::size_t>(idx)][static_cast<std::size_t>(i)];
    }
    for (int a = 0; a < g.actions_per_player[static_cast<std::size_t>(i)]; ++a) {
      double deviated = 0.0;
      for (Mask c = 0; c < n_coalitions; ++c) {
        std::vector<int> profile = component[c];
        profile[static_cast<std::size_t>(i)] = a;
        const int idx = g.profile_index(profile);
        deviated += gibbs.probs[c] *
                    g.utilities[static_cast<std::size_t>(idx)][static_cast<std::size_t>(i)];
      }
      report.max_deviation_gain =
          std::max(report.max_deviation_gain, deviated - base);
    }
  }
  return report;
}

NormalFormGame random_common_interest_game(int n_players, int n_actions,
                                           std::uint64_t seed) {
  if (n_players < 1 || n_actions < 1) {
    throw ConfigError("random_common_interest_game: need N >= 1, actions >= 1");
  }
  Rng rng(seed);
  int profiles = 1;
  for (int i = 0; i < n_players; ++i) profiles *= n_actions;
  std::vector<std::vector<double>> utilities(
      static_cast<std::size_t>(profiles));
  for (auto& row : utilities) {
    row.assign(static_cast<std::size_t>(n_players), rng.uniform());
  }
  return make_game(n_players, std::vector<int>(static_cast<std::size_t>(n_players), n_actions),
                   std::move(utilities),
                   std::vector<int>(static_cast<std::size_t>(n_players), 0));
}

}  // namespace coopfe
