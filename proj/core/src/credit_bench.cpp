#include "coopfe/credit_bench.hpp"

#include <algorithm>
#include <cmath>

#include "coopfe/errors.hpp"
#include "coopfe/rng.hpp"

namespace coopfe {

std::string to_string(CreditMethod m) {
  switch (m) {
    case CreditMethod::uniform: return "uniform";
    case CreditMethod::difference_rewards: return "difference_rewards";
    case CreditMethod::shapley_permutation: return "shapley_permutation";
    case CreditMethod::harsanyi: return "harsanyi";
  }
  throw ConfigError("to_string: unknown credit method");
}

CreditMethod credit_method_from_string(const std::string& name) {
  if (name == "uniform") return CreditMethod::uniform;
  if (name == "difference_rewards") return CreditMethod::difference_rewards;
  if (name == "shapley_permutation") return CreditMethod::shapley_permutation;
  if (name == "harsanyi") return CreditMethod::harsanyi;
  throw ConfigError("unknown credit method '" + name +
                    "' (expected uniform, difference_rewards, "
                    "shapley_permutation or harsanyi)");
}

RestrictedGame estimate_coalition_values(
    const std::function<double(Mask, std::uint64_t)>& oracle, int n_agents,
    int max_order, int episodes_per_coalition, std::uint64_t seed) {
  if (n_agents < 1 || n_agents > 12) {
    throw ConfigError("estimate_coalition_values: N must be in [1, 12]");
  }
  if (max_order < 1 || episodes_per_coalition < 1) {
    throw ConfigError(
        "estimate_coalition_values: max_order and episodes must be >= 1");
  }
  RestrictedGame game;
  game.n_agents = n_agents;
  game.max_order = max_order;
  game.episodes_per_coalition = episodes_per_coalition;
  game.low_sample_warning = episodes_per_coalition < 10;
  const Mask size = full_coalition(n_agents) + 1;
  game.values.assign(size, 0.0);
  game.measured.assign(size, false);
  game.measured[0] = true;  // v(empty) = 0 by convention
  for (Mask c = 1; c < size; ++c) {
    if (coalition_size(c) > max_order) continue;
    double total = 0.0;
    for (int e = 0; e < episodes_per_coalition; ++e) {
      total += oracle(c, derive_seed(seed, "bench.value",
                                     static_cast<std::uint64_t>(c) *
                                             static_cast<std::uint64_t>(
                                                 episodes_per_coalition) +
                                         static_cast<std::uint64_t>(e)));
    }
    game.values[c] = total / static_cast<double>(episodes_per_coalition);
    game.measured[c] = true;
  }
  return game;
}

double team_objective_value(const TrajTask& task, Mask coalition, double beta,
                            std::uint64_t noise_seed, double lambda) {
  if (coalition == 0) return 0.0;
  const int n = static_cast<int>(task.agents.size());
  std::vector<PredictionSample> train;
  std::vector<PredictionSample> val;
  for (int a = 0; a < n; ++a) {
    const AgentData& agent = task.agents[static_cast<std::size_t>(a)];
    if (coalition & (Mask{1} << a)) {
      train.insert(train.end(), agent.train.begin(), agent.train.end());
    }
    val.insert(val.end(), agent.val.begin(), agent.val.end());
  }
  if (train.empty() || val.empty()) {
    throw DataError("team_objective_value: empty train or validation set");
  }
  train = inject_noise(std::move(train), beta, noise_seed);
  const LinearPredictor p = fit_predictor(train, lambda);
  return -mae(p, val);
}

RestrictedGame estimate_coalition_values(const TrajTask& task, double beta,
                                         int max_order,
                                         int episodes_per_coalition,
                                         std::uint64_t seed) {
  const auto oracle = [&](Mask c, std::uint64_t episode_seed) {
    return team_objective_value(task, c, beta, episode_seed);
  };
  return estimate_coalition_values(oracle,
                                   static_cast<int>(task.agents.size()),
                                   max_order, episodes_per_coalition, seed);
}

std::vector<double> truncated_dividends(const RestrictedGame& game) {
  const Mask size = static_cast<Mask>(game.values.size());
  std::vector<double> div(size, 0.0);
  for (Mask b = 1; b < size; ++b) {
    if (coalition_size(b) > game.max_order) continue;
    if (!game.measured[b]) continue;
    // Direct inclusion-exclusion over the subsets of b (at most 2^3 terms).
    double d = 0.0;
    const int bits = coalition_size(b);
    for (Mask a = b;; a = (a - 1) & b) {
      const int sign = ((bits - coalition_size(a)) % 2 == 0) ? 1 : -1;
      d += sign * game.values[a];
      if (a == 0) break;
    }
    div[b] = d;
  }
  return div;
}

double imputed_value(const RestrictedGame& game,
                     const std::vector<double>& dividends, Mask coalition,
                     int order) {
  double total = 0.0;
  const Mask size = static_cast<Mask>(game.values.size());
  for (Mask b = 1; b < size; ++b) {
    if ((b & coalition) != b) continue;
    const int s = coalition_size(b);
    if (s > order || s > game.max_order) continue;
    total += dividends[b];
  }
  return total;
}

ShapleyVector compute_credits(CreditMethod method, const RestrictedGame& game,
                              double team_value, int n_perms,
                              std::uint64_t seed) {
  const int n = game.n_agents;
  ShapleyVector xi;
  xi.credits.assign(static_cast<std::size_t>(n), 0.0);

  if (method == CreditMethod::uniform) {
    const double share = team_value / static_cast<double>(n);
    for (double& c : xi.credits) c = share;
    return xi;
  }

  const std::vector<double> div = truncated_dividends(game);
  const Mask full = full_coalition(n);

  switch (method) {
    case CreditMethod::difference_rewards: {
      const double team = imputed_value(game, div, full, 3);
      for (int i = 0; i < n; ++i) {
        const Mask without = full & ~(Mask{1} << i);
        xi.credits[static_cast<std::size_t>(i)] =
            team - imputed_value(game, div, without, 3);
      }
      return xi;
    }
    case CreditMethod::shapley_permutation: {
      // Monte Carlo Shapley over the order-2 imputed extension.
      std::vector<double> values(game.values.size(), 0.0);
      for (Mask c = 0; c < static_cast<Mask>(values.size()); ++c) {
        values[c] = imputed_value(game, div, c, 2);
      }
      const CharacteristicFunction f = make_characteristic(n, std::move(values));
      return shapley_monte_carlo(f, n_perms, seed);
    }
    case CreditMethod::harsanyi: {
      for (Mask b = 1; b < static_cast<Mask>(game.values.size()); ++b) {
        if (coalition_size(b) > game.max_order) continue;
        const double share = div[b] / coalition_size(b);
        for (int i = 0; i < n; ++i) {
          if (b & (Mask{1} << i)) xi.credits[static_cast<std::size_t>(i)] += share;
        }
      }
      return xi;
    }
    case CreditMethod::uniform:
      break;  // handled above
  }
  throw ConfigError("compute_credits: unknown credit method");
}

std::vector<double> credit_weights(const std::vector<double>& credits,
                                   double weight_floor) {
  if (credits.empty()) throw ConfigError("credit_weights: no credits");
  const auto [lo_it, hi_it] = std::minmax_element(credits.begin(), credits.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> w(credits.size(), 1.0);
  if (hi == lo) return w;  // all equal: exact no-op weights
  for (std::size_t i = 0; i < credits.size(); ++i) {
    w[i] = std::max((credits[i] - lo) / (hi - lo), weight_floor);
  }
  double mean = 0.0;
  for (double x : w) mean += x;
  mean /= static_cast<double>(w.size());
  for (double& x : w) x /= mean;
  return w;
}

std::vector<double> credit_weighted_training(const TrajTask& task,
                                             CreditMethod method,
                                             const CreditBenchConfig& cfg,
                                             std::uint64_t seed) {
  if (cfg.epochs < 1) throw ConfigError("credit_weighted_training: epochs >= 1");
  const int n = static_cast<int>(task.agents.size());
  if (n < 2) throw ConfigError("credit_weighted_training: need >= 2 agents");

  // The training set and its noise realisation are fixed for the whole
  // run; epochs differ only through the credit estimates and the weights
  // derived from them.
  std::vector<PredictionSample> train;
  std::vector<int> owner;
  std::vector<PredictionSample> val;
  for (int a = 0; a < n; ++a) {
    const AgentData& agent = task.agents[static_cast<std::size_t>(a)];
    for (const PredictionSample& s : agent.train) {
      train.push_back(s);
      owner.push_back(a);
    }
    val.insert(val.end(), agent.val.begin(), agent.val.end());
  }
  if (train.empty() || val.empty()) {
    throw DataError("credit_weighted_training: empty train or validation set");
  }
  train = inject_noise(std::move(train), cfg.beta,
                       derive_seed(seed, "bench.train", 0));

  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<double> agent_weight(static_cast<std::size_t>(n), 1.0);
    if (method != CreditMethod::uniform) {
      const std::uint64_t epoch_seed =
          derive_seed(seed, "bench.epoch", static_cast<std::uint64_t>(epoch));
      const RestrictedGame game = estimate_coalition_values(
          task, cfg.beta, 3, cfg.episodes_per_coalition, epoch_seed);
      const std::vector<double> div = truncated_dividends(game);
      const double team =
          imputed_value(game, div, full_coalition(n), game.max_order);
      const ShapleyVector credits = compute_credits(
          method, game, team, cfg.n_perms,
          derive_seed(epoch_seed, "bench.perms", 0));
      agent_weight = credit_weights(credits.credits, cfg.weight_floor);
    }
    std::vector<double> sample_weight(train.size());
    for (std::size_t s = 0; s < train.size(); ++s) {
      sample_weight[s] = agent_weight[static_cast<std::size_t>(owner[s])];
    }
    const LinearPredictor p =
        fit_predictor_weighted(train, sample_weight, cfg.lambda);
    curve.push_back(mae(p, val));
  }
  return curve;
}

SynergyReport synergy_report(const RestrictedGame& game) {
  if (game.max_order < 2) {
    throw ConfigError("synergy_report: needs a game measured up to order >= 2");
  }
  const std::vector<double> div = truncated_dividends(game);
  SynergyReport report;
  report.low_sample_warning = game.low_sample_warning;
  for (Mask b = 1; b < static_cast<Mask>(game.values.size()); ++b) {
    const int order = coalition_size(b);
    if (order < 2 || order > std::min(game.max_order, 3)) continue;
    report.entries.push_back(SynergyEntry{b, order, div[b]});
  }
  std::sort(report.entries.begin(), report.entries.end(),
            [](const SynergyEntry& a, const SynergyEntry& b) {
              if (std::abs(a.dividend) != std::abs(b.dividend)) {
                return std::abs(a.dividend) > std::abs(b.dividend);
              }
              return a.mask < b.mask;
            });
  return report;
}

TrackTable with_noise_track(TrackTable table, int points, double scale,
                            std::uint64_t seed) {
  if (points < 1) throw ConfigError("with_noise_track: points must be >= 1");
  Rng rng(seed);
  Track t;
  t.id = "noise_agent";
  t.points.reserve(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    TrackPoint p;
    p.lon = scale * rng.gaussian();
    p.lat = scale * rng.gaussian();
    p.time = static_cast<double>(k);
    t.points.push_back(p);
  }
  table.tracks.push_back(std::move(t));
  return table;
}

}  // namespace coopfe
