#include "coopfe/marl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "coopfe/errors.hpp"

namespace coopfe {

namespace {

int bin_index(double value, double lo, double hi, int bins) {
  const double t = (value - lo) / (hi - lo);
  const int b = static_cast<int>(std::floor(t * bins));
  return std::clamp(b, 0, bins - 1);
}

}  // namespace

DiscreteObs discretize(const Observation& obs) {
  DiscreteObs d;
  d[0] = bin_index(obs.v[0], -1.0, 1.0, 7);
  d[1] = bin_index(obs.v[1], -1.0, 1.0, 7);
  for (int k = 0; k < 3; ++k) {
    d[static_cast<std::size_t>(2 + k)] =
        bin_index(obs.v[static_cast<std::size_t>(2 + k)], 0.0, 2.0, 5);
  }
  return d;
}

const std::array<double, 3> QTable::kZeros = {0.0, 0.0, 0.0};

std::uint32_t QTable::key(const DiscreteObs& s) {
  // Mixed-radix packing over bin counts (7, 7, 5, 5, 5).
  return static_cast<std::uint32_t>(
      s[0] + 7 * (s[1] + 7 * (s[2] + 5 * (s[3] + 5 * s[4]))));
}

const std::array<double, 3>& QTable::at(const DiscreteObs& s) const {
  const auto it = table_.find(key(s));
  return it == table_.end() ? kZeros : it->second;
}

std::array<double, 3>& QTable::at_mutable(const DiscreteObs& s) {
  return table_[key(s)];  // value-initialised to zeros on first touch
}

void q_update(QTable& q, const DiscreteObs& s, int action, double reward,
              const DiscreteObs& s_next, bool terminal, const MarlConfig& cfg) {
  const std::array<double, 3>& next = q.at(s_next);
  const double bootstrap =
      terminal ? 0.0 : *std::max_element(next.begin(), next.end());
  std::array<double, 3>& row = q.at_mutable(s);
  const std::size_t a = static_cast<std::size_t>(action);
  row[a] += cfg.lr * (reward + cfg.gamma * bootstrap - row[a]);
}

int select_action(const QTable& q, const DiscreteObs& s, double epsilon,
                  Rng& rng) {
  const double coin = rng.uniform();
  if (coin < epsilon) return static_cast<int>(rng.uniform_below(3));
  const std::array<double, 3>& row = q.at(s);
  int best = 0;
  for (int a = 1; a < 3; ++a) {
    if (row[static_cast<std::size_t>(a)] > row[static_cast<std::size_t>(best)]) {
      best = a;
    }
  }
  return best;
}

MarlEnv::MarlEnv(MarlConfig cfg, const TrackTable& tracks) : cfg_(cfg) {
  if (cfg_.n_agents < 1 || cfg_.episode_len < 1) {
    throw ConfigError("MarlEnv: n_agents and episode_len must be >= 1");
  }
  if (!(cfg_.gamma > 0.0 && cfg_.gamma < 1.0)) {
    throw ConfigError("MarlEnv: gamma must be in (0,1)");
  }
  if (cfg_.epsilon < 0.0 || cfg_.epsilon > 1.0) {
    throw ConfigError("MarlEnv: epsilon must be in [0,1]");
  }
  int usable = 0;
  for (const Track& t : tracks.tracks) {
    if (static_cast<int>(t.points.size()) >= cfg_.episode_len) ++usable;
  }
  if (usable < cfg_.n_agents) {
    throw DataError("MarlEnv: need " + std::to_string(cfg_.n_agents) +
                    " tracks with >= " + std::to_string(cfg_.episode_len) +
                    " points, found " + std::to_string(usable));
  }
  for (const Track& t : tracks.tracks) {
    if (static_cast<int>(t.points.size()) < cfg_.episode_len) continue;
    std::vector<std::array<double, 2>> path;
    path.reserve(t.points.size());
    for (const TrackPoint& p : t.points) path.push_back({p.lon, p.lat});
    paths_.push_back(std::move(path));
    if (static_cast<int>(paths_.size()) == cfg_.n_agents) break;
  }
}

MarlState MarlEnv::reset() const {
  MarlState s;
  s.progress.assign(static_cast<std::size_t>(cfg_.n_agents), 0.0);
  s.velocity.assign(static_cast<std::size_t>(cfg_.n_agents), 1.0);
  s.step = 0;
  return s;
}

std::array<double, 2> MarlEnv::position(int agent, double progress) const {
  const auto& path = paths_[static_cast<std::size_t>(agent)];
  const double last = static_cast<double>(path.size() - 1);
  const double p = std::clamp(progress, 0.0, last);
  const std::size_t lo = static_cast<std::size_t>(std::floor(p));
  const std::size_t hi = std::min(lo + 1, path.size() - 1);
  const double frac = p - std::floor(p);
  return {path[lo][0] + frac * (path[hi][0] - path[lo][0]),
          path[lo][1] + frac * (path[hi][1] - path[lo][1])};
}

MarlEnv::StepResult MarlEnv::step(const MarlState& state,
                                  const std::vector<int>& actions) const {
  if (actions.size() != static_cast<std::size_t>(cfg_.n_agents)) {
    throw ConfigError("MarlEnv::step: one action per agent required");
  }
  StepResult out;
  out.state = state;
  out.state.step = state.step + 1;
  const std::size_t n = static_cast<std::size_t>(cfg_.n_agents);

  std::vector<std::array<double, 2>> pos(n);
  bool exhausted = false;
  for (std::size_t i = 0; i < n; ++i) {
    const int a = actions[i];
    if (a < -1 || a > 1) {
      throw ConfigError("MarlEnv::step: actions must be in {-1, 0, +1}");
    }
    out.state.velocity[i] =
        std::clamp(out.state.velocity[i] + 0.1 * a, 0.0, 2.0);
    const double last =
        static_cast<double>(paths_[i].size() - 1);
    out.state.progress[i] =
        std::clamp(out.state.progress[i] + out.state.velocity[i], 0.0, last);
    if (out.state.progress[i] >= last) exhausted = true;
    pos[i] = position(static_cast<int>(i), out.state.progress[i]);
  }

  out.rewards.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int ref_idx = std::min(out.state.step,
                                 static_cast<int>(paths_[i].size()) - 1);
    const auto& ref = paths_[i][static_cast<std::size_t>(ref_idx)];
    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      min_dist = std::min(min_dist, std::hypot(pos[i][0] - pos[j][0],
                                               pos[i][1] - pos[j][1]));
    }
    out.rewards[i] = -std::hypot(pos[i][0] - ref[0], pos[i][1] - ref[1]);
    if (n > 1 && min_dist < cfg_.collision_dist) {
      out.rewards[i] += cfg_.collision_penalty;
    }
  }
  out.done = out.state.step >= cfg_.episode_len || exhausted;
  return out;
}

Observation MarlEnv::observe(const MarlState& state, int agent) const {
  const std::size_t n = static_cast<std::size_t>(cfg_.n_agents);
  const std::size_t i = static_cast<std::size_t>(agent);
  const std::array<double, 2> pos = position(agent, state.progress[i]);
  const int ref_idx =
      std::min(state.step, static_cast<int>(paths_[i].size()) - 1);
  const auto& ref = paths_[i][static_cast<std::size_t>(ref_idx)];

  std::vector<double> dists;
  dists.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const std::array<double, 2> other =
        position(static_cast<int>(j), state.progress[j]);
    dists.push_back(std::hypot(pos[0] - other[0], pos[1] - other[1]));
  }
  std::sort(dists.begin(), dists.end());

  Observation obs;
  obs.v[0] = pos[0] - ref[0];
  obs.v[1] = pos[1] - ref[1];
  for (std::size_t k = 0; k < 3; ++k) {
    obs.v[2 + k] = k < dists.size() ? dists[k] : 2.0;  // sentinel = clip max
  }
  return obs;
}

Observation corrupt_observation(const Observation& obs, double beta, Rng& rng) {
  if (!(beta > 0.0)) throw ConfigError("corrupt_observation: beta must be > 0");
  const double std_dev = 1.0 / std::sqrt(beta);
  Observation noisy = obs;
  for (double& x : noisy.v) x += std_dev * rng.gaussian();
  return noisy;
}

EpisodeResult run_marl_episode(const MarlEnv& env, std::vector<QTable>& qs,
                               double beta, std::uint64_t seed, bool learn,
                               int masked_agent) {
  const MarlConfig& cfg = env.config();
  const std::size_t n = static_cast<std::size_t>(cfg.n_agents);
  if (qs.size() != n) {
    throw ConfigError("run_marl_episode: one Q-table per agent required");
  }
  Rng rng(seed);

  auto sense_all = [&](const MarlState& s) {
    std::vector<DiscreteObs> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
      Observation noisy = corrupt_observation(env.observe(s, static_cast<int>(i)),
                                              beta, rng);
      if (static_cast<int>(i) == masked_agent) noisy = Observation{};  // zeros
      keys[i] = discretize(noisy);
    }
    return keys;
  };

  EpisodeResult result;
  result.per_agent_total.assign(n, 0.0);

  MarlState state = env.reset();
  std::vector<DiscreteObs> keys = sense_all(state);
  std::vector<int> actions(n);
  bool done = false;
  while (!done) {
    for (std::size_t i = 0; i < n; ++i) {
      // select_action returns the action index {0,1,2}; the env takes the
      // acceleration {-1,0,+1}.
      actions[i] = select_action(qs[i], keys[i], cfg.epsilon, rng) - 1;
    }
    MarlEnv::StepResult sr = env.step(state, actions);
    const std::vector<DiscreteObs> next_keys = sense_all(sr.state);
    for (std::size_t i = 0; i < n; ++i) {
      result.per_agent_total[i] += sr.rewards[i];
      result.team_total += sr.rewards[i];
      if (learn) {
        q_update(qs[i], keys[i], actions[i] + 1, sr.rewards[i], next_keys[i],
                 sr.done, cfg);
      }
    }
    state = std::move(sr.state);
    keys = next_keys;
    done = sr.done;
    ++result.steps;
  }
  return result;
}

std::vector<double> masking_credit(
    int n_agents,
    const std::function<double(int masked_agent, std::uint64_t seed)>& episode_runner,
    int n_perms, std::uint64_t seed) {
  if (n_perms < 1) throw ConfigError("masking_credit: n_perms must be >= 1");
  std::vector<double> credit(static_cast<std::size_t>(n_agents), 0.0);
  for (int k = 0; k < n_perms; ++k) {
    const std::uint64_t pair_seed =
        derive_seed(seed, "marl.mask", static_cast<std::uint64_t>(k));
    const double unmasked = episode_runner(-1, pair_seed);
    for (int i = 0; i < n_agents; ++i) {
      credit[static_cast<std::size_t>(i)] +=
          unmasked - episode_runner(i, pair_seed);
    }
  }
  for (double& c : credit) c /= static_cast<double>(n_perms);
  return credit;
}

TrackTable marl_synthetic_tracks(int n_agents, int points_per_track,
                                 std::uint64_t seed) {
  if (n_agents < 1 || points_per_track < 2) {
    throw ConfigError("marl_synthetic_tracks: need >= 1 agent, >= 2 points");
  }
  Rng rng(seed);
  const double radius = 2.0;
  // One step along the ring per time unit, sized so progress-1-per-step
  // motion moves a modest arc; the phase offset spreads agents apart.
  const double step_angle = 0.03 * (0.9 + 0.2 * rng.uniform());
  TrackTable table;
  for (int a = 0; a < n_agents; ++a) {
    const double phase =
        2.0 * std::numbers::pi * static_cast<double>(a) / n_agents;
    Track t;
    t.id = "ref_" + std::to_string(a);
    t.points.reserve(static_cast<std::size_t>(points_per_track));
    for (int k = 0; k < points_per_track; ++k) {
      TrackPoint p;
      p.lon = radius * std::cos(phase + step_angle * k);
      p.lat = radius * std::sin(phase + step_angle * k);
      p.time = static_cast<double>(k);
      t.points.push_back(p);
    }
    table.tracks.push_back(std::move(t));
  }
  return table;
}

// Number of leading controller ticks spent on the exploratory beta ladder.
constexpr int kMarlBurninTicks = 6;

std::vector<MarlRow> run_marl_experiment(const MarlConfig& cfg,
                                         const TrackTable& tracks,
                                         double beta_star,
                                         const ApcConfig& apc_cfg,
                                         int episodes, int n_seeds,
                                         std::uint64_t seed, int update_every,
                                         int mask_perms) {
  if (episodes < 1 || n_seeds < 1 || update_every < 1) {
    throw ConfigError("run_marl_experiment: episodes, seeds and update_every "
                      "must be >= 1");
  }
  const MarlEnv env(cfg, tracks);
  // One controller epoch per update tick: the masking credit arrives every
  // update_every episodes and beta must react to each such measurement.
  ApcConfig tick_cfg = apc_cfg;
  tick_cfg.update_period = 1;
  struct Strategy {
    std::string name;
    bool fixed;
    double beta0;
  };
  const std::vector<Strategy> strategies = {
      {"fixed_0.5", true, 0.5},   {"fixed_peak", true, beta_star},
      {"fixed_5.0", true, 5.0},   {"random_beta", false, 0.0},
      {"apc", false, 1.0},
  };

  std::vector<MarlRow> rows;
  rows.reserve(strategies.size() * static_cast<std::size_t>(n_seeds) *
               static_cast<std::size_t>(episodes));

  for (std::size_t s_idx = 0; s_idx < strategies.size(); ++s_idx) {
    const Strategy& strat = strategies[s_idx];
    for (int run = 0; run < n_seeds; ++run) {
      // The run seed depends only on the run index, not the strategy, so
      // strategies face identical noise and exploration streams (paired
      // comparisons; identical fixed betas give identical curves).
      const std::uint64_t run_seed =
          derive_seed(seed, "marl.run", static_cast<std::uint64_t>(run));
      std::vector<QTable> qs(static_cast<std::size_t>(cfg.n_agents));
      Rng beta_rng(derive_seed(run_seed, "marl.beta", 0));
      ApcState apc = make_apc_state(strat.beta0 > 0.0 ? strat.beta0 : 1.0,
                                    derive_seed(run_seed, "marl.apc", 0),
                                    tick_cfg);
      double beta = strat.name == "random_beta"
                        ? apc_cfg.beta_min +
                              beta_rng.uniform() * (apc_cfg.beta_max - apc_cfg.beta_min)
                        : apc.beta;

      for (int ep = 1; ep <= episodes; ++ep) {
        const EpisodeResult er = run_marl_episode(
            env, qs, beta,
            derive_seed(run_seed, "marl.episode", static_cast<std::uint64_t>(ep)),
            /*learn=*/true);
        rows.push_back(MarlRow{strat.name, run, ep, beta,
                               er.team_total / cfg.n_agents});

        if (ep % update_every != 0) continue;
        if (strat.fixed) continue;
        if (strat.name == "random_beta") {
          beta = apc_cfg.beta_min +
                 beta_rng.uniform() * (apc_cfg.beta_max - apc_cfg.beta_min);
          continue;
        }
        // APC tick: evaluation rollouts (no learning).  The eval episode
        // seeds are shared across ticks, so consecutive credit measurements
        // differ only through beta and the evolving Q-tables, not through
        // fresh episode draws (common random numbers).
        const std::uint64_t tick_seed = derive_seed(run_seed, "marl.tick", 0);
        const auto runner = [&](int masked, std::uint64_t s) {
          return run_marl_episode(env, qs, beta, s, /*learn=*/false, masked)
              .team_total;
        };
        const std::vector<double> credit =
            masking_credit(cfg.n_agents, runner, mask_perms, tick_seed);
        double mean_credit = 0.0;
        for (double c : credit) mean_credit += c;
        mean_credit /= static_cast<double>(credit.size());
        apc = apc_step(std::move(apc), mean_credit, tick_cfg);
        // The first few ticks probe an evenly spaced beta ladder across the
        // clamp range, so the first closed-loop fits see the whole credit
        // curve instead of a noise-dominated neighborhood of beta0.
        const int tick = ep / update_every;
        if (tick <= kMarlBurninTicks) {
          const double frac = (static_cast<double>(tick) - 0.5) /
                              static_cast<double>(kMarlBurninTicks);
          apc.beta = tick_cfg.beta_min +
                     frac * (tick_cfg.beta_max - tick_cfg.beta_min);
        }
        beta = apc.beta;
      }
    }
  }
  return rows;
}

}  // namespace coopfe
