#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "coopfe/apc.hpp"
#include "coopfe/rng.hpp"
#include "coopfe/traj.hpp"

namespace coopfe {

// Trajectory-following environment: each agent tracks its own reference
// path.  The paths come from a TrackTable (real or synthetic); agent i
// follows the i-th retained track.
struct MarlConfig {
  int n_agents = 10;
  int episode_len = 100;
  double collision_dist = 0.05;
  double collision_penalty = -10.0;
  double lr = 0.1;
  double gamma = 0.95;
  double epsilon = 0.1;
};

// Agents move along the arc-length parameter of their reference path: a
// scalar progress with a scalar velocity.  Actions are accelerations
// {-1, 0, +1} scaled by 0.1; velocity is clamped to [0, 2] and progress to
// the path's index range.  The 2-D position is the path linearly
// interpolated at the progress value, and the reference to track is the
// path point at the current step index — so holding velocity 1 from reset
// stays exactly on reference.
struct MarlState {
  std::vector<double> progress;
  std::vector<double> velocity;
  int step = 0;
};

// What an agent senses: offset from its reference point (2 values) and the
// distances to the three nearest other agents (padded with the 2.0 clip
// sentinel when fewer than 3 exist).
struct Observation {
  std::array<double, 5> v{};  // offset_x, offset_y, d1, d2, d3
};

using DiscreteObs = std::array<int, 5>;

// Uniform binning: offsets into 7 bins over [-1, 1], distances into 5 bins
// over [0, 2]; values outside the range land in the boundary bins.  The
// all-zero observation maps to (3, 3, 0, 0, 0).
DiscreteObs discretize(const Observation& obs);

// Tabular action values over discretized observations; unseen states read
// as zeros.  Actions are indexed {0: -1, 1: 0, 2: +1}.
class QTable {
 public:
  const std::array<double, 3>& at(const DiscreteObs& s) const;
  std::array<double, 3>& at_mutable(const DiscreteObs& s);
  std::size_t size() const { return table_.size(); }

 private:
  static std::uint32_t key(const DiscreteObs& s);
  std::unordered_map<std::uint32_t, std::array<double, 3>> table_;
  static const std::array<double, 3> kZeros;
};

// One Q-learning backup:
//   Q[s][a] += lr * (r + gamma * max_a' Q[s'][a'] - Q[s][a]),
// dropping the bootstrap term on terminal transitions.
void q_update(QTable& q, const DiscreteObs& s, int action, double reward,
              const DiscreteObs& s_next, bool terminal, const MarlConfig& cfg);

// Epsilon-greedy action selection; greedy ties break toward the lowest
// action index.  The exploration coin is always flipped so paired rollouts
// consume identical draw streams.
int select_action(const QTable& q, const DiscreteObs& s, double epsilon,
                  Rng& rng);

class MarlEnv {
 public:
  // Takes the first cfg.n_agents retained tracks; each must have at least
  // episode_len points.  Throws DataError when too few usable tracks exist.
  MarlEnv(MarlConfig cfg, const TrackTable& tracks);

  MarlState reset() const;  // progress 0, velocity 1, step 0

  struct StepResult {
    MarlState state;
    std::vector<double> rewards;  // per-agent, <= 0 each
    bool done = false;
  };

  // Applies the joint action (entries in {-1, 0, +1}), advances the true
  // state, and scores reward_i = -||pos_i - ref_i(step)|| plus the
  // collision penalty when any other agent is within collision_dist.
  // The episode ends after episode_len steps or as soon as any agent
  // exhausts its path.
  StepResult step(const MarlState& state, const std::vector<int>& actions) const;

  // Noise-free observation of one agent; environment dynamics never see
  // observation noise, so the true trajectory is beta-invariant for a
  // fixed action sequence.
  Observation observe(const MarlState& state, int agent) const;

  // Interpolated 2-D position of an agent at a progress value.
  std::array<double, 2> position(int agent, double progress) const;

  const MarlConfig& config() const { return cfg_; }

 private:
  MarlConfig cfg_;
  std::vector<std::vector<std::array<double, 2>>> paths_;
};

// Adds i.i.d. Gaussian noise of variance 1/beta to all 5 entries.
Observation corrupt_observation(const Observation& obs, double beta, Rng& rng);

struct EpisodeResult {
  double team_total = 0.0;
  std::vector<double> per_agent_total;
  int steps = 0;
};

// One rollout at observation precision beta.  With learn = true the agents'
// Q-tables are updated along the way; masked_agent >= 0 replaces that
// agent's post-noise observation with the zero observation (its noise draws
// are still consumed, keeping paired rollouts aligned draw-for-draw).
EpisodeResult run_marl_episode(const MarlEnv& env, std::vector<QTable>& qs,
                               double beta, std::uint64_t seed, bool learn,
                               int masked_agent = -1);

// Masking credit: credit_i = mean over n_perms paired episodes of
// (unmasked team total) - (team total with agent i masked), with the pair
// sharing one seed so noise and exploration draws line up.
std::vector<double> masking_credit(
    int n_agents,
    const std::function<double(int masked_agent, std::uint64_t seed)>& episode_runner,
    int n_perms, std::uint64_t seed);

// Synthetic reference paths for the experiment: agents evenly spaced on a
// ring, one noise-free track per agent, long enough for default episodes.
TrackTable marl_synthetic_tracks(int n_agents, int points_per_track,
                                 std::uint64_t seed);

struct MarlRow {
  std::string strategy;
  int seed = 0;
  int episode = 0;     // 1-based
  double beta = 0.0;   // beta in effect during the episode
  double avg_reward = 0.0;  // team total / n_agents
};

// The five precision strategies: fixed beta in {0.5, beta_star, 5.0},
// random-beta (fresh uniform draw from the clamp range at every update
// tick), and APC sharing one beta across agents, updated at every
// update_every-episode tick from the agent-mean masking credit (the
// controller treats each tick as one epoch, so apc_cfg.update_period is
// overridden to 1 internally).  Q-learners persist across the episodes of
// a run; runs are seeded by run index only, so strategies see paired
// streams, and every (strategy, seed) cell is deterministic.
std::vector<MarlRow> run_marl_experiment(const MarlConfig& cfg,
                                         const TrackTable& tracks,
                                         double beta_star,
                                         const ApcConfig& apc_cfg,
                                         int episodes, int n_seeds,
                                         std::uint64_t seed,
                                         int update_every = 10,
                                         int mask_perms = 5);

}  // namespace coopfe
