#pragma once

#include <cstdint>
#include <vector>

#include "coopfe/apc.hpp"
#include "coopfe/rng.hpp"

namespace coopfe {

// Classic Vicsek parameters: point agents in a periodic square box align
// their headings with neighbours within radius R and move at constant
// speed.  Episode credit is the polarisation averaged over the post-warmup
// steps.
struct FlockConfig {
  int n_agents = 100;
  double box_size = 10.0;
  double radius = 1.0;
  double speed = 0.03;
  int steps_per_episode = 500;
  int warmup_steps = 100;
};

struct FlockState {
  std::vector<double> x;        // positions in [0, box_size)
  std::vector<double> y;
  std::vector<double> heading;  // angles in [-pi, pi)
  Rng rng{0};
};

// Linear intrinsic-noise ramp over an episode index range.
struct NoiseSchedule {
  double nu_start = 0.0;
  double nu_end = 0.0;
  int episodes = 1;

  // nu at the given 0-based episode; constant past the end of the ramp.
  double at(int episode) const;
};

// Uniform random positions in the box and headings in [-pi, pi).
FlockState init_flock(const FlockConfig& cfg, std::uint64_t seed);

// Polarisation order parameter: |sum_i (cos theta_i, sin theta_i)| / N.
// 1 = perfectly aligned, ~N^{-1/2} for i.i.d. uniform headings.
double polarization(const FlockState& s);

// One synchronous update step.  Each agent perceives the headings of its
// neighbours within R (periodic metric, itself included); every perceived
// *other* heading is corrupted by i.i.d. Gaussian angular noise of variance
// 1/beta, the agent's own heading enters exactly (an isolated agent is
// disturbed only by intrinsic noise).  The new heading is the circular mean
// of the perceived headings plus intrinsic Gaussian noise of std nu, and
// the agent advances by `speed` along it.  Neighbour search uses cell lists
// (cell edge >= R); neighbours are processed in ascending index order so
// the draw sequence, and hence the trajectory, is reproducible.
FlockState step_flock(FlockState s, const FlockConfig& cfg, double beta,
                      double nu);

// Runs one episode from a fresh random start and returns the mean
// polarisation over the post-warmup steps.
double run_episode(const FlockConfig& cfg, double beta, double nu,
                   std::uint64_t seed);

struct SweepPoint {
  double beta = 0.0;
  double phi_mean = 0.0;
  double phi_std = 0.0;  // sample std over episodes (0 for one episode)
};

// Episode-credit statistics per beta; every (beta, episode) cell gets an
// independent generator stream derived from the master seed.
std::vector<SweepPoint> run_beta_sweep(const FlockConfig& cfg,
                                       const std::vector<double>& betas,
                                       double nu, int episodes_per_beta,
                                       std::uint64_t seed);

struct FlockApcPoint {
  int episode = 0;    // 1-based
  double nu = 0.0;
  double beta = 0.0;  // beta in effect during the episode
  double phi = 0.0;   // episode credit fed to the controller
};

struct FlockApcResult {
  std::vector<FlockApcPoint> trajectory;
  double final_beta = 0.0;
};

// Closed-loop run: each episode samples nu from the schedule, simulates at
// the controller's current beta, and feeds the episode polarisation back as
// credit.  The controller clamp bounds must bracket the flocking peak
// (around beta 9-10 at the default config), so callers widen them beyond
// the ApcConfig defaults.
FlockApcResult run_apc_flock(const FlockConfig& cfg,
                             const NoiseSchedule& schedule,
                             const ApcConfig& apc_cfg, int episodes,
                             double beta0, std::uint64_t seed);

}  // namespace coopfe
