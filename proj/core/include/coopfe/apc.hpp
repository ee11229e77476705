#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "coopfe/rng.hpp"

namespace coopfe {

// Controller configuration.  Defaults follow the reference setup: learning
// rate 0.05, buffer of 50 pairs, update every 10 epochs, clamp [0.2, 5.0],
// exploration kick 0.1 * (U[0,1) - 0.5).  Flocking runs override the clamp
// bounds (their credit peak sits near beta = 9-10).
struct ApcConfig {
  double eta = 0.05;
  int window_len = 50;    // L: buffer capacity
  int update_period = 10; // K: epochs between beta updates
  double beta_min = 0.2;
  double beta_max = 5.0;
  double explore_scale = 0.1;
  // Optional pre-smoothing: store the trailing mean of the last 5 raw
  // credits instead of the raw credit.  Off by default; the raw-pair buffer
  // is the normative behaviour.
  bool smooth_credits = false;
  // Fit only the most recent fit_window buffer entries; 0 = whole buffer.
  int fit_window = 0;
};

// Rolling controller state: current beta, FIFO buffer of (beta, credit)
// observations, epoch counter and the private exploration RNG.
struct ApcState {
  double beta = 1.0;
  std::deque<std::pair<double, double>> buffer;  // (beta, credit), oldest first
  int epoch = 0;
  Rng rng{0};
  std::deque<double> recent_raw;  // last <= 5 raw credits, for smoothing
};

ApcState make_apc_state(double beta0, std::uint64_t seed,
                        const ApcConfig& config);

// Least-squares quadratic a b^2 + b b + c with r_squared = 1 - SSres/SStot
// (1 when SStot = 0, i.e. constant credits).
struct QuadraticFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double r_squared = 0.0;
};

// Fits a quadratic to (beta, credit) points by solving the 3x3 normal
// equations.  Throws ConfigError for < 3 points and SingularFitError when
// the design is rank-deficient (fewer than 3 distinct beta values).
QuadraticFit fit_quadratic(const std::vector<std::pair<double, double>>& points);

// One controller step: append (beta, credit) to the buffer (FIFO eviction
// past L), advance the epoch, and on every K-th epoch update beta:
//   concave fit (a < 0):  beta <- clamp(beta + eta * (2 a beta + b))
//   otherwise:            beta <- clamp(beta + explore_scale * (U[0,1) - 0.5))
// Degenerate fits (too few points or too few distinct betas) take the
// exploration branch.  Deterministic given the state's seed.
ApcState apc_step(ApcState state, double credit, const ApcConfig& config);

struct ApcTrajectoryPoint {
  int epoch = 0;   // 1-based epoch that earned this credit
  double beta = 0.0;  // beta in effect when the credit was observed
  double credit = 0.0;
};

struct ApcRunResult {
  std::vector<ApcTrajectoryPoint> trajectory;
  ApcState final_state;
};

// Closed-loop run against a credit oracle.  The oracle sees the current
// beta and the 1-based epoch, so callers can inject noise or mid-run
// regime shifts.
ApcRunResult run_apc_on_oracle(
    const std::function<double(double beta, int epoch)>& credit_fn,
    const ApcConfig& config, int epochs, double beta0, std::uint64_t seed);

}  // namespace coopfe
