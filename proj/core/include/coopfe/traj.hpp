#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "coopfe/apc.hpp"
#include "coopfe/coalition.hpp"

namespace coopfe {

// ---------------------------------------------------------------------------
// Track ingestion
// ---------------------------------------------------------------------------

struct TrackPoint {
  double lon = 0.0;
  double lat = 0.0;
  double time = 0.0;
};

struct Track {
  std::string id;
  std::vector<TrackPoint> points;  // sorted by time ascending
};

struct TrackTable {
  std::vector<Track> tracks;
};

struct LoadReport {
  TrackTable table;
  int dropped_short_tracks = 0;     // tracks with < 20 points
  int dropped_duplicate_points = 0; // later rows sharing a timestamp
};

// Parses a CSV with a header containing at least
// track_id,type,lon,lat,time (extra columns ignored), groups rows by
// track_id in first-appearance order, sorts each track by time, keeps the
// first row of any duplicated timestamp, and drops tracks shorter than 20
// points.  Throws SchemaError for a missing column, DataError with the line
// number for an unparsable cell, and DataError if nothing survives.
LoadReport load_tracks(std::istream& csv);

// File wrapper; a missing file raises DataError with download guidance.
LoadReport load_tracks_file(const std::string& path);

// ---------------------------------------------------------------------------
// Samples and the linear predictor
// ---------------------------------------------------------------------------

// One supervised sample: 10 past positions (flattened lon,lat pairs, oldest
// first) predicting the next 5 positions.
struct PredictionSample {
  std::string agent_id;
  std::array<double, 20> past{};
  std::array<double, 10> future{};
};

// Sliding windows over every track: a track of length T yields
// floor((T - past - future) / stride) + 1 samples (zero when too short).
std::vector<PredictionSample> make_samples(const TrackTable& table,
                                           int past = 10, int future = 5,
                                           int stride = 1);

// Adds i.i.d. zero-mean Gaussian noise of variance 1/beta to every past
// coordinate; futures are untouched.  Callers apply this to training
// samples only — evaluation data must stay clean.
std::vector<PredictionSample> inject_noise(std::vector<PredictionSample> samples,
                                           double beta, std::uint64_t seed);

// Ridge least-squares map from 20 features + bias to the 10 targets.
struct LinearPredictor {
  std::vector<double> weights;  // 21 x 10, row-major, row 20 = bias

  std::array<double, 10> predict(const PredictionSample& s) const;
};

// Normal-equations ridge fit.  lambda = 0 requests plain least squares and
// raises SingularFitError for rank-deficient designs (the message suggests
// lambda > 0); an empty sample set raises DataError.
LinearPredictor fit_predictor(const std::vector<PredictionSample>& train,
                              double lambda = 1e-6);

// Weighted ridge fit (one nonnegative weight per sample).  All-ones weights
// reproduce fit_predictor bit for bit — fit_predictor delegates here.
LinearPredictor fit_predictor_weighted(const std::vector<PredictionSample>& train,
                                       const std::vector<double>& weights,
                                       double lambda = 1e-6);

// Mean absolute error across all samples and target coordinates.
double mae(const LinearPredictor& p, const std::vector<PredictionSample>& samples);

// ---------------------------------------------------------------------------
// Cooperative task: per-agent data and coalition values
// ---------------------------------------------------------------------------

struct AgentData {
  std::string id;
  std::vector<PredictionSample> train;
  std::vector<PredictionSample> val;
  std::vector<PredictionSample> test;
};

struct TrajTask {
  std::vector<AgentData> agents;
};

// Groups samples by agent (first-appearance order) and applies a temporal
// 70/15/15 train/val/test split per agent, preserving sample order.
TrajTask split_by_agent(const std::vector<PredictionSample>& samples,
                        double train_frac = 0.70, double val_frac = 0.15);

// Lazily evaluates v(C) = -MAE of a predictor trained on the coalition
// members' noise-injected training samples and scored on their clean
// validation samples.  Values are cached per coalition mask; the noise
// stream for a mask is derived from (seed, mask), so a cached value is
// exactly what a recomputation would produce.  v(empty) = 0.
class CoalitionEvaluator {
 public:
  CoalitionEvaluator(const TrajTask& task, double beta, std::uint64_t seed,
                     double lambda = 1e-6);

  double value(Mask coalition);
  int n_agents() const { return static_cast<int>(task_->agents.size()); }

 private:
  const std::vector<PredictionSample>& noisy_train(std::size_t agent_index);

  const TrajTask* task_;
  double beta_;
  std::uint64_t seed_;
  double lambda_;
  std::vector<std::size_t> id_order_;  // agent indices sorted by id
  std::unordered_map<std::size_t, std::vector<PredictionSample>> noisy_;
  std::unordered_map<Mask, double> cache_;
};

// Convenience wrapper over CoalitionEvaluator::value for one-off calls.
// Raises DataError when the coalition has no training or validation data.
double coalition_value(const TrajTask& task, Mask coalition, double beta,
                       std::uint64_t seed, double lambda = 1e-6);

// Monte Carlo permutation Shapley credit over coalition_value; requires
// 2 <= N <= 10 (every marginal costs one predictor fit).  `exhaustive`
// draws the n_perms orderings without replacement from the N! distinct
// permutations (N <= 8), which with n_perms >= N! reproduces the exact
// value of the induced game.
ShapleyVector shapley_credit(const TrajTask& task, double beta,
                             int n_perms = 20, std::uint64_t seed = 0,
                             bool exhaustive = false);

// ---------------------------------------------------------------------------
// Synthetic roundabout-style task
// ---------------------------------------------------------------------------

// Agents circulate on a ring with per-agent radius and phase, slow radial
// wiggles (so the dynamics are not exactly linear), a weak pull toward the
// swarm centroid (cross-agent coupling the per-agent features cannot fully
// see), and measurement noise sigma0 baked into every recorded position.
// Overlapping windows then correlate feature noise with target noise, and
// a plain least-squares fit on over-precise inputs overfits exactly that
// correlation — which is what gives credit-vs-beta its interior optimum.
// Defaults are sized so the credit-versus-beta curve has an interior maximum
// on the 0.5..5 grid.  Short tracks keep the pooled train set close to the
// parameter count, so over-precise fits chase target residuals (the overfit
// branch); the staggered radii spread the scales at which information is
// recovered from the injected noise (the graded left branch); the chirped
// wiggle is unlearnable by a time-invariant linear map and acts as a
// deterministic residual floor on top of the measurement noise.
struct SyntheticTrajConfig {
  int n_agents = 3;
  int points_per_track = 30;
  double ring_radius = 3.5;
  double radius_jitter = 1.05;
  double angular_speed = 0.26;  // radians per time step
  double curve_amp = 0.25;      // radial chirped-wiggle amplitude
  double coupling = 0.08;       // centroid pull strength
  double noise_floor = 0.18;    // sigma0, std of recorded-position noise
};

TrackTable synthetic_tracks(const SyntheticTrajConfig& cfg, std::uint64_t seed);

// Generator + windowing + split in one call.
TrajTask synthetic_task(const SyntheticTrajConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Sweeps and APC training
// ---------------------------------------------------------------------------

struct SweepRecord {
  double beta = 0.0;
  double credit_mean = 0.0;  // mean over runs of the agent-mean credit
  double credit_std = 0.0;   // sample std over runs
  double mae_mean = 0.0;     // mean over runs of full-coalition MAE
};

struct SweepResult {
  std::vector<SweepRecord> records;
  QuadraticFit fit;        // quadratic over (beta, credit_mean)
  bool has_peak = false;   // true iff fit.a < 0
  double peak_beta = 0.0;  // -b / (2a), only meaningful when has_peak
};

// Credit statistics over a beta grid: `runs` independent repetitions per
// beta, each with its own noise and permutation stream derived from the
// master seed.  The quadratic is fitted to the per-beta mean credits, so a
// degenerate grid (fewer than 3 distinct betas) surfaces the singular-fit
// error from fit_quadratic.
SweepResult run_inverted_u_sweep(const TrajTask& task,
                                 const std::vector<double>& betas, int runs,
                                 std::uint64_t seed, int n_perms = 20);

struct TrajApcPoint {
  int epoch = 0;
  double beta = 0.0;
  double credit = 0.0;  // agent-mean Shapley credit at this epoch
  double mae = 0.0;     // full-coalition validation MAE at this epoch
};

struct TrajApcResult {
  std::vector<TrajApcPoint> trajectory;
  ApcState final_state;
};

// Closed-loop APC training: every epoch re-fits predictors from scratch at
// the current beta (fresh noise stream per epoch), estimates the agent-mean
// Shapley credit with a reduced permutation budget, and feeds it to the
// controller.
TrajApcResult run_apc_training(const TrajTask& task, const ApcConfig& apc_cfg,
                               int epochs, std::uint64_t seed,
                               double beta0 = 1.0, int n_perms = 10);

// Continuation from an existing controller state (epoch numbering resumes
// at first_epoch); lets drivers swap the task mid-run, e.g. to double the
// measurement noise.
TrajApcResult continue_apc_training(const TrajTask& task,
                                    const ApcConfig& apc_cfg, int epochs,
                                    std::uint64_t seed, ApcState state,
                                    int first_epoch, int n_perms = 10);

}  // namespace coopfe
