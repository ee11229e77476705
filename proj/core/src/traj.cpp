#include "coopfe/traj.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "coopfe/errors.hpp"
#include "coopfe/rng.hpp"

namespace coopfe {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_double(const std::string& cell, int line_no, const char* column) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": cannot parse '" +
                    cell + "' as a number in column '" + column + "'");
  }
}

}  // namespace

LoadReport load_tracks(std::istream& csv) {
  std::string line;
  if (!std::getline(csv, line)) {
    throw DataError("empty input: no header row");
  }
  const std::vector<std::string> header = split_csv_line(line);
  const char* required[] = {"track_id", "type", "lon", "lat", "time"};
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* name : required) {
    if (!col.count(name)) {
      throw SchemaError(std::string("missing column '") + name +
                        "' in CSV header");
    }
  }
  const std::size_t c_id = col["track_id"];
  const std::size_t c_lon = col["lon"];
  const std::size_t c_lat = col["lat"];
  const std::size_t c_time = col["time"];
  const std::size_t needed =
      std::max({c_id, c_lon, c_lat, c_time, col["type"]}) + 1;

  std::unordered_map<std::string, std::size_t> track_index;
  std::vector<Track> tracks;
  int line_no = 1;
  while (std::getline(csv, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() < needed) {
      throw DataError("line " + std::to_string(line_no) + ": expected at least " +
                      std::to_string(needed) + " columns, got " +
                      std::to_string(cells.size()));
    }
    TrackPoint p;
    p.lon = parse_double(cells[c_lon], line_no, "lon");
    p.lat = parse_double(cells[c_lat], line_no, "lat");
    p.time = parse_double(cells[c_time], line_no, "time");
    const std::string& id = cells[c_id];
    auto [it, inserted] = track_index.try_emplace(id, tracks.size());
    if (inserted) tracks.push_back(Track{id, {}});
    tracks[it->second].points.push_back(p);
  }

  LoadReport report;
  for (Track& t : tracks) {
    std::stable_sort(t.points.begin(), t.points.end(),
                     [](const TrackPoint& a, const TrackPoint& b) {
                       return a.time < b.time;
                     });
    // Duplicate timestamps keep the first-seen row.
    std::vector<TrackPoint> unique;
    unique.reserve(t.points.size());
    for (const TrackPoint& p : t.points) {
      if (!unique.empty() && unique.back().time == p.time) {
        ++report.dropped_duplicate_points;
        continue;
      }
      unique.push_back(p);
    }
    t.points = std::move(unique);
    if (t.points.size() < 20) {
      ++report.dropped_short_tracks;
      continue;
    }
    report.table.tracks.push_back(std::move(t));
  }
  if (report.table.tracks.empty()) {
    throw DataError("no tracks with >= 20 points found in input");
  }
  return report;
}

LoadReport load_tracks_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open dataset file '" + path +
                    "'; the roundabout trajectory CSVs are published on "
                    "Zenodo — download one (e.g. D1_AM2_F1.csv) and pass its "
                    "path explicitly");
  }
  return load_tracks(in);
}

std::vector<PredictionSample> make_samples(const TrackTable& table, int past,
                                           int future, int stride) {
  if (past < 1 || future < 1 || stride < 1) {
    throw ConfigError("make_samples: past, future and stride must be >= 1");
  }
  if (past != 10 || future != 5) {
    // The fixed-size sample layout matches the 10 -> 5 task; other window
    // shapes would need a different PredictionSample.
    throw ConfigError("make_samples: only the 10-past/5-future window is supported");
  }
  std::vector<PredictionSample> samples;
  const int window = past + future;
  for (const Track& t : table.tracks) {
    const int n = static_cast<int>(t.points.size());
    for (int start = 0; start + window <= n; start += stride) {
      PredictionSample s;
      s.agent_id = t.id;
      for (int k = 0; k < past; ++k) {
        s.past[static_cast<std::size_t>(2 * k)] = t.points[static_cast<std::size_t>(start + k)].lon;
        s.past[static_cast<std::size_t>(2 * k + 1)] = t.points[static_cast<std::size_t>(start + k)].lat;
      }
      for (int k = 0; k < future; ++k) {
        const auto& p = t.points[static_cast<std::size_t>(start + past + k)];
        s.future[static_cast<std::size_t>(2 * k)] = p.lon;
        s.future[static_cast<std::size_t>(2 * k + 1)] = p.lat;
      }
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

std::vector<PredictionSample> inject_noise(std::vector<PredictionSample> samples,
                                           double beta, std::uint64_t seed) {
  if (!(beta > 0.0)) throw ConfigError("inject_noise: beta must be > 0");
  Rng rng(seed);
  const double std_dev = 1.0 / std::sqrt(beta);
  for (PredictionSample& s : samples) {
    for (double& coord : s.past) coord += std_dev * rng.gaussian();
  }
  return samples;
}

std::array<double, 10> LinearPredictor::predict(const PredictionSample& s) const {
  std::array<double, 10> out{};
  for (int j = 0; j < 10; ++j) {
    double y = weights[static_cast<std::size_t>(20 * 10 + j)];  // bias row
    for (int f = 0; f < 20; ++f) {
      y += weights[static_cast<std::size_t>(f * 10 + j)] * s.past[static_cast<std::size_t>(f)];
    }
    out[static_cast<std::size_t>(j)] = y;
  }
  return out;
}

LinearPredictor fit_predictor(const std::vector<PredictionSample>& train,
                              double lambda) {
  return fit_predictor_weighted(train,
                                std::vector<double>(train.size(), 1.0), lambda);
}

LinearPredictor fit_predictor_weighted(const std::vector<PredictionSample>& train,
                                       const std::vector<double>& weights,
                                       double lambda) {
  if (train.empty()) throw DataError("fit_predictor: no training samples");
  if (lambda < 0.0) throw ConfigError("fit_predictor: lambda must be >= 0");
  if (weights.size() != train.size()) {
    throw ConfigError("fit_predictor: one weight per training sample required");
  }

  constexpr int kF = 21;  // 20 features + bias
  constexpr int kT = 10;
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(kF, kF);
  Eigen::MatrixXd xty = Eigen::MatrixXd::Zero(kF, kT);
  Eigen::VectorXd row(kF);
  for (std::size_t s_idx = 0; s_idx < train.size(); ++s_idx) {
    const PredictionSample& s = train[s_idx];
    const double w = weights[s_idx];
    if (w < 0.0) throw ConfigError("fit_predictor: weights must be >= 0");
    for (int f = 0; f < 20; ++f) row(f) = s.past[static_cast<std::size_t>(f)];
    row(20) = 1.0;
    xtx.noalias() += w * (row * row.transpose());
    Eigen::Map<const Eigen::VectorXd> y(s.future.data(), kT);
    xty.noalias() += w * (row * y.transpose());
  }
  xtx.diagonal().array() += lambda;

  Eigen::MatrixXd w;
  if (lambda == 0.0) {
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
    if (!lu.isInvertible()) {
      throw SingularFitError(
          "fit_predictor: normal equations are singular with lambda = 0; "
          "supply a ridge term lambda > 0");
    }
    w = lu.solve(xty);
  } else {
    w = xtx.ldlt().solve(xty);
  }

  LinearPredictor p;
  p.weights.resize(kF * kT);
  for (int f = 0; f < kF; ++f) {
    for (int j = 0; j < kT; ++j) {
      p.weights[static_cast<std::size_t>(f * kT + j)] = w(f, j);
    }
  }
  return p;
}

double mae(const LinearPredictor& p, const std::vector<PredictionSample>& samples) {
  if (samples.empty()) throw DataError("mae: no samples to evaluate");
  double total = 0.0;
  for (const PredictionSample& s : samples) {
    const std::array<double, 10> pred = p.predict(s);
    for (std::size_t j = 0; j < pred.size(); ++j) {
      total += std::abs(pred[j] - s.future[j]);
    }
  }
  return total / (static_cast<double>(samples.size()) * 10.0);
}

TrajTask split_by_agent(const std::vector<PredictionSample>& samples,
                        double train_frac, double val_frac) {
  if (!(train_frac > 0.0) || val_frac < 0.0 || train_frac + 2.0 * val_frac > 1.0 + 1e-12) {
    throw ConfigError("split_by_agent: fractions must satisfy train > 0, "
                      "val >= 0, train + 2*val <= 1");
  }
  std::unordered_map<std::string, std::size_t> index;
  TrajTask task;
  std::vector<std::vector<PredictionSample>> grouped;
  for (const PredictionSample& s : samples) {
    auto [it, inserted] = index.try_emplace(s.agent_id, grouped.size());
    if (inserted) {
      grouped.emplace_back();
      task.agents.push_back(AgentData{s.agent_id, {}, {}, {}});
    }
    grouped[it->second].push_back(s);
  }
  for (std::size_t a = 0; a < grouped.size(); ++a) {
    auto& g = grouped[a];
    const std::size_t n = g.size();
    const std::size_t n_train = static_cast<std::size_t>(
        std::floor(train_frac * static_cast<double>(n)));
    const std::size_t n_val = static_cast<std::size_t>(
        std::floor(val_frac * static_cast<double>(n)));
    task.agents[a].train.assign(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(n_train));
    task.agents[a].val.assign(g.begin() + static_cast<std::ptrdiff_t>(n_train),
                              g.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    task.agents[a].test.assign(g.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                               g.end());
  }
  return task;
}

CoalitionEvaluator::CoalitionEvaluator(const TrajTask& task, double beta,
                                       std::uint64_t seed, double lambda)
    : task_(&task), beta_(beta), seed_(seed), lambda_(lambda) {
  if (!(beta > 0.0)) throw ConfigError("CoalitionEvaluator: beta must be > 0");
  if (task.agents.empty()) throw DataError("CoalitionEvaluator: no agents");
  id_order_.resize(task.agents.size());
  for (std::size_t a = 0; a < id_order_.size(); ++a) id_order_[a] = a;
  std::sort(id_order_.begin(), id_order_.end(),
            [&task](std::size_t lhs, std::size_t rhs) {
              return task.agents[lhs].id < task.agents[rhs].id;
            });
}

const std::vector<PredictionSample>& CoalitionEvaluator::noisy_train(
    std::size_t agent_index) {
  auto it = noisy_.find(agent_index);
  if (it == noisy_.end()) {
    // One noise stream per agent, keyed by agent id rather than bit position,
    // so relabeling the agents permutes coalition values without changing them.
    const AgentData& agent = task_->agents[agent_index];
    it = noisy_
             .emplace(agent_index,
                      inject_noise(agent.train, beta_,
                                   derive_seed(seed_, "traj.noise." + agent.id, 0)))
             .first;
  }
  return it->second;
}

double CoalitionEvaluator::value(Mask coalition) {
  if (coalition == 0) return 0.0;
  if (auto it = cache_.find(coalition); it != cache_.end()) return it->second;

  // Pool members in agent-id order: summation order in the normal equations is
  // then independent of how the task happens to index its agents.
  std::vector<PredictionSample> train;
  std::vector<PredictionSample> val;
  for (std::size_t a : id_order_) {
    if (!(coalition & (Mask{1} << a))) continue;
    const AgentData& agent = task_->agents[a];
    const std::vector<PredictionSample>& noisy = noisy_train(a);
    train.insert(train.end(), noisy.begin(), noisy.end());
    val.insert(val.end(), agent.val.begin(), agent.val.end());
  }
  if (train.empty()) {
    throw DataError("coalition_value: coalition has no training samples");
  }
  if (val.empty()) {
    throw DataError("coalition_value: coalition has no validation samples");
  }
  const LinearPredictor p = fit_predictor(train, lambda_);
  const double v = -mae(p, val);
  cache_.emplace(coalition, v);
  return v;
}

double coalition_value(const TrajTask& task, Mask coalition, double beta,
                       std::uint64_t seed, double lambda) {
  CoalitionEvaluator ev(task, beta, seed, lambda);
  return ev.value(coalition);
}

ShapleyVector shapley_credit(const TrajTask& task, double beta, int n_perms,
                             std::uint64_t seed, bool exhaustive) {
  const int n = static_cast<int>(task.agents.size());
  if (n < 2 || n > 10) {
    throw ConfigError("shapley_credit: 2 <= N <= 10 required, got " +
                      std::to_string(n));
  }
  if (n_perms < 1) throw ConfigError("shapley_credit: n_perms must be >= 1");

  Rng perm_rng(derive_seed(seed, "traj.perms", 0));

  std::vector<std::vector<int>> perms;
  if (exhaustive) {
    if (n > 8) {
      throw ConfigError("shapley_credit: exhaustive sampling requires N <= 8");
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    do {
      perms.push_back(order);
    } while (std::next_permutation(order.begin(), order.end()));
  } else {
    for (int k = 0; k < n_perms; ++k) perms.push_back(perm_rng.permutation(n));
  }

  ShapleyVector xi;
  xi.credits.assign(static_cast<std::size_t>(n), 0.0);
  // Exhaustive mode evaluates one realized game (all permutations share the
  // same noise draw) so it reproduces the exact Shapley value of that game.
  // Monte Carlo mode redraws the injected noise per sampled permutation: the
  // estimate then averages independent realizations and its error shrinks
  // with n_perms instead of being floored by a single draw.
  std::unique_ptr<CoalitionEvaluator> shared;
  if (exhaustive) shared = std::make_unique<CoalitionEvaluator>(task, beta, seed);
  for (std::size_t k = 0; k < perms.size(); ++k) {
    std::unique_ptr<CoalitionEvaluator> fresh;
    CoalitionEvaluator* ev = shared.get();
    if (!ev) {
      fresh = std::make_unique<CoalitionEvaluator>(
          task, beta, derive_seed(seed, "traj.perm.noise", k));
      ev = fresh.get();
    }
    Mask built = 0;
    for (int agent : perms[k]) {
      const Mask with = built | (Mask{1} << agent);
      xi.credits[static_cast<std::size_t>(agent)] += ev->value(with) - ev->value(built);
      built = with;
    }
  }
  for (double& c : xi.credits) c /= static_cast<double>(perms.size());
  return xi;
}

TrackTable synthetic_tracks(const SyntheticTrajConfig& cfg, std::uint64_t seed) {
  if (cfg.n_agents < 1 || cfg.points_per_track < 1) {
    throw ConfigError("synthetic_tracks: n_agents and points_per_track must be >= 1");
  }
  Rng rng(seed);
  const std::size_t n = static_cast<std::size_t>(cfg.n_agents);
  const std::size_t t_len = static_cast<std::size_t>(cfg.points_per_track);

  std::vector<double> radius(n), phase(n), omega(n), wiggle_phase(n);
  for (std::size_t a = 0; a < n; ++a) {
    // The clean geometry is deterministic: radii spread evenly across the
    // jitter band and angular speeds across a tight 4% band, entry phases
    // equally spaced with a small random offset.  Staggered position and
    // velocity scales recover from injected noise at staggered precision
    // levels, which grades the left side of the credit-versus-beta curve;
    // keeping the layout fixed means different seeds reproduce the same
    // information-scale structure and differ only in measurement noise.
    const double spread =
        n > 1 ? 2.0 * static_cast<double>(a) / static_cast<double>(n - 1) - 1.0
              : 0.0;
    radius[a] = cfg.ring_radius + cfg.radius_jitter * spread;
    phase[a] = 2.0 * std::numbers::pi * static_cast<double>(a) /
                   static_cast<double>(n) +
               0.5 * (rng.uniform() - 0.5);
    omega[a] = cfg.angular_speed * (1.0 + 0.02 * spread);
    wiggle_phase[a] = rng.uniform() * 2.0 * std::numbers::pi;
  }

  // Clean kinematics first, then the centroid pull, then measurement noise.
  // The radial wiggle is a slow chirp (its frequency drifts upward along the
  // track).  A chirp is not the solution of any fixed linear recurrence, so a
  // time-invariant linear predictor cannot absorb it: it behaves as a
  // deterministic, reproducible residual floor on the targets in addition to
  // the random measurement noise.
  std::vector<std::vector<double>> px(n, std::vector<double>(t_len));
  std::vector<std::vector<double>> py(n, std::vector<double>(t_len));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t t = 0; t < t_len; ++t) {
      const double tt = static_cast<double>(t);
      const double r = radius[a] + cfg.curve_amp *
                                       std::sin(0.9 * tt + 0.01 * tt * tt +
                                                wiggle_phase[a]);
      const double ang = omega[a] * tt + phase[a];
      px[a][t] = r * std::cos(ang);
      py[a][t] = r * std::sin(ang);
    }
  }

  TrackTable table;
  for (std::size_t a = 0; a < n; ++a) {
    Track track;
    track.id = "agent_" + std::to_string(a);
    track.points.reserve(t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
      double cx = 0.0;
      double cy = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        cx += px[b][t];
        cy += py[b][t];
      }
      cx /= static_cast<double>(n);
      cy /= static_cast<double>(n);
      TrackPoint p;
      p.lon = px[a][t] + cfg.coupling * (cx - px[a][t]) +
              cfg.noise_floor * rng.gaussian();
      p.lat = py[a][t] + cfg.coupling * (cy - py[a][t]) +
              cfg.noise_floor * rng.gaussian();
      p.time = static_cast<double>(t);
      track.points.push_back(p);
    }
    table.tracks.push_back(std::move(track));
  }
  return table;
}

TrajTask synthetic_task(const SyntheticTrajConfig& cfg, std::uint64_t seed) {
  return split_by_agent(make_samples(synthetic_tracks(cfg, seed)));
}

SweepResult run_inverted_u_sweep(const TrajTask& task,
                                 const std::vector<double>& betas, int runs,
                                 std::uint64_t seed, int n_perms) {
  if (betas.empty()) throw ConfigError("run_inverted_u_sweep: empty beta grid");
  if (runs < 1) throw ConfigError("run_inverted_u_sweep: runs must be >= 1");

  const Mask full = full_coalition(static_cast<int>(task.agents.size()));
  SweepResult result;
  std::vector<std::pair<double, double>> fit_points;
  for (std::size_t b = 0; b < betas.size(); ++b) {
    std::vector<double> credits(static_cast<std::size_t>(runs));
    double mae_sum = 0.0;
    for (int r = 0; r < runs; ++r) {
      // Same stream for every beta at a given run index (the injected noise is
      // the same unit draws scaled by 1/sqrt(beta)): run effects are then
      // common across the grid and cancel out of the fitted curve shape,
      // while runs stay independent of each other.
      const std::uint64_t cell_seed =
          derive_seed(seed, "traj.sweep", static_cast<std::uint64_t>(r));
      const ShapleyVector xi = shapley_credit(task, betas[b], n_perms, cell_seed);
      double mean = 0.0;
      for (double c : xi.credits) mean += c;
      mean /= static_cast<double>(xi.credits.size());
      credits[static_cast<std::size_t>(r)] = mean;
      mae_sum += -coalition_value(task, full, betas[b], cell_seed);
    }
    SweepRecord rec;
    rec.beta = betas[b];
    for (double c : credits) rec.credit_mean += c;
    rec.credit_mean /= static_cast<double>(credits.size());
    if (credits.size() > 1) {
      double ss = 0.0;
      for (double c : credits) ss += (c - rec.credit_mean) * (c - rec.credit_mean);
      rec.credit_std = std::sqrt(ss / static_cast<double>(credits.size() - 1));
    }
    rec.mae_mean = mae_sum / static_cast<double>(runs);
    result.records.push_back(rec);
    fit_points.emplace_back(rec.beta, rec.credit_mean);
  }
  result.fit = fit_quadratic(fit_points);
  result.has_peak = result.fit.a < 0.0;
  if (result.has_peak) {
    result.peak_beta = -result.fit.b / (2.0 * result.fit.a);
  }
  return result;
}

namespace {

TrajApcResult apc_training_loop(const TrajTask& task, const ApcConfig& apc_cfg,
                                int epochs, std::uint64_t seed, ApcState state,
                                int first_epoch, int n_perms) {
  if (epochs < 1) throw ConfigError("run_apc_training: epochs must be >= 1");
  const Mask full = full_coalition(static_cast<int>(task.agents.size()));
  TrajApcResult result;
  result.trajectory.reserve(static_cast<std::size_t>(epochs));
  for (int k = 0; k < epochs; ++k) {
    const int epoch = first_epoch + k;
    const std::uint64_t epoch_seed =
        derive_seed(seed, "traj.apc", static_cast<std::uint64_t>(epoch));
    const double beta = state.beta;
    const ShapleyVector xi = shapley_credit(task, beta, n_perms, epoch_seed);
    double credit = 0.0;
    for (double c : xi.credits) credit += c;
    credit /= static_cast<double>(xi.credits.size());
    const double epoch_mae = -coalition_value(task, full, beta, epoch_seed);
    result.trajectory.push_back(TrajApcPoint{epoch, beta, credit, epoch_mae});
    state = apc_step(std::move(state), credit, apc_cfg);
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace

TrajApcResult run_apc_training(const TrajTask& task, const ApcConfig& apc_cfg,
                               int epochs, std::uint64_t seed, double beta0,
                               int n_perms) {
  ApcState state = make_apc_state(
      beta0, derive_seed(seed, "traj.apc.controller", 0), apc_cfg);
  return apc_training_loop(task, apc_cfg, epochs, seed, std::move(state), 1,
                           n_perms);
}

TrajApcResult continue_apc_training(const TrajTask& task,
                                    const ApcConfig& apc_cfg, int epochs,
                                    std::uint64_t seed, ApcState state,
                                    int first_epoch, int n_perms) {
  return apc_training_loop(task, apc_cfg, epochs, seed, std::move(state),
                           first_epoch, n_perms);
}

}  // namespace coopfe
