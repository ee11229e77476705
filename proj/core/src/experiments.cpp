#include "coopfe/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "coopfe/coalition.hpp"
#include "coopfe/csv.hpp"
#include "coopfe/errors.hpp"
#include "coopfe/games.hpp"
#include "coopfe/gibbs.hpp"
#include "coopfe/meanfield.hpp"
#include "coopfe/rng.hpp"

namespace coopfe {

namespace fs = std::filesystem;

namespace {

using KV = std::vector<std::pair<std::string, std::string>>;

void put(KV& kv, const std::string& k, const std::string& v) {
  kv.emplace_back(k, v);
}
void put(KV& kv, const std::string& k, const char* v) { kv.emplace_back(k, v); }
void put(KV& kv, const std::string& k, double v) {
  kv.emplace_back(k, format_double(v));
}
void put(KV& kv, const std::string& k, int v) {
  kv.emplace_back(k, std::to_string(v));
}
void put(KV& kv, const std::string& k, std::uint64_t v) {
  kv.emplace_back(k, std::to_string(v));
}
void put(KV& kv, const std::string& k, bool v) {
  kv.emplace_back(k, v ? "true" : "false");
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += format_double(xs[i]);
  }
  return out;
}

// Short human-readable number for summary lines (CSVs use format_double).
std::string g4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string iso_utc_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string path_under(const std::string& out_dir, const std::string& name) {
  return (fs::path(out_dir) / name).string();
}

void put_synth(KV& kv, const SyntheticTrajConfig& c) {
  put(kv, "synth.n_agents", c.n_agents);
  put(kv, "synth.points_per_track", c.points_per_track);
  put(kv, "synth.ring_radius", c.ring_radius);
  put(kv, "synth.radius_jitter", c.radius_jitter);
  put(kv, "synth.angular_speed", c.angular_speed);
  put(kv, "synth.curve_amp", c.curve_amp);
  put(kv, "synth.coupling", c.coupling);
  put(kv, "synth.noise_floor", c.noise_floor);
}

void put_apc(KV& kv, const ApcConfig& c) {
  put(kv, "apc.eta", c.eta);
  put(kv, "apc.window_len", c.window_len);
  put(kv, "apc.update_period", c.update_period);
  put(kv, "apc.beta_min", c.beta_min);
  put(kv, "apc.beta_max", c.beta_max);
  put(kv, "apc.explore_scale", c.explore_scale);
  put(kv, "apc.smooth_credits", c.smooth_credits);
  put(kv, "apc.fit_window", c.fit_window);
}

std::vector<std::vector<std::string>> apc_rows(const TrajApcResult& res) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(res.trajectory.size());
  for (const TrajApcPoint& p : res.trajectory) {
    rows.push_back({std::to_string(p.epoch), format_double(p.beta),
                    format_double(p.credit), format_double(p.mae)});
  }
  return rows;
}

const std::vector<std::string> kApcHeader = {"epoch", "beta", "credit", "mae"};

double mean_tail_credit(const TrajApcResult& res, int tail) {
  const int n = static_cast<int>(res.trajectory.size());
  const int from = std::max(0, n - tail);
  double sum = 0.0;
  for (int i = from; i < n; ++i) sum += res.trajectory[i].credit;
  return n > from ? sum / static_cast<double>(n - from) : 0.0;
}

}  // namespace

std::string write_manifest(const std::string& out_dir, const RunManifest& m) {
  fs::create_directories(out_dir);
  nlohmann::json j;
  j["subcommand"] = m.subcommand;
  j["master_seed"] = m.master_seed;
  j["build"] = "coopfe 0.1.0 / gcc " __VERSION__;
  j["created_utc"] = iso_utc_now();
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : m.config) cfg[k] = v;
  j["config"] = cfg;
  j["outputs"] = m.outputs;
  nlohmann::json seeds = nlohmann::json::object();
  for (const auto& [k, v] : m.derived_seeds) seeds[k] = v;
  j["derived_seeds"] = seeds;

  const std::string path = path_under(out_dir, "run_manifest.json");
  std::ofstream out(path);
  if (!out) throw DataError("write_manifest: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw DataError("write_manifest: write failed for " + path);
  return path;
}

std::vector<double> default_beta_grid() {
  std::vector<double> betas;
  for (int i = 1; i <= 10; ++i) betas.push_back(0.5 * static_cast<double>(i));
  return betas;
}

TrajTask build_traj_task(const std::string& dataset_path, bool synthetic,
                         const SyntheticTrajConfig& synth_cfg,
                         std::uint64_t seed, int max_agents) {
  if (dataset_path.empty() || synthetic) {
    return synthetic_task(synth_cfg, seed);
  }
  LoadReport rep = load_tracks_file(dataset_path);
  if (max_agents > 0 &&
      static_cast<int>(rep.table.tracks.size()) > max_agents) {
    rep.table.tracks.resize(static_cast<std::size_t>(max_agents));
  }
  return split_by_agent(make_samples(rep.table));
}

// ---------------------------------------------------------------------------
// Supervised-task experiments
// ---------------------------------------------------------------------------

ExperimentSummary run_sweep_experiment(const SweepOptions& opt) {
  const std::uint64_t data_seed = derive_seed(opt.seed, "sweep.data", 0);
  const TrajTask task = build_traj_task(opt.dataset_path, opt.synthetic,
                                        opt.synth, data_seed, opt.max_agents);

  RunManifest man;
  man.subcommand = "sweep";
  man.master_seed = opt.seed;
  put(man.config, "dataset",
      opt.dataset_path.empty() ? std::string("<synthetic>") : opt.dataset_path);
  put(man.config, "betas", join(opt.betas));
  put(man.config, "runs", opt.runs);
  put(man.config, "n_perms", opt.n_perms);
  put(man.config, "max_agents", opt.max_agents);
  if (opt.dataset_path.empty()) put_synth(man.config, opt.synth);
  man.outputs = {"sweep.csv"};
  man.derived_seeds = {{"task_data", data_seed}};
  write_manifest(opt.out_dir, man);

  const SweepResult res =
      run_inverted_u_sweep(task, opt.betas, opt.runs, opt.seed, opt.n_perms);
  std::vector<std::vector<std::string>> rows;
  rows.reserve(res.records.size());
  for (const SweepRecord& r : res.records) {
    rows.push_back({format_double(r.beta), format_double(r.credit_mean),
                    format_double(r.credit_std), format_double(r.mae_mean)});
  }
  const std::string csv = path_under(opt.out_dir, "sweep.csv");
  write_csv(csv, {"beta", "credit_mean", "credit_std", "mae_mean"}, rows);

  ExperimentSummary s;
  std::ostringstream os;
  os << "sweep: " << res.records.size() << " betas x " << opt.runs
     << " runs, fit a=" << g4(res.fit.a) << " r2=" << g4(res.fit.r_squared);
  if (res.has_peak) {
    os << " peak_beta=" << g4(res.peak_beta);
  } else {
    os << " (no interior peak)";
  }
  os << " -> " << csv;
  s.line = os.str();
  return s;
}

TrajApcResult run_fixed_beta_training(const TrajTask& task, double beta,
                                      int epochs, std::uint64_t seed,
                                      int n_perms) {
  if (epochs < 1) {
    throw ConfigError("run_fixed_beta_training: epochs must be >= 1");
  }
  if (!(beta > 0.0)) {
    throw ConfigError("run_fixed_beta_training: beta must be > 0");
  }
  const Mask full = full_coalition(static_cast<int>(task.agents.size()));
  TrajApcResult result;
  result.trajectory.reserve(static_cast<std::size_t>(epochs));
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    // Same per-epoch stream as the closed-loop run, so a fixed-beta
    // baseline is the exact counterfactual of an APC run at that beta.
    const std::uint64_t epoch_seed =
        derive_seed(seed, "traj.apc", static_cast<std::uint64_t>(epoch));
    const ShapleyVector xi = shapley_credit(task, beta, n_perms, epoch_seed);
    double credit = 0.0;
    for (double c : xi.credits) credit += c;
    credit /= static_cast<double>(xi.credits.size());
    const double epoch_mae = -coalition_value(task, full, beta, epoch_seed);
    result.trajectory.push_back(TrajApcPoint{epoch, beta, credit, epoch_mae});
  }
  ApcConfig wide;
  wide.beta_min = std::min(wide.beta_min, beta);
  wide.beta_max = std::max(wide.beta_max, beta);
  result.final_state =
      make_apc_state(beta, derive_seed(seed, "traj.apc.controller", 0), wide);
  return result;
}

TrajApcResult run_random_beta_training(const TrajTask& task,
                                       const ApcConfig& apc_cfg, int epochs,
                                       std::uint64_t seed, int n_perms) {
  if (epochs < 1) {
    throw ConfigError("run_random_beta_training: epochs must be >= 1");
  }
  const Mask full = full_coalition(static_cast<int>(task.agents.size()));
  Rng rng(derive_seed(seed, "traj.random_beta", 0));
  const auto draw = [&]() {
    return apc_cfg.beta_min +
           (apc_cfg.beta_max - apc_cfg.beta_min) * rng.uniform();
  };
  double beta = draw();
  TrajApcResult result;
  result.trajectory.reserve(static_cast<std::size_t>(epochs));
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    // Redraw on the controller's cadence: fresh beta whenever an APC run
    // would have just applied an update.
    if (epoch > 1 && (epoch - 1) % apc_cfg.update_period == 0) beta = draw();
    const std::uint64_t epoch_seed =
        derive_seed(seed, "traj.apc", static_cast<std::uint64_t>(epoch));
    const ShapleyVector xi = shapley_credit(task, beta, n_perms, epoch_seed);
    double credit = 0.0;
    for (double c : xi.credits) credit += c;
    credit /= static_cast<double>(xi.credits.size());
    const double epoch_mae = -coalition_value(task, full, beta, epoch_seed);
    result.trajectory.push_back(TrajApcPoint{epoch, beta, credit, epoch_mae});
  }
  result.final_state = make_apc_state(
      beta, derive_seed(seed, "traj.apc.controller", 0), apc_cfg);
  return result;
}

TrajApcResult run_noise_shift_training(const SyntheticTrajConfig& synth_cfg,
                                       const ApcConfig& apc_cfg, int epochs,
                                       std::uint64_t seed, double beta0,
                                       int n_perms) {
  if (epochs < 2) {
    throw ConfigError("run_noise_shift_training: epochs must be >= 2");
  }
  // Same geometry seed for both halves: only the measurement-noise scale
  // changes at the shift, not the underlying paths.
  const std::uint64_t data_seed = derive_seed(seed, "apc.data", 0);
  const TrajTask task_before = synthetic_task(synth_cfg, data_seed);
  SyntheticTrajConfig noisy = synth_cfg;
  noisy.noise_floor *= 2.0;
  const TrajTask task_after = synthetic_task(noisy, data_seed);

  const int half = epochs / 2;
  TrajApcResult result =
      run_apc_training(task_before, apc_cfg, half, seed, beta0, n_perms);
  TrajApcResult rest =
      continue_apc_training(task_after, apc_cfg, epochs - half, seed,
                            std::move(result.final_state), half + 1, n_perms);
  result.trajectory.insert(result.trajectory.end(), rest.trajectory.begin(),
                           rest.trajectory.end());
  result.final_state = std::move(rest.final_state);
  return result;
}

ExperimentSummary run_apc_experiment(const ApcRunOptions& opt) {
  const bool synthetic = opt.dataset_path.empty() || opt.synthetic;
  if (opt.noise_shift && !synthetic) {
    throw ConfigError("apc-run: the mid-run noise shift is only defined for "
                      "the synthetic task");
  }
  const std::uint64_t data_seed = derive_seed(opt.seed, "apc.data", 0);

  RunManifest man;
  man.subcommand = "apc-run";
  man.master_seed = opt.seed;
  put(man.config, "dataset",
      synthetic ? std::string("<synthetic>") : opt.dataset_path);
  put(man.config, "epochs", opt.epochs);
  put(man.config, "beta0", opt.beta0);
  put(man.config, "n_perms", opt.n_perms);
  put(man.config, "max_agents", opt.max_agents);
  put(man.config, "baselines", opt.baselines);
  put(man.config, "noise_shift", opt.noise_shift);
  put_apc(man.config, opt.apc);
  if (synthetic) put_synth(man.config, opt.synth);
  man.derived_seeds = {{"task_data", data_seed}};

  ExperimentSummary s;
  if (opt.noise_shift) {
    man.outputs = {"apc_shift.csv"};
    write_manifest(opt.out_dir, man);
    const TrajApcResult res = run_noise_shift_training(
        opt.synth, opt.apc, opt.epochs, opt.seed, opt.beta0, opt.n_perms);
    const std::string csv = path_under(opt.out_dir, "apc_shift.csv");
    write_csv(csv, kApcHeader, apc_rows(res));

    // Quarter means around the shift: the last quarter before and the last
    // quarter overall.
    const int n = static_cast<int>(res.trajectory.size());
    const int q = std::max(1, n / 4);
    double pre = 0.0, post = 0.0;
    for (int i = n / 2 - q; i < n / 2; ++i) pre += res.trajectory[i].beta;
    for (int i = n - q; i < n; ++i) post += res.trajectory[i].beta;
    pre /= q;
    post /= q;
    std::ostringstream os;
    os << "apc-run (noise shift at epoch " << opt.epochs / 2
       << "): beta quarter-mean " << g4(pre) << " -> " << g4(post) << " -> "
       << csv;
    s.line = os.str();
    return s;
  }

  man.outputs = {"apc.csv"};
  const std::vector<double> fixed_betas = {0.5, 2.0, 5.0};
  if (opt.baselines) {
    for (double b : fixed_betas) {
      char name[48];
      std::snprintf(name, sizeof name, "fixed_%.1f.csv", b);
      man.outputs.push_back(name);
    }
    man.outputs.push_back("random_beta.csv");
  }
  write_manifest(opt.out_dir, man);

  const TrajTask task = build_traj_task(opt.dataset_path, synthetic, opt.synth,
                                        data_seed, opt.max_agents);
  const TrajApcResult res = run_apc_training(task, opt.apc, opt.epochs,
                                             opt.seed, opt.beta0, opt.n_perms);
  const std::string csv = path_under(opt.out_dir, "apc.csv");
  write_csv(csv, kApcHeader, apc_rows(res));

  std::ostringstream os;
  os << "apc-run: " << opt.epochs << " epochs, final beta="
     << g4(res.final_state.beta) << ", final-50 mean credit="
     << g4(mean_tail_credit(res, 50));

  if (opt.baselines) {
    for (double b : fixed_betas) {
      const TrajApcResult base =
          run_fixed_beta_training(task, b, opt.epochs, opt.seed, opt.n_perms);
      char name[48];
      std::snprintf(name, sizeof name, "fixed_%.1f.csv", b);
      write_csv(path_under(opt.out_dir, name), kApcHeader, apc_rows(base));
      os << ", fixed " << g4(b) << ": " << g4(mean_tail_credit(base, 50));
    }
    const TrajApcResult rnd = run_random_beta_training(
        task, opt.apc, opt.epochs, opt.seed, opt.n_perms);
    write_csv(path_under(opt.out_dir, "random_beta.csv"), kApcHeader,
              apc_rows(rnd));
    os << ", random: " << g4(mean_tail_credit(rnd, 50));
  }
  os << " -> " << csv;
  s.line = os.str();
  return s;
}

// ---------------------------------------------------------------------------
// Flocking experiments
// ---------------------------------------------------------------------------

ExperimentSummary run_vicsek_sweep_experiment(const VicsekSweepOptions& opt) {
  RunManifest man;
  man.subcommand = "vicsek-sweep";
  man.master_seed = opt.seed;
  put(man.config, "betas", join(opt.betas));
  put(man.config, "nu", opt.nu);
  put(man.config, "episodes_per_beta", opt.episodes_per_beta);
  put(man.config, "n_agents", opt.flock.n_agents);
  put(man.config, "box_size", opt.flock.box_size);
  put(man.config, "radius", opt.flock.radius);
  put(man.config, "speed", opt.flock.speed);
  put(man.config, "steps_per_episode", opt.flock.steps_per_episode);
  put(man.config, "warmup_steps", opt.flock.warmup_steps);
  man.outputs = {"vicsek_sweep.csv"};
  write_manifest(opt.out_dir, man);

  const std::vector<SweepPoint> points = run_beta_sweep(
      opt.flock, opt.betas, opt.nu, opt.episodes_per_beta, opt.seed);
  std::vector<std::vector<std::string>> rows;
  rows.reserve(points.size());
  double best_phi = -1.0, best_beta = 0.0;
  for (const SweepPoint& p : points) {
    rows.push_back({format_double(p.beta), format_double(p.phi_mean),
                    format_double(p.phi_std)});
    if (p.phi_mean > best_phi) {
      best_phi = p.phi_mean;
      best_beta = p.beta;
    }
  }
  const std::string csv = path_under(opt.out_dir, "vicsek_sweep.csv");
  write_csv(csv, {"beta", "phi_mean", "phi_std"}, rows);

  ExperimentSummary s;
  std::ostringstream os;
  os << "vicsek-sweep: " << points.size() << " betas, best phi="
     << g4(best_phi) << " at beta=" << g4(best_beta) << " -> " << csv;
  s.line = os.str();
  return s;
}

FlockApcResult run_fixed_beta_flock(const FlockConfig& cfg,
                                    const NoiseSchedule& schedule, double beta,
                                    int episodes, std::uint64_t seed) {
  if (episodes < 1) {
    throw ConfigError("run_fixed_beta_flock: episodes must be >= 1");
  }
  FlockApcResult r;
  r.trajectory.reserve(static_cast<std::size_t>(episodes));
  for (int e = 0; e < episodes; ++e) {
    const double nu = schedule.at(e);
    // Same episode streams as run_apc_flock for paired comparisons.
    const double phi = run_episode(
        cfg, beta, nu,
        derive_seed(seed, "vicsek.apc.episode", static_cast<std::uint64_t>(e)));
    r.trajectory.push_back(FlockApcPoint{e + 1, nu, beta, phi});
  }
  r.final_beta = beta;
  return r;
}

namespace {

double mean_tail_phi(const FlockApcResult& res, int tail) {
  const int n = static_cast<int>(res.trajectory.size());
  const int from = std::max(0, n - tail);
  double sum = 0.0;
  for (int i = from; i < n; ++i) sum += res.trajectory[i].phi;
  return n > from ? sum / static_cast<double>(n - from) : 0.0;
}

std::vector<std::vector<std::string>> flock_rows(const FlockApcResult& res) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(res.trajectory.size());
  for (const FlockApcPoint& p : res.trajectory) {
    rows.push_back({std::to_string(p.episode), format_double(p.nu),
                    format_double(p.beta), format_double(p.phi)});
  }
  return rows;
}

}  // namespace

ExperimentSummary run_vicsek_apc_experiment(const VicsekApcOptions& opt) {
  RunManifest man;
  man.subcommand = "vicsek-apc";
  man.master_seed = opt.seed;
  put(man.config, "episodes", opt.episodes);
  put(man.config, "beta0", opt.beta0);
  put(man.config, "nu_start", opt.schedule.nu_start);
  put(man.config, "nu_end", opt.schedule.nu_end);
  put(man.config, "schedule_episodes", opt.schedule.episodes);
  put(man.config, "n_agents", opt.flock.n_agents);
  put(man.config, "box_size", opt.flock.box_size);
  put(man.config, "radius", opt.flock.radius);
  put(man.config, "speed", opt.flock.speed);
  put(man.config, "steps_per_episode", opt.flock.steps_per_episode);
  put(man.config, "warmup_steps", opt.flock.warmup_steps);
  put(man.config, "baselines", opt.baselines);
  if (opt.baselines) put(man.config, "baseline_betas", join(opt.baseline_betas));
  put_apc(man.config, opt.apc);
  man.outputs = {"vicsek_apc.csv"};
  if (opt.baselines) {
    for (double b : opt.baseline_betas) {
      char name[48];
      std::snprintf(name, sizeof name, "vicsek_fixed_%.1f.csv", b);
      man.outputs.push_back(name);
    }
  }
  write_manifest(opt.out_dir, man);

  const std::vector<std::string> header = {"episode", "nu", "beta", "phi"};
  const FlockApcResult res = run_apc_flock(opt.flock, opt.schedule, opt.apc,
                                           opt.episodes, opt.beta0, opt.seed);
  const std::string csv = path_under(opt.out_dir, "vicsek_apc.csv");
  write_csv(csv, header, flock_rows(res));

  ExperimentSummary s;
  std::ostringstream os;
  os << "vicsek-apc: " << opt.episodes << " episodes, final beta="
     << g4(res.final_beta) << ", final-20 mean phi=" << g4(mean_tail_phi(res, 20));
  if (opt.baselines) {
    for (double b : opt.baseline_betas) {
      const FlockApcResult base =
          run_fixed_beta_flock(opt.flock, opt.schedule, b, opt.episodes, opt.seed);
      char name[48];
      std::snprintf(name, sizeof name, "vicsek_fixed_%.1f.csv", b);
      write_csv(path_under(opt.out_dir, name), header, flock_rows(base));
      os << ", fixed " << g4(b) << ": " << g4(mean_tail_phi(base, 20));
    }
  }
  os << " -> " << csv;
  s.line = os.str();
  return s;
}

// ---------------------------------------------------------------------------
// MARL experiment
// ---------------------------------------------------------------------------

ExperimentSummary run_marl_experiment_cmd(const MarlOptions& opt) {
  const std::uint64_t data_seed = derive_seed(opt.seed, "marl.data", 0);
  TrackTable tracks;
  if (opt.dataset_path.empty() || opt.synthetic) {
    tracks = marl_synthetic_tracks(opt.marl.n_agents, opt.track_points,
                                   data_seed);
  } else {
    tracks = load_tracks_file(opt.dataset_path).table;
  }

  RunManifest man;
  man.subcommand = "marl";
  man.master_seed = opt.seed;
  put(man.config, "dataset",
      opt.dataset_path.empty() ? std::string("<synthetic>") : opt.dataset_path);
  put(man.config, "episodes", opt.episodes);
  put(man.config, "n_seeds", opt.n_seeds);
  put(man.config, "beta_star", opt.beta_star);
  put(man.config, "track_points", opt.track_points);
  put(man.config, "n_agents", opt.marl.n_agents);
  put(man.config, "episode_len", opt.marl.episode_len);
  put(man.config, "collision_dist", opt.marl.collision_dist);
  put(man.config, "collision_penalty", opt.marl.collision_penalty);
  put(man.config, "lr", opt.marl.lr);
  put(man.config, "gamma", opt.marl.gamma);
  put(man.config, "epsilon", opt.marl.epsilon);
  put_apc(man.config, opt.apc);
  man.outputs = {"marl.csv"};
  man.derived_seeds = {{"task_data", data_seed}};
  write_manifest(opt.out_dir, man);

  const std::vector<MarlRow> rows_data =
      run_marl_experiment(opt.marl, tracks, opt.beta_star, opt.apc,
                          opt.episodes, opt.n_seeds, opt.seed);
  std::vector<std::vector<std::string>> rows;
  rows.reserve(rows_data.size());
  for (const MarlRow& r : rows_data) {
    rows.push_back({r.strategy, std::to_string(r.seed),
                    std::to_string(r.episode), format_double(r.beta),
                    format_double(r.avg_reward)});
  }
  const std::string csv = path_under(opt.out_dir, "marl.csv");
  write_csv(csv, {"strategy", "seed", "episode", "beta", "avg_reward"}, rows);

  // Final-50-episode mean reward per strategy, pooled over seeds.
  std::map<std::string, std::pair<double, int>> tail;
  const int from = std::max(0, opt.episodes - 50);
  for (const MarlRow& r : rows_data) {
    if (r.episode > from) {
      auto& [sum, n] = tail[r.strategy];
      sum += r.avg_reward;
      n += 1;
    }
  }
  ExperimentSummary s;
  std::ostringstream os;
  os << "marl: " << opt.n_seeds << " seeds x " << opt.episodes
     << " episodes; final-50 mean reward";
  for (const auto& [name, acc] : tail) {
    os << " " << name << "=" << g4(acc.first / std::max(1, acc.second));
  }
  os << " -> " << csv;
  s.line = os.str();
  return s;
}

// ---------------------------------------------------------------------------
// Equilibrium check
// ---------------------------------------------------------------------------

ExperimentSummary run_nash_check_experiment(const NashCheckOptions& opt) {
  if (opt.games < 1) throw ConfigError("nash-check: games must be >= 1");

  RunManifest man;
  man.subcommand = "nash-check";
  man.master_seed = opt.seed;
  put(man.config, "players", opt.players);
  put(man.config, "actions", opt.actions);
  put(man.config, "games", opt.games);
  put(man.config, "betas", join(opt.betas));
  man.outputs = {"nash_check.csv"};
  write_manifest(opt.out_dir, man);

  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<std::size_t>(opt.games) * opt.betas.size());
  double worst_gain = 0.0, worst_bound = 0.0;
  bool ok = true;
  for (int g = 0; g < opt.games; ++g) {
    const NormalFormGame game = random_common_interest_game(
        opt.players, opt.actions,
        derive_seed(opt.seed, "nash.game", static_cast<std::uint64_t>(g)));
    for (double beta : opt.betas) {
      const NashCheckReport rep = verify_eps_nash(game, beta);
      rows.push_back({std::to_string(g), format_double(beta),
                      format_double(rep.max_deviation_gain),
                      format_double(rep.bound)});
      if (rep.max_deviation_gain > rep.bound) ok = false;
      if (rep.max_deviation_gain > worst_gain) {
        worst_gain = rep.max_deviation_gain;
        worst_bound = rep.bound;
      }
    }
  }
  const std::string csv = path_under(opt.out_dir, "nash_check.csv");
  write_csv(csv, {"game", "beta", "max_gain", "bound"}, rows);

  ExperimentSummary s;
  s.ok = ok;
  std::ostringstream os;
  os << "nash-check: " << opt.games << " games x " << opt.betas.size()
     << " betas, worst gain=" << g4(worst_gain) << " (its bound="
     << g4(worst_bound) << ") "
     << (ok ? "all within N ln2 / beta" : "BOUND VIOLATED") << " -> " << csv;
  s.line = os.str();
  return s;
}

// ---------------------------------------------------------------------------
// Credit benchmark
// ---------------------------------------------------------------------------

ExperimentSummary run_credit_bench_experiment(const CreditBenchOptions& opt) {
  const std::uint64_t data_seed = derive_seed(opt.seed, "bench.data", 0);

  RunManifest man;
  man.subcommand = "credit-bench";
  man.master_seed = opt.seed;
  put(man.config, "beta", opt.bench.beta);
  put(man.config, "epochs", opt.bench.epochs);
  put(man.config, "episodes_per_coalition", opt.bench.episodes_per_coalition);
  put(man.config, "n_perms", opt.bench.n_perms);
  put(man.config, "lambda", opt.bench.lambda);
  put(man.config, "weight_floor", opt.bench.weight_floor);
  put(man.config, "add_noise_agent", opt.add_noise_agent);
  put(man.config, "noise_agent_scale", opt.noise_agent_scale);
  put_synth(man.config, opt.synth);
  man.outputs = {"credit_bench.csv", "synergy.csv"};
  man.derived_seeds = {{"task_data", data_seed}};
  write_manifest(opt.out_dir, man);

  TrackTable table = synthetic_tracks(opt.synth, data_seed);
  if (opt.add_noise_agent) {
    table = with_noise_track(std::move(table), opt.synth.points_per_track,
                             opt.noise_agent_scale,
                             derive_seed(opt.seed, "bench.noise_agent", 0));
  }
  const TrajTask task = split_by_agent(make_samples(table));

  const CreditMethod methods[] = {
      CreditMethod::uniform, CreditMethod::difference_rewards,
      CreditMethod::shapley_permutation, CreditMethod::harsanyi};
  std::vector<std::vector<std::string>> rows;
  std::ostringstream os;
  os << "credit-bench: final val MAE";
  for (CreditMethod m : methods) {
    const std::vector<double> curve =
        credit_weighted_training(task, m, opt.bench, opt.seed);
    for (std::size_t e = 0; e < curve.size(); ++e) {
      rows.push_back({to_string(m), std::to_string(e + 1),
                      format_double(curve[e])});
    }
    os << " " << to_string(m) << "=" << g4(curve.back());
  }
  const std::string csv = path_under(opt.out_dir, "credit_bench.csv");
  write_csv(csv, {"method", "epoch", "val_mae"}, rows);

  const RestrictedGame game = estimate_coalition_values(
      task, opt.bench.beta, 3, opt.bench.episodes_per_coalition,
      derive_seed(opt.seed, "bench.synergy", 0));
  const SynergyReport report = synergy_report(game);
  std::vector<std::vector<std::string>> srows;
  srows.reserve(report.entries.size());
  for (const SynergyEntry& e : report.entries) {
    srows.push_back({std::to_string(e.mask), std::to_string(e.order),
                     format_double(e.dividend)});
  }
  const std::string scsv = path_under(opt.out_dir, "synergy.csv");
  write_csv(scsv, {"coalition_mask", "order", "dividend"}, srows);

  if (report.low_sample_warning) {
    os << " [low-sample warning: < 10 episodes per coalition]";
  }
  os << " -> " << csv << ", " << scsv;
  ExperimentSummary s;
  s.line = os.str();
  return s;
}

// ---------------------------------------------------------------------------
// Self-test
// ---------------------------------------------------------------------------

namespace {

struct SelfTest {
  std::ostream& log;
  bool all_ok = true;

  void check(const std::string& name, bool ok, const std::string& detail = "") {
    log << (ok ? "[ok]   " : "[FAIL] ") << name;
    if (!detail.empty()) log << " (" << detail << ")";
    log << "\n";
    all_ok = all_ok && ok;
  }
};

// Uniform Dirichlet draw via normalised exponentials.
std::vector<double> dirichlet_uniform(int n, Rng& rng) {
  std::vector<double> p(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (double& x : p) {
    x = -std::log(1.0 - rng.uniform());
    sum += x;
  }
  for (double& x : p) x /= sum;
  return p;
}

CharacteristicFunction random_charfn(int n, Rng& rng) {
  std::vector<double> v(std::size_t{1} << n, 0.0);
  for (std::size_t c = 1; c < v.size(); ++c) v[c] = 2.0 * rng.uniform() - 1.0;
  return make_characteristic(n, std::move(v));
}

}  // namespace

bool run_selftest(std::ostream& log, std::uint64_t seed) {
  SelfTest t{log};
  Rng rng(derive_seed(seed, "selftest", 0));

  // Moebius / zeta round trip and dividend-based Shapley vs the
  // all-orderings average.
  {
    double max_rt = 0.0, max_shap = 0.0;
    for (int rep = 0; rep < 40; ++rep) {
      const int n = 1 + static_cast<int>(rng.uniform_below(6));
      const CharacteristicFunction v = random_charfn(n, rng);
      const DividendTable d = mobius_dividends(v);
      const CharacteristicFunction back = reconstruct_setfunction(d);
      for (std::size_t c = 0; c < v.values.size(); ++c) {
        max_rt = std::max(max_rt, std::abs(v.values[c] - back.values[c]));
      }
      const ShapleyVector a = shapley_from_dividends(d);
      const ShapleyVector b = shapley_exact(v);
      for (int i = 0; i < n; ++i) {
        max_shap = std::max(max_shap, std::abs(a.credits[i] - b.credits[i]));
      }
    }
    t.check("moebius round trip <= 1e-12", max_rt <= 1e-12, g4(max_rt));
    t.check("dividend shapley == permutation shapley <= 1e-10",
            max_shap <= 1e-10, g4(max_shap));
  }

  // Gibbs minimises the collective free energy, with F* = -ln(Z)/beta.
  {
    double worst_slack = 0.0, worst_fstar = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const int n = 3 + static_cast<int>(rng.uniform_below(2));
      const CharacteristicFunction v = random_charfn(n, rng);
      const double beta = 0.5 + 9.5 * rng.uniform();
      const EnergyTable e = energy_from_values(v, beta);
      const GibbsDistribution g = gibbs_distribution(e);
      const FreeEnergyReport star = collective_free_energy(g.probs, e);
      worst_fstar = std::max(
          worst_fstar,
          std::abs(star.free_energy - (-g.log_partition / beta)));
      for (int k = 0; k < 100; ++k) {
        const std::vector<double> p =
            dirichlet_uniform(static_cast<int>(g.probs.size()), rng);
        const FreeEnergyReport f = collective_free_energy(p, e);
        worst_slack =
            std::max(worst_slack, star.free_energy - f.free_energy);
      }
    }
    t.check("gibbs minimises free energy", worst_slack <= 1e-12,
            "max F* - F = " + g4(worst_slack));
    t.check("F* == -ln(Z)/beta <= 1e-12", worst_fstar <= 1e-12, g4(worst_fstar));
  }

  // Deviation gains from the Gibbs coalition mixture stay within
  // N ln2 / beta on common-interest games.
  {
    bool ok = true;
    double worst_margin = -1e300;
    for (int rep = 0; rep < 20 && ok; ++rep) {
      const int players = 2 + static_cast<int>(rng.uniform_below(2));
      const int actions = 2 + static_cast<int>(rng.uniform_below(2));
      const NormalFormGame g =
          random_common_interest_game(players, actions, rng.next_u64());
      for (double beta : {1.0, 5.0, 10.0}) {
        const NashCheckReport rep2 = verify_eps_nash(g, beta);
        worst_margin = std::max(worst_margin,
                                rep2.max_deviation_gain - rep2.bound);
        if (rep2.max_deviation_gain > rep2.bound) ok = false;
      }
    }
    t.check("gibbs mixture is an eps-nash (eps = N ln2 / beta)", ok,
            "max gain - bound = " + g4(worst_margin));
  }

  // Mean-field fixed point: converged states satisfy their own residual,
  // and attention weights normalise.
  {
    bool residual_ok = true, attention_ok = true;
    int converged = 0;
    for (int rep = 0; rep < 20; ++rep) {
      const int n = 4 + static_cast<int>(rng.uniform_below(5));
      std::vector<double> phi(static_cast<std::size_t>(n));
      std::vector<std::vector<double>> psi(
          static_cast<std::size_t>(n),
          std::vector<double>(static_cast<std::size_t>(n), 0.0));
      for (double& x : phi) x = 2.0 * rng.uniform() - 1.0;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          psi[i][j] = psi[j][i] = 0.6 * (2.0 * rng.uniform() - 1.0);
        }
      }
      const PairwiseEnergyModel m =
          make_pairwise_model(phi, psi, 0.5 + 2.0 * rng.uniform());
      const MeanFieldState st = meanfield_fixed_point(m, 1e-10, 10000);
      if (st.converged) {
        ++converged;
        if (st.residual > 1e-10) residual_ok = false;
      }
      const std::vector<double> w = attention_weights(m, st.q);
      double sum = 0.0;
      for (double x : w) sum += x;
      if (std::abs(sum - 1.0) > 1e-12) attention_ok = false;
    }
    t.check("mean-field converged states satisfy self-consistency",
            residual_ok && converged > 0,
            std::to_string(converged) + "/20 converged");
    t.check("attention weights sum to 1 +- 1e-12", attention_ok);
  }

  // Controller clamp under randomised credits, and exact quadratic
  // recovery.
  {
    ApcConfig cfg;
    ApcState st = make_apc_state(1.0, rng.next_u64(), cfg);
    bool in_range = true;
    for (int k = 0; k < 20000; ++k) {
      st = apc_step(std::move(st), 2.0 * rng.uniform() - 1.0, cfg);
      if (st.beta < cfg.beta_min || st.beta > cfg.beta_max) in_range = false;
    }
    t.check("apc beta stays inside the clamp over 20k random steps", in_range,
            "final beta " + g4(st.beta));

    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 12; ++i) {
      const double b = 0.3 + 0.4 * i;
      pts.emplace_back(b, -(b - 2.0) * (b - 2.0) + 0.7);
    }
    const QuadraticFit fit = fit_quadratic(pts);
    const bool fit_ok = std::abs(fit.a + 1.0) < 1e-9 &&
                        std::abs(fit.b - 4.0) < 1e-9 &&
                        std::abs(fit.c + 3.3) < 1e-9 &&
                        std::abs(fit.r_squared - 1.0) < 1e-12;
    t.check("quadratic fit recovers an exact parabola", fit_ok,
            "a=" + g4(fit.a) + " b=" + g4(fit.b) + " c=" + g4(fit.c));
  }

  // Seed derivation: distinct labelled streams, no collisions across a
  // 100k scan.
  {
    std::set<std::uint64_t> seen;
    bool collision = false;
    for (std::uint64_t cell = 0; cell < 25000 && !collision; ++cell) {
      for (const char* tag : {"a", "b", "traj.apc", "vicsek.sweep"}) {
        if (!seen.insert(derive_seed(seed, tag, cell)).second) {
          collision = true;
        }
      }
    }
    t.check("no derive_seed collisions across 100k (tag, cell) pairs",
            !collision);
  }

  // CSV set-function round trip.
  {
    const CharacteristicFunction v = random_charfn(5, rng);
    const fs::path tmp =
        fs::temp_directory_path() / "coopfe_selftest_setfn.csv";
    write_set_function(tmp.string(), v);
    const CharacteristicFunction back = read_set_function(tmp.string());
    double max_err = 0.0;
    for (std::size_t c = 0; c < v.values.size(); ++c) {
      max_err = std::max(max_err, std::abs(v.values[c] - back.values[c]));
    }
    fs::remove(tmp);
    t.check("set-function csv round trip is exact", max_err == 0.0);
  }

  // Supervised pipeline smoke test: exhaustive permutation credit is
  // efficient (sums to v(full) - v(empty)).
  {
    SyntheticTrajConfig cfg;
    cfg.n_agents = 3;
    cfg.points_per_track = 60;
    const TrajTask task = synthetic_task(cfg, rng.next_u64());
    const double beta = 2.0;
    const std::uint64_t s = rng.next_u64();
    const ShapleyVector xi = shapley_credit(task, beta, 6, s, true);
    double sum = 0.0;
    for (double c : xi.credits) sum += c;
    const double vfull =
        coalition_value(task, full_coalition(3), beta, s);
    t.check("exhaustive permutation credit is efficient",
            std::abs(sum - vfull) <= 1e-9,
            "sum xi - v(full) = " + g4(sum - vfull));
  }

  // Determinism smoke tests for the simulators.
  {
    FlockConfig cfg;
    cfg.n_agents = 40;
    cfg.steps_per_episode = 60;
    cfg.warmup_steps = 20;
    const double a = run_episode(cfg, 6.0, 0.1, 42);
    const double b = run_episode(cfg, 6.0, 0.1, 42);
    t.check("flock episode is deterministic in the seed",
            a == b && a >= 0.0 && a <= 1.0, "phi = " + g4(a));
  }
  {
    MarlConfig cfg;
    cfg.n_agents = 4;
    cfg.episode_len = 40;
    const TrackTable tracks = marl_synthetic_tracks(4, 60, 7);
    const MarlEnv env(cfg, tracks);
    std::vector<QTable> qs1(4), qs2(4);
    const EpisodeResult r1 = run_marl_episode(env, qs1, 2.0, 99, true);
    const EpisodeResult r2 = run_marl_episode(env, qs2, 2.0, 99, true);
    t.check("marl episode is deterministic in the seed",
            r1.team_total == r2.team_total && r1.steps == r2.steps,
            "team total = " + g4(r1.team_total));
  }

  log << (t.all_ok ? "selftest: all checks passed\n"
                   : "selftest: FAILURES above\n");
  return t.all_ok;
}

}  // namespace coopfe
