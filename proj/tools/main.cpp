// Command-line front end for the cooperative free-energy experiments.
// Every subcommand resolves an output directory (--out beats the
// COOPFE_OUT_DIR environment variable, which beats ./out/<subcommand>),
// writes a run manifest there first and then its result CSVs, and prints a
// one-line summary.  Exit codes: 0 success, 1 a checked property failed,
// 2 usage, 3 data/schema, 4 config, 5 numerical.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "coopfe/errors.hpp"
#include "coopfe/experiments.hpp"

namespace {

std::string resolve_out(const std::string& cli_out, const char* sub) {
  if (!cli_out.empty()) return cli_out;
  if (const char* env = std::getenv("COOPFE_OUT_DIR")) {
    if (*env != '\0') return std::string(env) + "/" + sub;
  }
  return std::string("out/") + sub;
}

void add_config_file(CLI::App* sub) {
  sub->set_config("--config", "",
                  "Read options from a key=value file (command line wins)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative free-energy toolkit: coalition credit, precision "
               "sweeps and the adaptive precision controller"};
  app.set_version_flag("--version", "coopfe 0.1.0");
  app.require_subcommand(1);

  int rc = 0;

  // --- sweep ---------------------------------------------------------------
  coopfe::SweepOptions sweep;
  std::string sweep_out;
  bool sweep_force_synth = false;
  {
    CLI::App* sub = app.add_subcommand(
        "sweep", "Credit-vs-precision sweep on the supervised task");
    add_config_file(sub);
    sub->add_option("--seed", sweep.seed, "Master seed")->capture_default_str();
    sub->add_option("--out", sweep_out, "Output directory");
    sub->add_option("--dataset", sweep.dataset_path,
                    "Track CSV (track_id,type,lon,lat,time)");
    sub->add_flag("--synthetic", sweep_force_synth,
                  "Use the synthetic task even when --dataset is given");
    sub->add_option("--betas", sweep.betas,
                    "Precision grid (default 0.5,1.0,...,5.0)")
        ->delimiter(',');
    sub->add_option("--runs", sweep.runs, "Repetitions per beta")
        ->capture_default_str();
    sub->add_option("--perms", sweep.n_perms,
                    "Permutations per credit estimate")
        ->capture_default_str();
    sub->add_option("--agents", sweep.max_agents,
                    "Max tracks kept from a dataset")
        ->capture_default_str();
    sub->add_option("--noise-floor", sweep.synth.noise_floor,
                    "Synthetic measurement-noise std")
        ->capture_default_str();
    sub->add_option("--synth-points", sweep.synth.points_per_track,
                    "Synthetic track length")
        ->capture_default_str();
    sub->add_option("--curve-amp", sweep.synth.curve_amp,
                    "Synthetic radial-wiggle amplitude")
        ->capture_default_str();
    sub->add_option("--coupling", sweep.synth.coupling,
                    "Synthetic centroid-pull strength")
        ->capture_default_str();
    sub->add_option("--synth-agents", sweep.synth.n_agents,
                    "Synthetic agent count")
        ->capture_default_str();
    sub->add_option("--angular-speed", sweep.synth.angular_speed,
                    "Synthetic angular speed (rad per step)")
        ->capture_default_str();
    sub->add_option("--radius-jitter", sweep.synth.radius_jitter,
                    "Synthetic per-agent radius jitter")
        ->capture_default_str();
    sub->add_option("--ring-radius", sweep.synth.ring_radius,
                    "Synthetic mean ring radius")
        ->capture_default_str();
    sub->callback([&] {
      sweep.out_dir = resolve_out(sweep_out, "sweep");
      sweep.synthetic = sweep.dataset_path.empty() || sweep_force_synth;
      const coopfe::ExperimentSummary s = coopfe::run_sweep_experiment(sweep);
      std::cout << s.line << "\n";
      if (!s.ok) rc = 1;
    });
  }

  // --- apc-run ---------------------------------------------------------------
  coopfe::ApcRunOptions apc;
  std::string apc_out;
  bool apc_force_synth = false;
  {
    CLI::App* sub = app.add_subcommand(
        "apc-run", "Closed-loop precision-controller training");
    add_config_file(sub);
    sub->add_option("--seed", apc.seed, "Master seed")->capture_default_str();
    sub->add_option("--out", apc_out, "Output directory");
    sub->add_option("--dataset", apc.dataset_path, "Track CSV");
    sub->add_flag("--synthetic", apc_force_synth,
                  "Use the synthetic task even when --dataset is given");
    sub->add_option("--epochs", apc.epochs, "Training epochs")
        ->capture_default_str();
    sub->add_option("--beta0", apc.beta0, "Initial precision")
        ->capture_default_str();
    sub->add_option("--perms", apc.n_perms, "Permutations per credit estimate")
        ->capture_default_str();
    sub->add_option("--agents", apc.max_agents,
                    "Max tracks kept from a dataset")
        ->capture_default_str();
    sub->add_flag("--baselines", apc.baselines,
                  "Also run fixed-beta (0.5, 2.0, 5.0) and random-beta "
                  "baselines under the same seeds");
    sub->add_flag("--shift", apc.noise_shift,
                  "Double the synthetic measurement noise at mid-run");
    sub->add_option("--eta", apc.apc.eta, "Controller learning rate")
        ->capture_default_str();
    sub->add_option("--update-period", apc.apc.update_period,
                    "Epochs between controller updates")
        ->capture_default_str();
    sub->add_option("--beta-min", apc.apc.beta_min, "Clamp lower bound")
        ->capture_default_str();
    sub->add_option("--beta-max", apc.apc.beta_max, "Clamp upper bound")
        ->capture_default_str();
    sub->add_option("--explore", apc.apc.explore_scale,
                    "Exploration kick scale")
        ->capture_default_str();
    sub->add_option("--noise-floor", apc.synth.noise_floor,
                    "Synthetic measurement-noise std")
        ->capture_default_str();
    sub->add_option("--synth-points", apc.synth.points_per_track,
                    "Synthetic track length")
        ->capture_default_str();
    sub->add_option("--curve-amp", apc.synth.curve_amp,
                    "Synthetic radial-wiggle amplitude")
        ->capture_default_str();
    sub->add_option("--coupling", apc.synth.coupling,
                    "Synthetic centroid-pull strength")
        ->capture_default_str();
    sub->add_option("--synth-agents", apc.synth.n_agents,
                    "Synthetic agent count")
        ->capture_default_str();
    sub->add_option("--angular-speed", apc.synth.angular_speed,
                    "Synthetic angular speed (rad per step)")
        ->capture_default_str();
    sub->add_option("--radius-jitter", apc.synth.radius_jitter,
                    "Synthetic per-agent radius jitter")
        ->capture_default_str();
    sub->callback([&] {
      apc.out_dir = resolve_out(apc_out, "apc");
      apc.synthetic = apc.dataset_path.empty() || apc_force_synth;
      const coopfe::ExperimentSummary s = coopfe::run_apc_experiment(apc);
      std::cout << s.line << "\n";
      if (!s.ok) rc = 1;
    });
  }

  // --- vicsek-sweep ----------------------------------------------------------
  coopfe::VicsekSweepOptions vsweep;
  std::string vsweep_out;
  {
    CLI::App* sub = app.add_subcommand(
        "vicsek-sweep", "Polarisation-vs-precision sweep of the flocking model");
    add_config_file(sub);
    sub->add_option("--seed", vsweep.seed, "Master seed")->capture_default_str();
    sub->add_option("--out", vsweep_out, "Output directory");
    sub->add_option("--betas", vsweep.betas,
                    "Precision grid (default 1,2,...,14)")
        ->delimiter(',');
    sub->add_option("--nu", vsweep.nu, "Intrinsic angular noise std")
        ->capture_default_str();
    sub->add_option("--episodes", vsweep.episodes_per_beta,
                    "Episodes per beta")
        ->capture_default_str();
    sub->add_option("--agents", vsweep.flock.n_agents, "Flock size")
        ->capture_default_str();
    sub->add_option("--steps", vsweep.flock.steps_per_episode,
                    "Steps per episode")
        ->capture_default_str();
    sub->add_option("--warmup", vsweep.flock.warmup_steps,
                    "Warm-up steps excluded from the credit")
        ->capture_default_str();
    sub->callback([&] {
      vsweep.out_dir = resolve_out(vsweep_out, "vicsek_sweep");
      const coopfe::ExperimentSummary s =
          coopfe::run_vicsek_sweep_experiment(vsweep);
      std::cout << s.line << "\n";
      if (!s.ok) rc = 1;
    });
  }

  // --- vicsek-apc ------------------------------------------------------------
  coopfe::VicsekApcOptions vapc;
  std::string vapc_out;
  {
    CLI::App* sub = app.add_subcommand(
        "vicsek-apc",
        "Precision controller on the flocking model under a noise ramp");
    add_config_file(sub);
    sub->add_option("--seed", vapc.seed, "Master seed")->capture_default_str();
    sub->add_option("--out", vapc_out, "Output directory");
    sub->add_option("--episodes", vapc.episodes, "Episodes to run")
        ->capture_default_str();
    sub->add_option("--beta0", vapc.beta0, "Initial precision")
        ->capture_default_str();
    sub->add_option("--nu-start", vapc.schedule.nu_start,
                    "Intrinsic noise at episode 0")
        ->capture_default_str();
    sub->add_option("--nu-end", vapc.schedule.nu_end,
                    "Intrinsic noise at the end of the ramp")
        ->capture_default_str();
    sub->add_option("--eta", vapc.apc.eta, "Controller learning rate")
        ->capture_default_str();
    sub->add_option("--beta-min", vapc.apc.beta_min, "Clamp lower bound")
        ->capture_default_str();
    sub->add_option("--beta-max", vapc.apc.beta_max, "Clamp upper bound")
        ->capture_default_str();
    sub->add_option("--explore", vapc.apc.explore_scale,
                    "Exploration kick scale")
        ->capture_default_str();
    sub->add_flag("--baselines", vapc.baselines,
                  "Also run fixed-beta baselines under the same schedule");
    sub->callback([&] {
      vapc.out_dir = resolve_out(vapc_out, "vicsek_apc");
      vapc.schedule.episodes = vapc.episodes;
      const coopfe::ExperimentSummary s =
          coopfe::run_vicsek_apc_experiment(vapc);
      std::cout << s.line << "\n";
      if (!s.ok) rc = 1;
    });
  }

  // --- marl ------------------------------------------------------------------
  coopfe::MarlOptions marl;
  std::string marl_out;
  bool marl_force_synth = false;
  {
    CLI::App* sub = app.add_subcommand(
        "marl", "Q-learning trajectory followers under five precision "
                "strategies");
    add_config_file(sub);
    sub->add_option("--seed", marl.seed, "Master seed")->capture_default_str();
    sub->add_option("--out", marl_out, "Output directory");
    sub->add_option("--dataset", marl.dataset_path,
                    "Track CSV for reference paths");
    sub->add_flag("--synthetic", marl_force_synth,
                  "Use synthetic reference paths even when --dataset is given");
    sub->add_option("--episodes", marl.episodes, "Episodes per run")
        ->capture_default_str();
    sub->add_option("--seeds", marl.n_seeds, "Independent runs per strategy")
        ->capture_default_str();
    sub->add_option("--beta-star", marl.beta_star,
                    "Best fixed precision (from a prior sweep)")
        ->capture_default_str();
    sub->add_option("--agents", marl.marl.n_agents, "Number of agents")
        ->capture_default_str();
    sub->add_option("--episode-len", marl.marl.episode_len, "Steps per episode")
        ->capture_default_str();
    sub->add_option("--track-points", marl.track_points,
                    "Synthetic reference-path length")
        ->capture_default_str();
    sub->add_option("--beta-min", marl.apc.beta_min, "Clamp lower bound")
        ->capture_default_str();
    sub->add_option("--beta-max", marl.apc.beta_max, "Clamp upper bound")
        ->capture_default_str();
    sub->add_option("--eta", marl.apc.eta, "Controller learning rate")
        ->capture_default_str();
    sub->callback([&] {
      marl.out_dir = resolve_out(marl_out, "marl");
      marl.synthetic = marl.dataset_path.empty() || marl_force_synth;
      const coopfe::ExperimentSummary s = coopfe::run_marl_experiment_cmd(marl);
      std::cout << s.line << "\n";
      if (!s.ok) rc = 1;
    });
  }

  // --- nash-check ------------------------------------------------------------
  coopfe::NashCheckOptions nash;
  std::string nash_out;
  {
    CLI::App* sub = app.add_subcommand(
        "nash-check",
        "Deviation-gain check of the Gibbs coalition mixture on random "
        "common-interest games");
    add_config_file(sub);
    sub->add_option("--seed", nash.seed, "Master seed")->capture_default_str();
    sub->add_option("--out", nash_out, "Output directory");
    sub->add_option("--players", nash.players, "Players per game (<= 4)")
        ->capture_default_str();
    sub->add_option("--actions", nash.actions, "Actions per player (<= 4)")
        ->capture_default_str();
    sub->add_option("--games", nash.games, "Number of random games")
        ->capture_default_str();
    sub->add_option("--beta", nash.betas,
                    "Precision values to check (default 1,2,5,10)")
        ->delimiter(',');
    sub->callback([&] {
      nash.out_dir = resolve_out(nash_out, "nash");
      const coopfe::ExperimentSummary s =
          coopfe::run_nash_check_experiment(nash);
      std::cout << s.line << "\n";
      if (!s.ok) rc = 1;
    });
  }

  // --- credit-bench ----------------------------------------------------------
  coopfe::CreditBenchOptions bench;
  std::string bench_out;
  bool no_noise_agent = false;
  {
    CLI::App* sub = app.add_subcommand(
        "credit-bench",
        "Compare uniform / difference / permutation-Shapley / dividend "
        "credits as sample weights");
    add_config_file(sub);
    sub->add_option("--seed", bench.seed, "Master seed")->capture_default_str();
    sub->add_option("--out", bench_out, "Output directory");
    sub->add_option("--epochs", bench.bench.epochs,
                    "Credit re-estimation rounds")
        ->capture_default_str();
    sub->add_option("--beta", bench.bench.beta, "Observation precision")
        ->capture_default_str();
    sub->add_option("--episodes-per-coalition",
                    bench.bench.episodes_per_coalition,
                    "Value-estimation repeats per coalition")
        ->capture_default_str();
    sub->add_option("--perms", bench.bench.n_perms,
                    "Permutations for the Shapley method")
        ->capture_default_str();
    sub->add_option("--floor", bench.bench.weight_floor,
                    "Sample-weight floor")
        ->capture_default_str();
    sub->add_flag("--no-noise-agent", no_noise_agent,
                  "Do not append the pure-noise agent");
    sub->add_option("--noise-agent-scale", bench.noise_agent_scale,
                    "Std of the pure-noise agent's track")
        ->capture_default_str();
    sub->callback([&] {
      bench.out_dir = resolve_out(bench_out, "credit_bench");
      bench.add_noise_agent = !no_noise_agent;
      const coopfe::ExperimentSummary s =
          coopfe::run_credit_bench_experiment(bench);
      std::cout << s.line << "\n";
      if (!s.ok) rc = 1;
    });
  }

  // --- selftest ----------------------------------------------------------------
  std::uint64_t selftest_seed = 1;
  {
    CLI::App* sub = app.add_subcommand(
        "selftest", "Fast invariant suite across the library");
    sub->add_option("--seed", selftest_seed, "Master seed")
        ->capture_default_str();
    sub->callback([&] {
      if (!coopfe::run_selftest(std::cout, selftest_seed)) rc = 1;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const coopfe::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 3;
  } catch (const coopfe::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const coopfe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 4;
  } catch (const coopfe::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
