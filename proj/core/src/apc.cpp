#include "coopfe/apc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "coopfe/errors.hpp"

namespace coopfe {

namespace {

void check_config(const ApcConfig& c) {
  if (!(c.beta_min > 0.0 && c.beta_min < c.beta_max)) {
    throw ConfigError("apc: require 0 < beta_min < beta_max");
  }
  if (!(c.eta > 0.0)) throw ConfigError("apc: eta must be > 0");
  if (c.window_len < 3) throw ConfigError("apc: window_len must be >= 3");
  if (c.update_period < 1) throw ConfigError("apc: update_period must be >= 1");
}

double clamp_beta(double beta, const ApcConfig& c) {
  return std::clamp(beta, c.beta_min, c.beta_max);
}

}  // namespace

ApcState make_apc_state(double beta0, std::uint64_t seed,
                        const ApcConfig& config) {
  check_config(config);
  ApcState s;
  s.beta = clamp_beta(beta0, config);
  s.epoch = 0;
  s.rng = Rng(seed);
  return s;
}

QuadraticFit fit_quadratic(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) {
    throw ConfigError("fit_quadratic: need at least 3 points, got " +
                      std::to_string(points.size()));
  }
  Eigen::Matrix3d xtx = Eigen::Matrix3d::Zero();
  Eigen::Vector3d xty = Eigen::Vector3d::Zero();
  for (const auto& [beta, credit] : points) {
    const Eigen::Vector3d row(beta * beta, beta, 1.0);
    xtx += row * row.transpose();
    xty += row * credit;
  }
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(xtx);
  if (!lu.isInvertible()) {
    throw SingularFitError(
        "fit_quadratic: design matrix is singular (need >= 3 distinct beta "
        "values)");
  }
  const Eigen::Vector3d coef = lu.solve(xty);

  QuadraticFit fit;
  fit.a = coef(0);
  fit.b = coef(1);
  fit.c = coef(2);

  double mean = 0.0;
  for (const auto& p : points) mean += p.second;
  mean /= static_cast<double>(points.size());
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (const auto& [beta, credit] : points) {
    const double pred = fit.a * beta * beta + fit.b * beta + fit.c;
    ss_res += (credit - pred) * (credit - pred);
    ss_tot += (credit - mean) * (credit - mean);
  }
  fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

ApcState apc_step(ApcState state, double credit, const ApcConfig& config) {
  check_config(config);

  double stored = credit;
  if (config.smooth_credits) {
    state.recent_raw.push_back(credit);
    if (state.recent_raw.size() > 5) state.recent_raw.pop_front();
    stored = std::accumulate(state.recent_raw.begin(), state.recent_raw.end(),
                             0.0) /
             static_cast<double>(state.recent_raw.size());
  }
  state.buffer.emplace_back(state.beta, stored);
  while (state.buffer.size() > static_cast<std::size_t>(config.window_len)) {
    state.buffer.pop_front();
  }
  state.epoch += 1;

  if (state.epoch % config.update_period != 0) return state;

  // Select the fit subset: the most recent fit_window entries, or all.
  std::vector<std::pair<double, double>> pts(state.buffer.begin(),
                                             state.buffer.end());
  if (config.fit_window > 0 &&
      pts.size() > static_cast<std::size_t>(config.fit_window)) {
    pts.erase(pts.begin(),
              pts.end() - static_cast<std::ptrdiff_t>(config.fit_window));
  }

  bool explored = true;
  if (pts.size() >= 3) {
    try {
      const QuadraticFit fit = fit_quadratic(pts);
      if (fit.a < 0.0) {
        state.beta =
            clamp_beta(state.beta + config.eta * (2.0 * fit.a * state.beta + fit.b),
                       config);
        explored = false;
      }
    } catch (const SingularFitError&) {
      // Fewer than 3 distinct betas: no curvature information, explore.
    }
  }
  if (explored) {
    state.beta = clamp_beta(
        state.beta + config.explore_scale * (state.rng.uniform() - 0.5), config);
  }
  return state;
}

ApcRunResult run_apc_on_oracle(
    const std::function<double(double beta, int epoch)>& credit_fn,
    const ApcConfig& config, int epochs, double beta0, std::uint64_t seed) {
  ApcRunResult result;
  result.final_state = make_apc_state(beta0, seed, config);
  result.trajectory.reserve(static_cast<std::size_t>(epochs));
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    const double beta = result.final_state.beta;
    const double credit = credit_fn(beta, epoch);
    result.trajectory.push_back(ApcTrajectoryPoint{epoch, beta, credit});
    result.final_state = apc_step(std::move(result.final_state), credit, config);
  }
  return result;
}

}  // namespace coopfe
