#include "coopfe/vicsek.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "coopfe/errors.hpp"

namespace coopfe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_config(const FlockConfig& cfg) {
  if (cfg.n_agents < 1 || cfg.box_size <= 0.0 || cfg.radius <= 0.0 ||
      cfg.speed < 0.0 || cfg.steps_per_episode < 1) {
    throw ConfigError("flock: all config fields must be positive");
  }
  if (cfg.radius > cfg.box_size / 2.0) {
    throw ConfigError("flock: radius must be <= box_size / 2");
  }
  if (cfg.warmup_steps < 0 || cfg.warmup_steps >= cfg.steps_per_episode) {
    throw ConfigError("flock: warmup_steps must be in [0, steps_per_episode)");
  }
}

double wrap_angle(double a) {
  double r = std::remainder(a, kTwoPi);  // in [-pi, pi]
  if (r >= std::numbers::pi) r -= kTwoPi;
  return r;
}

double wrap_position(double p, double box) {
  double r = p - box * std::floor(p / box);
  if (r >= box) r -= box;
  if (r < 0.0) r += box;
  return r;
}

// Squared minimum-image distance on the torus.
double torus_dist2(double dx, double dy, double box) {
  dx = std::remainder(dx, box);
  dy = std::remainder(dy, box);
  return dx * dx + dy * dy;
}

// Neighbour lists via uniform grid binning.  Cell edge = box / ncells with
// ncells = floor(box / R) >= 3, so edge >= R and a 3x3 cell neighbourhood
// covers the interaction disc.  Grids coarser than 3x3 would make the
// wrapped neighbourhood visit cells twice, so those fall back to the O(N^2)
// scan.  Each returned list is sorted ascending to pin down the order of
// noise draws.
std::vector<std::vector<int>> neighbour_lists(const FlockState& s,
                                              const FlockConfig& cfg) {
  const int n = cfg.n_agents;
  const double r2 = cfg.radius * cfg.radius;
  std::vector<std::vector<int>> result(static_cast<std::size_t>(n));

  const int ncells = static_cast<int>(std::floor(cfg.box_size / cfg.radius));
  if (ncells < 3) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (torus_dist2(s.x[static_cast<std::size_t>(i)] - s.x[static_cast<std::size_t>(j)],
                        s.y[static_cast<std::size_t>(i)] - s.y[static_cast<std::size_t>(j)],
                        cfg.box_size) <= r2) {
          result[static_cast<std::size_t>(i)].push_back(j);
        }
      }
    }
    return result;
  }

  const double edge = cfg.box_size / ncells;
  std::vector<std::vector<int>> cells(
      static_cast<std::size_t>(ncells) * static_cast<std::size_t>(ncells));
  auto cell_of = [&](double v) {
    int c = static_cast<int>(std::floor(v / edge));
    return std::clamp(c, 0, ncells - 1);
  };
  for (int i = 0; i < n; ++i) {
    const int cx = cell_of(s.x[static_cast<std::size_t>(i)]);
    const int cy = cell_of(s.y[static_cast<std::size_t>(i)]);
    cells[static_cast<std::size_t>(cy * ncells + cx)].push_back(i);
  }

  for (int i = 0; i < n; ++i) {
    const int cx = cell_of(s.x[static_cast<std::size_t>(i)]);
    const int cy = cell_of(s.y[static_cast<std::size_t>(i)]);
    auto& list = result[static_cast<std::size_t>(i)];
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int gx = (cx + dx + ncells) % ncells;
        const int gy = (cy + dy + ncells) % ncells;
        for (int j : cells[static_cast<std::size_t>(gy * ncells + gx)]) {
          if (torus_dist2(s.x[static_cast<std::size_t>(i)] - s.x[static_cast<std::size_t>(j)],
                          s.y[static_cast<std::size_t>(i)] - s.y[static_cast<std::size_t>(j)],
                          cfg.box_size) <= r2) {
            list.push_back(j);
          }
        }
      }
    }
    std::sort(list.begin(), list.end());
  }
  return result;
}

}  // namespace

double NoiseSchedule::at(int episode) const {
  if (nu_start < 0.0 || nu_end < 0.0) {
    throw ConfigError("NoiseSchedule: nu must be >= 0");
  }
  if (episodes <= 1) return nu_end;
  const double t = std::min(1.0, static_cast<double>(episode) /
                                     static_cast<double>(episodes - 1));
  return nu_start + (nu_end - nu_start) * t;
}

FlockState init_flock(const FlockConfig& cfg, std::uint64_t seed) {
  check_config(cfg);
  FlockState s;
  s.rng = Rng(seed);
  const std::size_t n = static_cast<std::size_t>(cfg.n_agents);
  s.x.resize(n);
  s.y.resize(n);
  s.heading.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.x[i] = s.rng.uniform() * cfg.box_size;
    s.y[i] = s.rng.uniform() * cfg.box_size;
    s.heading[i] = wrap_angle((s.rng.uniform() - 0.5) * kTwoPi);
  }
  return s;
}

double polarization(const FlockState& s) {
  double cx = 0.0;
  double cy = 0.0;
  for (double h : s.heading) {
    cx += std::cos(h);
    cy += std::sin(h);
  }
  return std::hypot(cx, cy) / static_cast<double>(s.heading.size());
}

FlockState step_flock(FlockState s, const FlockConfig& cfg, double beta,
                      double nu) {
  check_config(cfg);
  if (!(beta > 0.0)) throw ConfigError("step_flock: beta must be > 0");
  if (nu < 0.0) throw ConfigError("step_flock: nu must be >= 0");

  const auto neighbours = neighbour_lists(s, cfg);
  const double sensory_std = 1.0 / std::sqrt(beta);
  const std::size_t n = static_cast<std::size_t>(cfg.n_agents);
  std::vector<double> new_heading(n);

  for (std::size_t i = 0; i < n; ++i) {
    double sum_cos = 0.0;
    double sum_sin = 0.0;
    for (int j : neighbours[i]) {
      double perceived = s.heading[static_cast<std::size_t>(j)];
      if (static_cast<std::size_t>(j) != i) {
        perceived += sensory_std * s.rng.gaussian();
      }
      sum_cos += std::cos(perceived);
      sum_sin += std::sin(perceived);
    }
    const double mean = std::atan2(sum_sin, sum_cos);
    // The intrinsic draw is taken even at nu = 0 so paired runs that differ
    // only in nu consume identical generator streams.
    new_heading[i] = wrap_angle(mean + nu * s.rng.gaussian());
  }

  for (std::size_t i = 0; i < n; ++i) {
    s.heading[i] = new_heading[i];
    s.x[i] = wrap_position(s.x[i] + cfg.speed * std::cos(new_heading[i]),
                           cfg.box_size);
    s.y[i] = wrap_position(s.y[i] + cfg.speed * std::sin(new_heading[i]),
                           cfg.box_size);
  }
  return s;
}

double run_episode(const FlockConfig& cfg, double beta, double nu,
                   std::uint64_t seed) {
  FlockState s = init_flock(cfg, seed);
  double sum_phi = 0.0;
  for (int t = 1; t <= cfg.steps_per_episode; ++t) {
    s = step_flock(std::move(s), cfg, beta, nu);
    if (t > cfg.warmup_steps) sum_phi += polarization(s);
  }
  return sum_phi / static_cast<double>(cfg.steps_per_episode - cfg.warmup_steps);
}

std::vector<SweepPoint> run_beta_sweep(const FlockConfig& cfg,
                                       const std::vector<double>& betas,
                                       double nu, int episodes_per_beta,
                                       std::uint64_t seed) {
  if (betas.empty()) throw ConfigError("run_beta_sweep: empty beta grid");
  if (episodes_per_beta < 1) {
    throw ConfigError("run_beta_sweep: episodes_per_beta must be >= 1");
  }
  std::vector<SweepPoint> out;
  out.reserve(betas.size());
  for (std::size_t b = 0; b < betas.size(); ++b) {
    std::vector<double> phis(static_cast<std::size_t>(episodes_per_beta));
    for (int ep = 0; ep < episodes_per_beta; ++ep) {
      const std::uint64_t cell =
          static_cast<std::uint64_t>(b) * static_cast<std::uint64_t>(episodes_per_beta) +
          static_cast<std::uint64_t>(ep);
      phis[static_cast<std::size_t>(ep)] =
          run_episode(cfg, betas[b], nu, derive_seed(seed, "vicsek.sweep", cell));
    }
    SweepPoint p;
    p.beta = betas[b];
    for (double phi : phis) p.phi_mean += phi;
    p.phi_mean /= static_cast<double>(phis.size());
    if (phis.size() > 1) {
      double ss = 0.0;
      for (double phi : phis) ss += (phi - p.phi_mean) * (phi - p.phi_mean);
      p.phi_std = std::sqrt(ss / static_cast<double>(phis.size() - 1));
    }
    out.push_back(p);
  }
  return out;
}

FlockApcResult run_apc_flock(const FlockConfig& cfg,
                             const NoiseSchedule& schedule,
                             const ApcConfig& apc_cfg, int episodes,
                             double beta0, std::uint64_t seed) {
  if (episodes < 1) throw ConfigError("run_apc_flock: episodes must be >= 1");
  FlockApcResult result;
  result.trajectory.reserve(static_cast<std::size_t>(episodes));
  ApcState apc = make_apc_state(
      beta0, derive_seed(seed, "vicsek.apc.controller", 0), apc_cfg);
  for (int e = 0; e < episodes; ++e) {
    const double nu = schedule.at(e);
    const double beta = apc.beta;
    const double phi = run_episode(
        cfg, beta, nu, derive_seed(seed, "vicsek.apc.episode",
                                   static_cast<std::uint64_t>(e)));
    result.trajectory.push_back(FlockApcPoint{e + 1, nu, beta, phi});
    apc = apc_step(std::move(apc), phi, apc_cfg);
  }
  result.final_beta = apc.beta;
  return result;
}

}  // namespace coopfe
