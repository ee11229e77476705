#include "coopfe/stationarity.hpp"

#include <cmath>

#include "coopfe/errors.hpp"

namespace coopfe {

double effective_stationarity_check(const std::vector<CreditCurve>& xi_curves,
                                    const std::vector<double>& peaks) {
  if (xi_curves.size() != peaks.size()) {
    throw ConfigError(
        "effective_stationarity_check: one peak per curve required");
  }
  const double h = 1e-4;
  double worst = 0.0;
  for (std::size_t i = 0; i < xi_curves.size(); ++i) {
    const double grad =
        (xi_curves[i](peaks[i] + h) - xi_curves[i](peaks[i] - h)) / (2.0 * h);
    worst = std::max(worst, std::abs(grad));
  }
  return worst;
}

namespace {

std::vector<double> abilities(const SynergyFamilyConfig& cfg,
                              const std::vector<double>& betas) {
  if (cfg.peaks.size() != static_cast<std::size_t>(cfg.n_agents) ||
      cfg.curvature.size() != static_cast<std::size_t>(cfg.n_agents) ||
      betas.size() != static_cast<std::size_t>(cfg.n_agents)) {
    throw ConfigError("synergy_family_game: per-agent vectors must have length N");
  }
  std::vector<double> a(betas.size());
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const double d = betas[i] - cfg.peaks[i];
    a[i] = 1.0 - cfg.curvature[i] * d * d;
  }
  return a;
}

}  // namespace

CharacteristicFunction synergy_family_game(const SynergyFamilyConfig& cfg,
                                           const std::vector<double>& betas) {
  const std::vector<double> a = abilities(cfg, betas);
  const Mask size = full_coalition(cfg.n_agents) + 1;
  std::vector<double> values(size, 0.0);
  for (Mask c = 1; c < size; ++c) {
    double solo = 0.0;
    double pair = 0.0;
    for (int i = 0; i < cfg.n_agents; ++i) {
      if (!(c & (Mask{1} << i))) continue;
      solo += a[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < cfg.n_agents; ++j) {
        if (c & (Mask{1} << j)) {
          pair += a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(j)];
        }
      }
    }
    values[c] = solo + cfg.coupling * pair;
  }
  return make_characteristic(cfg.n_agents, std::move(values));
}

double synergy_family_credit(const SynergyFamilyConfig& cfg,
                             const std::vector<double>& betas, int agent) {
  const CharacteristicFunction v = synergy_family_game(cfg, betas);
  const ShapleyVector xi = shapley_from_dividends(mobius_dividends(v));
  return xi.credits[static_cast<std::size_t>(agent)];
}

}  // namespace coopfe
