#include "coopfe/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coopfe/errors.hpp"
#include "coopfe/gibbs.hpp"

namespace coopfe {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_marginals(const std::vector<double>& q, int n, const char* where) {
  if (q.size() != static_cast<std::size_t>(n)) {
    throw ConfigError(std::string(where) + ": expected " + std::to_string(n) +
                      " marginals, got " + std::to_string(q.size()));
  }
  for (double qi : q) {
    if (!(qi > 0.0 && qi < 1.0)) {
      throw ConfigError(std::string(where) +
                        ": marginals must lie strictly in (0,1)");
    }
  }
}

// Logit of the membership update for agent i given the other marginals:
// -beta phi_i - beta sum_{j != i} psi_ij q_j.
double membership_logit(const PairwiseEnergyModel& m,
                        const std::vector<double>& q, std::size_t i) {
  double field = m.phi[i];
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (j != i) field += m.psi[i][j] * q[j];
  }
  return -m.beta * field;
}

}  // namespace

PairwiseEnergyModel make_pairwise_model(std::vector<double> phi,
                                        std::vector<std::vector<double>> psi,
                                        double beta) {
  const int n = static_cast<int>(phi.size());
  if (n < 1) throw ConfigError("make_pairwise_model: need at least one agent");
  if (!(beta > 0.0)) throw ConfigError("make_pairwise_model: beta must be > 0");
  if (psi.size() != phi.size()) {
    throw ConfigError("make_pairwise_model: psi must be N x N");
  }
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (psi[i].size() != phi.size()) {
      throw ConfigError("make_pairwise_model: psi must be N x N");
    }
    if (psi[i][i] != 0.0) {
      throw ConfigError("make_pairwise_model: psi diagonal must be zero");
    }
    for (std::size_t j = i + 1; j < psi.size(); ++j) {
      if (psi[i][j] != psi[j][i]) {
        throw ConfigError("make_pairwise_model: psi must be symmetric");
      }
    }
  }
  return PairwiseEnergyModel{n, std::move(phi), std::move(psi), beta};
}

double pairwise_energy(const PairwiseEnergyModel& m, Mask coalition) {
  double e = 0.0;
  for (int i = 0; i < m.n_agents; ++i) {
    if (!(coalition & (Mask{1} << i))) continue;
    e += m.phi[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m.n_agents; ++j) {
      if (coalition & (Mask{1} << j)) {
        e += m.psi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
    }
  }
  return e;
}

double meanfield_free_energy(const std::vector<double>& q,
                             const PairwiseEnergyModel& m) {
  check_marginals(q, m.n_agents, "meanfield_free_energy");
  double energy = 0.0;
  double entropy_term = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    energy += m.phi[i] * q[i];
    for (std::size_t j = i + 1; j < q.size(); ++j) {
      energy += m.psi[i][j] * q[i] * q[j];
    }
    const double qi = std::clamp(q[i], 1e-12, 1.0 - 1e-12);
    entropy_term += qi * std::log(qi) + (1.0 - qi) * std::log(1.0 - qi);
  }
  return energy + entropy_term / m.beta;
}

MeanFieldState meanfield_fixed_point(const PairwiseEnergyModel& m,
                                     std::vector<double> init_q, double tol,
                                     int max_iter, double damping) {
  check_marginals(init_q, m.n_agents, "meanfield_fixed_point");
  if (!(tol > 0.0)) throw ConfigError("meanfield_fixed_point: tol must be > 0");
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw ConfigError("meanfield_fixed_point: damping must be in (0,1]");
  }

  MeanFieldState state;
  state.q = std::move(init_q);
  std::vector<double> target(state.q.size());
  for (int iter = 0; iter <= max_iter; ++iter) {
    double residual = 0.0;
    for (std::size_t i = 0; i < state.q.size(); ++i) {
      target[i] = sigmoid(membership_logit(m, state.q, i));
      residual = std::max(residual, std::abs(state.q[i] - target[i]));
    }
    state.residual = residual;
    state.iterations = iter;
    if (residual < tol) {
      state.converged = true;
      return state;
    }
    if (iter == max_iter) break;
    for (std::size_t i = 0; i < state.q.size(); ++i) {
      state.q[i] = (1.0 - damping) * state.q[i] + damping * target[i];
    }
  }
  state.converged = false;
  return state;
}

MeanFieldState meanfield_fixed_point(const PairwiseEnergyModel& m, double tol,
                                     int max_iter, double damping) {
  return meanfield_fixed_point(
      m, std::vector<double>(static_cast<std::size_t>(m.n_agents), 0.5), tol,
      max_iter, damping);
}

std::vector<double> attention_weights(const PairwiseEnergyModel& m,
                                      const std::vector<double>& q) {
  check_marginals(q, m.n_agents, "attention_weights");
  std::vector<double> logits(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    // Unlike membership_logit, the softmax form keeps the j == i coupling
    // term out only through the zero diagonal; the sum runs over all j.
    double field = m.phi[i];
    for (std::size_t j = 0; j < q.size(); ++j) field += m.psi[i][j] * q[j];
    logits[i] = -m.beta * field;
  }
  const double lse = log_sum_exp(logits);
  std::vector<double> w(logits.size());
  std::transform(logits.begin(), logits.end(), w.begin(),
                 [&](double l) { return std::exp(l - lse); });
  return w;
}

}  // namespace coopfe
