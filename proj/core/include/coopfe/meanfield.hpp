#pragma once

#include <vector>

#include "coopfe/coalition.hpp"

namespace coopfe {

// Pairwise truncation of a coalition energy: unary terms phi_i plus
// symmetric pair couplings psi_ij (zero diagonal), scaled by the inverse
// temperature beta when exponentiated.
struct PairwiseEnergyModel {
  int n_agents = 0;
  std::vector<double> phi;               // length N
  std::vector<std::vector<double>> psi;  // N x N, symmetric, zero diagonal
  double beta = 1.0;
};

// Validates shapes, symmetry, zero diagonal and beta > 0.
PairwiseEnergyModel make_pairwise_model(std::vector<double> phi,
                                        std::vector<std::vector<double>> psi,
                                        double beta);

// Outcome of the damped logistic fixed-point iteration.  `converged` is a
// reported outcome, never an assertion: strongly coupled models may cycle.
struct MeanFieldState {
  std::vector<double> q;  // membership marginals, each in (0,1)
  double residual = 0.0;  // max_i |q_i - sigma(update_i)| at return
  int iterations = 0;
  bool converged = false;
};

// Energy of one concrete coalition under the truncated model:
// sum of phi over members + sum of psi over member pairs.
double pairwise_energy(const PairwiseEnergyModel& m, Mask coalition);

// Variational free energy of a factorised Bernoulli posterior q:
//   sum_i phi_i q_i + sum_{i<j} psi_ij q_i q_j
//   + (1/beta) sum_i [q_i ln q_i + (1-q_i) ln(1-q_i)]
// q_i must lie in (0,1); inside the entropy q is clamped to
// [1e-12, 1-1e-12] to keep the logs finite.
double meanfield_free_energy(const std::vector<double>& q,
                             const PairwiseEnergyModel& m);

// Damped synchronous iteration of the logistic self-consistency equation
//   q_i <- (1-d) q_i + d * sigma(-beta phi_i - beta sum_{j!=i} psi_ij q_j)
// from init_q until the residual drops below tol or max_iter is reached.
// Damping (default 0.5) tames the oscillations the bare synchronous update
// exhibits under strong couplings.
MeanFieldState meanfield_fixed_point(const PairwiseEnergyModel& m,
                                     std::vector<double> init_q, double tol,
                                     int max_iter, double damping = 0.5);

// Convenience overload: maximum-entropy start q_i = 0.5.
MeanFieldState meanfield_fixed_point(const PairwiseEnergyModel& m,
                                     double tol = 1e-10, int max_iter = 10000,
                                     double damping = 0.5);

// Softmax-attention form of the membership update: the per-agent logistic
// denominator is replaced by a normalisation over agents,
//   w_i = softmax_i(-beta phi_i - beta sum_j psi_ij q_j),
// evaluated through log-sum-exp.  This is a distinct read-out, not an
// equivalent of the logistic fixed point.
std::vector<double> attention_weights(const PairwiseEnergyModel& m,
                                      const std::vector<double>& q);

}  // namespace coopfe
