#pragma once

#include <Eigen/Dense>
#include <vector>

#include "oodt/distributions.hpp"

namespace oodt {

/// Optimal coupling between two discrete distributions together with the
/// dual potentials recovered from the final simplex basis. Row sums match
/// the source weights and column sums the sink weights (within 1e-9); cost
/// is the plan-weighted sum of the cost matrix.
struct TransportPlan {
  Eigen::MatrixXd plan;
  double cost = 0.0;
  Eigen::VectorXd source_potential;
  Eigen::VectorXd sink_potential;
  int pivots = 0;
};

/// Exact transportation linear program solved by the network simplex
/// specialization (tree basis, most-negative entering arc with lowest-index
/// ties, Bland fallback on long degenerate streaks). Optimality is certified
/// internally by a complementary-slackness check against the recovered duals
/// within 1e-7. Instance size k1*k2 is capped at 2^18.
TransportPlan exact_ot(const DiscretePmf& p, const DiscretePmf& q,
                       const Eigen::MatrixXd& cost);

/// Exact n x n assignment (Jonker-Volgenant shortest augmenting paths) on
/// cost |a_i - b_j|^order, returning (cost/n)^(1/order). Equal sizes up to
/// 256; the independent oracle for wasserstein_1d.
double wasserstein_via_assignment(const std::vector<double>& a,
                                  const std::vector<double>& b, double order);

}  // namespace oodt
