#pragma once

#include <Eigen/Core>

#include "sgbp/graph.hpp"

namespace sgbp {

// Belief tables. Singles: row per node, col 0 = P(-1), col 1 = P(+1).
// Pairs: row per edge (i, j) with i the smaller endpoint; columns index
// (x_i, x_j) as 0:(-,-), 1:(-,+), 2:(+,-), 3:(+,+).
struct Pseudomarginals {
  Eigen::ArrayX2d singles;
  Eigen::ArrayX4d pairs;
};

struct MeansAndCorrelations {
  Eigen::VectorXd means;         // m_i = P_i(+1) - P_i(-1)
  Eigen::VectorXd correlations;  // chi_ij = P(++) + P(--) - P(+-) - P(-+)
};

MeansAndCorrelations mean_and_correlation(const Pseudomarginals& p);

// Largest violation of the pairwise-to-singleton marginalization constraints.
double local_polytope_gap(const Graph& graph, const Pseudomarginals& p);

}  // namespace sgbp
