#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "sgbp/model.hpp"

namespace sgbp {

struct GibbsEstimate {
  Eigen::VectorXd singles_plus;  // estimated P_i(+1) per node, in [0, 1]
  Eigen::VectorXd correlations;  // estimated E[x_i x_j] per edge
  long long total_updates = 0;
  long long burn_in_updates = 0;
  std::uint64_t seed = 0;
};

// Single-site heat-bath sampler: random initial configuration, uniformly random site
// selection, conditional resample P(x_i = +1 | rest) = sigmoid(2 (theta_i + sum_j J_ij x_j)).
// State counts accumulate after every post-burn-in update. Deterministic per seed.
GibbsEstimate run_gibbs(const IsingModel& model, long long total_updates,
                        long long burn_in_updates, std::uint64_t seed);

}  // namespace sgbp
