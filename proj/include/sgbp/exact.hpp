#pragma once

#include <Eigen/Core>
#include <vector>

#include "sgbp/beliefs.hpp"
#include "sgbp/model.hpp"

namespace sgbp {

// Exact inference output: log partition function plus exact singleton and pairwise
// marginal tables (same layout as Pseudomarginals). Exact free energy is -log_z.
struct ExactResult {
  double log_z = 0.0;
  Eigen::ArrayX2d singles;
  Eigen::ArrayX4d pairs;
};

struct ExactSingles {
  double log_z = 0.0;
  Eigen::ArrayX2d singles;
};

inline constexpr int kEnumerateMaxNodes = 25;
inline constexpr int kMaxInducedWidth = 20;

// Brute-force summation over all 2^N spin configurations (N <= 25), streaming
// log-sum-exp accumulation.
ExactResult enumerate_exact(const IsingModel& model);

// Variable elimination with the same numerical contract as enumerate_exact.
// The overload without an order uses a min-degree heuristic; the explicit order must
// list every node once. Throws InfeasibleExactError when the induced width exceeds
// kMaxInducedWidth along the order used.
ExactResult eliminate_exact(const IsingModel& model);
ExactResult eliminate_exact(const IsingModel& model, const std::vector<int>& order);

// log_z and singleton marginals only; skips the per-edge pair queries.
ExactSingles eliminate_singles(const IsingModel& model);

}  // namespace sgbp
