#pragma once

#include <cstdint>
#include <limits>
#include <span>

#include "sgbp/beliefs.hpp"
#include "sgbp/model.hpp"

namespace sgbp {

// One normalized two-state message per directed edge: row d = directed edge id,
// col 0 = mu(x = -1), col 1 = mu(x = +1). Rows sum to 1 and stay strictly positive.
using MessageSet = Eigen::ArrayX2d;

MessageSet init_messages_uniform(const Graph& graph);
// Each pair drawn uniformly from the 1-simplex, deterministic per seed.
MessageSet init_messages_random(const Graph& graph, std::uint64_t seed);

struct BpOptions {
  int max_sweeps = 1000;
  double damping = 0.0;      // epsilon in [0, 1)
  double tolerance = 1e-10;  // max-abs message change per sweep
  std::uint64_t schedule_seed = 0;
};

struct BpOutcome {
  MessageSet messages;
  int sweeps_used = 0;
  bool converged = false;
  double final_residual = std::numeric_limits<double>::infinity();  // last sweep's max change
};

// One full sweep in the given directed-edge order, sequential in-place updates, each new
// message damped as (1 - eps) * new + eps * old. The schedule must cover every directed
// edge exactly once.
MessageSet bp_update(const IsingModel& model, const MessageSet& messages,
                     std::span<const int> schedule, double damping);

// Sweeps with a fresh random permutation of directed edges each sweep (deterministic in
// schedule_seed) until the max-abs message change drops to tolerance or max_sweeps is hit.
BpOutcome run_bp(const IsingModel& model, MessageSet init, const BpOptions& options = {});

// Max-abs entry of M - BP(M) for one synchronous undamped application of the update map.
double residual(const IsingModel& model, const MessageSet& messages);

Pseudomarginals extract_pseudomarginals(const IsingModel& model, const MessageSet& messages);

// Mean over all message entries of the squared difference.
double message_mse(const MessageSet& a, const MessageSet& b);

}  // namespace sgbp
