#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sgbp/bp.hpp"

namespace sgbp {

struct SbpConfig {
  double step_init = 0.1;     // base increment of the scaling parameter
  bool adaptive = true;       // grow the step while recent fixed points barely move
  int max_models = 10;        // budget M on the number of scaled models attempted
  int bp_max_sweeps = 1000;
  double bp_tolerance = 1e-10;
  int extrapolation_depth = 3;     // k: warm starts use up to k+1 previous fixed points
  double adaptive_threshold = 1e-3;
  std::uint64_t schedule_seed = 0;
  bool retry_smaller_step = false;  // on BP failure, bisect towards the last stable zeta
                                    // instead of stopping immediately
};

struct SbpTrace {
  std::vector<double> zetas;             // attempted scaling values, strictly increasing from 0
  std::vector<MessageSet> fixed_points;  // one per converged zeta (prefix of zetas)
  std::vector<int> sweeps_per_attempt;   // aligned with zetas
  double terminal_zeta = 0.0;            // last converged zeta
  bool reached_one = false;              // fixed point recorded at zeta = 1
  long long total_sweeps = 0;
};

struct SbpResult {
  Pseudomarginals pseudomarginals;  // extracted at the last stable fixed point,
                                    // under the model scaled by terminal_zeta
  SbpTrace trace;
};

// Homotopy continuation over the coupling scale: start from the unique fixed point of
// the zeta = 0 model (uniform messages), repeatedly rescale, warm-start BP from the
// extrapolated previous fixed points, and advance zeta until 1 is reached, BP stops
// converging, or the model budget runs out. On failure the last stable fixed point is
// returned.
SbpResult run_sbp(const IsingModel& model, const SbpConfig& config = {});

// Step controller: starting from step_init, add step_init * k for each lag k at which
// the newest fixed point still differs from fixed_points[end - k] by less than the
// threshold in mean squared message difference.
double adaptive_step(std::span<const MessageSet> fixed_points, double step_init,
                     double threshold);

// Warm-start estimate at target_zeta from previous fixed points: one point is reused
// as-is, two give linear extrapolation, three or more a natural cubic spline per message
// entry through at most the four most recent points. Entries are clamped to
// [1e-6, 1 - 1e-6] and pairs renormalized.
MessageSet extrapolate_messages(std::span<const MessageSet> fixed_points,
                                std::span<const double> zetas, double target_zeta,
                                int depth = 3);

}  // namespace sgbp
