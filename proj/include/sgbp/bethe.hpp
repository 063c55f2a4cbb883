#pragma once

#include <cstdint>

#include "sgbp/beliefs.hpp"
#include "sgbp/model.hpp"

namespace sgbp {

struct BetheValue {
  double free_energy = 0.0;  // energy - entropy
  double energy = 0.0;
  double entropy = 0.0;
};

// Bethe free energy of the belief tables under the given (already scaled) model.
// Energy: -sum_e J chi - sum_i theta m. Entropy: pairwise entropy plus singleton
// entropy weighted by (1 - degree). Tables must be normalized within 1e-9.
BetheValue bethe_free_energy(const IsingModel& model, const Pseudomarginals& p);

// d F_B / d zeta with the belief tables held fixed: -sum_e J_e chi_e, couplings taken
// from the unscaled base model.
double dfb_dzeta(const IsingModel& base_model, const Pseudomarginals& p);

struct BetheMinOptions {
  int restarts = 10;        // random damped-BP initializations on top of the uniform one
  double damping = 0.9;
  int max_sweeps = 10000;
  double tolerance = 1e-10;
  std::uint64_t seed = 0;
};

struct BetheMinResult {
  Pseudomarginals pseudomarginals;
  BetheValue value;
  bool from_restarts = false;  // false: no restart converged, result is the SBP fallback
  int converged_restarts = 0;
};

// Heuristic stand-in for a global Bethe minimizer: best converged damped-BP fixed point
// over multiple initializations, falling back to the homotopy result when none converge.
// The output is approximate; it is a reference point, not a certified minimum.
BetheMinResult approx_global_bethe_min(const IsingModel& model, const BetheMinOptions& options = {});
BetheMinResult approx_global_bethe_min(const IsingModel& model, int restarts, std::uint64_t seed);

}  // namespace sgbp
