#include "sgbp/bethe.hpp"

#include <cmath>
#include <stdexcept>

#include "sgbp/bp.hpp"
#include "sgbp/rng.hpp"
#include "sgbp/sbp.hpp"

namespace sgbp {

namespace {

constexpr double kTableFloor = 1e-300;

inline double plogp(double p) {
  if (p <= 0.0) return 0.0;  // 0 ln 0 = 0
  return std::max(p, kTableFloor) * std::log(std::max(p, kTableFloor));
}

void check_tables(const IsingModel& model, const Pseudomarginals& p) {
  if (p.singles.rows() != model.graph.num_nodes || p.pairs.rows() != model.graph.num_edges())
    throw std::invalid_argument("bethe_free_energy: table shapes do not match model");
  if ((p.singles < 0.0).any() || (p.pairs < 0.0).any())
    throw std::invalid_argument("bethe_free_energy: negative table entry");
  for (int i = 0; i < p.singles.rows(); ++i)
    if (std::abs(p.singles.row(i).sum() - 1.0) > 1e-9)
      throw std::invalid_argument("bethe_free_energy: singleton table not normalized");
  for (int e = 0; e < p.pairs.rows(); ++e)
    if (std::abs(p.pairs.row(e).sum() - 1.0) > 1e-9)
      throw std::invalid_argument("bethe_free_energy: pair table not normalized");
}

}  // namespace

BetheValue bethe_free_energy(const IsingModel& model, const Pseudomarginals& p) {
  validate_model(model);
  check_tables(model, p);
  const MeansAndCorrelations mc = mean_and_correlation(p);

  BetheValue v;
  v.energy = -(model.couplings.dot(mc.correlations) + model.fields.dot(mc.means));

  double pair_entropy = 0.0;
  for (int e = 0; e < p.pairs.rows(); ++e)
    for (int s = 0; s < 4; ++s) pair_entropy -= plogp(p.pairs(e, s));
  double single_term = 0.0;
  for (int i = 0; i < p.singles.rows(); ++i) {
    const double h = plogp(p.singles(i, 0)) + plogp(p.singles(i, 1));
    single_term += (model.graph.degree(i) - 1) * h;
  }
  v.entropy = pair_entropy + single_term;
  v.free_energy = v.energy - v.entropy;
  return v;
}

double dfb_dzeta(const IsingModel& base_model, const Pseudomarginals& p) {
  validate_model(base_model);
  const MeansAndCorrelations mc = mean_and_correlation(p);
  return -base_model.couplings.dot(mc.correlations);
}

BetheMinResult approx_global_bethe_min(const IsingModel& model, const BetheMinOptions& options) {
  validate_model(model);
  if (options.restarts < 1)
    throw std::invalid_argument("approx_global_bethe_min: restarts must be positive");

  BetheMinResult result;
  bool have = false;
  for (int r = 0; r <= options.restarts; ++r) {
    MessageSet init = r == 0 ? init_messages_uniform(model.graph)
                             : init_messages_random(model.graph,
                                                    rng::derive(options.seed, rng::kStreamRestarts,
                                                                static_cast<std::uint64_t>(r)));
    BpOptions bp_options;
    bp_options.max_sweeps = options.max_sweeps;
    bp_options.damping = options.damping;
    bp_options.tolerance = options.tolerance;
    bp_options.schedule_seed =
        rng::derive(options.seed, rng::kStreamRestarts, 0x10000u + static_cast<std::uint64_t>(r));
    const BpOutcome outcome = run_bp(model, std::move(init), bp_options);
    if (!outcome.converged) continue;
    Pseudomarginals p = extract_pseudomarginals(model, outcome.messages);
    const BetheValue value = bethe_free_energy(model, p);
    ++result.converged_restarts;
    if (!have || value.free_energy < result.value.free_energy) {
      result.pseudomarginals = std::move(p);
      result.value = value;
      have = true;
    }
  }
  if (have) {
    result.from_restarts = true;
    return result;
  }

  SbpConfig sbp_config;
  sbp_config.bp_max_sweeps = options.max_sweeps;
  sbp_config.bp_tolerance = options.tolerance;
  sbp_config.schedule_seed = rng::derive(options.seed, rng::kStreamRestarts, 0x20000u);
  SbpResult sbp = run_sbp(model, sbp_config);
  result.pseudomarginals = std::move(sbp.pseudomarginals);
  // Evaluated under the target model, like the restart candidates, so the value stays
  // comparable regardless of where the homotopy stopped.
  result.value = bethe_free_energy(model, result.pseudomarginals);
  result.from_restarts = false;
  return result;
}

BetheMinResult approx_global_bethe_min(const IsingModel& model, int restarts, std::uint64_t seed) {
  BetheMinOptions options;
  options.restarts = restarts;
  options.seed = seed;
  return approx_global_bethe_min(model, options);
}

}  // namespace sgbp
