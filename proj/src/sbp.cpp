#include "sgbp/sbp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sgbp/errors.hpp"
#include "sgbp/rng.hpp"
#include "sgbp/spline.hpp"

namespace sgbp {

namespace {

constexpr double kMessageClamp = 1e-6;
constexpr double kMinRetryGap = 1e-3;

void check_config(const SbpConfig& config) {
  if (!(config.step_init > 0.0 && config.step_init <= 1.0))
    throw std::invalid_argument("run_sbp: step_init must lie in (0, 1]");
  if (config.max_models < 1) throw std::invalid_argument("run_sbp: max_models must be positive");
  if (config.bp_max_sweeps < 1)
    throw std::invalid_argument("run_sbp: bp_max_sweeps must be positive");
  if (!(config.bp_tolerance > 0.0))
    throw std::invalid_argument("run_sbp: bp_tolerance must be positive");
  if (config.extrapolation_depth < 0)
    throw std::invalid_argument("run_sbp: extrapolation_depth must be nonnegative");
  if (!(config.adaptive_threshold > 0.0))
    throw std::invalid_argument("run_sbp: adaptive_threshold must be positive");
}

}  // namespace

double adaptive_step(std::span<const MessageSet> fixed_points, double step_init,
                     double threshold) {
  if (fixed_points.empty()) throw std::invalid_argument("adaptive_step: empty history");
  const std::size_t count = fixed_points.size();
  double step = step_init;
  std::size_t k = 1;
  while (k < count &&
         message_mse(fixed_points[count - 1], fixed_points[count - 1 - k]) < threshold) {
    ++k;
    step += step_init * static_cast<double>(k);
  }
  return step;
}

MessageSet extrapolate_messages(std::span<const MessageSet> fixed_points,
                                std::span<const double> zetas, double target_zeta, int depth) {
  if (fixed_points.empty() || fixed_points.size() != zetas.size())
    throw std::invalid_argument("extrapolate_messages: need matching nonempty history");
  for (double z : zetas)
    if (!(target_zeta > z))
      throw std::invalid_argument("extrapolate_messages: target must exceed all history zetas");

  const std::size_t use =
      std::min<std::size_t>({fixed_points.size(), static_cast<std::size_t>(depth) + 1, 4});
  const std::size_t first = fixed_points.size() - use;
  if (use == 1) return fixed_points.back();

  std::vector<double> knots(zetas.begin() + static_cast<std::ptrdiff_t>(first), zetas.end());
  const Eigen::VectorXd w = natural_spline_weights(knots, target_zeta);

  MessageSet out = w[0] * fixed_points[first];
  for (std::size_t k = 1; k < use; ++k) out += w[static_cast<Eigen::Index>(k)] * fixed_points[first + k];

  out = out.max(kMessageClamp).min(1.0 - kMessageClamp);
  const Eigen::ArrayXd row_sum = out.col(0) + out.col(1);
  out.col(0) /= row_sum;
  out.col(1) /= row_sum;
  return out;
}

SbpResult run_sbp(const IsingModel& model, const SbpConfig& config) {
  validate_model(model);
  check_config(config);

  SbpTrace trace;
  std::vector<double> converged_zetas;

  double zeta = 0.0;
  MessageSet init = init_messages_uniform(model.graph);
  int attempt = 0;
  double last_failed_zeta = -1.0;  // only used by the retry mode

  while (true) {
    trace.zetas.push_back(zeta);
    const IsingModel scaled = scale_model(model, zeta);
    BpOptions bp_options;
    bp_options.max_sweeps = config.bp_max_sweeps;
    bp_options.damping = 0.0;
    bp_options.tolerance = config.bp_tolerance;
    bp_options.schedule_seed =
        rng::derive(config.schedule_seed, rng::kStreamSbp, static_cast<std::uint64_t>(attempt));
    BpOutcome outcome = run_bp(scaled, std::move(init), bp_options);
    trace.sweeps_per_attempt.push_back(outcome.sweeps_used);
    trace.total_sweeps += outcome.sweeps_used;
    ++attempt;

    if (!outcome.converged) {
      if (trace.fixed_points.empty())
        throw NumericalError("run_sbp: BP failed at zeta = 0");  // cannot happen for finite models
      if (config.retry_smaller_step && attempt < config.max_models) {
        const double base = converged_zetas.back();
        if (zeta - base > kMinRetryGap) {
          // Drop the failed attempt from the trace (total_sweeps keeps its cost) and
          // bisect towards the last stable zeta.
          trace.zetas.pop_back();
          trace.sweeps_per_attempt.pop_back();
          last_failed_zeta = zeta;
          zeta = base + 0.5 * (zeta - base);
          init = extrapolate_messages(trace.fixed_points, converged_zetas, zeta,
                                      config.extrapolation_depth);
          continue;
        }
      }
      break;
    }

    trace.fixed_points.push_back(outcome.messages);
    converged_zetas.push_back(zeta);
    if (zeta >= 1.0) {
      trace.reached_one = true;
      break;
    }
    if (attempt >= config.max_models) break;

    double step = config.adaptive
                      ? adaptive_step(trace.fixed_points, config.step_init,
                                      config.adaptive_threshold)
                      : config.step_init;
    double next = zeta + step;
    if (next > 1.0) next = 1.0;  // attempt the endpoint exactly
    if (config.retry_smaller_step && last_failed_zeta > 0.0 && next >= last_failed_zeta)
      next = std::min(1.0, 0.5 * (zeta + last_failed_zeta));
    if (!(next > zeta)) break;

    init = extrapolate_messages(trace.fixed_points, converged_zetas, next,
                                config.extrapolation_depth);
    zeta = next;
  }

  trace.terminal_zeta = converged_zetas.back();
  const IsingModel terminal = scale_model(model, trace.terminal_zeta);
  SbpResult result;
  result.pseudomarginals = extract_pseudomarginals(terminal, trace.fixed_points.back());
  result.trace = std::move(trace);
  return result;
}

}  // namespace sgbp
