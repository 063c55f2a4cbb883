#include "sgbp/bp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "sgbp/errors.hpp"
#include "sgbp/rng.hpp"

namespace sgbp {

namespace {

constexpr double kFloor = 1e-300;  // positivity floor before normalization

// Per-model exp tables so the sweep loop stays multiply-only.
struct BpTables {
  Eigen::ArrayXd exp_pos_coupling, exp_neg_coupling;  // per edge: e^{+J}, e^{-J}
  Eigen::ArrayXd exp_pos_field, exp_neg_field;        // per node: e^{+theta}, e^{-theta}

  static BpTables make(const IsingModel& model) {
    BpTables t;
    t.exp_pos_coupling = model.couplings.array().exp();
    t.exp_neg_coupling = (-model.couplings.array()).exp();
    t.exp_pos_field = model.fields.array().exp();
    t.exp_neg_field = (-model.fields.array()).exp();
    return t;
  }
};

// Recomputes one message from the current set; returns the normalized pair.
inline void compute_message(const Graph& g, const BpTables& t, const MessageSet& msgs, int d,
                            double& out_minus, double& out_plus) {
  const int i = g.dir_source(d);
  const int reverse = d ^ 1;
  double prod_minus = t.exp_neg_field[i];
  double prod_plus = t.exp_pos_field[i];
  for (int incoming : g.in_directed[static_cast<std::size_t>(i)]) {
    if (incoming == reverse) continue;
    prod_minus *= msgs(incoming, 0);
    prod_plus *= msgs(incoming, 1);
  }
  const int e = d >> 1;
  double m0 = prod_minus * t.exp_pos_coupling[e] + prod_plus * t.exp_neg_coupling[e];
  double m1 = prod_minus * t.exp_neg_coupling[e] + prod_plus * t.exp_pos_coupling[e];
  m0 = std::max(m0, kFloor);
  m1 = std::max(m1, kFloor);
  const double sum = m0 + m1;
  if (!(sum > 0.0) || !std::isfinite(sum))
    throw NumericalError("bp_update: message pair failed to normalize");
  out_minus = m0 / sum;
  out_plus = m1 / sum;
}

// Sequential in-place sweep; returns the max-abs message change.
double sweep_inplace(const Graph& g, const BpTables& t, MessageSet& msgs,
                     std::span<const int> schedule, double damping) {
  double max_change = 0.0;
  for (int d : schedule) {
    double m0, m1;
    compute_message(g, t, msgs, d, m0, m1);
    if (damping > 0.0) {
      m0 = (1.0 - damping) * m0 + damping * msgs(d, 0);
      m1 = (1.0 - damping) * m1 + damping * msgs(d, 1);
    }
    max_change =
        std::max(max_change, std::max(std::abs(m0 - msgs(d, 0)), std::abs(m1 - msgs(d, 1))));
    msgs(d, 0) = m0;
    msgs(d, 1) = m1;
  }
  return max_change;
}

}  // namespace

MessageSet init_messages_uniform(const Graph& graph) {
  return MessageSet::Constant(graph.num_directed(), 2, 0.5);
}

MessageSet init_messages_random(const Graph& graph, std::uint64_t seed) {
  MessageSet msgs(graph.num_directed(), 2);
  for (int d = 0; d < graph.num_directed(); ++d) {
    double u = rng::unit(seed, rng::kStreamMessages, static_cast<std::uint64_t>(d));
    u = std::clamp(u, 1e-9, 1.0 - 1e-9);
    msgs(d, 0) = u;
    msgs(d, 1) = 1.0 - u;
  }
  return msgs;
}

MessageSet bp_update(const IsingModel& model, const MessageSet& messages,
                     std::span<const int> schedule, double damping) {
  validate_model(model);
  if (!(damping >= 0.0 && damping < 1.0))
    throw std::invalid_argument("bp_update: damping must lie in [0, 1)");
  if (messages.rows() != model.graph.num_directed())
    throw std::invalid_argument("bp_update: message set does not match graph");
  const int num_directed = model.graph.num_directed();
  if (static_cast<int>(schedule.size()) != num_directed)
    throw std::invalid_argument("bp_update: schedule must cover each directed edge once");
  std::vector<char> seen(static_cast<std::size_t>(num_directed), 0);
  for (int d : schedule) {
    if (d < 0 || d >= num_directed || seen[static_cast<std::size_t>(d)])
      throw std::invalid_argument("bp_update: schedule must cover each directed edge once");
    seen[static_cast<std::size_t>(d)] = 1;
  }
  const BpTables tables = BpTables::make(model);
  MessageSet out = messages;
  sweep_inplace(model.graph, tables, out, schedule, damping);
  return out;
}

BpOutcome run_bp(const IsingModel& model, MessageSet init, const BpOptions& options) {
  validate_model(model);
  if (options.max_sweeps < 1) throw std::invalid_argument("run_bp: max_sweeps must be positive");
  if (!(options.damping >= 0.0 && options.damping < 1.0))
    throw std::invalid_argument("run_bp: damping must lie in [0, 1)");
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("run_bp: tolerance must be positive");
  if (init.rows() != model.graph.num_directed())
    throw std::invalid_argument("run_bp: message set does not match graph");

  const BpTables tables = BpTables::make(model);
  std::vector<int> schedule(static_cast<std::size_t>(model.graph.num_directed()));
  std::iota(schedule.begin(), schedule.end(), 0);

  BpOutcome outcome;
  outcome.messages = std::move(init);
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    rng::Stream stream(
        rng::derive(options.schedule_seed, rng::kStreamSchedule, static_cast<std::uint64_t>(sweep)));
    rng::shuffle(schedule, stream);
    const double change = sweep_inplace(model.graph, tables, outcome.messages, schedule,
                                        options.damping);
    outcome.sweeps_used = sweep + 1;
    outcome.final_residual = change;
    if (change <= options.tolerance) {
      outcome.converged = true;
      break;
    }
  }
  return outcome;
}

double residual(const IsingModel& model, const MessageSet& messages) {
  validate_model(model);
  if (messages.rows() != model.graph.num_directed())
    throw std::invalid_argument("residual: message set does not match graph");
  const BpTables tables = BpTables::make(model);
  double max_diff = 0.0;
  for (int d = 0; d < model.graph.num_directed(); ++d) {
    double m0, m1;
    compute_message(model.graph, tables, messages, d, m0, m1);
    max_diff = std::max(max_diff,
                        std::max(std::abs(m0 - messages(d, 0)), std::abs(m1 - messages(d, 1))));
  }
  return max_diff;
}

Pseudomarginals extract_pseudomarginals(const IsingModel& model, const MessageSet& messages) {
  validate_model(model);
  const Graph& g = model.graph;
  if (messages.rows() != g.num_directed())
    throw std::invalid_argument("extract_pseudomarginals: message set does not match graph");

  Pseudomarginals p;
  p.singles.resize(g.num_nodes, 2);
  p.pairs.resize(g.num_edges(), 4);

  for (int i = 0; i < g.num_nodes; ++i) {
    double b_minus = std::exp(-model.fields[i]);
    double b_plus = std::exp(model.fields[i]);
    for (int incoming : g.in_directed[static_cast<std::size_t>(i)]) {
      b_minus *= messages(incoming, 0);
      b_plus *= messages(incoming, 1);
    }
    const double z = b_minus + b_plus;
    if (!(z > 0.0) || !std::isfinite(z))
      throw NumericalError("extract_pseudomarginals: singleton table failed to normalize");
    p.singles(i, 0) = b_minus / z;
    p.singles(i, 1) = b_plus / z;
  }

  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [i, j] = g.edges[static_cast<std::size_t>(e)];
    // Products of messages into i excluding j -> i, and into j excluding i -> j.
    double pi[2] = {std::exp(-model.fields[i]), std::exp(model.fields[i])};
    double pj[2] = {std::exp(-model.fields[j]), std::exp(model.fields[j])};
    const int d_ij = 2 * e;      // i -> j
    const int d_ji = 2 * e + 1;  // j -> i
    for (int incoming : g.in_directed[static_cast<std::size_t>(i)]) {
      if (incoming == d_ji) continue;
      pi[0] *= messages(incoming, 0);
      pi[1] *= messages(incoming, 1);
    }
    for (int incoming : g.in_directed[static_cast<std::size_t>(j)]) {
      if (incoming == d_ij) continue;
      pj[0] *= messages(incoming, 0);
      pj[1] *= messages(incoming, 1);
    }
    const double ep = std::exp(model.couplings[e]);
    const double em = std::exp(-model.couplings[e]);
    double table[4];
    table[0] = ep * pi[0] * pj[0];  // (-,-)
    table[1] = em * pi[0] * pj[1];  // (-,+)
    table[2] = em * pi[1] * pj[0];  // (+,-)
    table[3] = ep * pi[1] * pj[1];  // (+,+)
    const double z = table[0] + table[1] + table[2] + table[3];
    if (!(z > 0.0) || !std::isfinite(z))
      throw NumericalError("extract_pseudomarginals: pair table failed to normalize");
    for (int s = 0; s < 4; ++s) p.pairs(e, s) = table[s] / z;
  }
  return p;
}

MeansAndCorrelations mean_and_correlation(const Pseudomarginals& p) {
  MeansAndCorrelations mc;
  mc.means = (p.singles.col(1) - p.singles.col(0)).matrix();
  mc.correlations = (p.pairs.col(0) + p.pairs.col(3) - p.pairs.col(1) - p.pairs.col(2)).matrix();
  return mc;
}

double local_polytope_gap(const Graph& graph, const Pseudomarginals& p) {
  double gap = 0.0;
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto [i, j] = graph.edges[static_cast<std::size_t>(e)];
    // Marginalize over x_j for node i, over x_i for node j.
    gap = std::max(gap, std::abs(p.pairs(e, 0) + p.pairs(e, 1) - p.singles(i, 0)));
    gap = std::max(gap, std::abs(p.pairs(e, 2) + p.pairs(e, 3) - p.singles(i, 1)));
    gap = std::max(gap, std::abs(p.pairs(e, 0) + p.pairs(e, 2) - p.singles(j, 0)));
    gap = std::max(gap, std::abs(p.pairs(e, 1) + p.pairs(e, 3) - p.singles(j, 1)));
  }
  return gap;
}

double message_mse(const MessageSet& a, const MessageSet& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("message_mse: size mismatch");
  if (a.size() == 0) return 0.0;
  return (a - b).square().mean();
}

}  // namespace sgbp
