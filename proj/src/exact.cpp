#include "sgbp/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "sgbp/errors.hpp"

namespace sgbp {

namespace {

// ---------------------------------------------------------------------------
// Brute-force enumeration with Gray-code traversal and incremental energies.
// ---------------------------------------------------------------------------

template <typename Visitor>
void for_each_configuration(const IsingModel& model, Visitor&& visit) {
  const Graph& g = model.graph;
  const int n = g.num_nodes;
  std::vector<int> spins(static_cast<std::size_t>(n), -1);
  double energy = model.couplings.sum() - model.fields.sum();  // all spins -1
  visit(spins, energy);
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < count; ++k) {
    const int b = std::countr_zero(k);
    double local = model.fields[b];
    for (std::size_t a = 0; a < g.adjacency[static_cast<std::size_t>(b)].size(); ++a) {
      const int nbr = g.adjacency[static_cast<std::size_t>(b)][a];
      const int e = g.in_directed[static_cast<std::size_t>(b)][a] >> 1;
      local += model.couplings[e] * spins[static_cast<std::size_t>(nbr)];
    }
    energy += -2.0 * spins[static_cast<std::size_t>(b)] * local;
    spins[static_cast<std::size_t>(b)] = -spins[static_cast<std::size_t>(b)];
    if ((k & 0x1fff) == 0) {
      // Refresh the incremental energy to keep rounding drift bounded.
      SpinConfiguration cfg;
      cfg.states = Eigen::Map<const Eigen::VectorXi>(spins.data(), n);
      energy = log_joint_unnormalized(model, cfg);
    }
    visit(spins, energy);
  }
}

// ---------------------------------------------------------------------------
// Variable elimination.
// ---------------------------------------------------------------------------

// Table over a sorted variable scope; bit p of the value index is the state of vars[p]
// (0 = spin -1, 1 = spin +1). Values stay in linear domain with an explicit log scale.
struct Factor {
  std::vector<int> vars;
  Eigen::ArrayXd vals;
  double log_scale = 0.0;
};

void rescale(Factor& f) {
  const double m = f.vals.maxCoeff();
  if (!(m > 0.0) || !std::isfinite(m)) throw NumericalError("variable elimination: degenerate table");
  f.vals /= m;
  f.log_scale += std::log(m);
}

Factor node_factor(int node, double theta) {
  Factor f;
  f.vars = {node};
  f.vals.resize(2);
  f.vals << std::exp(-theta), std::exp(theta);
  return f;
}

Factor edge_factor(int i, int j, double coupling) {
  // vars = {i, j} with i < j; index = s_i + 2 s_j.
  Factor f;
  f.vars = {i, j};
  f.vals.resize(4);
  const double ep = std::exp(coupling);
  const double em = std::exp(-coupling);
  f.vals << ep, em, em, ep;
  return f;
}

Factor multiply(const Factor& a, const Factor& b) {
  Factor out;
  out.vars.reserve(a.vars.size() + b.vars.size());
  std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(),
                 std::back_inserter(out.vars));
  const int m = static_cast<int>(out.vars.size());
  if (m > kMaxInducedWidth + 1)
    throw InfeasibleExactError("variable elimination: induced width exceeds guard");
  std::vector<std::uint32_t> stride_a(static_cast<std::size_t>(m), 0);
  std::vector<std::uint32_t> stride_b(static_cast<std::size_t>(m), 0);
  for (int p = 0; p < m; ++p) {
    const int v = out.vars[static_cast<std::size_t>(p)];
    const auto ita = std::lower_bound(a.vars.begin(), a.vars.end(), v);
    if (ita != a.vars.end() && *ita == v)
      stride_a[static_cast<std::size_t>(p)] = 1u << (ita - a.vars.begin());
    const auto itb = std::lower_bound(b.vars.begin(), b.vars.end(), v);
    if (itb != b.vars.end() && *itb == v)
      stride_b[static_cast<std::size_t>(p)] = 1u << (itb - b.vars.begin());
  }
  const std::uint32_t size = 1u << m;
  out.vals.resize(static_cast<Eigen::Index>(size));
  for (std::uint32_t idx = 0; idx < size; ++idx) {
    std::uint32_t ia = 0, ib = 0;
    std::uint32_t bits = idx;
    while (bits != 0) {
      const int p = std::countr_zero(bits);
      ia += stride_a[static_cast<std::size_t>(p)];
      ib += stride_b[static_cast<std::size_t>(p)];
      bits &= bits - 1;
    }
    out.vals[static_cast<Eigen::Index>(idx)] =
        a.vals[static_cast<Eigen::Index>(ia)] * b.vals[static_cast<Eigen::Index>(ib)];
  }
  out.log_scale = a.log_scale + b.log_scale;
  return out;
}

Factor sum_out(const Factor& f, int var) {
  const auto it = std::lower_bound(f.vars.begin(), f.vars.end(), var);
  if (it == f.vars.end() || *it != var)
    throw std::logic_error("variable elimination: summing out absent variable");
  const int p = static_cast<int>(it - f.vars.begin());
  Factor out;
  out.vars = f.vars;
  out.vars.erase(out.vars.begin() + p);
  out.log_scale = f.log_scale;
  const std::uint32_t half = 1u << (f.vars.size() - 1);
  const std::uint32_t low_mask = (1u << p) - 1;
  out.vals.resize(static_cast<Eigen::Index>(half));
  for (std::uint32_t idx = 0; idx < half; ++idx) {
    const std::uint32_t i0 = (idx & low_mask) | ((idx & ~low_mask) << 1);
    const std::uint32_t i1 = i0 | (1u << p);
    out.vals[static_cast<Eigen::Index>(idx)] =
        f.vals[static_cast<Eigen::Index>(i0)] + f.vals[static_cast<Eigen::Index>(i1)];
  }
  return out;
}

std::vector<Factor> initial_factors(const IsingModel& model) {
  std::vector<Factor> factors;
  factors.reserve(static_cast<std::size_t>(model.graph.num_nodes + model.graph.num_edges()));
  for (int i = 0; i < model.graph.num_nodes; ++i)
    factors.push_back(node_factor(i, model.fields[i]));
  for (int e = 0; e < model.graph.num_edges(); ++e) {
    const auto [i, j] = model.graph.edges[static_cast<std::size_t>(e)];
    factors.push_back(edge_factor(i, j, model.couplings[e]));
  }
  return factors;
}

// Min-degree order over the interaction graph with fill-in, never eliminating `keep`.
std::vector<int> min_degree_order(const Graph& graph, const std::vector<int>& keep) {
  const int n = graph.num_nodes;
  std::vector<std::set<int>> nbrs(static_cast<std::size_t>(n));
  for (const auto& [i, j] : graph.edges) {
    nbrs[static_cast<std::size_t>(i)].insert(j);
    nbrs[static_cast<std::size_t>(j)].insert(i);
  }
  std::vector<char> keep_mask(static_cast<std::size_t>(n), 0);
  for (int v : keep) keep_mask[static_cast<std::size_t>(v)] = 1;
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n - static_cast<int>(keep.size())));
  for (int step = 0; step < n - static_cast<int>(keep.size()); ++step) {
    int best = -1;
    std::size_t best_deg = 0;
    for (int v = 0; v < n; ++v) {
      if (done[static_cast<std::size_t>(v)] || keep_mask[static_cast<std::size_t>(v)]) continue;
      const std::size_t deg = nbrs[static_cast<std::size_t>(v)].size();
      if (best < 0 || deg < best_deg) {
        best = v;
        best_deg = deg;
      }
    }
    order.push_back(best);
    done[static_cast<std::size_t>(best)] = 1;
    const std::set<int> scope = nbrs[static_cast<std::size_t>(best)];
    for (int u : scope) {
      nbrs[static_cast<std::size_t>(u)].erase(best);
      for (int w : scope)
        if (w != u) nbrs[static_cast<std::size_t>(u)].insert(w);
    }
    nbrs[static_cast<std::size_t>(best)].clear();
  }
  return order;
}

// Eliminates every node except `keep` (sorted). Returns the joint table over `keep`
// (index bit p = state of keep[p]) together with the accumulated log scale.
Factor run_elimination(const IsingModel& model, const std::vector<int>& keep,
                       const std::vector<int>* explicit_order) {
  std::vector<Factor> factors = initial_factors(model);
  std::vector<char> alive(factors.size(), 1);

  std::vector<int> order;
  if (explicit_order != nullptr) {
    std::vector<char> in_keep(static_cast<std::size_t>(model.graph.num_nodes), 0);
    for (int v : keep) in_keep[static_cast<std::size_t>(v)] = 1;
    for (int v : *explicit_order)
      if (!in_keep[static_cast<std::size_t>(v)]) order.push_back(v);
  } else {
    order = min_degree_order(model.graph, keep);
  }

  for (int v : order) {
    Factor product;
    bool have = false;
    for (std::size_t f = 0; f < factors.size(); ++f) {
      if (!alive[f]) continue;
      if (!std::binary_search(factors[f].vars.begin(), factors[f].vars.end(), v)) continue;
      product = have ? multiply(product, factors[f]) : factors[f];
      have = true;
      alive[f] = 0;
    }
    if (!have) throw std::logic_error("variable elimination: node without factor");
    Factor reduced = sum_out(product, v);
    rescale(reduced);
    alive.push_back(1);
    factors.push_back(std::move(reduced));
  }

  Factor result;
  bool have = false;
  for (std::size_t f = 0; f < factors.size(); ++f) {
    if (!alive[f]) continue;
    result = have ? multiply(result, factors[f]) : factors[f];
    have = true;
  }
  if (!have) throw std::logic_error("variable elimination: empty factor set");
  return result;
}

void check_explicit_order(const IsingModel& model, const std::vector<int>& order) {
  std::vector<char> seen(static_cast<std::size_t>(model.graph.num_nodes), 0);
  for (int v : order) {
    if (v < 0 || v >= model.graph.num_nodes || seen[static_cast<std::size_t>(v)])
      throw std::invalid_argument("eliminate_exact: order must list every node exactly once");
    seen[static_cast<std::size_t>(v)] = 1;
  }
  if (static_cast<int>(order.size()) != model.graph.num_nodes)
    throw std::invalid_argument("eliminate_exact: order must list every node exactly once");
}

double ve_log_z(const IsingModel& model, const std::vector<int>* order) {
  const Factor f = run_elimination(model, {}, order);
  return f.log_scale + std::log(f.vals.sum());
}

Eigen::Array2d ve_single(const IsingModel& model, int node, const std::vector<int>* order) {
  const Factor f = run_elimination(model, {node}, order);
  const double z = f.vals.sum();
  return Eigen::Array2d(f.vals[0] / z, f.vals[1] / z);
}

Eigen::Array4d ve_pair(const IsingModel& model, int i, int j, const std::vector<int>* order) {
  // keep = {i, j} with i < j, so factor index = s_i + 2 s_j; output column = 2 s_i + s_j.
  const Factor f = run_elimination(model, {i, j}, order);
  const double z = f.vals.sum();
  Eigen::Array4d out;
  out[0] = f.vals[0] / z;
  out[1] = f.vals[2] / z;
  out[2] = f.vals[1] / z;
  out[3] = f.vals[3] / z;
  return out;
}

ExactResult eliminate_impl(const IsingModel& model, const std::vector<int>* order) {
  validate_model(model);
  ExactResult r;
  r.log_z = ve_log_z(model, order);
  r.singles.resize(model.graph.num_nodes, 2);
  for (int i = 0; i < model.graph.num_nodes; ++i) r.singles.row(i) = ve_single(model, i, order);
  r.pairs.resize(model.graph.num_edges(), 4);
  for (int e = 0; e < model.graph.num_edges(); ++e) {
    const auto [i, j] = model.graph.edges[static_cast<std::size_t>(e)];
    r.pairs.row(e) = ve_pair(model, i, j, order);
  }
  return r;
}

}  // namespace

ExactResult enumerate_exact(const IsingModel& model) {
  validate_model(model);
  const int n = model.graph.num_nodes;
  if (n > kEnumerateMaxNodes)
    throw InfeasibleExactError("enumerate_exact: model exceeds the node guard");

  double max_energy = -std::numeric_limits<double>::infinity();
  for_each_configuration(model, [&](const std::vector<int>&, double energy) {
    max_energy = std::max(max_energy, energy);
  });

  const int num_edges = model.graph.num_edges();
  double z = 0.0;
  Eigen::ArrayXd plus_weight = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayX4d pair_weight = Eigen::ArrayX4d::Zero(num_edges, 4);
  for_each_configuration(model, [&](const std::vector<int>& spins, double energy) {
    const double w = std::exp(energy - max_energy);
    z += w;
    for (int i = 0; i < n; ++i)
      if (spins[static_cast<std::size_t>(i)] > 0) plus_weight[i] += w;
    for (int e = 0; e < num_edges; ++e) {
      const auto [i, j] = model.graph.edges[static_cast<std::size_t>(e)];
      const int col = 2 * (spins[static_cast<std::size_t>(i)] > 0 ? 1 : 0) +
                      (spins[static_cast<std::size_t>(j)] > 0 ? 1 : 0);
      pair_weight(e, col) += w;
    }
  });

  ExactResult r;
  r.log_z = max_energy + std::log(z);
  r.singles.resize(n, 2);
  r.singles.col(1) = plus_weight / z;
  r.singles.col(0) = 1.0 - (plus_weight / z);
  r.pairs = pair_weight / z;
  return r;
}

ExactResult eliminate_exact(const IsingModel& model) { return eliminate_impl(model, nullptr); }

ExactResult eliminate_exact(const IsingModel& model, const std::vector<int>& order) {
  validate_model(model);
  check_explicit_order(model, order);
  return eliminate_impl(model, &order);
}

ExactSingles eliminate_singles(const IsingModel& model) {
  validate_model(model);
  ExactSingles r;
  r.log_z = ve_log_z(model, nullptr);
  r.singles.resize(model.graph.num_nodes, 2);
  for (int i = 0; i < model.graph.num_nodes; ++i) r.singles.row(i) = ve_single(model, i, nullptr);
  return r;
}

}  // namespace sgbp
