#include "sgbp/gibbs.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sgbp/rng.hpp"

namespace sgbp {

GibbsEstimate run_gibbs(const IsingModel& model, long long total_updates,
                        long long burn_in_updates, std::uint64_t seed) {
  validate_model(model);
  if (total_updates < 1) throw std::invalid_argument("run_gibbs: total_updates must be positive");
  if (burn_in_updates < 0 || burn_in_updates >= total_updates)
    throw std::invalid_argument("run_gibbs: need 0 <= burn_in < total_updates");

  const Graph& g = model.graph;
  const int n = g.num_nodes;
  rng::Stream stream(seed, rng::kStreamGibbs);

  std::vector<int> spins(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) spins[static_cast<std::size_t>(i)] = stream.next_unit() < 0.5 ? -1 : 1;

  Eigen::VectorXd plus_count = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd corr_sum = Eigen::VectorXd::Zero(g.num_edges());
  long long samples = 0;

  for (long long t = 0; t < total_updates; ++t) {
    const int u = static_cast<int>(stream.next_below(static_cast<std::uint64_t>(n)));
    double local = model.fields[u];
    const auto& nbrs = g.adjacency[static_cast<std::size_t>(u)];
    const auto& dirs = g.in_directed[static_cast<std::size_t>(u)];
    for (std::size_t a = 0; a < nbrs.size(); ++a)
      local += model.couplings[dirs[a] >> 1] * spins[static_cast<std::size_t>(nbrs[a])];
    const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * local));
    spins[static_cast<std::size_t>(u)] = stream.next_unit() < p_plus ? 1 : -1;

    if (t >= burn_in_updates) {
      for (int i = 0; i < n; ++i)
        if (spins[static_cast<std::size_t>(i)] > 0) plus_count[i] += 1.0;
      for (int e = 0; e < g.num_edges(); ++e) {
        const auto [i, j] = g.edges[static_cast<std::size_t>(e)];
        corr_sum[e] += spins[static_cast<std::size_t>(i)] * spins[static_cast<std::size_t>(j)];
      }
      ++samples;
    }
  }

  GibbsEstimate est;
  est.singles_plus = plus_count / static_cast<double>(samples);
  est.correlations = corr_sum / static_cast<double>(samples);
  est.total_updates = total_updates;
  est.burn_in_updates = burn_in_updates;
  est.seed = seed;
  return est;
}

}  // namespace sgbp
