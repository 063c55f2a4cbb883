#include "sgbp/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "sgbp/rng.hpp"

namespace sgbp {

bool Graph::connected() const {
  if (num_nodes <= 1) return true;
  std::vector<char> seen(static_cast<std::size_t>(num_nodes), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adjacency[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == num_nodes;
}

Graph Graph::from_edges(int num_nodes, std::vector<std::pair<int, int>> edge_list) {
  if (num_nodes < 1) throw std::invalid_argument("graph: num_nodes must be positive");
  for (auto& e : edge_list) {
    if (e.first == e.second) throw std::invalid_argument("graph: self-loop");
    if (e.first > e.second) std::swap(e.first, e.second);
    if (e.first < 0 || e.second >= num_nodes)
      throw std::invalid_argument("graph: edge endpoint out of range");
  }
  std::sort(edge_list.begin(), edge_list.end());
  if (std::adjacent_find(edge_list.begin(), edge_list.end()) != edge_list.end())
    throw std::invalid_argument("graph: duplicate edge");

  Graph g;
  g.num_nodes = num_nodes;
  g.edges = std::move(edge_list);
  g.adjacency.assign(static_cast<std::size_t>(num_nodes), {});
  g.in_directed.assign(static_cast<std::size_t>(num_nodes), {});
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [i, j] = g.edges[static_cast<std::size_t>(e)];
    g.adjacency[static_cast<std::size_t>(i)].push_back(j);
    g.adjacency[static_cast<std::size_t>(j)].push_back(i);
    g.in_directed[static_cast<std::size_t>(j)].push_back(2 * e);      // i -> j
    g.in_directed[static_cast<std::size_t>(i)].push_back(2 * e + 1);  // j -> i
  }
  // Sort adjacency ascending, carrying in_directed along so position k in both lists
  // refers to the same neighbor.
  for (int i = 0; i < num_nodes; ++i) {
    auto& nbrs = g.adjacency[static_cast<std::size_t>(i)];
    auto& dirs = g.in_directed[static_cast<std::size_t>(i)];
    std::vector<std::size_t> perm(nbrs.size());
    for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
    std::sort(perm.begin(), perm.end(),
              [&](std::size_t a, std::size_t b) { return nbrs[a] < nbrs[b]; });
    std::vector<int> sorted_nbrs(nbrs.size()), sorted_dirs(dirs.size());
    for (std::size_t k = 0; k < perm.size(); ++k) {
      sorted_nbrs[k] = nbrs[perm[k]];
      sorted_dirs[k] = dirs[perm[k]];
    }
    nbrs = std::move(sorted_nbrs);
    dirs = std::move(sorted_dirs);
  }
  return g;
}

Graph build_grid(int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("build_grid: dimensions must be positive");
  const auto id = [cols](int r, int c) { return r * cols + c; };
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(rows * (cols - 1) + cols * (rows - 1)));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  }
  return Graph::from_edges(rows * cols, std::move(edges));
}

Graph build_complete(int n) {
  if (n < 1) throw std::invalid_argument("build_complete: n must be positive");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return Graph::from_edges(n, std::move(edges));
}

Graph build_random(int n, double avg_degree, std::uint64_t seed, bool resample_until_connected) {
  if (n < 1) throw std::invalid_argument("build_random: n must be positive");
  if (!(avg_degree > 0.0) || avg_degree >= static_cast<double>(n))
    throw std::invalid_argument("build_random: need 0 < avg_degree < n");
  const double p = n > 1 ? std::min(1.0, avg_degree / static_cast<double>(n - 1)) : 0.0;
  const std::uint64_t block = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n);
  constexpr int kMaxAttempts = 100000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const std::uint64_t counter = static_cast<std::uint64_t>(attempt) * block +
                                      static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
                                      static_cast<std::uint64_t>(j);
        if (rng::unit(seed, rng::kStreamGraphEdges, counter) < p) edges.emplace_back(i, j);
      }
    }
    Graph g = Graph::from_edges(n, std::move(edges));
    if (!resample_until_connected || g.connected()) return g;
  }
  throw std::runtime_error("build_random: no connected sample after " +
                           std::to_string(kMaxAttempts) + " attempts");
}

}  // namespace sgbp
