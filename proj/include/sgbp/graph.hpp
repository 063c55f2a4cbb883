#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace sgbp {

// Undirected graph with a fixed directed-edge indexing. Undirected edge e = (i, j)
// with i < j owns directed ids 2e (i -> j) and 2e + 1 (j -> i), so the reverse of
// directed id d is d ^ 1. Edges are stored once, sorted lexicographically.
struct Graph {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> adjacency;    // neighbor node ids, ascending
  std::vector<std::vector<int>> in_directed;  // directed ids k -> i arriving at node i;
                                              // position k matches adjacency[i][k]

  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_directed() const { return 2 * num_edges(); }
  int degree(int node) const { return static_cast<int>(adjacency[node].size()); }

  int dir_source(int d) const {
    const auto& e = edges[static_cast<std::size_t>(d >> 1)];
    return (d & 1) ? e.second : e.first;
  }
  int dir_target(int d) const {
    const auto& e = edges[static_cast<std::size_t>(d >> 1)];
    return (d & 1) ? e.first : e.second;
  }

  bool connected() const;

  // Normalizes pairs to (min, max), rejects self-loops, duplicates, and out-of-range ids.
  static Graph from_edges(int num_nodes, std::vector<std::pair<int, int>> edge_list);
};

Graph build_grid(int rows, int cols);
Graph build_complete(int n);

// Independent-edge random graph: each candidate pair is included with probability
// avg_degree / (n - 1), clamped to 1. Deterministic in the seed; draws are counter-based
// per candidate pair. With resample_until_connected the seed's draw block is advanced
// until a connected graph appears.
Graph build_random(int n, double avg_degree, std::uint64_t seed,
                   bool resample_until_connected = false);

}  // namespace sgbp
