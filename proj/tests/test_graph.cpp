#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "sgbp/graph.hpp"
#include "sgbp/model.hpp"
#include "sgbp/rng.hpp"

using namespace sgbp;

namespace {

// Membership consistency between edges and adjacency, both ways.
void check_adjacency(const Graph& g) {
  std::set<std::pair<int, int>> edge_set(g.edges.begin(), g.edges.end());
  std::size_t adjacency_total = 0;
  for (int i = 0; i < g.num_nodes; ++i) {
    adjacency_total += g.adjacency[i].size();
    for (std::size_t a = 0; a < g.adjacency[i].size(); ++a) {
      const int j = g.adjacency[i][a];
      CHECK(j != i);
      CHECK(edge_set.count({std::min(i, j), std::max(i, j)}) == 1);
      const int d = g.in_directed[i][a];
      CHECK(g.dir_source(d) == j);
      CHECK(g.dir_target(d) == i);
    }
  }
  CHECK(adjacency_total == 2 * g.edges.size());
}

}  // namespace

TEST_CASE("build_grid shapes") {
  const Graph g55 = build_grid(5, 5);
  CHECK(g55.num_nodes == 25);
  CHECK(g55.num_edges() == 40);
  const Graph g11 = build_grid(1, 1);
  CHECK(g11.num_nodes == 1);
  CHECK(g11.num_edges() == 0);
  const Graph g23 = build_grid(2, 3);
  CHECK(g23.num_nodes == 6);
  CHECK(g23.num_edges() == 7);
  check_adjacency(g55);
  check_adjacency(g23);
  CHECK_THROWS_AS(build_grid(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(3, 0), std::invalid_argument);
}

TEST_CASE("build_complete shapes") {
  CHECK(build_complete(10).num_edges() == 45);
  CHECK(build_complete(1).num_edges() == 0);
  CHECK(build_complete(4).num_edges() == 6);
  check_adjacency(build_complete(6));
  CHECK_THROWS_AS(build_complete(0), std::invalid_argument);
}

TEST_CASE("build_random determinism and support") {
  const Graph a = build_random(10, 3.0, 7);
  const Graph b = build_random(10, 3.0, 7);
  CHECK(a.edges == b.edges);
  check_adjacency(a);
  CHECK(a.num_edges() >= 1);
  CHECK(a.num_edges() <= 45);

  const Graph c = build_random(10, 3.0, 8);
  CHECK(a.edges != c.edges);

  // p = avg_degree / (n - 1) = 1 forces the single available edge.
  const Graph pair = build_random(2, 1.0, 123);
  CHECK(pair.num_edges() == 1);

  CHECK_THROWS_AS(build_random(10, 10.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_random(10, 0.0, 1), std::invalid_argument);
}

TEST_CASE("build_random connectivity flag") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph g = build_random(12, 1.5, seed, true);
    CHECK(g.connected());
  }
}

TEST_CASE("graph from_edges rejects malformed input") {
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 1}, {1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 3}}), std::invalid_argument);
}

TEST_CASE("sample_model dist specs") {
  const Graph grid = build_grid(5, 5);
  const IsingModel m =
      sample_model(grid, DistSpec::constant(0.4), DistSpec::rademacher_scaled(1.0), 42);
  CHECK((m.fields.array() == 0.4).all());
  for (int e = 0; e < m.couplings.size(); ++e)
    CHECK(std::abs(m.couplings[e]) == doctest::Approx(1.0));

  const IsingModel zero = sample_model(grid, DistSpec::constant(0), DistSpec::constant(0), 1);
  CHECK((zero.fields.array() == 0.0).all());
  CHECK((zero.couplings.array() == 0.0).all());

  const Graph complete = build_complete(10);
  const IsingModel u =
      sample_model(complete, DistSpec::uniform(-0.5, 0.5), DistSpec::uniform(0, 2.5), 3);
  CHECK((u.fields.array() >= -0.5).all());
  CHECK((u.fields.array() <= 0.5).all());
  CHECK((u.couplings.array() >= 0.0).all());
  CHECK((u.couplings.array() <= 2.5).all());

  const IsingModel again =
      sample_model(complete, DistSpec::uniform(-0.5, 0.5), DistSpec::uniform(0, 2.5), 3);
  CHECK(u.fields == again.fields);
  CHECK(u.couplings == again.couplings);

  CHECK_THROWS_AS(DistSpec::uniform(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("dist spec parsing") {
  CHECK(DistSpec::parse("constant(0.4)").sample(1, 1, 1) == 0.4);
  CHECK(DistSpec::parse("uniform(0,beta)", 2.5).sample(1, 1, 1) <= 2.5);
  CHECK(std::abs(DistSpec::parse("rademacher_scaled(beta)", 3.0).sample(1, 1, 1)) == 3.0);
  CHECK_THROWS_AS(DistSpec::parse("uniform(1,0)"), std::invalid_argument);
  CHECK_THROWS_AS(DistSpec::parse("uniform(0,beta)"), std::invalid_argument);  // no beta given
  CHECK_THROWS_AS(DistSpec::parse("gauss(0,1)"), std::invalid_argument);
  CHECK_THROWS_AS(DistSpec::parse("constant"), std::invalid_argument);
}

TEST_CASE("scale_model") {
  const Graph g = Graph::from_edges(2, {{0, 1}});
  IsingModel m;
  m.graph = g;
  m.couplings.resize(1);
  m.couplings << 1.0;
  m.fields.resize(2);
  m.fields << 0.3, -0.2;

  const IsingModel half = scale_model(m, 0.5);
  CHECK(half.couplings[0] == 0.5);
  CHECK(half.fields == m.fields);

  const IsingModel zero = scale_model(m, 0.0);
  CHECK(zero.couplings[0] == 0.0);
  CHECK(zero.fields == m.fields);

  const IsingModel one = scale_model(m, 1.0);
  CHECK(one.couplings == m.couplings);
  CHECK(one.fields == m.fields);

  CHECK_THROWS_AS(scale_model(m, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(scale_model(m, 1.1), std::invalid_argument);
}

TEST_CASE("joint_unnormalized") {
  const Graph g = Graph::from_edges(2, {{0, 1}});
  IsingModel m;
  m.graph = g;
  m.couplings.resize(1);
  m.couplings << 0.5;
  m.fields = Eigen::VectorXd::Zero(2);

  SpinConfiguration pp;
  pp.states.resize(2);
  pp.states << 1, 1;
  CHECK(joint_unnormalized(m, pp) == doctest::Approx(std::exp(0.5)).epsilon(1e-12));

  IsingModel zero = m;
  zero.couplings.setZero();
  CHECK(joint_unnormalized(zero, pp) == 1.0);

  IsingModel single;
  single.graph = Graph::from_edges(1, {});
  single.couplings.resize(0);
  single.fields.resize(1);
  single.fields << 0.4;
  SpinConfiguration down;
  down.states.resize(1);
  down.states << -1;
  CHECK(joint_unnormalized(single, down) == doctest::Approx(std::exp(-0.4)).epsilon(1e-12));
}

TEST_CASE("joint is invariant under global spin flip when fields vanish") {
  const Graph g = build_random(8, 2.5, 5);
  const IsingModel m = sample_model(g, DistSpec::constant(0), DistSpec::uniform(-2, 2), 11);
  rng::Stream stream(99);
  for (int trial = 0; trial < 20; ++trial) {
    SpinConfiguration cfg, flipped;
    cfg.states.resize(g.num_nodes);
    for (int i = 0; i < g.num_nodes; ++i) cfg.states[i] = stream.next_unit() < 0.5 ? -1 : 1;
    flipped.states = -cfg.states;
    CHECK(log_joint_unnormalized(m, cfg) ==
          doctest::Approx(log_joint_unnormalized(m, flipped)).epsilon(1e-14));
  }
}

TEST_CASE("model file round trip is exact") {
  const Graph g = build_random(9, 2.8, 17);
  const IsingModel m =
      sample_model(g, DistSpec::uniform(-1, 1), DistSpec::uniform(-2.7, 2.7), 23);
  std::stringstream buffer;
  save_model(m, buffer);
  const IsingModel loaded = load_model(buffer);
  CHECK(loaded.graph.num_nodes == m.graph.num_nodes);
  CHECK(loaded.graph.edges == m.graph.edges);
  CHECK(loaded.fields == m.fields);  // bitwise, 17 significant digits round-trip
  CHECK(loaded.couplings == m.couplings);
}

TEST_CASE("model file parser rejects bad input") {
  std::stringstream bad_header("notising v1 2\n");
  CHECK_THROWS_AS(load_model(bad_header), std::runtime_error);
  std::stringstream missing_node("ising v1 2\nn 0 0.1\n");
  CHECK_THROWS_AS(load_model(missing_node), std::runtime_error);
  std::stringstream dup_node("ising v1 1\nn 0 0.1\nn 0 0.2\n");
  CHECK_THROWS_AS(load_model(dup_node), std::runtime_error);
}
