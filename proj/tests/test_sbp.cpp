#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "sgbp/bethe.hpp"
#include "sgbp/exact.hpp"
#include "sgbp/rng.hpp"
#include "sgbp/sbp.hpp"
#include "sgbp/spline.hpp"

using namespace sgbp;

namespace {

IsingModel two_node(double coupling, double field_0, double field_1) {
  IsingModel m;
  m.graph = Graph::from_edges(2, {{0, 1}});
  m.couplings.resize(1);
  m.couplings << coupling;
  m.fields.resize(2);
  m.fields << field_0, field_1;
  return m;
}

MessageSet constant_messages(int rows, double first_col) {
  MessageSet msgs(rows, 2);
  msgs.col(0).setConstant(first_col);
  msgs.col(1).setConstant(1.0 - first_col);
  return msgs;
}

// Dense reference spline: solve for the piecewise cubic coefficients directly from the
// interpolation, continuity, and natural boundary conditions.
double reference_natural_spline(const std::vector<double>& xs, const std::vector<double>& ys,
                                double x) {
  const int n = static_cast<int>(xs.size());
  const int segments = n - 1;
  const int unknowns = 4 * segments;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(unknowns, unknowns);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(unknowns);
  int row = 0;
  const auto pow_row = [&](int seg, double at, int deriv, double scale) {
    for (int p = 0; p < 4; ++p) {
      double c = scale;
      int q = p;
      for (int d = 0; d < deriv; ++d) c *= q--;
      if (q >= 0) a(row, 4 * seg + p) += c * std::pow(at - xs[seg], q);
    }
  };
  for (int s = 0; s < segments; ++s) {
    pow_row(s, xs[s], 0, 1.0);
    rhs[row++] = ys[s];
    pow_row(s, xs[s + 1], 0, 1.0);
    rhs[row++] = ys[s + 1];
  }
  for (int s = 0; s + 1 < segments; ++s) {
    pow_row(s, xs[s + 1], 1, 1.0);
    pow_row(s + 1, xs[s + 1], 1, -1.0);
    rhs[row++] = 0.0;
    pow_row(s, xs[s + 1], 2, 1.0);
    pow_row(s + 1, xs[s + 1], 2, -1.0);
    rhs[row++] = 0.0;
  }
  pow_row(0, xs[0], 2, 1.0);
  rhs[row++] = 0.0;
  pow_row(segments - 1, xs[segments], 2, 1.0);
  rhs[row++] = 0.0;
  const Eigen::VectorXd coeff = a.colPivHouseholderQr().solve(rhs);
  int seg = segments - 1;
  for (int s = 0; s < segments; ++s)
    if (x < xs[s + 1]) {
      seg = s;
      break;
    }
  double value = 0.0;
  for (int p = 0; p < 4; ++p) value += coeff[4 * seg + p] * std::pow(x - xs[seg], p);
  return value;
}

}  // namespace

TEST_CASE("natural spline weights: constant and linear cases") {
  const std::vector<double> one = {0.3};
  CHECK(natural_spline_weights(one, 0.9)[0] == 1.0);

  const std::vector<double> two = {0.1, 0.2};
  const Eigen::VectorXd w = natural_spline_weights(two, 0.3);
  // Entries 0.40 at 0.1 and 0.50 at 0.2 extrapolate linearly to 0.60 at 0.3.
  CHECK(w[0] * 0.40 + w[1] * 0.50 == doctest::Approx(0.60).epsilon(1e-12));
  CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("natural spline weights match a dense reference solve") {
  const std::vector<std::vector<double>> knot_sets = {{0.0, 0.1, 0.25}, {0.0, 0.1, 0.3, 0.55}};
  const std::vector<std::vector<double>> value_sets = {{0.4, 0.45, 0.61}, {0.5, 0.2, 0.35, 0.4}};
  for (std::size_t c = 0; c < knot_sets.size(); ++c) {
    const auto& xs = knot_sets[c];
    const auto& ys = value_sets[c];
    for (double x : {0.6, 0.8, xs.back() + 0.01, 0.5 * (xs[0] + xs[1])}) {
      const Eigen::VectorXd w = natural_spline_weights(xs, x);
      double value = 0.0;
      for (int k = 0; k < w.size(); ++k) value += w[k] * ys[static_cast<std::size_t>(k)];
      CHECK(value == doctest::Approx(reference_natural_spline(xs, ys, x)).epsilon(1e-9));
    }
  }
}

TEST_CASE("natural spline reproduces linear data exactly") {
  const std::vector<double> xs = {0.0, 0.1, 0.4, 0.7};
  const Eigen::VectorXd w = natural_spline_weights(xs, 1.0);
  double value = 0.0;
  for (int k = 0; k < w.size(); ++k) value += w[k] * (2.0 + 3.0 * xs[static_cast<std::size_t>(k)]);
  CHECK(value == doctest::Approx(5.0).epsilon(1e-10));
}

TEST_CASE("adaptive_step controller") {
  const int rows = 4;
  const MessageSet a = constant_messages(rows, 0.40);
  const MessageSet b = constant_messages(rows, 0.48);  // msg_mse(a, b) = 0.0064 >= 1e-3

  // One fixed point: the loop body never runs.
  std::vector<MessageSet> single = {a};
  CHECK(adaptive_step(single, 0.1, 1e-3) == doctest::Approx(0.1));

  // Last two identical, differing at depth 2: one pass, step = 0.1 + 0.1 * 2.
  std::vector<MessageSet> pattern = {b, a, a};
  CHECK(adaptive_step(pattern, 0.1, 1e-3) == doctest::Approx(0.3));

  // Consecutive fixed points already differ above the threshold.
  std::vector<MessageSet> moving = {a, b};
  CHECK(adaptive_step(moving, 0.1, 1e-3) == doctest::Approx(0.1));

  // All identical: step grows with every available lag.
  std::vector<MessageSet> frozen = {a, a, a};
  CHECK(adaptive_step(frozen, 0.1, 1e-3) == doctest::Approx(0.6));
}

TEST_CASE("extrapolate_messages basics") {
  const MessageSet a = constant_messages(4, 0.40);
  std::vector<MessageSet> hist = {a};
  std::vector<double> zetas = {0.1};
  const MessageSet warm = extrapolate_messages(hist, zetas, 0.2);
  CHECK((warm == a).all());

  // Two identical fixed points extrapolate to the same constant.
  hist = {a, a};
  zetas = {0.1, 0.2};
  const MessageSet constant = extrapolate_messages(hist, zetas, 0.5);
  CHECK((constant - a).abs().maxCoeff() < 1e-12);

  // Linear case: entries 0.40 then 0.50 reach 0.60 at the target; the pair stays
  // normalized so no renormalization correction applies.
  hist = {a, constant_messages(4, 0.50)};
  const MessageSet linear = extrapolate_messages(hist, zetas, 0.3);
  CHECK(linear(0, 0) == doctest::Approx(0.60).epsilon(1e-12));
  CHECK(linear(0, 1) == doctest::Approx(0.40).epsilon(1e-12));

  // Steep history: the clamp keeps entries inside (0, 1) and rows normalized.
  hist = {constant_messages(4, 0.50), constant_messages(4, 0.05)};
  const MessageSet clamped = extrapolate_messages(hist, zetas, 1.0);
  CHECK((clamped > 0.0).all());
  CHECK((clamped < 1.0).all());
  CHECK(((clamped.col(0) + clamped.col(1)) - 1.0).abs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(extrapolate_messages(hist, zetas, 0.15), std::invalid_argument);
}

TEST_CASE("zero-field attractive models stay exactly uniform") {
  const Graph g = build_grid(4, 4);
  const IsingModel m = sample_model(g, DistSpec::constant(0), DistSpec::uniform(0.5, 3.0), 5);
  const SbpResult res = run_sbp(m);
  CHECK(res.trace.reached_one);
  CHECK(res.trace.zetas.front() == 0.0);
  CHECK((res.pseudomarginals.singles == 0.5).all());
  for (const MessageSet& fp : res.trace.fixed_points) CHECK((fp == 0.5).all());
}

TEST_CASE("theta zero general grid: exact marginals in a handful of sweeps") {
  const Graph g = build_grid(5, 5);
  const IsingModel m = sample_model(g, DistSpec::constant(0), DistSpec::rademacher_scaled(1), 8);
  const SbpResult res = run_sbp(m);
  CHECK(res.trace.reached_one);
  CHECK(res.trace.total_sweeps <= 10);
  const ExactSingles exact = eliminate_singles(m);
  CHECK((res.pseudomarginals.singles.col(1) - exact.singles.col(1)).abs().maxCoeff() < 1e-6);
}

TEST_CASE("two-node trees reach the end of the path") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    rng::Stream stream(seed);
    const double coupling = -2.0 + 4.0 * stream.next_unit();
    const IsingModel m =
        two_node(coupling, -1.0 + 2.0 * stream.next_unit(), -1.0 + 2.0 * stream.next_unit());
    SbpConfig config;
    config.schedule_seed = seed;
    const SbpResult res = run_sbp(m, config);
    CHECK(res.trace.reached_one);
    const ExactResult exact = enumerate_exact(m);
    CHECK((res.pseudomarginals.singles - exact.singles).abs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("trace invariants") {
  const Graph g = build_grid(4, 4);
  const IsingModel m =
      sample_model(g, DistSpec::uniform(-0.5, 0.5), DistSpec::uniform(-1.5, 1.5), 19);
  SbpConfig config;
  config.schedule_seed = 3;
  const SbpResult res = run_sbp(m, config);
  const SbpTrace& trace = res.trace;

  REQUIRE(!trace.zetas.empty());
  CHECK(trace.zetas.front() == 0.0);
  for (std::size_t k = 1; k < trace.zetas.size(); ++k) {
    CHECK(trace.zetas[k] > trace.zetas[k - 1]);
    CHECK(trace.zetas[k] <= 1.0);
  }
  CHECK(trace.fixed_points.size() <= trace.zetas.size());
  for (std::size_t p = 0; p < trace.fixed_points.size(); ++p) {
    const IsingModel scaled = scale_model(m, trace.zetas[p]);
    CHECK(residual(scaled, trace.fixed_points[p]) <= 10 * config.bp_tolerance);
  }
  CHECK(trace.total_sweeps <=
        static_cast<long long>(trace.zetas.size()) * config.bp_max_sweeps);

  const SbpResult repeat = run_sbp(m, config);
  REQUIRE(repeat.trace.zetas.size() == trace.zetas.size());
  for (std::size_t k = 0; k < trace.zetas.size(); ++k)
    CHECK(repeat.trace.zetas[k] == trace.zetas[k]);
  CHECK((repeat.pseudomarginals.singles == res.pseudomarginals.singles).all());
}

TEST_CASE("monotone means and decreasing free energy on attractive models") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Graph g = build_grid(4, 4);
    const IsingModel m =
        sample_model(g, DistSpec::constant(0.3), DistSpec::uniform(0, 2), seed + 60);
    SbpConfig config;
    config.schedule_seed = seed;
    const SbpResult res = run_sbp(m, config);
    REQUIRE(res.trace.fixed_points.size() >= 2);

    Eigen::VectorXd prev_means;
    double prev_fb = 0.0;
    for (std::size_t p = 0; p < res.trace.fixed_points.size(); ++p) {
      const IsingModel scaled = scale_model(m, res.trace.zetas[p]);
      const Pseudomarginals pm = extract_pseudomarginals(scaled, res.trace.fixed_points[p]);
      const MeansAndCorrelations mc = mean_and_correlation(pm);
      const double fb = bethe_free_energy(scaled, pm).free_energy;
      if (p > 0) {
        CHECK((mc.means - prev_means).minCoeff() >= -1e-8);
        CHECK(fb <= prev_fb + 1e-8);
      }
      prev_means = mc.means;
      prev_fb = fb;
    }
  }
}

TEST_CASE("fixed-step mode stops at the model budget") {
  const Graph g = build_grid(3, 3);
  const IsingModel m = sample_model(g, DistSpec::uniform(-0.3, 0.3), DistSpec::uniform(0, 0.5), 2);
  SbpConfig config;
  config.adaptive = false;
  config.max_models = 5;
  const SbpResult res = run_sbp(m, config);
  CHECK(res.trace.zetas.size() == 5);
  CHECK(res.trace.terminal_zeta == doctest::Approx(0.4));
  CHECK_FALSE(res.trace.reached_one);
}

TEST_CASE("retry mode bisects instead of stopping at the first failure") {
  // Strongly coupled general grid where the plain driver usually stops short of 1.
  const Graph g = build_grid(5, 5);
  const IsingModel m =
      sample_model(g, DistSpec::constant(0.4), DistSpec::rademacher_scaled(1), 9001);
  SbpConfig plain;
  plain.schedule_seed = 1;
  const SbpResult base = run_sbp(m, plain);
  REQUIRE_FALSE(base.trace.reached_one);

  SbpConfig retry = plain;
  retry.retry_smaller_step = true;
  retry.max_models = 20;
  const SbpResult res = run_sbp(m, retry);
  CHECK(res.trace.terminal_zeta >= base.trace.terminal_zeta);
  for (std::size_t k = 1; k < res.trace.zetas.size(); ++k)
    CHECK(res.trace.zetas[k] > res.trace.zetas[k - 1]);
}

TEST_CASE("edgeless models pass straight through the path") {
  IsingModel m;
  m.graph = build_grid(1, 1);
  m.couplings.resize(0);
  m.fields.resize(1);
  m.fields << 0.4;
  const SbpResult res = run_sbp(m);
  CHECK(res.trace.reached_one);
  const double expect = std::exp(0.4) / (std::exp(0.4) + std::exp(-0.4));
  CHECK(res.pseudomarginals.singles(0, 1) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("config validation") {
  const IsingModel m = two_node(0.5, 0.1, -0.1);
  SbpConfig bad;
  bad.step_init = 0.0;
  CHECK_THROWS_AS(run_sbp(m, bad), std::invalid_argument);
  SbpConfig bad2;
  bad2.max_models = 0;
  CHECK_THROWS_AS(run_sbp(m, bad2), std::invalid_argument);
}
