#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sgbp/bethe.hpp"
#include "sgbp/bp.hpp"
#include "sgbp/exact.hpp"
#include "sgbp/gibbs.hpp"
#include "sgbp/sbp.hpp"

namespace sgbp {

struct GraphSpec {
  enum class Family { kGrid, kComplete, kRandom };
  Family family = Family::kGrid;
  int rows = 0, cols = 0;   // grid
  int n = 0;                // complete / random
  double avg_degree = 0.0;  // random
  bool resample_connected = false;

  // Random-family graphs are drawn per model from the given seed; grid/complete ignore it.
  Graph build(std::uint64_t seed) const;
  std::string label() const;
};

struct ExperimentConfig {
  std::string name = "experiment";
  GraphSpec graph;
  std::string field_spec = "constant(0)";
  std::string coupling_spec = "constant(0)";
  std::vector<double> betas;     // substituted for the `beta` symbol in the specs; empty
                                 // means one pass without substitution
  int models_per_setting = 100;  // L
  int inits_per_model = 100;     // random initializations for bp / bp_damped
  std::vector<std::string> methods;  // subset of bp, bp_damped, sbp, gibbs, bethe_min, exact

  BpOptions bp{1000, 0.0, 1e-10, 0};
  BpOptions bp_damped{10000, 0.9, 1e-10, 0};
  SbpConfig sbp;
  long long gibbs_updates = 100000;
  long long gibbs_burn_in = -1;  // -1: 10% of gibbs_updates
  BetheMinOptions bethe_min;
  std::uint64_t master_seed = 0;
  std::string output_prefix;  // empty: no files written
  int threads = 0;            // 0: hardware concurrency

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
};

// One CSV row. Aggregate rows reuse the schema with model_seed = -1 and the method name
// suffixed by the statistic (":mean", ":std", ":mean_permodel").
struct ResultRow {
  std::string setting;
  double beta = std::numeric_limits<double>::quiet_NaN();
  double theta = std::numeric_limits<double>::quiet_NaN();
  bool aggregate = false;
  std::uint64_t model_seed = 0;
  std::string method;
  double mse = std::numeric_limits<double>::quiet_NaN();
  double mse_b = std::numeric_limits<double>::quiet_NaN();
  double sweeps = std::numeric_limits<double>::quiet_NaN();
  double converged = std::numeric_limits<double>::quiet_NaN();
  double zeta_final = std::numeric_limits<double>::quiet_NaN();
  double fb = std::numeric_limits<double>::quiet_NaN();
};

struct RunReport {
  std::vector<ResultRow> model_rows;
  std::vector<ResultRow> aggregate_rows;

  bool empty() const { return model_rows.empty() && aggregate_rows.empty(); }
  // Aggregate lookup, e.g. find_aggregate("sbp:mean", 2.5); beta NaN matches NaN.
  const ResultRow* find_aggregate(const std::string& method_stat, double beta) const;
};

// (2 / N) * sum_i |exact_i(+1) - approx_i(+1)|^2
double mse(const Eigen::VectorXd& exact_plus, const Eigen::VectorXd& approx_plus);

// Runs every method on L seeded models per beta value; writes <prefix>.csv and
// <prefix>_meta.json when output_prefix is set. Deterministic per master seed.
RunReport run_experiment(const ExperimentConfig& config);

void write_csv(const RunReport& report, std::ostream& out);

struct TraceRow {
  int step = 0;
  double zeta = 0.0;
  long long cum_sweeps = 0;
  double mse_exact = 0.0;  // vs exact marginals
  double mse_bethe = 0.0;  // vs the approximate global Bethe minimum of the target model
  double fb = 0.0;         // Bethe free energy at this fixed point, under its own zeta
};

// One row per converged zeta along the homotopy path of a single model.
std::vector<TraceRow> trace_experiment(const IsingModel& model, const SbpConfig& config);

void write_trace_csv(std::span<const TraceRow> rows, std::ostream& out);

}  // namespace sgbp
