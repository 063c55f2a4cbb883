// Command-line front end: gen (write model files), infer (one model, one method),
// bench (batch experiment from a JSON config), trace (homotopy path of one model).
// Exit codes: 0 success, 2 configuration error, 3 infeasible exact inference.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgbp/errors.hpp"
#include "sgbp/harness.hpp"
#include "sgbp/rng.hpp"

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

sgbp::GraphSpec parse_graph_arg(const std::string& text) {
  // grid:R,C | complete:N | random:N,DEG
  sgbp::GraphSpec spec;
  const auto colon = text.find(':');
  const std::string family = text.substr(0, colon);
  std::vector<std::string> args;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string part;
    while (std::getline(ss, part, ',')) args.push_back(part);
  }
  if (family == "grid" && args.size() == 2) {
    spec.family = sgbp::GraphSpec::Family::kGrid;
    spec.rows = std::stoi(args[0]);
    spec.cols = std::stoi(args[1]);
    return spec;
  }
  if (family == "complete" && args.size() == 1) {
    spec.family = sgbp::GraphSpec::Family::kComplete;
    spec.n = std::stoi(args[0]);
    return spec;
  }
  if (family == "random" && args.size() == 2) {
    spec.family = sgbp::GraphSpec::Family::kRandom;
    spec.n = std::stoi(args[0]);
    spec.avg_degree = std::stod(args[1]);
    return spec;
  }
  throw std::invalid_argument("--graph expects grid:R,C | complete:N | random:N,DEG");
}

struct GenArgs {
  std::string graph;
  std::string field = "constant(0)";
  std::string coupling = "constant(0)";
  double beta = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
  int count = 1;
  std::string out_prefix = "model";
  bool connected = false;
};

int run_gen(const GenArgs& args) {
  sgbp::GraphSpec spec = parse_graph_arg(args.graph);
  spec.resample_connected = args.connected;
  const sgbp::DistSpec field = sgbp::DistSpec::parse(args.field, args.beta);
  const sgbp::DistSpec coupling = sgbp::DistSpec::parse(args.coupling, args.beta);
  for (int k = 0; k < args.count; ++k) {
    const std::uint64_t model_seed =
        args.count == 1 ? args.seed
                        : sgbp::rng::derive(args.seed, sgbp::rng::kStreamModelSeeds,
                                            static_cast<std::uint64_t>(k));
    const sgbp::Graph graph =
        spec.build(sgbp::rng::derive(model_seed, sgbp::rng::kStreamGraphSeeds, 0));
    const sgbp::IsingModel model = sgbp::sample_model(graph, field, coupling, model_seed);
    std::string path = args.out_prefix;
    if (args.count > 1) path += "_" + std::to_string(k);
    path += ".ising";
    sgbp::save_model_file(model, path);
    std::cout << path << " seed=" << model_seed << "\n";
  }
  return 0;
}

struct InferArgs {
  std::string model_path;
  std::string method = "sbp";
  std::uint64_t seed = 0;
  int max_sweeps = -1;     // -1: per-method default (bp/sbp 1000, bp_damped 10000)
  double damping = -1.0;   // -1: per-method default (bp 0, bp_damped 0.9)
  double tolerance = 1e-10;
  long long gibbs_updates = 100000;
  long long gibbs_burn_in = -1;
  int restarts = 10;
};

int run_infer(const InferArgs& args) {
  const sgbp::IsingModel model = sgbp::load_model_file(args.model_path);
  json out;
  out["method"] = args.method;
  const auto put_marginals = [&out](const Eigen::VectorXd& plus) {
    std::vector<double> v(plus.data(), plus.data() + plus.size());
    out["marginals_plus"] = v;
  };

  const bool damped = args.method == "bp_damped";
  if (args.method == "bp" || damped) {
    sgbp::BpOptions opts;
    opts.max_sweeps = args.max_sweeps > 0 ? args.max_sweeps : (damped ? 10000 : 1000);
    opts.damping = args.damping >= 0.0 ? args.damping : (damped ? 0.9 : 0.0);
    opts.tolerance = args.tolerance;
    opts.schedule_seed = args.seed;
    const sgbp::BpOutcome outcome =
        sgbp::run_bp(model, sgbp::init_messages_random(model.graph, args.seed), opts);
    const sgbp::Pseudomarginals p = sgbp::extract_pseudomarginals(model, outcome.messages);
    put_marginals(p.singles.col(1).matrix());
    out["converged"] = outcome.converged;
    out["sweeps"] = outcome.sweeps_used;
    out["fb"] = sgbp::bethe_free_energy(model, p).free_energy;
  } else if (args.method == "sbp") {
    sgbp::SbpConfig config;
    config.bp_max_sweeps = args.max_sweeps > 0 ? args.max_sweeps : 1000;
    config.bp_tolerance = args.tolerance;
    config.schedule_seed = args.seed;
    const sgbp::SbpResult res = sgbp::run_sbp(model, config);
    put_marginals(res.pseudomarginals.singles.col(1).matrix());
    out["reached_one"] = res.trace.reached_one;
    out["zeta_final"] = res.trace.terminal_zeta;
    out["sweeps"] = res.trace.total_sweeps;
    const sgbp::IsingModel terminal = sgbp::scale_model(model, res.trace.terminal_zeta);
    out["fb"] = sgbp::bethe_free_energy(terminal, res.pseudomarginals).free_energy;
  } else if (args.method == "gibbs") {
    const long long burn =
        args.gibbs_burn_in < 0 ? args.gibbs_updates / 10 : args.gibbs_burn_in;
    const sgbp::GibbsEstimate est =
        sgbp::run_gibbs(model, args.gibbs_updates, burn, args.seed);
    put_marginals(est.singles_plus);
    out["updates"] = est.total_updates;
    out["burn_in"] = est.burn_in_updates;
  } else if (args.method == "bethe_min") {
    const sgbp::BetheMinResult res =
        sgbp::approx_global_bethe_min(model, args.restarts, args.seed);
    put_marginals(res.pseudomarginals.singles.col(1).matrix());
    out["fb"] = res.value.free_energy;
    out["from_restarts"] = res.from_restarts;
    out["converged_restarts"] = res.converged_restarts;
  } else if (args.method == "exact") {
    const sgbp::ExactResult res = sgbp::eliminate_exact(model);
    put_marginals(res.singles.col(1).matrix());
    out["log_z"] = res.log_z;
    out["fb"] = -res.log_z;
  } else {
    throw std::invalid_argument("infer: unknown method '" + args.method + "'");
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct TraceArgs {
  std::string model_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int max_sweeps = 1000;
  double step_init = 0.1;
  bool fixed_step = false;
};

int run_trace(const TraceArgs& args) {
  const sgbp::IsingModel model = sgbp::load_model_file(args.model_path);
  sgbp::SbpConfig config;
  config.bp_max_sweeps = args.max_sweeps;
  config.schedule_seed = args.seed;
  config.step_init = args.step_init;
  config.adaptive = !args.fixed_step;
  const std::vector<sgbp::TraceRow> rows = sgbp::trace_experiment(model, config);
  if (args.out_path.empty()) {
    sgbp::write_trace_csv(rows, std::cout);
  } else {
    std::ofstream out(args.out_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + args.out_path);
    sgbp::write_trace_csv(rows, out);
    std::cout << args.out_path << ": " << rows.size() << " steps, terminal zeta "
              << fmt17(rows.empty() ? 0.0 : rows.back().zeta) << "\n";
  }
  return 0;
}

int run_bench(const std::string& config_path) {
  const sgbp::ExperimentConfig config = sgbp::ExperimentConfig::from_json_file(config_path);
  const sgbp::RunReport report = sgbp::run_experiment(config);
  if (config.output_prefix.empty()) {
    sgbp::write_csv(report, std::cout);
  } else {
    std::cout << config.output_prefix << ".csv: " << report.model_rows.size()
              << " model rows, " << report.aggregate_rows.size() << " aggregate rows\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-guided belief propagation toolkit for Ising models"};
  app.require_subcommand(1);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Generate random Ising model files");
  gen->add_option("--graph", gen_args.graph, "grid:R,C | complete:N | random:N,DEG")->required();
  gen->add_option("--field", gen_args.field, "field spec, e.g. constant(0.4)");
  gen->add_option("--coupling", gen_args.coupling, "coupling spec, e.g. rademacher_scaled(1)");
  gen->add_option("--beta", gen_args.beta, "value substituted for `beta` in the specs");
  gen->add_option("--seed", gen_args.seed, "master seed");
  gen->add_option("--count", gen_args.count, "number of models");
  gen->add_option("--out", gen_args.out_prefix, "output path prefix");
  gen->add_flag("--connected", gen_args.connected, "resample random graphs until connected");

  InferArgs infer_args;
  auto* infer = app.add_subcommand("infer", "Run one method on one model, print JSON marginals");
  infer->add_option("--model", infer_args.model_path, "model file")->required();
  infer->add_option("--method", infer_args.method, "bp|bp_damped|sbp|gibbs|bethe_min|exact");
  infer->add_option("--seed", infer_args.seed, "seed for schedules / initializations");
  infer->add_option("--max-sweeps", infer_args.max_sweeps, "BP sweep budget");
  infer->add_option("--damping", infer_args.damping, "damping epsilon in [0,1)");
  infer->add_option("--tolerance", infer_args.tolerance, "convergence tolerance");
  infer->add_option("--gibbs-updates", infer_args.gibbs_updates, "Gibbs single-site updates");
  infer->add_option("--gibbs-burn-in", infer_args.gibbs_burn_in, "Gibbs burn-in (-1: 10%)");
  infer->add_option("--restarts", infer_args.restarts, "bethe_min restarts");

  std::string bench_config;
  auto* bench = app.add_subcommand("bench", "Run a batch experiment from a JSON config");
  bench->add_option("--config", bench_config, "JSON config file")->required();

  TraceArgs trace_args;
  auto* trace = app.add_subcommand("trace", "Emit the homotopy path of one model as CSV");
  trace->add_option("--model", trace_args.model_path, "model file")->required();
  trace->add_option("--out", trace_args.out_path, "output CSV (default: stdout)");
  trace->add_option("--seed", trace_args.seed, "schedule seed");
  trace->add_option("--max-sweeps", trace_args.max_sweeps, "BP sweep budget per step");
  trace->add_option("--step-init", trace_args.step_init, "base step size");
  trace->add_flag("--fixed-step", trace_args.fixed_step, "disable the adaptive step controller");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*gen) return run_gen(gen_args);
    if (*infer) return run_infer(infer_args);
    if (*bench) return run_bench(bench_config);
    if (*trace) return run_trace(trace_args);
  } catch (const sgbp::InfeasibleExactError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
