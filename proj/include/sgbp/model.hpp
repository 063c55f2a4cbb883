#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>

#include "sgbp/graph.hpp"

namespace sgbp {

// Binary pairwise model over {-1, +1} spins: one coupling J per edge, one field theta
// per node. Pairwise potential exp(J x_i x_j), local potential exp(theta x_i).
struct IsingModel {
  Graph graph;
  Eigen::VectorXd couplings;  // J_ij, indexed like graph.edges
  Eigen::VectorXd fields;     // theta_i, indexed by node
};

struct SpinConfiguration {
  Eigen::VectorXi states;  // entries in {-1, +1}
};

// Scalar distribution descriptor: constant(c), uniform(a,b), rademacher_scaled(c).
// The textual form may use the symbol `beta` for any numeric slot, resolved at parse time.
class DistSpec {
 public:
  static DistSpec constant(double c);
  static DistSpec uniform(double a, double b);
  static DistSpec rademacher_scaled(double c);
  static DistSpec parse(const std::string& text,
                        double beta = std::numeric_limits<double>::quiet_NaN());

  // Pure function of (seed, stream, counter).
  double sample(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) const;

  bool is_constant() const { return kind_ == Kind::kConstant; }
  double constant_value() const { return a_; }
  std::string to_string() const;

 private:
  enum class Kind { kConstant, kUniform, kRademacherScaled };
  DistSpec(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}
  Kind kind_;
  double a_ = 0.0;
  double b_ = 0.0;
};

void validate_model(const IsingModel& model);  // sizes match, all parameters finite

// One field draw per node, one coupling draw per edge; counter-based, so the result is
// independent of evaluation order.
IsingModel sample_model(const Graph& graph, const DistSpec& field_spec,
                        const DistSpec& coupling_spec, std::uint64_t seed);

// Homotopy scaling: couplings multiplied by zeta in [0, 1], fields unchanged
// (identical to raising the pairwise potentials to the power zeta).
IsingModel scale_model(const IsingModel& model, double zeta);

double log_joint_unnormalized(const IsingModel& model, const SpinConfiguration& config);
double joint_unnormalized(const IsingModel& model, const SpinConfiguration& config);

// Text format, one model per file:
//   ising v1 <num_nodes>
//   n <i> <theta_i>          (one line per node)
//   e <i> <j> <J_ij>         (one line per edge)
// Reals are printed with 17 significant digits and round-trip exactly.
void save_model(const IsingModel& model, std::ostream& out);
void save_model_file(const IsingModel& model, const std::string& path);
IsingModel load_model(std::istream& in);
IsingModel load_model_file(const std::string& path);

}  // namespace sgbp
