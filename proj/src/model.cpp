#include "sgbp/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "sgbp/rng.hpp"

namespace sgbp {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_number(const std::string& token, double beta) {
  const std::string t = trim(token);
  if (t == "beta") {
    if (std::isnan(beta))
      throw std::invalid_argument("dist spec references beta but no beta value was given");
    return beta;
  }
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("dist spec: bad number '" + t + "'");
  }
  if (pos != t.size()) throw std::invalid_argument("dist spec: bad number '" + t + "'");
  return value;
}

void format_real(char* buf, std::size_t n, double v) { std::snprintf(buf, n, "%.17g", v); }

}  // namespace

DistSpec DistSpec::constant(double c) { return DistSpec(Kind::kConstant, c, c); }

DistSpec DistSpec::uniform(double a, double b) {
  if (a > b) throw std::invalid_argument("uniform spec: need a <= b");
  return DistSpec(Kind::kUniform, a, b);
}

DistSpec DistSpec::rademacher_scaled(double c) { return DistSpec(Kind::kRademacherScaled, c, c); }

DistSpec DistSpec::parse(const std::string& text, double beta) {
  const std::string s = trim(text);
  const std::size_t open = s.find('(');
  if (open == std::string::npos || s.back() != ')')
    throw std::invalid_argument("dist spec: expected name(args), got '" + text + "'");
  const std::string name = trim(s.substr(0, open));
  const std::string args = s.substr(open + 1, s.size() - open - 2);
  std::vector<std::string> parts;
  std::stringstream ss(args);
  std::string part;
  while (std::getline(ss, part, ',')) parts.push_back(part);
  if (name == "constant") {
    if (parts.size() != 1) throw std::invalid_argument("constant spec takes one argument");
    return constant(parse_number(parts[0], beta));
  }
  if (name == "uniform") {
    if (parts.size() != 2) throw std::invalid_argument("uniform spec takes two arguments");
    return uniform(parse_number(parts[0], beta), parse_number(parts[1], beta));
  }
  if (name == "rademacher_scaled" || name == "rademacher") {
    if (parts.size() != 1) throw std::invalid_argument("rademacher_scaled spec takes one argument");
    return rademacher_scaled(parse_number(parts[0], beta));
  }
  throw std::invalid_argument("dist spec: unknown kind '" + name + "'");
}

double DistSpec::sample(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) const {
  switch (kind_) {
    case Kind::kConstant:
      return a_;
    case Kind::kUniform:
      return a_ + (b_ - a_) * rng::unit(seed, stream, counter);
    case Kind::kRademacherScaled:
      return rng::unit(seed, stream, counter) < 0.5 ? -a_ : a_;
  }
  return a_;
}

std::string DistSpec::to_string() const {
  char buf[64];
  std::string out;
  switch (kind_) {
    case Kind::kConstant:
      format_real(buf, sizeof buf, a_);
      out = std::string("constant(") + buf + ")";
      break;
    case Kind::kUniform: {
      format_real(buf, sizeof buf, a_);
      out = std::string("uniform(") + buf + ",";
      format_real(buf, sizeof buf, b_);
      out += std::string(buf) + ")";
      break;
    }
    case Kind::kRademacherScaled:
      format_real(buf, sizeof buf, a_);
      out = std::string("rademacher_scaled(") + buf + ")";
      break;
  }
  return out;
}

void validate_model(const IsingModel& model) {
  if (model.couplings.size() != model.graph.num_edges())
    throw std::invalid_argument("model: coupling count does not match edge count");
  if (model.fields.size() != model.graph.num_nodes)
    throw std::invalid_argument("model: field count does not match node count");
  if (!model.couplings.allFinite() || !model.fields.allFinite())
    throw std::invalid_argument("model: parameters must be finite");
}

IsingModel sample_model(const Graph& graph, const DistSpec& field_spec,
                        const DistSpec& coupling_spec, std::uint64_t seed) {
  IsingModel model;
  model.graph = graph;
  model.fields.resize(graph.num_nodes);
  model.couplings.resize(graph.num_edges());
  for (int i = 0; i < graph.num_nodes; ++i)
    model.fields[i] = field_spec.sample(seed, rng::kStreamFields, static_cast<std::uint64_t>(i));
  for (int e = 0; e < graph.num_edges(); ++e)
    model.couplings[e] =
        coupling_spec.sample(seed, rng::kStreamCouplings, static_cast<std::uint64_t>(e));
  validate_model(model);
  return model;
}

IsingModel scale_model(const IsingModel& model, double zeta) {
  if (!(zeta >= 0.0 && zeta <= 1.0))
    throw std::invalid_argument("scale_model: zeta must lie in [0, 1]");
  IsingModel scaled = model;
  scaled.couplings *= zeta;
  return scaled;
}

double log_joint_unnormalized(const IsingModel& model, const SpinConfiguration& config) {
  if (config.states.size() != model.graph.num_nodes)
    throw std::invalid_argument("configuration length does not match model");
  double energy = 0.0;
  for (int e = 0; e < model.graph.num_edges(); ++e) {
    const auto [i, j] = model.graph.edges[static_cast<std::size_t>(e)];
    energy += model.couplings[e] * config.states[i] * config.states[j];
  }
  for (int i = 0; i < model.graph.num_nodes; ++i) energy += model.fields[i] * config.states[i];
  return energy;
}

double joint_unnormalized(const IsingModel& model, const SpinConfiguration& config) {
  return std::exp(log_joint_unnormalized(model, config));
}

void save_model(const IsingModel& model, std::ostream& out) {
  validate_model(model);
  char buf[64];
  out << "ising v1 " << model.graph.num_nodes << "\n";
  for (int i = 0; i < model.graph.num_nodes; ++i) {
    format_real(buf, sizeof buf, model.fields[i]);
    out << "n " << i << " " << buf << "\n";
  }
  for (int e = 0; e < model.graph.num_edges(); ++e) {
    const auto [i, j] = model.graph.edges[static_cast<std::size_t>(e)];
    format_real(buf, sizeof buf, model.couplings[e]);
    out << "e " << i << " " << j << " " << buf << "\n";
  }
}

void save_model_file(const IsingModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  save_model(model, out);
}

IsingModel load_model(std::istream& in) {
  std::string tag, version;
  int num_nodes = 0;
  if (!(in >> tag >> version >> num_nodes) || tag != "ising" || version != "v1" || num_nodes < 1)
    throw std::runtime_error("model file: bad header");

  std::vector<double> fields(static_cast<std::size_t>(num_nodes), 0.0);
  std::vector<char> field_seen(static_cast<std::size_t>(num_nodes), 0);
  std::vector<std::pair<int, int>> edges;
  std::vector<double> couplings;

  std::string kind;
  while (in >> kind) {
    if (kind == "n") {
      int i;
      double theta;
      if (!(in >> i >> theta) || i < 0 || i >= num_nodes)
        throw std::runtime_error("model file: bad node line");
      if (field_seen[static_cast<std::size_t>(i)])
        throw std::runtime_error("model file: duplicate node line");
      field_seen[static_cast<std::size_t>(i)] = 1;
      fields[static_cast<std::size_t>(i)] = theta;
    } else if (kind == "e") {
      int i, j;
      double coupling;
      if (!(in >> i >> j >> coupling)) throw std::runtime_error("model file: bad edge line");
      edges.emplace_back(i, j);
      couplings.push_back(coupling);
    } else {
      throw std::runtime_error("model file: unknown line kind '" + kind + "'");
    }
  }
  for (char seen : field_seen)
    if (!seen) throw std::runtime_error("model file: missing node line");

  // from_edges sorts; keep couplings aligned by sorting keyed pairs the same way.
  std::vector<std::size_t> perm(edges.size());
  for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
  auto canon = [](std::pair<int, int> e) {
    return e.first < e.second ? e : std::pair<int, int>{e.second, e.first};
  };
  std::sort(perm.begin(), perm.end(),
            [&](std::size_t a, std::size_t b) { return canon(edges[a]) < canon(edges[b]); });

  IsingModel model;
  model.graph = Graph::from_edges(num_nodes, edges);
  model.fields = Eigen::Map<const Eigen::VectorXd>(fields.data(), num_nodes);
  model.couplings.resize(static_cast<Eigen::Index>(couplings.size()));
  for (std::size_t k = 0; k < perm.size(); ++k)
    model.couplings[static_cast<Eigen::Index>(k)] = couplings[perm[k]];
  validate_model(model);
  return model;
}

IsingModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  return load_model(in);
}

}  // namespace sgbp
