#include "pdd/harness.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pdd {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("config: " + msg); }

void allow_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& keys) {
  if (!node.IsMap()) fail(where + " must be a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!keys.count(key)) fail("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& where) {
  if (!node.IsScalar()) fail(where + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::BadConversion&) {
    fail(where + " has the wrong type ('" + node.Scalar() + "')");
  }
}

template <class T>
void read(const YAML::Node& parent, const char* key, T& out, const std::string& where) {
  if (const YAML::Node n = parent[key]) out = scalar<T>(n, where + "." + key);
}

template <class T>
std::vector<T> sequence(const YAML::Node& node, const std::string& where) {
  if (!node.IsSequence()) fail(where + " must be a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(scalar<T>(node[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

ProblemSpec parse_problem(const YAML::Node& node) {
  allow_keys(node, "problem", {"name", "dim", "seed", "a", "b", "scale", "diag", "Q"});
  ProblemSpec p;
  read(node, "name", p.name, "problem");
  read(node, "dim", p.dim, "problem");
  read(node, "seed", p.seed, "problem");
  read(node, "a", p.a, "problem");
  read(node, "b", p.b, "problem");
  read(node, "scale", p.scale, "problem");
  if (node["diag"]) p.diag = sequence<double>(node["diag"], "problem.diag");
  if (const YAML::Node q = node["Q"]) {
    if (!q.IsSequence()) fail("problem.Q must be a list of rows");
    for (std::size_t i = 0; i < q.size(); ++i) p.Q.push_back(sequence<double>(q[i], "problem.Q[" + std::to_string(i) + "]"));
  }
  if (!p.diag.empty()) p.dim = static_cast<int>(p.diag.size());
  if (!p.Q.empty()) p.dim = static_cast<int>(p.Q.size());
  return p;
}

X0Spec parse_x0(const YAML::Node& node) {
  X0Spec x0;
  if (node.IsSequence()) {
    x0.values = sequence<double>(node, "x0");
  } else if (node.IsMap()) {
    allow_keys(node, "x0", {"fill"});
    if (!node["fill"]) fail("x0 mapping needs 'fill'");
    x0.fill = scalar<double>(node["fill"], "x0.fill");
  } else {
    x0.fill = scalar<double>(node, "x0");
  }
  return x0;
}

OptimizerSpec parse_optimizer(const YAML::Node& node, std::size_t i) {
  const std::string where = "optimizers[" + std::to_string(i) + "]";
  allow_keys(node, where, {"method", "label", "params", "preconditioner"});
  OptimizerSpec o;
  if (!node["method"]) fail(where + " needs a method");
  read(node, "method", o.method, where);
  read(node, "label", o.label, where);
  read(node, "preconditioner", o.preconditioner, where);
  if (const YAML::Node params = node["params"]) {
    if (!params.IsMap()) fail(where + ".params must be a mapping");
    for (const auto& kv : params) {
      const std::string key = kv.first.as<std::string>();
      o.params[key] = scalar<double>(kv.second, where + ".params." + key);
    }
  }
  if (o.label.empty()) o.label = o.method;
  return o;
}

ToynetConfig parse_toynet(const YAML::Node& node) {
  allow_keys(node, "toynet", {"data_seed", "n", "d_in", "k", "spread", "hidden", "epochs", "batch_size", "seeds",
                              "methods", "hyper"});
  ToynetConfig t;
  read(node, "data_seed", t.data_seed, "toynet");
  read(node, "n", t.n, "toynet");
  read(node, "d_in", t.d_in, "toynet");
  read(node, "k", t.k, "toynet");
  read(node, "spread", t.spread, "toynet");
  read(node, "epochs", t.epochs, "toynet");
  read(node, "batch_size", t.batch_size, "toynet");
  if (node["hidden"]) {
    const auto h = sequence<int>(node["hidden"], "toynet.hidden");
    if (h.size() != 2) fail("toynet.hidden needs two sizes");
    t.hidden1 = h[0];
    t.hidden2 = h[1];
  }
  if (node["seeds"]) t.seeds = sequence<std::uint64_t>(node["seeds"], "toynet.seeds");
  if (node["methods"]) {
    t.methods.clear();
    for (const std::string& m : sequence<std::string>(node["methods"], "toynet.methods")) {
      t.methods.push_back(stochastic_method_from_string(m));
    }
  }
  if (const YAML::Node h = node["hyper"]) {
    StochasticHyper& s = t.hyper;
    allow_keys(h, "toynet.hyper",
               {"sgd_tau", "nag_tau", "nag_beta", "pdd_tau", "pdd_sigma", "pdd_epsilon", "pdd_omega", "pdd_A",
                "igahd_tau", "igahd_alpha", "igahd_beta1", "adam_lr", "adam_beta1", "adam_beta2", "adam_eps"});
    const std::string w = "toynet.hyper";
    read(h, "sgd_tau", s.sgd_tau, w);
    read(h, "nag_tau", s.nag_tau, w);
    read(h, "nag_beta", s.nag_beta, w);
    read(h, "pdd_tau", s.pdd_tau, w);
    read(h, "pdd_sigma", s.pdd_sigma, w);
    read(h, "pdd_epsilon", s.pdd_epsilon, w);
    read(h, "pdd_omega", s.pdd_omega, w);
    read(h, "pdd_A", s.pdd_A, w);
    read(h, "igahd_tau", s.igahd_tau, w);
    read(h, "igahd_alpha", s.igahd_alpha, w);
    read(h, "igahd_beta1", s.igahd_beta1, w);
    read(h, "adam_lr", s.adam_lr, w);
    read(h, "adam_beta1", s.adam_beta1, w);
    read(h, "adam_beta2", s.adam_beta2, w);
    read(h, "adam_eps", s.adam_eps, w);
  }
  return t;
}

DynamicsSpec parse_dynamics(const YAML::Node& node) {
  allow_keys(node, "dynamics", {"A", "epsilon", "gamma", "schedule", "t_end", "dt", "record_every"});
  DynamicsSpec d;
  read(node, "A", d.A, "dynamics");
  read(node, "epsilon", d.epsilon, "dynamics");
  read(node, "gamma", d.gamma, "dynamics");
  read(node, "schedule", d.schedule, "dynamics");
  read(node, "t_end", d.t_end, "dynamics");
  read(node, "dt", d.dt, "dynamics");
  read(node, "record_every", d.record_every, "dynamics");
  return d;
}

AnalysisSpec parse_analysis(const YAML::Node& node) {
  allow_keys(node, "analysis", {"gamma", "epsilon", "A", "delta", "samples", "radius", "steps"});
  AnalysisSpec a;
  read(node, "gamma", a.gamma, "analysis");
  read(node, "epsilon", a.epsilon, "analysis");
  read(node, "A", a.A, "analysis");
  read(node, "delta", a.delta, "analysis");
  read(node, "samples", a.samples, "analysis");
  read(node, "radius", a.radius, "analysis");
  read(node, "steps", a.steps, "analysis");
  return a;
}

}  // namespace

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    fail(std::string("YAML syntax error: ") + e.what());
  }
  allow_keys(root, "top level",
             {"name", "problem", "x0", "optimizers", "max_iter", "grad_tol", "record_every", "outputs", "output_dir",
              "toynet", "dynamics", "analysis"});
  ExperimentConfig c;
  read(root, "name", c.name, "config");
  if (root["problem"]) c.problem = parse_problem(root["problem"]);
  if (root["x0"]) c.x0 = parse_x0(root["x0"]);
  if (const YAML::Node opts = root["optimizers"]) {
    if (!opts.IsSequence()) fail("optimizers must be a list");
    for (std::size_t i = 0; i < opts.size(); ++i) c.optimizers.push_back(parse_optimizer(opts[i], i));
  }
  read(root, "max_iter", c.run.max_iter, "config");
  read(root, "grad_tol", c.run.grad_tol, "config");
  read(root, "record_every", c.run.record_every, "config");
  if (const YAML::Node outs = root["outputs"]) {
    c.outputs = {false, false};
    for (const std::string& o : sequence<std::string>(outs, "outputs")) {
      if (o == "csv") c.outputs.csv = true;
      else if (o == "svg") c.outputs.svg = true;
      else fail("unknown output kind '" + o + "'");
    }
  }
  read(root, "output_dir", c.output_dir, "config");
  if (root["toynet"]) c.toynet = parse_toynet(root["toynet"]);
  if (root["dynamics"]) c.dynamics = parse_dynamics(root["dynamics"]);
  if (root["analysis"]) c.analysis = parse_analysis(root["analysis"]);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << c.name;

  e << YAML::Key << "problem" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << c.problem.name;
  e << YAML::Key << "dim" << YAML::Value << c.problem.dim;
  e << YAML::Key << "seed" << YAML::Value << c.problem.seed;
  if (c.problem.name == "rosenbrock") {
    e << YAML::Key << "a" << YAML::Value << c.problem.a;
    e << YAML::Key << "b" << YAML::Value << c.problem.b;
  }
  if (c.problem.name == "logsumexp") e << YAML::Key << "scale" << YAML::Value << c.problem.scale;
  if (!c.problem.diag.empty()) e << YAML::Key << "diag" << YAML::Value << YAML::Flow << c.problem.diag;
  if (!c.problem.Q.empty()) {
    e << YAML::Key << "Q" << YAML::Value << YAML::BeginSeq;
    for (const auto& row : c.problem.Q) e << YAML::Flow << row;
    e << YAML::EndSeq;
  }
  e << YAML::EndMap;

  e << YAML::Key << "x0" << YAML::Value;
  if (c.x0.fill) {
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "fill" << YAML::Value << *c.x0.fill << YAML::EndMap;
  } else {
    e << YAML::Flow << c.x0.values;
  }
  e << YAML::Key << "max_iter" << YAML::Value << c.run.max_iter;
  e << YAML::Key << "grad_tol" << YAML::Value << c.run.grad_tol;
  e << YAML::Key << "record_every" << YAML::Value << c.run.record_every;
  std::vector<std::string> outs;
  if (c.outputs.csv) outs.push_back("csv");
  if (c.outputs.svg) outs.push_back("svg");
  e << YAML::Key << "outputs" << YAML::Value << YAML::Flow << outs;
  if (!c.output_dir.empty()) e << YAML::Key << "output_dir" << YAML::Value << c.output_dir;

  e << YAML::Key << "optimizers" << YAML::Value << YAML::BeginSeq;
  for (const OptimizerSpec& o : c.optimizers) {
    e << YAML::BeginMap;
    e << YAML::Key << "method" << YAML::Value << o.method;
    e << YAML::Key << "label" << YAML::Value << o.label;
    e << YAML::Key << "preconditioner" << YAML::Value << o.preconditioner;
    e << YAML::Key << "params" << YAML::Value << YAML::Flow << YAML::BeginMap;
    for (const auto& [k, v] : o.params) e << YAML::Key << k << YAML::Value << v;
    e << YAML::EndMap;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  if (c.toynet) {
    const ToynetConfig& t = *c.toynet;
    const StochasticHyper& h = t.hyper;
    std::vector<std::string> methods;
    for (StochasticMethod m : t.methods) methods.push_back(to_string(m));
    e << YAML::Key << "toynet" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "data_seed" << YAML::Value << t.data_seed;
    e << YAML::Key << "n" << YAML::Value << t.n;
    e << YAML::Key << "d_in" << YAML::Value << t.d_in;
    e << YAML::Key << "k" << YAML::Value << t.k;
    e << YAML::Key << "spread" << YAML::Value << t.spread;
    e << YAML::Key << "hidden" << YAML::Value << YAML::Flow << std::vector<int>{t.hidden1, t.hidden2};
    e << YAML::Key << "epochs" << YAML::Value << t.epochs;
    e << YAML::Key << "batch_size" << YAML::Value << t.batch_size;
    e << YAML::Key << "seeds" << YAML::Value << YAML::Flow << t.seeds;
    e << YAML::Key << "methods" << YAML::Value << YAML::Flow << methods;
    e << YAML::Key << "hyper" << YAML::Value << YAML::BeginMap;
    const std::pair<const char*, double> hs[] = {
        {"sgd_tau", h.sgd_tau},         {"nag_tau", h.nag_tau},         {"nag_beta", h.nag_beta},
        {"pdd_tau", h.pdd_tau},         {"pdd_sigma", h.pdd_sigma},     {"pdd_epsilon", h.pdd_epsilon},
        {"pdd_omega", h.pdd_omega},     {"pdd_A", h.pdd_A},             {"igahd_tau", h.igahd_tau},
        {"igahd_alpha", h.igahd_alpha}, {"igahd_beta1", h.igahd_beta1}, {"adam_lr", h.adam_lr},
        {"adam_beta1", h.adam_beta1},   {"adam_beta2", h.adam_beta2},   {"adam_eps", h.adam_eps}};
    for (const auto& [k, v] : hs) e << YAML::Key << k << YAML::Value << v;
    e << YAML::EndMap << YAML::EndMap;
  }
  if (c.dynamics) {
    const DynamicsSpec& d = *c.dynamics;
    e << YAML::Key << "dynamics" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "A" << YAML::Value << d.A;
    e << YAML::Key << "epsilon" << YAML::Value << d.epsilon;
    e << YAML::Key << "gamma" << YAML::Value << d.gamma;
    e << YAML::Key << "schedule" << YAML::Value << d.schedule;
    e << YAML::Key << "t_end" << YAML::Value << d.t_end;
    e << YAML::Key << "dt" << YAML::Value << d.dt;
    e << YAML::Key << "record_every" << YAML::Value << d.record_every;
    e << YAML::EndMap;
  }
  if (c.analysis) {
    const AnalysisSpec& a = *c.analysis;
    e << YAML::Key << "analysis" << YAML::Value << YAML::BeginMap;
    if (!std::isnan(a.gamma)) e << YAML::Key << "gamma" << YAML::Value << a.gamma;
    if (!std::isnan(a.epsilon)) e << YAML::Key << "epsilon" << YAML::Value << a.epsilon;
    if (!std::isnan(a.A)) e << YAML::Key << "A" << YAML::Value << a.A;
    e << YAML::Key << "delta" << YAML::Value << a.delta;
    e << YAML::Key << "samples" << YAML::Value << a.samples;
    e << YAML::Key << "radius" << YAML::Value << a.radius;
    e << YAML::Key << "steps" << YAML::Value << a.steps;
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
  if (!e.good()) throw std::logic_error("config: YAML emitter error: " + e.GetLastError());
  return std::string(e.c_str()) + "\n";
}

}  // namespace pdd
