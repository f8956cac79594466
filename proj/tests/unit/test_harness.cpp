#include "pdd/harness.hpp"

#include <gtest/gtest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pdd;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pdd_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const OptimizerSpec& find(const ExperimentConfig& c, const std::string& label) {
  for (const auto& o : c.optimizers)
    if (o.label == label) return o;
  throw std::runtime_error("no optimizer " + label);
}

ExperimentConfig small_quadratic() {
  ExperimentConfig c;
  c.name = "small";
  c.problem.name = "quadratic";
  c.problem.dim = 2;
  c.problem.diag = {1.0, 4.0};
  c.x0.values = {1.0, -1.0};
  c.run = {200, 1e-8, 5};
  c.optimizers = {{"gd", "GD", {{"tau", 0.2}}, "identity"},
                  {"pdd", "PDD", {{"tau", 0.2}, {"sigma", 0.2}}, "identity"}};
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PDD_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Presets, Names) {
  const std::vector<std::string> want{"logsumexp", "quadcos", "rosenbrock2d", "rosenbrockNd", "ackley", "toynet"};
  for (const auto& n : want) EXPECT_NE(std::find(preset_names().begin(), preset_names().end(), n), preset_names().end());
  EXPECT_THROW(preset("nosuch"), std::invalid_argument);
  for (const auto& n : preset_names()) EXPECT_NO_THROW(validate(preset(n))) << n;
}

TEST(Presets, LogSumExpStepSizes) {
  const ExperimentConfig c = preset("logsumexp");
  EXPECT_EQ(c.problem.dim, 100);
  EXPECT_EQ(c.x0.resolve(100), Vector::Constant(100, 0.1));
  // Independent eigenvalues of the generated matrix.
  const Matrix Q = c.problem.scale * make_diag_dominant_Q(100, c.problem.seed);
  Eigen::SelfAdjointEigenSolver<Matrix> es(Q);
  const double l1 = es.eigenvalues().maxCoeff(), ln = es.eigenvalues().minCoeff();
  EXPECT_NEAR(find(c, "GD").params.at("tau"), 2 / (3 * l1 + ln), 1e-12);
  EXPECT_NEAR(find(c, "NAG").params.at("tau"), 4 / (30 * l1 + ln), 1e-12);
  const double r = std::sqrt(3 * 10 * l1 / ln + 1);
  EXPECT_NEAR(find(c, "NAG").params.at("beta"), (r - 2) / (r + 2), 1e-12);
  const auto& pdd = find(c, "PDD").params;
  EXPECT_NEAR(pdd.at("tau"), 2 / (l1 + ln), 1e-12);
  EXPECT_EQ(pdd.at("sigma"), pdd.at("tau"));
  EXPECT_EQ(pdd.at("A"), 10.0);
  EXPECT_EQ(pdd.at("epsilon"), 1.0);
  EXPECT_EQ(pdd.at("omega"), 1.0);
  const auto& pdiag = find(c, "PDD-diag");
  EXPECT_EQ(pdiag.preconditioner, "diag_inv_q");
  EXPECT_EQ(pdiag.params.at("tau"), 0.5);
  EXPECT_EQ(pdiag.params.at("sigma"), 0.5);
  EXPECT_EQ(pdiag.params.at("A"), 1.0);
  EXPECT_EQ(find(c, "GD-diag").params.at("tau"), 0.5);
  const auto& att = find(c, "IGAHD-SC").params;
  EXPECT_EQ(att.at("tau"), 0.0016);
  EXPECT_NEAR(att.at("m1"), ln, 1e-12);
  EXPECT_EQ(att.at("beta2"), compute_beta2(att.at("m1"), 0.0016));
  // Same Q on every call.
  EXPECT_EQ(find(preset("logsumexp"), "PDD").params.at("tau"), pdd.at("tau"));
}

TEST(Presets, QuadCos) {
  const ExperimentConfig c = preset("quadcos");
  EXPECT_EQ(c.problem.dim, 100);
  EXPECT_EQ(c.x0.resolve(100), Vector::Constant(100, 5.0));
  EXPECT_EQ(c.optimizers.size(), 4u);
  EXPECT_EQ(find(c, "GD").params.at("tau"), 0.5);
  EXPECT_DOUBLE_EQ(find(c, "NAG").params.at("tau"), 4 / (3 * 3.9 + 0.1));
  const double r = std::sqrt(3 * 39.0 + 1);
  EXPECT_DOUBLE_EQ(find(c, "NAG").params.at("beta"), (r - 2) / (r + 2));
  const auto& pdd = find(c, "PDD").params;
  EXPECT_EQ(pdd.at("tau"), 0.5);
  EXPECT_EQ(pdd.at("sigma"), 0.5);
  EXPECT_EQ(pdd.at("epsilon"), 1.0);
  EXPECT_EQ(pdd.at("A"), 1.0);
  EXPECT_EQ(pdd.at("omega"), 1.0);
  EXPECT_EQ(find(c, "IGAHD-SC").params.at("tau"), 0.55);
  EXPECT_EQ(find(c, "IGAHD-SC").params.at("m1"), 0.1);
}

TEST(Presets, Rosenbrock) {
  const ExperimentConfig c = preset("rosenbrock2d");
  EXPECT_EQ(c.x0.resolve(2), Eigen::Vector2d(-3, -4));
  EXPECT_EQ(find(c, "GD").params.at("tau"), 0.0002);
  EXPECT_EQ(find(c, "NAG").params.at("tau"), 0.0002);
  EXPECT_EQ(find(c, "NAG").params.at("beta"), 0.9);
  EXPECT_EQ(find(c, "PDD").params.at("tau"), 0.005);
  EXPECT_EQ(find(c, "PDD").params.at("sigma"), 0.005);
  EXPECT_EQ(find(c, "PDD").params.at("A"), 5.0);
  EXPECT_EQ(find(c, "IGAHD").params.at("tau"), 0.00045);
  EXPECT_EQ(find(c, "IGAHD").params.at("alpha"), 3.0);
  EXPECT_DOUBLE_EQ(find(c, "IGAHD").params.at("beta1"), std::sqrt(0.00045) / 14);

  const ExperimentConfig n = preset("rosenbrockNd");
  EXPECT_EQ(n.problem.dim, 100);
  EXPECT_EQ(n.x0.resolve(100), Vector::Zero(100));
  EXPECT_EQ(find(n, "GD").params.at("tau"), 0.001);
  EXPECT_EQ(find(n, "NAG").params.at("tau"), 0.0008);
  EXPECT_EQ(find(n, "NAG").params.at("beta"), 0.95);
  EXPECT_EQ(find(n, "PDD").params.at("tau"), 0.01);
  EXPECT_EQ(find(n, "PDD").params.at("epsilon"), 0.5);
  EXPECT_EQ(find(n, "PDD").params.at("A"), 5.0);
  EXPECT_EQ(find(n, "IGAHD").params.at("tau"), 0.0002);
  EXPECT_DOUBLE_EQ(find(n, "IGAHD").params.at("beta1"), 2 * std::sqrt(0.0002));
}

TEST(Presets, Ackley) {
  const ExperimentConfig c = preset("ackley");
  EXPECT_EQ(c.x0.resolve(2), Eigen::Vector2d(2.5, 4));
  EXPECT_EQ(find(c, "GD").params.at("tau"), 0.002);
  EXPECT_EQ(find(c, "NAG").params.at("beta"), 0.9);
  const auto& pdd = find(c, "PDD").params;
  EXPECT_EQ(pdd.at("tau"), 0.002);
  EXPECT_EQ(pdd.at("sigma"), 0.002);
  EXPECT_EQ(pdd.at("epsilon"), 1.0);
  EXPECT_EQ(pdd.at("A"), 1.0);
  EXPECT_EQ(find(c, "IGAHD").params.at("tau"), 0.01);
  EXPECT_DOUBLE_EQ(find(c, "IGAHD").params.at("beta1"), 0.2);
  EXPECT_TRUE(preset("toynet").toynet.has_value());
}

TEST(Validation, RejectsBadConfigs) {
  ExperimentConfig c = small_quadratic();
  EXPECT_NO_THROW(validate(c));
  c.optimizers.clear();
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small_quadratic();
  c.optimizers[0].method = "lbfgs";
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small_quadratic();
  c.optimizers[0].params["beta"] = 0.5;  // not a gd key
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small_quadratic();
  c.optimizers[0].params.erase("tau");
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small_quadratic();
  c.optimizers[0].params["tau"] = -1;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small_quadratic();
  c.problem.name = "himmelblau";
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small_quadratic();
  c.x0.values = {1.0};
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small_quadratic();
  c.optimizers[0].preconditioner = "jacobi";
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(Config, YamlRoundTrip) {
  for (const std::string& name : {"logsumexp", "quadcos", "rosenbrock2d", "ackley"}) {
    const ExperimentConfig c = preset(name);
    const std::string text = dump_config(c);
    const ExperimentConfig back = parse_config(text);
    EXPECT_EQ(dump_config(back), text) << name;
    ASSERT_EQ(back.optimizers.size(), c.optimizers.size());
    for (std::size_t i = 0; i < c.optimizers.size(); ++i) {
      EXPECT_EQ(back.optimizers[i].params, c.optimizers[i].params) << name;
      EXPECT_EQ(back.optimizers[i].preconditioner, c.optimizers[i].preconditioner);
    }
    EXPECT_EQ(back.run.max_iter, c.run.max_iter);
  }
}

TEST(Config, StrictParsing) {
  const std::string base =
      "name: t\nproblem: {name: quadratic, dim: 2, diag: [1, 2]}\nx0: [1, 1]\n"
      "optimizers:\n  - method: gd\n    params: {tau: 0.1}\n";
  const ExperimentConfig c = parse_config(base);
  EXPECT_EQ(c.optimizers[0].label, "gd");
  EXPECT_THROW(parse_config(base + "colour: blue\n"), std::invalid_argument);
  EXPECT_THROW(parse_config(base + "max_iter: many\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("name: [unclosed\n"), std::invalid_argument);
  EXPECT_THROW(load_config("/nonexistent/pdd.yaml"), std::runtime_error);
}

TEST(Config, OutputDirPrecedence) {
  ExperimentConfig c = small_quadratic();
  ::unsetenv("PDD_OUT_DIR");
  EXPECT_EQ(resolve_output_dir(c), "pdd_out/small");
  ::setenv("PDD_OUT_DIR", "/tmp/root", 1);
  EXPECT_EQ(resolve_output_dir(c), "/tmp/root/small");
  c.output_dir = "cfg";
  EXPECT_EQ(resolve_output_dir(c), "cfg");
  EXPECT_EQ(resolve_output_dir(c, "cli"), "cli");
  ::unsetenv("PDD_OUT_DIR");
}

TEST(Reports, CsvSchemaAndRoundTrip) {
  const ExperimentConfig c = small_quadratic();
  const Trajectory t = run_optimizer(build_problem(c.problem), build_method(c.optimizers[1], c.problem),
                                     c.x0.resolve(2), c.run);
  const std::string text = csv_text(t);
  EXPECT_EQ(text.substr(0, text.find('\n')), "iter,f,grad_norm,lyapunov,dist_to_min");
  EXPECT_EQ(text.find('\r'), std::string::npos);
  const std::vector<Record> back = parse_csv(text);
  ASSERT_EQ(back.size(), t.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].iter, t.records[i].iter);
    EXPECT_NEAR(back[i].f, t.records[i].f, 1e-12);
    EXPECT_NEAR(back[i].grad_norm, t.records[i].grad_norm, 1e-12);
    EXPECT_NEAR(back[i].lyapunov, t.records[i].lyapunov, 1e-12);
    ASSERT_TRUE(back[i].dist_to_min.has_value());
    EXPECT_NEAR(*back[i].dist_to_min, *t.records[i].dist_to_min, 1e-12);
  }
}

TEST(Reports, SingleRecordAndBlankDistance) {
  Trajectory t;
  t.records.push_back({0, 1.5, 2.0, 2.5, std::nullopt});
  const std::string text = csv_text(t);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(text.substr(text.find('\n') + 1), "0,1.5,2,2.5,\n");
  const auto back = parse_csv(text);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_FALSE(back[0].dist_to_min.has_value());
}

TEST(Reports, SvgIsWellFormedXml) {
  const std::vector<Series> s{{"GD <a&b>", {1, 10, 100}, {1, 0.1, 0.01}}, {"PDD", {1, 10, 100}, {1, 1e-3, 0}}};
  std::istringstream in(svg_text(s, "iteration", "grad norm"));
  boost::property_tree::ptree tree;
  ASSERT_NO_THROW(boost::property_tree::read_xml(in, tree));
  const auto& svg = tree.get_child("svg");
  int polylines = 0;
  std::function<void(const boost::property_tree::ptree&)> walk = [&](const boost::property_tree::ptree& node) {
    for (const auto& [key, child] : node) {
      if (key == "polyline") ++polylines;
      walk(child);
    }
  };
  walk(svg);
  EXPECT_EQ(polylines, 2);
  const std::string text = svg_text(s, "iteration", "grad norm");
  EXPECT_NE(text.find("GD &lt;a&amp;b&gt;"), std::string::npos);
  EXPECT_NE(text.find("PDD"), std::string::npos);
}

TEST(Experiment, QuadCosWritesFilesAndIsReproducible) {
  const fs::path a = scratch("qc_a"), b = scratch("qc_b");
  const RunArtifact ra = run_experiment(preset("quadcos"), a.string());
  const RunArtifact rb = run_experiment(preset("quadcos"), b.string());
  EXPECT_FALSE(ra.any_diverged);
  int csvs = 0, svgs = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    csvs += e.path().extension() == ".csv";
    svgs += e.path().extension() == ".svg";
  }
  EXPECT_EQ(csvs, 4);
  EXPECT_EQ(svgs, 1);
  for (const std::string& f : ra.files) EXPECT_TRUE(fs::exists(f)) << f;
  for (const char* label : {"GD.csv", "NAG.csv", "PDD.csv", "IGAHD-SC.csv"}) {
    EXPECT_EQ(slurp(a / label), slurp(b / label)) << label;
  }
  // config.yaml reloads to the same experiment.
  EXPECT_EQ(dump_config(load_config((a / "config.yaml").string())), dump_config(preset("quadcos")));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Experiment, DivergentStepFlagged) {
  ExperimentConfig c = preset("quadcos");
  c.optimizers = {{"gd", "GD", {{"tau", 10.0}}, "identity"}};
  c.run.max_iter = 500;
  const fs::path d = scratch("div");
  const RunArtifact r = run_experiment(c, d.string());
  EXPECT_TRUE(r.any_diverged);
  EXPECT_TRUE(r.runs[0].trajectory.diverged);
  fs::remove_all(d);
}

TEST(Experiment, EveryPresetCompletesWithoutDivergence) {
  for (const std::string& name : preset_names()) {
    const fs::path d = scratch("preset_" + name);
    const RunArtifact r = run_experiment(preset(name), d.string());
    EXPECT_FALSE(r.any_diverged) << name;
    for (const std::string& f : r.files) EXPECT_TRUE(fs::exists(f)) << f;
    fs::remove_all(d);
  }
}

TEST(Cli, ExitCodesAndOverrides) {
  const fs::path d = scratch("cli");
  EXPECT_EQ(run_cli("preset quadcos --max-iter 50 --out " + d.string()), 0);
  const auto recs = parse_csv(slurp(d / "GD.csv"));
  EXPECT_EQ(recs.back().iter, 50);
  EXPECT_NE(run_cli("preset nosuch"), 0);
  fs::create_directories(d);
  write_text_file((d / "div.yaml").string(),
                  "name: div\nproblem: {name: quadcos, dim: 10, seed: 1}\nx0: {fill: 5}\nmax_iter: 500\n"
                  "optimizers:\n  - method: gd\n    params: {tau: 10}\n");
  EXPECT_EQ(run_cli("run " + (d / "div.yaml").string() + " --out " + (d / "div").string()), 1);
  EXPECT_EQ(run_cli("run " + (d / "missing.yaml").string()), 2);
  fs::remove_all(d);
}
