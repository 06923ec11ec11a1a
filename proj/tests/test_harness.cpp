#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "nagcert/harness.hpp"

using namespace nagcert;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nagcert_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST(Csv, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Csv, Escaping) {
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_escape("two\nlines"), "\"two\nlines\"");
  CsvTable t({"id", "note"});
  t.add_row(std::vector<std::string>{"1", "x,y"});
  EXPECT_EQ(t.str(), "id,note\r\n1,\"x,y\"\r\n");
  EXPECT_THROW(t.add_row(std::vector<std::string>{"1"}), std::invalid_argument);
}

TEST(Csv, AtomicWrite) {
  const fs::path dir = scratch("atomic");
  write_file_atomic(dir / "sub" / "a.txt", "first");
  write_file_atomic(dir / "sub" / "a.txt", "second");
  EXPECT_EQ(slurp(dir / "sub" / "a.txt"), "second");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "sub")) files += e.is_regular_file();
  EXPECT_EQ(files, 1u);
}

TEST(Config, RoundTrip) {
  ExperimentConfig c;
  c.objective = "quad{0,0.01,4}";
  c.scheme = Scheme::AGNES;
  c.eta = 0.1;
  c.mu = 0.01;
  c.sigma_m = 0.5;
  c.horizon = 321;
  c.x0 = {1.0, 0.1, -1.0 / 3.0};
  c.noise_kind = NoiseKind::GaussianPrototype;
  c.noise_sigma_a = 0.25;
  c.noise_seed = 9;
  c.seeds = {1, 2, 3, 7, 10, 11};
  c.certify = {"agnes"};
  c.output = "out dir";
  EXPECT_EQ(parse_config(serialize_config(c)), c);
  EXPECT_EQ(parse_config(serialize_config(ExperimentConfig{})), ExperimentConfig{});

  ExperimentConfig r;
  r.reproduce = ReproduceTarget::Example1Table;
  EXPECT_EQ(parse_config(serialize_config(r)), r);
}

TEST(Config, SeedRangesAndComments) {
  const ExperimentConfig c = parse_config("# header\nseeds = 1..5, 9  # trailing\nopt.scheme = gd\n");
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2, 3, 4, 5, 9}));
  EXPECT_EQ(c.scheme, Scheme::GD);
}

TEST(Config, Rejections) {
  auto field_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of("opt.etaa = 1\n"), "opt.etaa");
  EXPECT_EQ(field_of("opt.eta = 1\nopt.eta = 2\n"), "opt.eta");
  EXPECT_EQ(field_of("opt.eta = fast\n"), "opt.eta");
  EXPECT_EQ(field_of("opt.scheme = adam\n"), "opt.scheme");
  EXPECT_EQ(field_of("certify = everything\n"), "certify");
  EXPECT_EQ(field_of("seeds = 5..1\n"), "seeds");
  EXPECT_EQ(field_of("just words\n"), "line 1");
}

TEST(Validate, StepSizeAboveSmoothnessBound) {
  ExperimentConfig c;
  c.objective = "quad{0,0.01,4}";
  c.eta = 0.5;  // 2/L
  try {
    validate_config(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "opt.eta");
    EXPECT_NE(std::string(e.what()).find("η ≤ 1/L"), std::string::npos) << e.what();
  }
  const RunOutcome out = run(c);
  EXPECT_EQ(out.exit_status, 2);
}

TEST(Validate, FieldPaths) {
  auto field_of = [](ExperimentConfig c) {
    try {
      validate_config(c);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  ExperimentConfig c;
  c.objective = "nope";
  EXPECT_EQ(field_of(c), "objective");
  c = {};
  c.x0 = {1.0, 2.0};
  EXPECT_EQ(field_of(c), "opt.x0");
  c = {};
  c.objective = "ellipse-quartic";
  c.eta = 0.01;
  EXPECT_EQ(field_of(c), "opt.mu");
  c = {};
  c.certify = {"additive"};
  EXPECT_EQ(field_of(c), "seeds");
  c = {};
  c.certify = {"continuous"};
  EXPECT_EQ(field_of(c), "certify");
  c = {};
  EXPECT_EQ(field_of(c), "<none>");
}

TEST(Validate, NonConvexityPrecondition) {
  // (2 + sin x1) x2^2 / 2 curves downward along x1 when x2 is large
  ExperimentConfig c;
  c.objective = "product{k=1,d=2,mu=1}";
  c.mu = 1.0;
  c.eta = 1.0;
  c.x0 = {3.0, 3.0};
  c.certify = {"discrete"};
  try {
    validate_config(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "opt.eta");
    EXPECT_NE(std::string(e.what()).find("sqrt(mu/eta)"), std::string::npos) << e.what();
  }
  c.x0 = {0.0, 0.01};
  c.eta = 0.01;
  EXPECT_NO_THROW(validate_config(c));
}

TEST(Run, GradientDescentRowCount) {
  ExperimentConfig c;
  c.scheme = Scheme::GD;
  c.horizon = 10;
  c.output = scratch("gd").string();
  const RunOutcome out = run(c);
  ASSERT_EQ(out.exit_status, 0);
  const std::string csv = slurp(fs::path(c.output) / "trajectory.csv");
  EXPECT_EQ(count_lines(csv), 12u);  // header plus n = 0..10
  EXPECT_EQ(csv.substr(0, csv.find('\r')), "n,t,x0,v0,f,lyap");
  EXPECT_TRUE(fs::exists(fs::path(c.output) / "summary.json"));
}

TEST(Run, RegeneratesBitIdentically) {
  ExperimentConfig c;
  c.objective = "quad{1,2}";
  c.noise_kind = NoiseKind::GaussianPrototype;
  c.noise_sigma_a = 0.5;
  c.noise_seed = 4;
  c.horizon = 30;
  c.output = scratch("replay_a").string();
  ASSERT_EQ(run(c).exit_status, 0);
  const std::string a = slurp(fs::path(c.output) / "trajectory.csv");
  c.output = scratch("replay_b").string();
  ASSERT_EQ(run(c).exit_status, 0);
  EXPECT_EQ(slurp(fs::path(c.output) / "trajectory.csv"), a);
}

TEST(Run, CertifiesDiscrete) {
  ExperimentConfig c = parse_config(
      "objective = quad{0,0.01,4}\nopt.scheme = nag\nopt.horizon = 100\nopt.x0 = 1,1,1\ncertify = discrete\n");
  c.output = scratch("cert").string();
  const RunOutcome out = run(c);
  EXPECT_EQ(out.exit_status, 0);
  EXPECT_TRUE(fs::exists(fs::path(c.output) / "lyapunov_discrete.csv"));
  EXPECT_TRUE(out.summary["pass"].get<bool>());
}

TEST(Run, Fig2Artifacts) {
  ExperimentConfig c;
  c.reproduce = ReproduceTarget::Fig2;
  c.output = scratch("fig2").string();
  const RunOutcome out = run(c);
  EXPECT_EQ(out.exit_status, 0);
  EXPECT_TRUE(fs::exists(fs::path(c.output) / "fig2_eta0p01.csv"));
  EXPECT_TRUE(fs::exists(fs::path(c.output) / "fig2_eta0p001.csv"));
  EXPECT_TRUE(fs::exists(fs::path(c.output) / "fig2_summary.json"));
}

TEST(Reproduce, Example1Thresholds) {
  const Example1Report r = example1_table({{0.05, 2.0}, {0.075, 6.0}}, 2000);
  EXPECT_NEAR(r.rows[0].th_pl, 0.11180339887498949, 1e-15);
  EXPECT_NEAR(r.rows[0].th_sc, 0.20615528128088304, 1e-15);
  EXPECT_NEAR(r.rows[0].th_L, 0.46097722286464439, 1e-15);
  EXPECT_NEAR(r.rows[1].th_sc, 0.9032, 1e-4);
  for (const auto& row : r.rows) {
    EXPECT_LE(row.th_pl, row.th_sc);
    EXPECT_LE(row.th_sc, row.th_L);
  }
}

TEST(Reproduce, Fig4Fallback) {
  const Fig4Report r = reproduce_fig4();
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[2].mu_source, "pl");
  EXPECT_DOUBLE_EQ(r.rows[2].mu, oscillatory::pl_constant(0.085, 6.0));
  EXPECT_EQ(r.rows[0].mu_source, "sc");
}

TEST(Certify, DefaultSetups) {
  for (const std::string& t : theorem_names()) EXPECT_NO_THROW(default_setup(t)) << t;
  EXPECT_THROW(default_setup("banach"), std::invalid_argument);
  const CertifyResult r = certify_theorem("continuous", default_setup("continuous"));
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.verdict.rfind("continuous: PASS", 0), 0u);
}

TEST(Certify, GlobalOnEllipseQuartic) {
  const CertifyResult r = certify_theorem("global", default_setup("global"));
  EXPECT_TRUE(r.pass) << r.verdict;
  EXPECT_GT(r.details["entry_time"].get<double>(), 0.0);
}
