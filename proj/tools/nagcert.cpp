// nagcert: experiment runner and certification front-end.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "nagcert/harness.hpp"

namespace fs = std::filesystem;
using namespace nagcert;

namespace {

int cmd_run(const std::string& path) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(path);
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  }
  const RunOutcome out = run(cfg);
  for (const auto& m : out.messages) (out.exit_status == 2 ? std::cerr : std::cout) << m << "\n";
  for (const auto& a : out.artifacts) std::cout << "wrote " << a.string() << "\n";
  return out.exit_status;
}

int cmd_certify(const std::string& theorem, const std::optional<std::string>& objective,
                const std::optional<std::string>& output) {
  CertifySetup setup;
  try {
    setup = default_setup(theorem, objective);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  const CertifyResult res = certify_theorem(theorem, setup);
  std::cout << res.verdict << "\n";
  if (output) {
    const fs::path dir = *output;
    if (!res.traces.empty()) write_file_atomic(dir / ("lyapunov_" + theorem + ".csv"), res.traces[0].to_csv().str());
    json j = res.details;
    j["pass"] = res.pass;
    write_file_atomic(dir / ("certify_" + theorem + ".json"), j.dump(2) + "\n");
  }
  return res.pass ? 0 : 1;
}

int cmd_diagnose(const std::string& objective, const std::string& region_spec, std::size_t samples,
                 const std::optional<std::string>& output) {
  Objective f;
  Region region;
  try {
    f = make_objective(objective);
    region = parse_region(region_spec);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  GeometryReport r;
  try {
    r = diagnose(f, region, samples);
  } catch (const std::logic_error& e) {
    std::cerr << "diagnose: region " << region.describe() << " not usable for " << f.id << ": " << e.what() << "\n";
    return 2;
  }
  const std::string csv = geometry_csv(r).str();
  if (output)
    write_file_atomic(fs::path(*output) / "diagnose.csv", csv);
  else
    std::cout << csv;
  return 0;
}

int cmd_reproduce(const std::string& target, const std::string& output) {
  ExperimentConfig cfg;
  try {
    cfg.reproduce = parse_reproduce_target(target);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  cfg.output = output;
  const RunOutcome out = run(cfg);
  for (const auto& m : out.messages) std::cout << m << "\n";
  for (const auto& a : out.artifacts) std::cout << "wrote " << a.string() << "\n";
  return out.exit_status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov certification of accelerated gradient methods"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "execute an experiment config");
  std::string config_path;
  run_cmd->add_option("config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);

  auto* cert_cmd = app.add_subcommand("certify", "certify a convergence theorem on its reference setup");
  std::string theorem;
  std::optional<std::string> cert_objective, cert_output;
  cert_cmd->add_option("theorem", theorem)->required()->check(CLI::IsMember(theorem_names()));
  cert_cmd->add_option("--objective", cert_objective, "objective id, e.g. quad{0,0.01,4}");
  cert_cmd->add_option("--output", cert_output, "directory for the Lyapunov CSV and details");

  auto* diag_cmd = app.add_subcommand("diagnose", "sample geometric constants of an objective");
  std::string diag_objective, diag_region;
  std::size_t diag_samples = 4000;
  std::optional<std::string> diag_output;
  diag_cmd->add_option("--objective", diag_objective)->required();
  diag_cmd->add_option("--region", diag_region, "box{lo,hi} | shell{a,b} | tube{w}, optional @seed")->required();
  diag_cmd->add_option("--samples", diag_samples)->check(CLI::Range(std::size_t{1000}, std::size_t{100'000'000}));
  diag_cmd->add_option("--output", diag_output, "directory for diagnose.csv (default: stdout)");

  auto* rep_cmd = app.add_subcommand("reproduce", "regenerate figure data or the constants table");
  std::string target, rep_output = "nagcert-out";
  rep_cmd->add_option("target", target)->required()->check(CLI::IsMember({"fig2", "fig4", "example1-table"}));
  rep_cmd->add_option("--output", rep_output);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(config_path);
    if (*cert_cmd) return cmd_certify(theorem, cert_objective, cert_output);
    if (*diag_cmd) return cmd_diagnose(diag_objective, diag_region, diag_samples, diag_output);
    if (*rep_cmd) return cmd_reproduce(target, rep_output);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
