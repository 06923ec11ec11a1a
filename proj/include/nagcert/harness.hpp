#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "nagcert/config.hpp"
#include "nagcert/geometry.hpp"
#include "nagcert/lyapunov.hpp"

namespace nagcert {

using json = nlohmann::json;

/// Everything a certification needs: objective, parameters, noise and initial state.
struct CertifySetup {
  Objective f;
  OptimizerParams params;
  NoiseModel noise;
  Vector x0;
  std::optional<Vector> v0;
  std::vector<std::uint64_t> seeds;
};

struct CertifyResult {
  std::string theorem;
  bool pass = false;
  std::string verdict;  // one line
  std::vector<LyapunovTrace> traces;
  json details;
};

/// Reference setup for each theorem; `objective_id` swaps in another objective with parameters
/// derived from its known constants.
CertifySetup default_setup(const std::string& theorem, const std::optional<std::string>& objective_id = std::nullopt);

CertifyResult certify_theorem(const std::string& theorem, const CertifySetup& setup);

/// Smallest first-order strong-convexity quotient over tube samples inside the certified sublevel set.
double fit_local_mu(const Objective& f, std::size_t n_samples = 4000);

/// Largest eps of the mild non-convexity condition near the start point, and whether eps <= sqrt(mu / eta).
struct EpsilonCheck {
  double eps = 0.0;
  double limit = 0.0;
  bool ok = true;
};
EpsilonCheck check_epsilon_precondition(const Objective& f, const Vector& x0, double mu, double eta);

// Reproductions. Each writes its artifacts under `out` when given.

struct Fig2Run {
  double eta = 0.0;
  int steps = 0;
  double final_f = 0.0;
  Vector limit_point;
  double ellipse_residual = 0.0;  // |x^2/2 + 3y^2 - 1| at the limit point
};

struct Fig2Report {
  Vector x0;
  double mu = 0.0;
  std::vector<Fig2Run> runs;
  double separation = 0.0;
  bool pass = false;
  json to_json() const;
};

Fig2Report reproduce_fig2(const std::optional<std::filesystem::path>& out = std::nullopt);

struct Fig4Row {
  double eps = 0.0;
  double R = 6.0;
  double L = 0.0;
  double mu = 0.0;
  std::string mu_source;  // "sc" or "pl"
  double gd_final = 0.0;
  double nag_final = 0.0;
  bool gd_not_worse = false;
  double nag_final_small_mu = 0.0;  // NAG with mu = |1 - eps sqrt(1 + 4R^2)|, for comparison
};

struct Fig4Report {
  double x0 = 1.0;
  int steps = 2000;
  std::vector<Fig4Row> rows;
  bool pass = false;  // GD <= NAG at eps = 0.085
  json to_json() const;
};

Fig4Report reproduce_fig4(const std::optional<std::filesystem::path>& out = std::nullopt);

struct Example1Row {
  double eps = 0.0, R = 0.0;
  double th_pl = 0.0, th_sc = 0.0, th_L = 0.0;           // eps sqrt(1+R^2), eps sqrt(1+4R^2), eps sqrt(1+5R^2+4R^4)
  double pl_const = 0.0, sc_const = 0.0, L_const = 0.0;  // closed forms
  double emp_pl = 0.0, emp_sc = 0.0, emp_L = 0.0;         // sampled
  std::optional<double> quasar_gamma;
  std::string sc_flag;  // "ok" or "fails (>=1)"
  bool L_sharp = false;
  bool sc_sharp = false;  // vacuous when the sc constant is not positive
  bool pl_one_sided = false;
};

struct Example1Report {
  std::vector<Example1Row> rows;
  bool pass = false;
  json to_json() const;
  CsvTable to_csv() const;
};

/// Default grid: (0.05,2), (0.1,2), (0.075,6), (0.08,6), (0.085,6), (0.2,2).
Example1Report example1_table(const std::vector<std::pair<double, double>>& grid = {},
                              std::size_t n_samples = 4000);

struct RunOutcome {
  int exit_status = 0;  // 0 ok, 1 certification failed, 2 invalid config
  std::vector<std::filesystem::path> artifacts;
  json summary;
  std::vector<std::string> messages;  // verdict lines and errors
};

/// Throws ConfigError on invalid configs.
void validate_config(const ExperimentConfig& config);

/// Executes a config: runs, certifications or a reproduction, writing artifacts under config.output.
RunOutcome run(const ExperimentConfig& config);

/// n,t,x0..,v0..,f,lyap
CsvTable trajectory_csv(const TrajectoryRecord& record, const Vector& lyap);

}  // namespace nagcert
