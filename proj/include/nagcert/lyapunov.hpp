#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nagcert/csv.hpp"
#include "nagcert/noise.hpp"
#include "nagcert/objectives.hpp"
#include "nagcert/optimizers.hpp"

namespace nagcert {

/// Raised when an ensemble is too small for the 4-standard-error certification.
class StatisticalPowerError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Violation {
  Eigen::Index index = 0;
  double measured = 0.0;  // ratio for contraction checks, value for endpoint checks
  double allowed = 0.0;
};

struct LyapunovTrace {
  std::string name;
  Vector values;              // Lyapunov value per sample
  Vector std_error;           // per sample, ensembles only
  Vector contraction_target;  // per step k -> k+1
  Vector additive;            // per-step additive term (noise, integration allowance)
  double noise_floor = 0.0;
  std::vector<Violation> violations;           // contraction steps
  std::vector<Violation> endpoint_violations;  // headline bound on f - inf f

  bool pass() const { return violations.empty() && endpoint_violations.empty(); }
  /// One-line verdict followed by the first few violations.
  std::string diagnostic(std::size_t max_listed = 5) const;
  /// Columns n,lyap,ratio,target,pass; the first row has empty ratio/target.
  CsvTable to_csv() const;
};

struct ContinuousOptions {
  double allowance = 0.0;           // bound on the integration error of each sampled value
  Eigen::Index start = 0;           // first certified sample
  std::optional<double> mu;         // defaults to record.params.mu
};

/// L(t) = f(x) - f(pi(x)) + |xdot + sqrt(mu) (x - pi(x))|^2 / 2 on each sample of a flow record.
/// Certifies L(t_{k+1}) <= e^{-sqrt(mu) dt_k} L(t_k) and f(x_t) - inf f <= e^{-sqrt(mu) t} L(t_start).
/// Values before options.start are NaN.
LyapunovTrace continuous_lyapunov(const Objective& f, const TrajectoryRecord& record,
                                  const ContinuousOptions& options = {});

/// Bound on |L_dt - L_exact| over samples from `start` on: Richardson comparison with a dt/2 run.
double flow_integration_allowance(const Objective& f, const OptimizerParams& params, const Vector& x0,
                                  std::optional<Vector> v0 = std::nullopt, Eigen::Index start = 0);

/// L_n = f(x_n) - inf f + |Pi_perp v_n + sqrt(mu)(x'_n - pi(x'_n))|^2 / 2
///       + (1 + s)^2 / (2 (1 - s)) |Pi v_n|^2,  s = sqrt(mu eta).
/// Certifies L_{n+1} <= (1 - s) L_n and f(x_n) - inf f <= (1 - s)^n L_0. Needs an affine projection.
LyapunovTrace discrete_lyapunov_nag(const Objective& f, const TrajectoryRecord& record,
                                    const OptimizerParams& params);

/// Expectation Lyapunov function of the AGNES analysis (NAG is the case sigma_m = 0):
///   E[f - inf f] + E|b Pi_perp v + sqrt(mu)(x' - pi(x'))|^2 / 2 + lambda/2 E|Pi v|^2.
/// Certifies contraction by 1 - sqrt(mu eta / (1 + sigma_m^2)) up to the additive noise term, and the
/// endpoint bound with noise floor sigma_a^2 sqrt(eta) / sqrt(mu (1 + sigma_m^2)), each within 4 standard
/// errors. `L` defaults to params.L, then f.smoothness_L.
LyapunovTrace discrete_lyapunov_agnes(const Objective& f, const std::vector<TrajectoryRecord>& ensemble,
                                      const OptimizerParams& params, const NoiseModel& noise,
                                      std::optional<double> L = std::nullopt);

/// Decreasing-step scheme: per-step L_{n+1} <= (1 - sqrt(mu eta_n)) L_n + sigma_a^2 eta_n with the
/// time-varying tangential weight, and the endpoint bound
///   E[f(x_n) - inf f] <= (sqrt(L/mu) E[f(x_0) - inf f + |x_0 - pi(x_0)|^2 / 2]
///                         + sigma_a^2 / mu log(1 + n sqrt(mu / L))) / (n + sqrt(L / mu)).
LyapunovTrace discrete_lyapunov_decreasing(const Objective& f, const std::vector<TrajectoryRecord>& ensemble,
                                           const OptimizerParams& params, const NoiseModel& noise);

/// Right-hand side of the decreasing-step endpoint bound at step n.
double decreasing_endpoint_bound(double mu, double L, double sigma_a, double initial_term, int n);

/// Single-run Lyapunov values matching the record's scheme: the flow function for flows, the
/// discrete function (AGNES constants, or the time-varying weight for decreasing steps) for
/// momentum schemes, f - inf f for GD. NaN where the objective lacks the needed projection.
Vector lyapunov_values(const Objective& f, const TrajectoryRecord& record);

/// f(x - eta g) <= f(x) - eta <grad f(x), g> + L eta^2 / 2 |g|^2 with 1e-12 relative slack.
bool certify_descent_lemma(const Objective& f, const Vector& x, const Vector& g, double eta);

/// a^n y0 + b / (1 - a): bound for y_{n+1} <= a y_n + b, 0 < a < 1, b >= 0.
double recursion_bound(double a, double b, double y0, int n);

/// (1 + sqrt(mu eta))^2 / (1 - sqrt(mu eta)); infinite at mu eta = 1.
double nag_lyapunov_coefficient(double mu, double eta);

}  // namespace nagcert
