#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nagcert/noise.hpp"
#include "nagcert/objectives.hpp"

namespace nagcert {

enum class Scheme { GD, NAG, NAGDecreasing, AGNES, HeavyBallFlow };

/// Which closed form drives the decreasing step size.
///   Appendix: eta_n = 1 / (mu (n + n0 + 1)^2), n0 = sqrt(L / mu)
///   MainText: eta_n = mu / (n + sqrt(L mu) + 1)^2
enum class ScheduleForm { Appendix, MainText };

Scheme parse_scheme(const std::string& s);
std::string to_string(Scheme s);
ScheduleForm parse_schedule_form(const std::string& s);
std::string to_string(ScheduleForm f);

/// Constants of the AGNES expectation-Lyapunov function.
struct AgnesConstants {
  double b = 1.0;           // sqrt((1 + sigma_m^2) alpha / eta)
  double gamma_lyap = 0.0;  // sqrt(mu) (eta - alpha) + b sqrt(alpha), equal to sqrt(alpha) / b
  double lambda = 0.0;      // (b + sqrt(mu alpha))^2 / (b - sqrt(mu alpha)) * gamma_lyap / sqrt(alpha)
};

struct OptimizerParams {
  Scheme scheme = Scheme::NAG;
  double eta = 0.0;
  double rho = 0.0;
  double alpha = 0.0;  // look-ahead step size; equals eta for NAG
  double gamma = 0.0;  // flow damping
  double mu = 0.0;
  double L = 0.0;      // smoothness, used by the decreasing schedule
  double sigma_m = 0.0;
  double n0 = 0.0;
  ScheduleForm schedule_form = ScheduleForm::Appendix;
  double dt = 1e-3;
  int horizon = 100;        // discrete steps
  double final_time = 1.0;  // flow
  int sample_every = 1;     // flow: record every k-th integrator step
  std::optional<AgnesConstants> agnes;
};

/// rho = (1 - sqrt(mu eta)) / (1 + sqrt(mu eta)); requires 0 < mu eta <= 1.
OptimizerParams nag_params(double mu, double eta);

/// AGNES parameters for multiplicative noise level sigma_m. Rejects eta > 1/(L(1+sigma_m^2))
/// when L is given.
OptimizerParams agnes_params(double mu, double eta, double sigma_m, std::optional<double> L = std::nullopt);

OptimizerParams gd_params(double eta);

/// Heavy-ball flow with critical damping gamma = 2 sqrt(mu). dt defaults to min(1e-3, 0.1/sqrt(L)).
OptimizerParams flow_params(double mu, double final_time, std::optional<double> dt = std::nullopt,
                            std::optional<double> L = std::nullopt);

OptimizerParams decreasing_params(double mu, double L, ScheduleForm form = ScheduleForm::Appendix);

struct ScheduleStep {
  double eta = 0.0;
  double rho = 0.0;
};

ScheduleStep decreasing_schedule(double mu, double L, int n, ScheduleForm form = ScheduleForm::Appendix);

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense per-step record. Column j holds iterate j:
///   discrete: x_n, x'_n, v_n, g_n (g is NaN in the final column, whose x' is the look-ahead
///             point of the step not taken), t_n = n sqrt(eta) (n eta for GD)
///   flow:     x(t), xdot(t) in v, energy E(t) = f + |v|^2 / 2; x_prime and g are empty
struct TrajectoryRecord {
  std::string objective_id;
  std::uint64_t seed = 0;
  OptimizerParams params;
  bool is_flow = false;

  Vector t;
  Matrix x;
  Matrix x_prime;
  Matrix v;
  Matrix g;
  Vector f;
  Vector energy;

  Eigen::Index size() const { return f.size(); }
};

/// Runs GD / NAG / AGNES / NAGDecreasing for params.horizon steps. v0 defaults to 0.
/// Throws DivergenceError if f(x_n) > 1e6 (|f(x0)| + 1).
TrajectoryRecord run_discrete(const Objective& f, const NoiseModel& noise, const OptimizerParams& params,
                              const Vector& x0, std::optional<Vector> v0 = std::nullopt);

/// Integrates xdot = v, vdot = -gamma v - grad f(x) with classical RK4 at fixed dt up to
/// params.final_time.
TrajectoryRecord run_flow(const Objective& f, const OptimizerParams& params, const Vector& x0,
                          std::optional<Vector> v0 = std::nullopt);

/// One independent run per seed, distributed over worker threads. Output order follows `seeds`.
std::vector<TrajectoryRecord> run_ensemble(const Objective& f, const NoiseModel& noise, const OptimizerParams& params,
                                           const Vector& x0, const std::vector<std::uint64_t>& seeds,
                                           unsigned threads = 0);

/// Position at time t by linear interpolation between recorded samples.
Vector interpolate_position(const TrajectoryRecord& record, double t);

}  // namespace nagcert
