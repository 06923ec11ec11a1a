#include "nagcert/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace nagcert {

Scheme parse_scheme(const std::string& s) {
  if (s == "gd" || s == "GD") return Scheme::GD;
  if (s == "nag" || s == "NAG") return Scheme::NAG;
  if (s == "nag-decreasing" || s == "NAGDecreasing") return Scheme::NAGDecreasing;
  if (s == "agnes" || s == "AGNES") return Scheme::AGNES;
  if (s == "flow" || s == "HeavyBallFlow") return Scheme::HeavyBallFlow;
  throw std::invalid_argument("unknown scheme '" + s + "'");
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::GD: return "gd";
    case Scheme::NAG: return "nag";
    case Scheme::NAGDecreasing: return "nag-decreasing";
    case Scheme::AGNES: return "agnes";
    case Scheme::HeavyBallFlow: return "flow";
  }
  return "?";
}

ScheduleForm parse_schedule_form(const std::string& s) {
  if (s == "appendix") return ScheduleForm::Appendix;
  if (s == "maintext") return ScheduleForm::MainText;
  throw std::invalid_argument("unknown schedule form '" + s + "' (expected appendix|maintext)");
}

std::string to_string(ScheduleForm f) { return f == ScheduleForm::Appendix ? "appendix" : "maintext"; }

OptimizerParams nag_params(double mu, double eta) {
  if (!(mu > 0.0) || !(eta > 0.0)) throw std::invalid_argument("nag_params: mu and eta must be positive");
  const double s = std::sqrt(mu * eta);
  if (mu * eta > 1.0) throw std::invalid_argument("nag_params: requires mu * eta <= 1");
  OptimizerParams p;
  p.scheme = Scheme::NAG;
  p.mu = mu;
  p.eta = eta;
  p.alpha = eta;
  p.rho = (1.0 - s) / (1.0 + s);
  p.gamma = 2.0 * std::sqrt(mu);
  return p;
}

OptimizerParams agnes_params(double mu, double eta, double sigma_m, std::optional<double> L) {
  if (!(mu > 0.0) || !(eta > 0.0)) throw std::invalid_argument("agnes_params: mu and eta must be positive");
  if (sigma_m < 0.0) throw std::invalid_argument("agnes_params: sigma_m must be nonnegative");
  const double m2 = 1.0 + sigma_m * sigma_m;
  if (L && eta > 1.0 / (*L * m2))
    throw std::invalid_argument("agnes_params: step size violates eta <= 1/(L(1+sigma_m^2))");
  if (mu * m2 * eta > 1.0) throw std::invalid_argument("agnes_params: requires mu (1+sigma_m^2) eta <= 1");

  const double r = std::sqrt(mu * m2 * eta);
  const double denom = 1.0 - r + sigma_m * sigma_m;
  if (!(denom > 0.0)) throw std::invalid_argument("agnes_params: alpha denominator is nonpositive");

  OptimizerParams p;
  p.scheme = Scheme::AGNES;
  p.mu = mu;
  p.eta = eta;
  p.sigma_m = sigma_m;
  p.alpha = (1.0 - r) / denom * eta;
  if (sigma_m == 0.0) p.alpha = eta;
  const double s = std::sqrt(mu * eta / m2);
  p.rho = (1.0 - s) / (1.0 + s);
  p.gamma = 2.0 * std::sqrt(mu);
  if (L) p.L = *L;

  AgnesConstants c;
  c.b = std::sqrt(m2 * p.alpha / eta);
  c.gamma_lyap = std::sqrt(mu) * (eta - p.alpha) + c.b * std::sqrt(p.alpha);
  const double sma = std::sqrt(mu * p.alpha);
  c.lambda = (c.b + sma) * (c.b + sma) / (c.b - sma) * c.gamma_lyap / std::sqrt(p.alpha);
  p.agnes = c;
  return p;
}

OptimizerParams gd_params(double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("gd_params: eta must be positive");
  OptimizerParams p;
  p.scheme = Scheme::GD;
  p.eta = eta;
  p.alpha = eta;
  return p;
}

OptimizerParams flow_params(double mu, double final_time, std::optional<double> dt, std::optional<double> L) {
  if (!(mu >= 0.0)) throw std::invalid_argument("flow_params: mu must be nonnegative");
  if (!(final_time > 0.0)) throw std::invalid_argument("flow_params: final time must be positive");
  OptimizerParams p;
  p.scheme = Scheme::HeavyBallFlow;
  p.mu = mu;
  p.gamma = 2.0 * std::sqrt(mu);
  p.final_time = final_time;
  p.dt = dt.value_or(L ? std::min(1e-3, 0.1 / std::sqrt(*L)) : 1e-3);
  if (!(p.dt > 0.0)) throw std::invalid_argument("flow_params: dt must be positive");
  if (L) p.L = *L;
  return p;
}

OptimizerParams decreasing_params(double mu, double L, ScheduleForm form) {
  if (!(mu > 0.0) || !(L > 0.0)) throw std::invalid_argument("decreasing_params: mu and L must be positive");
  if (mu > L) throw std::invalid_argument("decreasing_params: requires mu <= L");
  OptimizerParams p;
  p.scheme = Scheme::NAGDecreasing;
  p.mu = mu;
  p.L = L;
  p.schedule_form = form;
  p.n0 = std::sqrt(L / mu);
  const ScheduleStep s0 = decreasing_schedule(mu, L, 0, form);
  p.eta = s0.eta;
  p.alpha = s0.eta;
  p.rho = s0.rho;
  return p;
}

ScheduleStep decreasing_schedule(double mu, double L, int n, ScheduleForm form) {
  if (!(mu > 0.0) || !(L > 0.0)) throw std::invalid_argument("decreasing_schedule: mu and L must be positive");
  if (mu > L) throw std::invalid_argument("decreasing_schedule: requires mu <= L");
  if (n < 0) throw std::invalid_argument("decreasing_schedule: negative step index");
  ScheduleStep s;
  if (form == ScheduleForm::Appendix) {
    const double k = n + std::sqrt(L / mu) + 1.0;
    s.eta = 1.0 / (mu * k * k);
  } else {
    const double k = n + std::sqrt(L * mu) + 1.0;
    s.eta = mu / (k * k);
  }
  const double r = std::sqrt(mu * s.eta);
  s.rho = (1.0 - r) / (1.0 + r);
  return s;
}

namespace {

TrajectoryRecord allocate(const Objective& f, const OptimizerParams& params, std::uint64_t seed, Eigen::Index cols,
                          bool flow) {
  TrajectoryRecord r;
  r.objective_id = f.id;
  r.seed = seed;
  r.params = params;
  r.is_flow = flow;
  r.t.resize(cols);
  r.x.resize(f.dim, cols);
  r.v.resize(f.dim, cols);
  r.f.resize(cols);
  if (flow) {
    r.energy.resize(cols);
  } else {
    r.x_prime.setConstant(f.dim, cols, std::numeric_limits<double>::quiet_NaN());
    r.g.setConstant(f.dim, cols, std::numeric_limits<double>::quiet_NaN());
  }
  return r;
}

void guard(double fx, double threshold, Eigen::Index n, const std::string& id) {
  if (!(fx <= threshold)) {
    std::ostringstream os;
    os << "divergence on " << id << " at step " << n << ": f = " << fx << " exceeds " << threshold;
    throw DivergenceError(os.str());
  }
}

}  // namespace

TrajectoryRecord run_discrete(const Objective& f, const NoiseModel& noise, const OptimizerParams& params,
                              const Vector& x0, std::optional<Vector> v0) {
  if (params.scheme == Scheme::HeavyBallFlow) throw std::invalid_argument("run_discrete: flow scheme; use run_flow");
  if (params.horizon < 1) throw std::invalid_argument("run_discrete: horizon must be >= 1");
  if (x0.size() != f.dim) throw std::invalid_argument("run_discrete: x0 has wrong dimension");
  if (params.scheme != Scheme::NAGDecreasing && !(params.eta > 0.0))
    throw std::invalid_argument("run_discrete: eta must be positive");

  const Eigen::Index N = params.horizon;
  TrajectoryRecord r = allocate(f, params, noise.seed, N + 1, false);

  Vector x = x0;
  Vector v = v0.value_or(Vector::Zero(f.dim));
  if (v.size() != f.dim) throw std::invalid_argument("run_discrete: v0 has wrong dimension");

  const double f0 = f.value(x0);
  const double threshold = 1e6 * (std::abs(f0) + 1.0);
  double t = 0.0;
  double eta_prev = 0.0;

  for (Eigen::Index n = 0; n <= N; ++n) {
    const double fx = (n == 0) ? f0 : f.value(x);
    guard(fx, threshold, n, f.id);
    r.t[n] = t;
    r.x.col(n) = x;
    r.v.col(n) = v;
    r.f[n] = fx;
    if (n == N) {
      // look-ahead point the next step would use; no gradient is drawn for it
      switch (params.scheme) {
        case Scheme::NAG: r.x_prime.col(n) = x + std::sqrt(params.eta) * v; break;
        case Scheme::AGNES: r.x_prime.col(n) = x + std::sqrt(params.alpha) * v; break;
        case Scheme::NAGDecreasing: r.x_prime.col(n) = x + std::sqrt(eta_prev) * v; break;
        default: r.x_prime.col(n) = x; break;
      }
      break;
    }

    const auto draw = static_cast<std::uint64_t>(n);
    switch (params.scheme) {
      case Scheme::GD: {
        const Vector g = estimate_gradient(f, noise, x, draw);
        r.x_prime.col(n) = x;
        r.g.col(n) = g;
        x -= params.eta * g;
        t += params.eta;
        break;
      }
      case Scheme::NAG:
      case Scheme::AGNES: {
        const double sa = std::sqrt(params.scheme == Scheme::NAG ? params.eta : params.alpha);
        const Vector xp = x + sa * v;
        const Vector g = estimate_gradient(f, noise, xp, draw);
        r.x_prime.col(n) = xp;
        r.g.col(n) = g;
        x = xp - params.eta * g;
        v = params.rho * (v - sa * g);
        t += std::sqrt(params.eta);
        break;
      }
      case Scheme::NAGDecreasing: {
        const ScheduleStep s = decreasing_schedule(params.mu, params.L, static_cast<int>(n), params.schedule_form);
        if (n == 0) eta_prev = s.eta;
        const Vector xp = x + std::sqrt(eta_prev) * v;
        const Vector g = estimate_gradient(f, noise, xp, draw);
        r.x_prime.col(n) = xp;
        r.g.col(n) = g;
        x = xp - s.eta * g;
        v = s.rho * (v - std::sqrt(s.eta) * g);
        t += std::sqrt(s.eta);
        eta_prev = s.eta;
        break;
      }
      case Scheme::HeavyBallFlow: break;
    }
  }
  return r;
}

TrajectoryRecord run_flow(const Objective& f, const OptimizerParams& params, const Vector& x0,
                          std::optional<Vector> v0) {
  if (!(params.dt > 0.0)) throw std::invalid_argument("run_flow: dt must be positive");
  if (!(params.final_time > 0.0)) throw std::invalid_argument("run_flow: final time must be positive");
  if (params.sample_every < 1) throw std::invalid_argument("run_flow: sample_every must be >= 1");
  if (x0.size() != f.dim) throw std::invalid_argument("run_flow: x0 has wrong dimension");

  const auto steps = static_cast<Eigen::Index>(std::llround(params.final_time / params.dt));
  const double dt = params.final_time / static_cast<double>(std::max<Eigen::Index>(steps, 1));
  const Eigen::Index k = params.sample_every;
  const Eigen::Index samples = steps / k + 1 + (steps % k != 0 ? 1 : 0);
  TrajectoryRecord r = allocate(f, params, 0, samples, true);

  const double gamma = params.gamma;
  Vector x = x0;
  Vector v = v0.value_or(Vector::Zero(f.dim));
  const double f0 = f.value(x);
  const double threshold = 1e6 * (std::abs(f0) + 1.0);

  auto record = [&](Eigen::Index j, double t, double fx) {
    r.t[j] = t;
    r.x.col(j) = x;
    r.v.col(j) = v;
    r.f[j] = fx;
    r.energy[j] = fx + 0.5 * v.squaredNorm();
  };
  record(0, 0.0, f0);

  Eigen::Index j = 1;
  for (Eigen::Index s = 1; s <= steps; ++s) {
    const Vector k1x = v;
    const Vector k1v = -gamma * v - f.gradient(x);
    const Vector x2 = x + 0.5 * dt * k1x, v2 = v + 0.5 * dt * k1v;
    const Vector k2x = v2;
    const Vector k2v = -gamma * v2 - f.gradient(x2);
    const Vector x3 = x + 0.5 * dt * k2x, v3 = v + 0.5 * dt * k2v;
    const Vector k3x = v3;
    const Vector k3v = -gamma * v3 - f.gradient(x3);
    const Vector x4 = x + dt * k3x, v4 = v + dt * k3v;
    const Vector k4x = v4;
    const Vector k4v = -gamma * v4 - f.gradient(x4);
    x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);

    if (s % k == 0 || s == steps) {
      const double fx = f.value(x);
      guard(fx, threshold, s, f.id);
      record(j++, static_cast<double>(s) * dt, fx);
    }
  }
  return r;
}

std::vector<TrajectoryRecord> run_ensemble(const Objective& f, const NoiseModel& noise, const OptimizerParams& params,
                                           const Vector& x0, const std::vector<std::uint64_t>& seeds,
                                           unsigned threads) {
  std::vector<TrajectoryRecord> out(seeds.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(seeds.size(), 1)));

  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned w) {
    try {
      for (std::size_t i = w; i < seeds.size(); i += threads)
        out[i] = run_discrete(f, noise.with_seed(seeds[i]), params, x0);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

Vector interpolate_position(const TrajectoryRecord& record, double t) {
  const Eigen::Index n = record.size();
  if (n == 0) throw std::invalid_argument("interpolate_position: empty record");
  if (t <= record.t[0]) return record.x.col(0);
  if (t >= record.t[n - 1]) return record.x.col(n - 1);
  const double* begin = record.t.data();
  const auto it = std::upper_bound(begin, begin + n, t);
  const Eigen::Index hi = it - begin;
  const Eigen::Index lo = hi - 1;
  const double w = (t - record.t[lo]) / (record.t[hi] - record.t[lo]);
  return (1.0 - w) * record.x.col(lo) + w * record.x.col(hi);
}

}  // namespace nagcert
