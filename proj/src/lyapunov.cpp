#include "nagcert/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nagcert/stats.hpp"

namespace nagcert {

namespace {

constexpr double kRelSlack = 1e-12;
constexpr double kSigmas = 4.0;
constexpr std::size_t kMinEnsemble = 1000;

// Absolute rounding floor: state components carry errors of a few ulps, so quadratic
// terms cannot be resolved below (c eps |state|)^2.
double rounding_floor(const TrajectoryRecord& r, double weight) {
  double scale = 1.0;
  for (Eigen::Index j = 0; j < r.size(); ++j)
    scale = std::max({scale, r.x.col(j).squaredNorm(), r.v.col(j).squaredNorm()});
  const double e = 64.0 * std::numeric_limits<double>::epsilon();
  return e * e * scale * std::max(1.0, weight);
}

const AffineProjection& require_affine(const Objective& f, const char* who) {
  if (!f.has_affine_projection())
    throw std::invalid_argument(std::string(who) +
                                ": requires an affine minimizer set (AffineLinear projection); got objective " + f.id);
  return *f.projection->affine;
}

double inf_of(const Objective& f, const Vector& x0) {
  if (f.inf_value) return *f.inf_value;
  if (f.projection) return f.value(f.projection->map(x0));
  throw std::invalid_argument("objective " + f.id + " has neither inf_value nor projection");
}

struct Terms {
  double gap = 0.0;
  double normal = 0.0;
  double tangential_sq = 0.0;  // |Pi v|^2
};

// Pieces of the discrete Lyapunov function at column n.
Terms discrete_terms(const AffineProjection& P, const TrajectoryRecord& r, Eigen::Index n,
                     double inf, double sqrt_mu, double b) {
  const Vector xp = r.x_prime.col(n);
  const Vector v = r.v.col(n);
  const Vector pv = P.pi * v;
  const Vector normal_v = v - pv;
  Terms t;
  t.gap = r.f[n] - inf;
  t.normal = 0.5 * (b * normal_v + sqrt_mu * (xp - P.apply(xp))).squaredNorm();
  t.tangential_sq = pv.squaredNorm();
  return t;
}

void check_ensemble(const std::vector<TrajectoryRecord>& ensemble, const char* who) {
  if (ensemble.size() < kMinEnsemble)
    throw StatisticalPowerError(std::string(who) + ": ensemble of " + std::to_string(ensemble.size()) +
                                " runs cannot resolve the bound; need at least " + std::to_string(kMinEnsemble));
  const Eigen::Index n = ensemble.front().size();
  for (const auto& r : ensemble)
    if (r.size() != n || r.is_flow) throw std::invalid_argument(std::string(who) + ": ragged or flow ensemble");
}

// Per-step expectation check on per-run values l(i, n):
//   mean_i [l(i, n+1) - c_n l(i, n)] <= add_n + 4 SE, fills trace.violations.
void certify_ensemble_steps(LyapunovTrace& tr, const Matrix& l, double floor) {
  const Eigen::Index runs = l.rows();
  const Eigen::Index N = l.cols();
  std::vector<double> d(static_cast<std::size_t>(runs));
  for (Eigen::Index n = 0; n + 1 < N; ++n) {
    const double c = tr.contraction_target[n];
    for (Eigen::Index i = 0; i < runs; ++i) d[static_cast<std::size_t>(i)] = l(i, n + 1) - c * l(i, n);
    const SampleSummary s = summarize(d);
    const double allowed = tr.additive[n] + kSigmas * s.standard_error + kRelSlack * tr.values[n] + floor;
    if (!(s.mean <= allowed)) {
      const double ratio = tr.values[n] > 0.0 ? tr.values[n + 1] / tr.values[n] : std::numeric_limits<double>::infinity();
      tr.violations.push_back({n + 1, ratio, c});
    }
  }
}

}  // namespace

std::string LyapunovTrace::diagnostic(std::size_t max_listed) const {
  std::ostringstream os;
  os << name << ": " << (pass() ? "PASS" : "FAIL") << " (" << values.size() << " samples, " << violations.size()
     << " contraction violations, " << endpoint_violations.size() << " endpoint violations)";
  auto list = [&](const std::vector<Violation>& vs, const char* what) {
    for (std::size_t i = 0; i < std::min(max_listed, vs.size()); ++i)
      os << "\n  " << what << " at " << vs[i].index << ": measured " << format_double(vs[i].measured) << " > allowed "
         << format_double(vs[i].allowed);
    if (vs.size() > max_listed) os << "\n  ... " << vs.size() - max_listed << " more";
  };
  list(violations, "ratio");
  list(endpoint_violations, "endpoint");
  return os.str();
}

CsvTable LyapunovTrace::to_csv() const {
  CsvTable t({"n", "lyap", "ratio", "target", "pass"});
  std::vector<bool> bad(static_cast<std::size_t>(values.size()), false);
  for (const auto& v : violations) bad[static_cast<std::size_t>(v.index)] = true;
  for (const auto& v : endpoint_violations) bad[static_cast<std::size_t>(v.index)] = true;
  for (Eigen::Index n = 0; n < values.size(); ++n) {
    std::vector<std::string> row{std::to_string(n), format_double(values[n]), "", ""};
    if (n > 0) {
      row[2] = format_double(values[n - 1] != 0.0 ? values[n] / values[n - 1] : std::numeric_limits<double>::quiet_NaN());
      row[3] = format_double(contraction_target[n - 1]);
    }
    row.push_back(bad[static_cast<std::size_t>(n)] ? "0" : "1");
    t.add_row(row);
  }
  return t;
}

LyapunovTrace continuous_lyapunov(const Objective& f, const TrajectoryRecord& record, const ContinuousOptions& options) {
  if (!record.is_flow) throw std::invalid_argument("continuous_lyapunov: record is not a flow");
  if (!f.projection) throw std::invalid_argument("continuous_lyapunov: objective " + f.id + " has no projection");
  const double mu = options.mu.value_or(record.params.mu);
  if (!(mu >= 0.0)) throw std::invalid_argument("continuous_lyapunov: mu must be nonnegative");
  const double sm = std::sqrt(mu);
  const Eigen::Index N = record.size();
  const Eigen::Index k0 = options.start;
  if (k0 < 0 || k0 >= N) throw std::invalid_argument("continuous_lyapunov: start index out of range");

  LyapunovTrace tr;
  tr.name = "continuous";
  // samples before `start` may lie outside the projection's domain
  tr.values.setConstant(N, std::numeric_limits<double>::quiet_NaN());
  Vector gap = tr.values;
  for (Eigen::Index k = k0; k < N; ++k) {
    const Vector x = record.x.col(k);
    const Vector p = f.projection->map(x);
    gap[k] = record.f[k] - f.value(p);
    tr.values[k] = gap[k] + 0.5 * (record.v.col(k) + sm * (x - p)).squaredNorm();
  }
  tr.contraction_target.resize(std::max<Eigen::Index>(N - 1, 0));
  tr.additive.resize(std::max<Eigen::Index>(N - 1, 0));
  const double floor = rounding_floor(record, mu);
  const double A = options.allowance;
  for (Eigen::Index k = 0; k + 1 < N; ++k) {
    const double c = std::exp(-sm * (record.t[k + 1] - record.t[k]));
    tr.contraction_target[k] = c;
    // both sampled values may be off by A
    tr.additive[k] = (1.0 + c) * A;
    if (k < k0) continue;
    const double allowed = c * tr.values[k] + tr.additive[k] + kRelSlack * tr.values[k] + floor;
    if (!(tr.values[k + 1] <= allowed))
      tr.violations.push_back({k + 1, tr.values[k] > 0 ? tr.values[k + 1] / tr.values[k] : tr.values[k + 1], c});
  }
  const double L0 = tr.values[k0];
  for (Eigen::Index k = k0; k < N; ++k) {
    const double bound = std::exp(-sm * (record.t[k] - record.t[k0])) * L0;
    const double allowed = bound + 2.0 * A + kRelSlack * L0 + floor;
    if (!(gap[k] <= allowed)) tr.endpoint_violations.push_back({k, gap[k], bound});
  }
  return tr;
}

double flow_integration_allowance(const Objective& f, const OptimizerParams& params, const Vector& x0,
                                  std::optional<Vector> v0, Eigen::Index start) {
  OptimizerParams fine = params;
  fine.dt = params.dt / 2.0;
  fine.sample_every = params.sample_every * 2;
  const TrajectoryRecord a = run_flow(f, params, x0, v0);
  const TrajectoryRecord b = run_flow(f, fine, x0, v0);
  if (a.size() != b.size()) throw std::logic_error("flow_integration_allowance: sample grids differ");
  ContinuousOptions o;
  o.start = start;
  const LyapunovTrace la = continuous_lyapunov(f, a, o);
  const LyapunovTrace lb = continuous_lyapunov(f, b, o);
  double d = 0.0;
  for (Eigen::Index k = start; k < la.values.size(); ++k) d = std::max(d, std::abs(la.values[k] - lb.values[k]));
  // fourth order: error(dt) ~ 16/15 |L_dt - L_{dt/2}|; doubled for safety
  return 2.0 * 16.0 / 15.0 * d;
}

LyapunovTrace discrete_lyapunov_nag(const Objective& f, const TrajectoryRecord& record, const OptimizerParams& params) {
  const AffineProjection& P = require_affine(f, "discrete_lyapunov_nag");
  if (record.is_flow) throw std::invalid_argument("discrete_lyapunov_nag: record is a flow");
  if (params.scheme != Scheme::NAG && params.scheme != Scheme::AGNES)
    throw std::invalid_argument("discrete_lyapunov_nag: scheme must be nag");
  if (!(params.mu > 0.0) || !(params.eta > 0.0)) throw std::invalid_argument("discrete_lyapunov_nag: need mu, eta > 0");

  const double s = std::sqrt(params.mu * params.eta);
  const double coef = nag_lyapunov_coefficient(params.mu, params.eta);
  const double sm = std::sqrt(params.mu);
  const double inf = inf_of(f, record.x.col(0));
  const Eigen::Index N = record.size();

  LyapunovTrace tr;
  tr.name = "discrete";
  tr.values.resize(N);
  for (Eigen::Index n = 0; n < N; ++n) {
    const Terms t = discrete_terms(P, record, n, inf, sm, 1.0);
    tr.values[n] = t.gap + t.normal + (t.tangential_sq == 0.0 ? 0.0 : 0.5 * coef * t.tangential_sq);
  }
  const double floor = rounding_floor(record, std::isfinite(coef) ? coef : 1.0);
  const double c = 1.0 - s;
  tr.contraction_target.setConstant(std::max<Eigen::Index>(N - 1, 0), c);
  tr.additive.setZero(std::max<Eigen::Index>(N - 1, 0));
  for (Eigen::Index n = 0; n + 1 < N; ++n) {
    const double allowed = c * tr.values[n] + kRelSlack * tr.values[n] + floor;
    if (!(tr.values[n + 1] <= allowed))
      tr.violations.push_back({n + 1, tr.values[n] > 0 ? tr.values[n + 1] / tr.values[n] : tr.values[n + 1], c});
  }
  const double L0 = tr.values[0];
  double cn = 1.0;
  for (Eigen::Index n = 0; n < N; ++n, cn *= c) {
    const double gap = record.f[n] - inf;
    const double bound = cn * L0;
    if (!(gap <= bound + kRelSlack * L0 + floor)) tr.endpoint_violations.push_back({n, gap, bound});
  }
  return tr;
}

LyapunovTrace discrete_lyapunov_agnes(const Objective& f, const std::vector<TrajectoryRecord>& ensemble,
                                      const OptimizerParams& params, const NoiseModel& noise, std::optional<double> L) {
  const AffineProjection& P = require_affine(f, "discrete_lyapunov_agnes");
  check_ensemble(ensemble, "discrete_lyapunov_agnes");
  if (params.scheme != Scheme::NAG && params.scheme != Scheme::AGNES)
    throw std::invalid_argument("discrete_lyapunov_agnes: scheme must be nag or agnes");
  const double Lval = L ? *L : (params.L > 0.0 ? params.L : f.smoothness_L.value_or(0.0));
  if (!(Lval > 0.0)) throw std::invalid_argument("discrete_lyapunov_agnes: smoothness constant L unknown");

  const double mu = params.mu;
  const double eta = params.eta;
  const double sm = std::sqrt(mu);
  const double m2 = 1.0 + (params.scheme == Scheme::AGNES ? params.sigma_m * params.sigma_m : 0.0);
  double b = 1.0;
  double lambda = nag_lyapunov_coefficient(mu, eta);
  if (params.scheme == Scheme::AGNES && params.agnes) {
    b = params.agnes->b;
    lambda = params.agnes->lambda;
  }
  const double sa2 = noise.kind == NoiseKind::ZeroNoise ? 0.0 : noise.sigma_a * noise.sigma_a;
  const double c = 1.0 - std::sqrt(mu / m2) * std::sqrt(eta);
  const double add = (Lval * eta * eta * m2 + eta) / (2.0 * m2) * sa2;

  const double inf = inf_of(f, ensemble.front().x.col(0));
  const auto runs = static_cast<Eigen::Index>(ensemble.size());
  const Eigen::Index N = ensemble.front().size();
  Matrix l(runs, N);
  Matrix gap(runs, N);
  for (Eigen::Index i = 0; i < runs; ++i)
    for (Eigen::Index n = 0; n < N; ++n) {
      const Terms t = discrete_terms(P, ensemble[static_cast<std::size_t>(i)], n, inf, sm, b);
      gap(i, n) = t.gap;
      l(i, n) = t.gap + t.normal + (t.tangential_sq == 0.0 ? 0.0 : 0.5 * lambda * t.tangential_sq);
    }

  LyapunovTrace tr;
  tr.name = params.scheme == Scheme::AGNES ? "agnes" : "additive";
  tr.values.resize(N);
  tr.std_error.resize(N);
  Vector gap_mean(N), gap_se(N);
  std::vector<double> col(static_cast<std::size_t>(runs));
  for (Eigen::Index n = 0; n < N; ++n) {
    for (Eigen::Index i = 0; i < runs; ++i) col[static_cast<std::size_t>(i)] = l(i, n);
    SampleSummary s = summarize(col);
    tr.values[n] = s.mean;
    tr.std_error[n] = s.standard_error;
    for (Eigen::Index i = 0; i < runs; ++i) col[static_cast<std::size_t>(i)] = gap(i, n);
    s = summarize(col);
    gap_mean[n] = s.mean;
    gap_se[n] = s.standard_error;
  }
  tr.noise_floor = sa2 * std::sqrt(eta) / std::sqrt(mu * m2);
  tr.contraction_target.setConstant(std::max<Eigen::Index>(N - 1, 0), c);
  tr.additive.setConstant(std::max<Eigen::Index>(N - 1, 0), add);

  double floor = 0.0;
  for (const auto& r : ensemble) floor = std::max(floor, rounding_floor(r, std::isfinite(lambda) ? lambda : 1.0));
  certify_ensemble_steps(tr, l, floor);

  const double L0 = tr.values[0];
  double cn = 1.0;
  for (Eigen::Index n = 0; n < N; ++n, cn *= c) {
    const double bound = cn * L0 + tr.noise_floor;
    const double allowed = bound + kSigmas * (gap_se[n] + cn * tr.std_error[0]) + kRelSlack * L0 + floor;
    if (!(gap_mean[n] <= allowed)) tr.endpoint_violations.push_back({n, gap_mean[n], bound});
  }
  return tr;
}

double decreasing_endpoint_bound(double mu, double L, double sigma_a, double initial_term, int n) {
  const double k = std::sqrt(L / mu);
  return (k * initial_term + sigma_a * sigma_a / mu * std::log1p(n * std::sqrt(mu / L))) / (n + k);
}

LyapunovTrace discrete_lyapunov_decreasing(const Objective& f, const std::vector<TrajectoryRecord>& ensemble,
                                           const OptimizerParams& params, const NoiseModel& noise) {
  const AffineProjection& P = require_affine(f, "discrete_lyapunov_decreasing");
  check_ensemble(ensemble, "discrete_lyapunov_decreasing");
  if (params.scheme != Scheme::NAGDecreasing)
    throw std::invalid_argument("discrete_lyapunov_decreasing: scheme must be nag-decreasing");
  const double mu = params.mu;
  const double sm = std::sqrt(mu);
  const double sa2 = noise.kind == NoiseKind::ZeroNoise ? 0.0 : noise.sigma_a * noise.sigma_a;
  const double inf = inf_of(f, ensemble.front().x.col(0));
  const auto runs = static_cast<Eigen::Index>(ensemble.size());
  const Eigen::Index N = ensemble.front().size();

  // lambda_n is built from eta_{n-1}, the step that produced the look-ahead x'_n
  Vector eta(N), lambda(N);
  for (Eigen::Index n = 0; n < N; ++n) eta[n] = decreasing_schedule(mu, params.L, static_cast<int>(n), params.schedule_form).eta;
  for (Eigen::Index n = 0; n < N; ++n) lambda[n] = nag_lyapunov_coefficient(mu, eta[std::max<Eigen::Index>(n - 1, 0)]);

  Matrix l(runs, N);
  Matrix gap(runs, N);
  Vector initial(runs);
  for (Eigen::Index i = 0; i < runs; ++i) {
    const TrajectoryRecord& r = ensemble[static_cast<std::size_t>(i)];
    const Vector x0 = r.x.col(0);
    initial[i] = r.f[0] - inf + 0.5 * (x0 - P.apply(x0)).squaredNorm();
    for (Eigen::Index n = 0; n < N; ++n) {
      const Terms t = discrete_terms(P, r, n, inf, sm, 1.0);
      gap(i, n) = t.gap;
      l(i, n) = t.gap + t.normal + (t.tangential_sq == 0.0 ? 0.0 : 0.5 * lambda[n] * t.tangential_sq);
    }
  }

  LyapunovTrace tr;
  tr.name = "decreasing";
  tr.values.resize(N);
  tr.std_error.resize(N);
  Vector gap_mean(N), gap_se(N);
  std::vector<double> col(static_cast<std::size_t>(runs));
  for (Eigen::Index n = 0; n < N; ++n) {
    for (Eigen::Index i = 0; i < runs; ++i) col[static_cast<std::size_t>(i)] = l(i, n);
    SampleSummary s = summarize(col);
    tr.values[n] = s.mean;
    tr.std_error[n] = s.standard_error;
    for (Eigen::Index i = 0; i < runs; ++i) col[static_cast<std::size_t>(i)] = gap(i, n);
    s = summarize(col);
    gap_mean[n] = s.mean;
    gap_se[n] = s.standard_error;
  }
  tr.contraction_target.resize(std::max<Eigen::Index>(N - 1, 0));
  tr.additive.resize(std::max<Eigen::Index>(N - 1, 0));
  for (Eigen::Index n = 0; n + 1 < N; ++n) {
    tr.contraction_target[n] = 1.0 - std::sqrt(mu * eta[n]);
    tr.additive[n] = sa2 * eta[n];
  }
  double floor = 0.0;
  for (const auto& r : ensemble) floor = std::max(floor, rounding_floor(r, lambda.maxCoeff()));
  certify_ensemble_steps(tr, l, floor);

  std::vector<double> init(initial.data(), initial.data() + initial.size());
  const SampleSummary s0 = summarize(init);
  const double k = std::sqrt(params.L / mu);
  for (Eigen::Index n = 0; n < N; ++n) {
    const double bound = decreasing_endpoint_bound(mu, params.L, std::sqrt(sa2), s0.mean, static_cast<int>(n));
    const double allowed = bound + kSigmas * (gap_se[n] + k * s0.standard_error / (n + k)) + kRelSlack * s0.mean + floor;
    if (!(gap_mean[n] <= allowed)) tr.endpoint_violations.push_back({n, gap_mean[n], bound});
  }
  tr.noise_floor = 0.0;
  return tr;
}

Vector lyapunov_values(const Objective& f, const TrajectoryRecord& r) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const OptimizerParams& p = r.params;
  Vector out = Vector::Constant(r.size(), nan);
  if (r.is_flow) {
    if (!f.projection) return out;
    const double sm = std::sqrt(p.mu);
    for (Eigen::Index k = 0; k < r.size(); ++k) {
      try {
        const Vector x = r.x.col(k);
        const Vector z = f.projection->map(x);
        out[k] = r.f[k] - f.value(z) + 0.5 * (r.v.col(k) + sm * (x - z)).squaredNorm();
      } catch (const DomainError&) {
      }
    }
    return out;
  }
  if (p.scheme == Scheme::GD) {
    if (!f.inf_value) return out;
    return (r.f.array() - *f.inf_value).matrix();
  }
  if (!f.has_affine_projection() || !(p.mu > 0.0)) return out;
  const AffineProjection& P = *f.projection->affine;
  const double inf = inf_of(f, r.x.col(0));
  const double sm = std::sqrt(p.mu);
  for (Eigen::Index n = 0; n < r.size(); ++n) {
    double b = 1.0, lambda = 0.0;
    if (p.scheme == Scheme::NAGDecreasing) {
      const int prev = static_cast<int>(std::max<Eigen::Index>(n - 1, 0));
      lambda = nag_lyapunov_coefficient(p.mu, decreasing_schedule(p.mu, p.L, prev, p.schedule_form).eta);
    } else if (p.scheme == Scheme::AGNES && p.agnes) {
      b = p.agnes->b;
      lambda = p.agnes->lambda;
    } else {
      lambda = nag_lyapunov_coefficient(p.mu, p.eta);
    }
    const Terms t = discrete_terms(P, r, n, inf, sm, b);
    out[n] = t.gap + t.normal + (t.tangential_sq == 0.0 ? 0.0 : 0.5 * lambda * t.tangential_sq);
  }
  return out;
}

bool certify_descent_lemma(const Objective& f, const Vector& x, const Vector& g, double eta) {
  if (!f.smoothness_L) throw std::invalid_argument("certify_descent_lemma: smoothness constant of " + f.id + " unknown");
  const double L = *f.smoothness_L;
  const double fx = f.value(x);
  const double ip = f.gradient(x).dot(g);
  const double quad = 0.5 * L * eta * eta * g.squaredNorm();
  const double lhs = f.value(x - eta * g);
  const double rhs = fx - eta * ip + quad;
  const double scale = std::abs(fx) + std::abs(eta * ip) + quad;
  return lhs <= rhs + kRelSlack * scale;
}

double recursion_bound(double a, double b, double y0, int n) {
  if (!(a > 0.0 && a < 1.0) || b < 0.0) throw std::invalid_argument("recursion_bound: need 0 < a < 1, b >= 0");
  return std::pow(a, n) * y0 + b / (1.0 - a);
}

double nag_lyapunov_coefficient(double mu, double eta) {
  const double s = std::sqrt(mu * eta);
  if (s >= 1.0) return std::numeric_limits<double>::infinity();
  return (1.0 + s) * (1.0 + s) / (1.0 - s);
}

}  // namespace nagcert
