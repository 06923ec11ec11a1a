#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nagcert/harness.hpp"

namespace nagcert {

namespace {

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
  std::vector<std::uint64_t> s(n);
  for (std::uint64_t i = 0; i < n; ++i) s[i] = i + 1;
  return s;
}

double require_mu(const Objective& f, const std::string& theorem) {
  if (!f.sc_mu) throw std::invalid_argument(theorem + ": objective " + f.id + " has no known convexity constant mu");
  return *f.sc_mu;
}

double require_L(const Objective& f, const std::string& theorem) {
  if (!f.smoothness_L) throw std::invalid_argument(theorem + ": objective " + f.id + " has no known smoothness L");
  return *f.smoothness_L;
}

json trace_json(const LyapunovTrace& tr) {
  json j;
  j["name"] = tr.name;
  j["pass"] = tr.pass();
  j["samples"] = tr.values.size();
  j["contraction_violations"] = tr.violations.size();
  j["endpoint_violations"] = tr.endpoint_violations.size();
  j["noise_floor"] = tr.noise_floor;
  if (tr.values.size() > 0) {
    j["lyap_first"] = tr.values[0];
    j["lyap_last"] = tr.values[tr.values.size() - 1];
  }
  return j;
}

std::string verdict_line(const std::string& theorem, bool pass, const std::string& id, const std::string& extra) {
  std::ostringstream os;
  os << theorem << ": " << (pass ? "PASS" : "FAIL") << " objective=" << id;
  if (!extra.empty()) os << " " << extra;
  return os.str();
}

// Last sample index after which every sample stays below the certified sublevel.
std::optional<Eigen::Index> sublevel_entry(const Objective& f, const TrajectoryRecord& r) {
  const double alpha = f.projection ? f.projection->sublevel_alpha : std::numeric_limits<double>::infinity();
  const double inf = f.inf_value.value_or(0.0);
  std::optional<Eigen::Index> entry;
  for (Eigen::Index k = r.size() - 1; k >= 0; --k) {
    if (r.f[k] - inf < alpha)
      entry = k;
    else
      break;
  }
  return entry;
}

}  // namespace

double fit_local_mu(const Objective& f, std::size_t n_samples) {
  if (!f.projection) throw std::invalid_argument("fit_local_mu: objective " + f.id + " has no projection");
  const double alpha = f.projection->sublevel_alpha;
  const double inf = f.inf_value.value_or(0.0);
  Region region = Region::tube(1.0);
  if (std::isfinite(alpha)) {
    // stay strictly inside the tube where the projection is defined
    region.width = std::sqrt(2.0 * alpha);
  }
  double mu = std::numeric_limits<double>::infinity();
  for (const Vector& x : sample_region(f, region, n_samples)) {
    const double fx = f.value(x);
    if (!(fx - inf < alpha)) continue;
    Vector p;
    try {
      p = f.projection->map(x);
    } catch (const DomainError&) {
      continue;
    }
    const Vector n = x - p;
    const double gap = fx - f.value(p);
    if (gap <= 1e-12 || n.squaredNorm() == 0.0) continue;
    mu = std::min(mu, 2.0 * (f.gradient(x).dot(n) - gap) / n.squaredNorm());
  }
  if (!std::isfinite(mu) || !(mu > 0.0))
    throw std::invalid_argument("fit_local_mu: no positive convexity constant on the sublevel set of " + f.id);
  return mu;
}

EpsilonCheck check_epsilon_precondition(const Objective& f, const Vector& x0, double mu, double eta) {
  const double s = std::max(1.0, 2.0 * x0.cwiseAbs().maxCoeff());
  EpsilonCheck c;
  c.eps = probe_negative_curvature(f, Region::box(-s, s), 2000);
  c.limit = std::sqrt(mu / eta);
  c.ok = c.eps <= c.limit;
  return c;
}

CertifySetup default_setup(const std::string& theorem, const std::optional<std::string>& objective_id) {
  CertifySetup s;
  if (theorem == "continuous") {
    s.f = make_objective(objective_id.value_or("quad{1}"));
    const double mu = require_mu(s.f, theorem);
    s.params = flow_params(mu, 10.0, std::nullopt, s.f.smoothness_L);
    s.x0 = Vector::Ones(s.f.dim);
  } else if (theorem == "global") {
    s.f = make_objective(objective_id.value_or("ellipse-quartic"));
    s.params = flow_params(fit_local_mu(s.f), 60.0, 1e-3, s.f.smoothness_L);
    s.params.sample_every = 10;
    s.x0 = Vector::Constant(s.f.dim, 1.5);
  } else if (theorem == "discrete") {
    s.f = make_objective(objective_id.value_or("quad{0,0.01,4}"));
    const double L = require_L(s.f, theorem);
    s.params = nag_params(require_mu(s.f, theorem), 1.0 / L);
    s.params.L = L;
    s.params.horizon = 500;
    s.x0 = Vector::Ones(s.f.dim);
  } else if (theorem == "additive") {
    s.f = make_objective(objective_id.value_or("quad{1}"));
    const double L = require_L(s.f, theorem);
    s.params = nag_params(require_mu(s.f, theorem), 1.0 / L);
    s.params.L = L;
    s.params.horizon = 200;
    s.noise = NoiseModel::gaussian(1.0, 0.0, 0);
    s.x0 = Vector::Ones(s.f.dim);
    s.seeds = seed_range(1000);
  } else if (theorem == "decreasing") {
    s.f = make_objective(objective_id.value_or("quad{0,0.04,1}"));
    s.params = decreasing_params(require_mu(s.f, theorem), require_L(s.f, theorem));
    s.params.horizon = 1000;
    s.noise = NoiseModel::gaussian(1.0, 0.0, 0);
    s.x0 = Vector::Ones(s.f.dim);
    s.seeds = seed_range(1000);
  } else if (theorem == "agnes") {
    s.f = make_objective(objective_id.value_or("quad{0,0.01,1}"));
    const double L = require_L(s.f, theorem);
    const double sigma_m = 1.0;
    s.params = agnes_params(require_mu(s.f, theorem), 1.0 / (L * (1.0 + sigma_m * sigma_m)), sigma_m, L);
    s.params.horizon = 200;
    s.noise = NoiseModel::gaussian(0.0, sigma_m, 0);
    s.x0 = Vector::Ones(s.f.dim);
    s.seeds = seed_range(1000);
  } else {
    throw std::invalid_argument("unknown theorem '" + theorem + "'");
  }
  return s;
}

CertifyResult certify_theorem(const std::string& theorem, const CertifySetup& s) {
  CertifyResult res;
  res.theorem = theorem;
  json& d = res.details;
  d["theorem"] = theorem;
  d["objective"] = s.f.id;
  d["scheme"] = to_string(s.params.scheme);
  d["mu"] = s.params.mu;

  if (theorem == "continuous" || theorem == "global") {
    if (s.params.scheme != Scheme::HeavyBallFlow) throw std::invalid_argument(theorem + ": needs the heavy-ball flow");
    const TrajectoryRecord r = run_flow(s.f, s.params, s.x0, s.v0);
    Eigen::Index start = 0;
    if (theorem == "global") {
      const auto entry = sublevel_entry(s.f, r);
      d["sublevel_alpha"] = s.f.projection ? s.f.projection->sublevel_alpha : std::numeric_limits<double>::infinity();
      if (!entry) {
        res.pass = false;
        res.verdict = verdict_line(theorem, false, s.f.id, "never enters the certified sublevel set");
        return res;
      }
      start = *entry;
      d["entry_time"] = r.t[start];
    }
    ContinuousOptions o;
    o.start = start;
    o.allowance = flow_integration_allowance(s.f, s.params, s.x0, s.v0, start);
    LyapunovTrace tr = continuous_lyapunov(s.f, r, o);
    d["dt"] = s.params.dt;
    d["final_time"] = s.params.final_time;
    d["allowance"] = o.allowance;
    d["final_f"] = r.f[r.size() - 1];
    d["trace"] = trace_json(tr);
    res.pass = tr.pass();
    std::ostringstream extra;
    extra << "mu=" << format_double(s.params.mu) << " samples=" << r.size();
    if (theorem == "global") extra << " entry_t=" << format_double(r.t[start]);
    res.verdict = verdict_line(theorem, res.pass, s.f.id, extra.str());
    if (!res.pass) res.verdict += "\n" + tr.diagnostic();
    res.traces.push_back(std::move(tr));
    return res;
  }

  if (theorem == "discrete") {
    const EpsilonCheck eps = check_epsilon_precondition(s.f, s.x0, s.params.mu, s.params.eta);
    d["eps_probe"] = eps.eps;
    d["eps_limit"] = eps.limit;
    if (!eps.ok) {
      res.pass = false;
      res.verdict = verdict_line(theorem, false, s.f.id,
                                 "non-convexity eps=" + format_double(eps.eps) + " exceeds sqrt(mu/eta)=" +
                                     format_double(eps.limit));
      return res;
    }
    const TrajectoryRecord r = run_discrete(s.f, NoiseModel::none(), s.params, s.x0, s.v0);
    LyapunovTrace tr = discrete_lyapunov_nag(s.f, r, s.params);
    double worst = 0.0;
    for (Eigen::Index n = 0; n + 1 < tr.values.size(); ++n)
      if (tr.values[n] > 0.0) worst = std::max(worst, tr.values[n + 1] / tr.values[n]);
    d["max_ratio"] = worst;
    d["target"] = 1.0 - std::sqrt(s.params.mu * s.params.eta);
    d["trace"] = trace_json(tr);
    res.pass = tr.pass();
    res.verdict = verdict_line(theorem, res.pass, s.f.id,
                               "max_ratio=" + format_double(worst) + " target=" + format_double(d["target"]));
    if (!res.pass) res.verdict += "\n" + tr.diagnostic();
    res.traces.push_back(std::move(tr));
    return res;
  }

  if (theorem == "additive" || theorem == "agnes" || theorem == "decreasing") {
    if (s.seeds.empty()) throw std::invalid_argument(theorem + ": needs an ensemble of seeds");
    const std::vector<TrajectoryRecord> ens = run_ensemble(s.f, s.noise, s.params, s.x0, s.seeds);
    LyapunovTrace tr = theorem == "decreasing" ? discrete_lyapunov_decreasing(s.f, ens, s.params, s.noise)
                                               : discrete_lyapunov_agnes(s.f, ens, s.params, s.noise);
    d["seeds"] = s.seeds.size();
    d["sigma_a"] = s.noise.sigma_a;
    d["sigma_m"] = s.noise.sigma_m;
    d["trace"] = trace_json(tr);
    res.pass = tr.pass();
    res.verdict = verdict_line(theorem, res.pass, s.f.id,
                               "seeds=" + std::to_string(s.seeds.size()) + " horizon=" +
                                   std::to_string(s.params.horizon));
    if (!res.pass) res.verdict += "\n" + tr.diagnostic();
    res.traces.push_back(std::move(tr));
    return res;
  }
  throw std::invalid_argument("unknown theorem '" + theorem + "'");
}

}  // namespace nagcert
