#include <algorithm>
#include <cmath>
#include <sstream>

#include "nagcert/harness.hpp"

namespace nagcert {

namespace {

struct Built {
  CertifySetup setup;
  std::vector<std::uint64_t> seeds;  // empty: single run
};

Objective make_objective_checked(const std::string& id) {
  try {
    return make_objective(id);
  } catch (const std::exception& e) {
    throw ConfigError("objective", e.what());
  }
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), v.size()); }

double resolve_mu(const ExperimentConfig& c, const Objective& f) {
  if (c.mu) {
    if (!(*c.mu > 0.0)) throw ConfigError("opt.mu", "must be positive");
    return *c.mu;
  }
  if (f.sc_mu && *f.sc_mu > 0.0) return *f.sc_mu;
  throw ConfigError("opt.mu", "required: objective " + f.id + " has no known positive convexity constant");
}

double resolve_eta(const ExperimentConfig& c, const Objective& f, double sigma_m) {
  const double m2 = 1.0 + sigma_m * sigma_m;
  if (!c.eta) {
    if (!f.smoothness_L) throw ConfigError("opt.eta", "required: objective " + f.id + " has no known smoothness L");
    return 1.0 / (*f.smoothness_L * m2);
  }
  const double eta = *c.eta;
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("opt.eta", "must be positive and finite");
  if (f.smoothness_L) {
    const double limit = 1.0 / (*f.smoothness_L * m2);
    if (eta > limit * (1.0 + 1e-12)) {
      const std::string bound = sigma_m > 0.0 ? "η ≤ 1/(L(1+σ_m²))" : "η ≤ 1/L";
      throw ConfigError("opt.eta", "step size " + format_double(eta) + " violates the discrete-theorem bound " +
                                       bound + " = " + format_double(limit) + " (L = " +
                                       format_double(*f.smoothness_L) + ")");
    }
  }
  return eta;
}

const char* required_scheme(const std::string& theorem) {
  if (theorem == "continuous" || theorem == "global") return "flow";
  if (theorem == "discrete" || theorem == "additive") return "nag";
  if (theorem == "agnes") return "agnes";
  return "nag-decreasing";
}

bool scheme_matches(const std::string& theorem, Scheme s) {
  if (theorem == "continuous" || theorem == "global") return s == Scheme::HeavyBallFlow;
  if (theorem == "discrete" || theorem == "additive") return s == Scheme::NAG;
  if (theorem == "agnes") return s == Scheme::AGNES;
  return s == Scheme::NAGDecreasing;
}

Built build(const ExperimentConfig& c) {
  Built b;
  CertifySetup& s = b.setup;
  s.f = make_objective_checked(c.objective);
  const Objective& f = s.f;

  if (c.horizon < 1) throw ConfigError("opt.horizon", "must be at least 1");
  if (c.sample_every < 1) throw ConfigError("opt.sample_every", "must be at least 1");
  if (!(c.noise_sigma_a >= 0.0)) throw ConfigError("noise.sigma_a", "must be nonnegative");
  if (!(c.noise_sigma_m >= 0.0)) throw ConfigError("noise.sigma_m", "must be nonnegative");
  if (c.sigma_m && !(*c.sigma_m >= 0.0)) throw ConfigError("opt.sigma_m", "must be nonnegative");

  if (!c.x0.empty() && static_cast<int>(c.x0.size()) != f.dim)
    throw ConfigError("opt.x0", "has " + std::to_string(c.x0.size()) + " entries, objective dimension is " +
                                    std::to_string(f.dim));
  if (!c.v0.empty() && static_cast<int>(c.v0.size()) != f.dim)
    throw ConfigError("opt.v0", "has " + std::to_string(c.v0.size()) + " entries, objective dimension is " +
                                    std::to_string(f.dim));
  s.x0 = c.x0.empty() ? Vector::Ones(f.dim) : to_vector(c.x0);
  if (!c.v0.empty()) s.v0 = to_vector(c.v0);

  if (c.noise_kind == NoiseKind::GaussianPrototype)
    s.noise = NoiseModel::gaussian(c.noise_sigma_a, c.noise_sigma_m, c.noise_seed);
  else if (c.noise_sigma_a != 0.0 || c.noise_sigma_m != 0.0)
    throw ConfigError("noise.kind", "noise levels are set but noise.kind is zero");

  switch (c.scheme) {
    case Scheme::GD: {
      s.params = gd_params(resolve_eta(c, f, 0.0));
      if (f.smoothness_L) s.params.L = *f.smoothness_L;
      break;
    }
    case Scheme::NAG: {
      const double mu = resolve_mu(c, f);
      const double eta = resolve_eta(c, f, 0.0);
      if (mu * eta > 1.0) throw ConfigError("opt.mu", "needs mu eta <= 1, got " + format_double(mu * eta));
      s.params = nag_params(mu, eta);
      if (f.smoothness_L) s.params.L = *f.smoothness_L;
      break;
    }
    case Scheme::AGNES: {
      const double mu = resolve_mu(c, f);
      const double sm = c.sigma_m.value_or(c.noise_sigma_m);
      const double eta = resolve_eta(c, f, sm);
      if (mu * eta > 1.0) throw ConfigError("opt.mu", "needs mu eta <= 1, got " + format_double(mu * eta));
      try {
        s.params = agnes_params(mu, eta, sm, f.smoothness_L);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("opt.eta", e.what());
      }
      break;
    }
    case Scheme::NAGDecreasing: {
      const double mu = resolve_mu(c, f);
      if (!f.smoothness_L) throw ConfigError("objective", "decreasing schedule needs a known smoothness L");
      if (c.eta) throw ConfigError("opt.eta", "the decreasing schedule sets its own step sizes");
      s.params = decreasing_params(mu, *f.smoothness_L, c.schedule_form);
      break;
    }
    case Scheme::HeavyBallFlow: {
      const double mu = resolve_mu(c, f);
      if (!(c.final_time > 0.0)) throw ConfigError("opt.final_time", "must be positive");
      if (c.dt && !(*c.dt > 0.0)) throw ConfigError("opt.dt", "must be positive");
      s.params = flow_params(mu, c.final_time, c.dt, f.smoothness_L);
      if (c.gamma) {
        if (!(*c.gamma > 0.0)) throw ConfigError("opt.gamma", "must be positive");
        s.params.gamma = *c.gamma;
      }
      s.params.sample_every = c.sample_every;
      break;
    }
  }
  s.params.horizon = c.horizon;

  for (const auto& name : c.certify) {
    if (!scheme_matches(name, c.scheme))
      throw ConfigError("certify", "'" + name + "' needs opt.scheme = " + required_scheme(name) + ", got " +
                                       to_string(c.scheme));
    if ((name == "additive" || name == "agnes" || name == "decreasing") && c.seeds.size() < 1000)
      throw ConfigError("seeds", "'" + name + "' needs at least 1000 seeds for the 4-standard-error rule, got " +
                                     std::to_string(c.seeds.size()));
    if (name == "continuous" && !f.projection)
      throw ConfigError("objective", "'continuous' needs an objective with a known projection");
  }

  const bool discrete_cert = std::any_of(c.certify.begin(), c.certify.end(), [](const std::string& n) {
    return n == "discrete" || n == "additive" || n == "agnes" || n == "decreasing";
  });
  if (discrete_cert) {
    if (!f.has_affine_projection())
      throw ConfigError("objective", "discrete certification needs an affine minimizer set");
    const double eta0 = c.scheme == Scheme::NAGDecreasing
                            ? decreasing_schedule(s.params.mu, s.params.L, 0, s.params.schedule_form).eta
                            : s.params.eta;
    const EpsilonCheck e = check_epsilon_precondition(f, s.x0, s.params.mu, eta0);
    if (!e.ok)
      throw ConfigError("opt.eta", "non-convexity precondition violated: probed eps = " + format_double(e.eps) +
                                       " exceeds sqrt(mu/eta) = " + format_double(e.limit));
  }

  s.seeds = c.seeds;
  b.seeds = c.seeds;
  return b;
}

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

void validate_config(const ExperimentConfig& config) {
  if (config.reproduce) return;
  build(config);
}

CsvTable trajectory_csv(const TrajectoryRecord& r, const Vector& lyap) {
  const Eigen::Index d = r.x.rows();
  std::vector<std::string> header{"n", "t"};
  for (Eigen::Index i = 0; i < d; ++i) header.push_back("x" + std::to_string(i));
  for (Eigen::Index i = 0; i < d; ++i) header.push_back("v" + std::to_string(i));
  header.push_back("f");
  header.push_back("lyap");
  CsvTable t(header);
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    std::vector<std::string> row{std::to_string(k), format_double(r.t[k])};
    for (Eigen::Index i = 0; i < d; ++i) row.push_back(format_double(r.x(i, k)));
    for (Eigen::Index i = 0; i < d; ++i) row.push_back(format_double(r.v(i, k)));
    row.push_back(format_double(r.f[k]));
    row.push_back(format_double(k < lyap.size() ? lyap[k] : std::numeric_limits<double>::quiet_NaN()));
    t.add_row(row);
  }
  return t;
}

RunOutcome run(const ExperimentConfig& config) {
  RunOutcome out;
  const std::filesystem::path dir = config.output;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_file_atomic(dir / name, content);
    out.artifacts.push_back(dir / name);
  };

  if (config.reproduce) {
    bool pass = false;
    json report;
    switch (*config.reproduce) {
      case ReproduceTarget::Fig2: {
        const Fig2Report r = reproduce_fig2(dir);
        pass = r.pass;
        report = r.to_json();
        break;
      }
      case ReproduceTarget::Fig4: {
        const Fig4Report r = reproduce_fig4(dir);
        pass = r.pass;
        report = r.to_json();
        break;
      }
      case ReproduceTarget::Example1Table: {
        const Example1Report r = example1_table();
        pass = r.pass;
        report = r.to_json();
        emit("example1_table.csv", r.to_csv().str());
        break;
      }
    }
    out.summary = {{"reproduce", to_string(*config.reproduce)}, {"pass", pass}, {"report", report}};
    emit("summary.json", out.summary.dump(2) + "\n");
    out.messages.push_back(to_string(*config.reproduce) + ": " + (pass ? "PASS" : "FAIL"));
    out.exit_status = pass ? 0 : 1;
    return out;
  }

  Built b;
  try {
    b = build(config);
  } catch (const ConfigError& e) {
    out.exit_status = 2;
    out.messages.push_back(std::string("invalid config: ") + e.what());
    out.summary = {{"error", {{"field", e.field()}, {"message", e.what()}}}};
    return out;
  }
  const CertifySetup& s = b.setup;

  json& sum = out.summary;
  sum["config"] = serialize_config(config);
  sum["objective"] = s.f.id;
  sum["scheme"] = to_string(s.params.scheme);

  try {
    if (s.params.scheme == Scheme::HeavyBallFlow) {
      const TrajectoryRecord r = run_flow(s.f, s.params, s.x0, s.v0);
      emit("trajectory.csv", trajectory_csv(r, lyapunov_values(s.f, r)).str());
      sum["final_f"] = r.f[r.size() - 1];
      sum["final_x"] = vec_json(r.x.col(r.size() - 1));
    } else if (b.seeds.size() <= 1) {
      NoiseModel noise = s.noise;
      if (b.seeds.size() == 1) noise = noise.with_seed(b.seeds[0]);
      const TrajectoryRecord r = run_discrete(s.f, noise, s.params, s.x0, s.v0);
      emit("trajectory.csv", trajectory_csv(r, lyapunov_values(s.f, r)).str());
      sum["final_f"] = r.f[r.size() - 1];
      sum["final_x"] = vec_json(r.x.col(r.size() - 1));
    } else {
      const std::vector<TrajectoryRecord> ens = run_ensemble(s.f, s.noise, s.params, s.x0, b.seeds, 0);
      emit("trajectory.csv", trajectory_csv(ens[0], lyapunov_values(s.f, ens[0])).str());
      const Eigen::Index n = ens[0].size();
      const double m = static_cast<double>(ens.size());
      CsvTable t({"n", "mean_f", "se_f"});
      for (Eigen::Index k = 0; k < n; ++k) {
        double s1 = 0.0, s2 = 0.0;
        for (const auto& r : ens) {
          s1 += r.f[k];
          s2 += r.f[k] * r.f[k];
        }
        const double mean = s1 / m;
        const double var = std::max(0.0, (s2 - m * mean * mean) / std::max(1.0, m - 1.0));
        t.add_row(std::vector<double>{static_cast<double>(k), mean, std::sqrt(var / m)});
        if (k == n - 1) sum["final_mean_f"] = mean;
      }
      emit("ensemble.csv", t.str());
      sum["seeds"] = b.seeds.size();
    }
  } catch (const DivergenceError& e) {
    out.exit_status = 1;
    out.messages.push_back(std::string("diverged: ") + e.what());
    sum["error"] = e.what();
    emit("summary.json", sum.dump(2) + "\n");
    return out;
  }

  bool all_pass = true;
  for (const auto& name : config.certify) {
    const CertifyResult res = certify_theorem(name, s);
    all_pass = all_pass && res.pass;
    json entry = res.details;
    entry["pass"] = res.pass;
    sum["certifications"].push_back(entry);
    if (!res.traces.empty()) emit("lyapunov_" + name + ".csv", res.traces[0].to_csv().str());
    out.messages.push_back(res.verdict);
  }
  sum["pass"] = all_pass;
  emit("summary.json", sum.dump(2) + "\n");
  out.exit_status = all_pass ? 0 : 1;
  return out;
}

}  // namespace nagcert
