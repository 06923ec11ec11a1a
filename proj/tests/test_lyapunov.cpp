#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nagcert/lyapunov.hpp"

using namespace nagcert;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Matrix diag(std::initializer_list<double> xs) { return vec(xs).asDiagonal(); }

std::vector<std::uint64_t> seeds(std::uint64_t n) {
  std::vector<std::uint64_t> s(n);
  for (std::uint64_t i = 0; i < n; ++i) s[i] = i + 1;
  return s;
}

TrajectoryRecord nag_run(const Objective& f, double mu, double eta, const Vector& x0, int steps) {
  OptimizerParams p = nag_params(mu, eta);
  p.horizon = steps;
  return run_discrete(f, NoiseModel::none(), p, x0);
}

}  // namespace

TEST(Continuous, InitialValueAndEquilibrium) {
  const Objective f = make_quadratic(diag({1.0}));
  const TrajectoryRecord r = run_flow(f, flow_params(1.0, 1.0), vec({1.0}));
  const LyapunovTrace tr = continuous_lyapunov(f, r);
  EXPECT_DOUBLE_EQ(tr.values[0], 1.0);
  EXPECT_TRUE(tr.pass());

  const Objective g = make_degenerate_quadratic(diag({0.0, 1.0}));
  const TrajectoryRecord e = run_flow(g, flow_params(1.0, 1.0), vec({0.3, 0.0}));
  const LyapunovTrace te = continuous_lyapunov(g, e);
  EXPECT_EQ(te.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Continuous, DetectsWrongDamping) {
  // gamma far below critical: the certified rate e^{-sqrt(mu) t} is violated
  const Objective f = make_quadratic(diag({1.0}));
  OptimizerParams p = flow_params(1.0, 10.0);
  p.gamma = 0.05;
  const TrajectoryRecord r = run_flow(f, p, vec({1.0}));
  const LyapunovTrace tr = continuous_lyapunov(f, r);
  EXPECT_FALSE(tr.pass());
  EXPECT_NE(tr.diagnostic().find("FAIL"), std::string::npos);
}

TEST(Discrete, StationaryOnMinimizer) {
  const Objective f = make_degenerate_quadratic(diag({0.0, 1.0}));
  const TrajectoryRecord r = nag_run(f, 1.0, 0.25, vec({0.4, 0.0}), 20);
  const LyapunovTrace tr = discrete_lyapunov_nag(f, r, r.params);
  EXPECT_EQ(tr.values.cwiseAbs().maxCoeff(), 0.0);
  for (Eigen::Index k = 0; k < r.size(); ++k) EXPECT_EQ(r.x.col(k), vec({0.4, 0.0}));
}

TEST(Discrete, FullContractionAtMuEtaOne) {
  const Objective f = make_degenerate_quadratic(diag({0.0, 1.0}));
  const TrajectoryRecord r = nag_run(f, 1.0, 1.0, vec({1.0, 1.0}), 1);
  const LyapunovTrace tr = discrete_lyapunov_nag(f, r, r.params);
  EXPECT_LE(tr.values[1], 1e-12);
  EXPECT_TRUE(tr.pass());
}

TEST(Discrete, HalfContractionAtQuarter) {
  const Objective f = make_degenerate_quadratic(diag({0.0, 1.0}));
  const TrajectoryRecord r = nag_run(f, 1.0, 0.25, vec({1.0, 1.0}), 100);
  const LyapunovTrace tr = discrete_lyapunov_nag(f, r, r.params);
  EXPECT_TRUE(tr.pass());
  for (Eigen::Index n = 0; n < 100; ++n)
    if (tr.values[n] > 0.0) EXPECT_LE(tr.values[n + 1], 0.5 * tr.values[n] * (1 + 1e-12) + 1e-300);
}

TEST(Discrete, RefusesNonAffine) {
  const Objective f = make_squared_distance(CircleManifold{1.0}, 1.0);
  const TrajectoryRecord r = nag_run(f, 1.0, 0.25, vec({1.5, 0.0}), 5);
  EXPECT_THROW(discrete_lyapunov_nag(f, r, r.params), std::invalid_argument);
}

TEST(Discrete, DetectsOverlargeMomentum) {
  // pretending mu is 100 times larger than it is breaks the contraction
  const Objective f = make_degenerate_quadratic(diag({0.0, 0.01, 4.0}));
  const TrajectoryRecord r = nag_run(f, 1.0, 0.25, vec({1.0, 1.0, 1.0}), 200);
  OptimizerParams claimed = r.params;
  EXPECT_FALSE(discrete_lyapunov_nag(f, r, claimed).pass());
}

TEST(Discrete, CsvShape) {
  const Objective f = make_degenerate_quadratic(diag({0.0, 1.0}));
  const TrajectoryRecord r = nag_run(f, 1.0, 0.25, vec({1.0, 1.0}), 10);
  const CsvTable t = discrete_lyapunov_nag(f, r, r.params).to_csv();
  EXPECT_EQ(t.rows(), 11u);
  EXPECT_EQ(t.header(), (std::vector<std::string>{"n", "lyap", "ratio", "target", "pass"}));
}

TEST(Agnes, ReducesToNagWithoutNoise) {
  const Objective f = make_degenerate_quadratic(diag({0.0, 0.01, 1.0}));
  OptimizerParams p = nag_params(0.01, 1.0);
  p.L = 1.0;
  p.horizon = 50;
  const std::vector<TrajectoryRecord> ens = run_ensemble(f, NoiseModel::none(), p, Vector::Ones(3), seeds(1000));
  const LyapunovTrace a = discrete_lyapunov_agnes(f, ens, p, NoiseModel::none());
  const LyapunovTrace n = discrete_lyapunov_nag(f, ens[0], p);
  ASSERT_EQ(a.values.size(), n.values.size());
  for (Eigen::Index k = 0; k < a.values.size(); ++k)
    EXPECT_NEAR(a.values[k], n.values[k], 1e-14 * std::max(1.0, n.values[k]));
}

TEST(Agnes, NoiseFloorPlateau) {
  const Objective f = make_quadratic(diag({1.0}));
  OptimizerParams p = nag_params(1.0, 1.0);
  p.L = 1.0;
  p.horizon = 200;
  const NoiseModel noise = NoiseModel::gaussian(1.0, 0.0, 0);
  const auto ens = run_ensemble(f, noise, p, Vector::Ones(1), seeds(1000));
  const LyapunovTrace tr = discrete_lyapunov_agnes(f, ens, p, noise);
  EXPECT_DOUBLE_EQ(tr.noise_floor, 1.0);
  EXPECT_TRUE(tr.pass()) << tr.diagnostic();
}

TEST(Agnes, NeedsEnoughSeeds) {
  const Objective f = make_quadratic(diag({1.0}));
  OptimizerParams p = nag_params(1.0, 1.0);
  p.horizon = 5;
  const NoiseModel noise = NoiseModel::gaussian(1.0, 0.0, 0);
  const auto ens = run_ensemble(f, noise, p, Vector::Ones(1), seeds(100));
  EXPECT_THROW(discrete_lyapunov_agnes(f, ens, p, noise, 1.0), StatisticalPowerError);
}

TEST(Decreasing, EndpointOracle) {
  // mpmath oracle with initial term 1
  EXPECT_NEAR(decreasing_endpoint_bound(0.04, 1.0, 1.0, 1.0, 100), 0.77250534231510071, 1e-14);
  EXPECT_NEAR(decreasing_endpoint_bound(0.04, 1.0, 1.0, 1.0, 1000), 0.13689813204127054, 1e-14);
}

TEST(Helpers, RecursionLemma) {
  double y = 5.0;
  for (int n = 0; n < 200; ++n) {
    EXPECT_LE(y, recursion_bound(0.9, 0.1, 5.0, n) + 1e-12);
    y = 0.9 * y + 0.1;
  }
  EXPECT_DOUBLE_EQ(recursion_bound(0.5, 1.0, 4.0, 3), 2.5);
  EXPECT_THROW(recursion_bound(1.0, 0.1, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(recursion_bound(0.5, -0.1, 1.0, 1), std::invalid_argument);
}

TEST(Helpers, NagCoefficient) {
  EXPECT_NEAR(nag_lyapunov_coefficient(0.01, 0.25), 1.1605263157894737, 1e-15);
  EXPECT_TRUE(std::isinf(nag_lyapunov_coefficient(1.0, 1.0)));
}

TEST(DescentLemma, EqualityOnQuadratic) {
  // isotropic, so the smoothness bound is attained along every gradient
  const Objective f = make_quadratic(diag({2.0, 2.0}));
  const Vector x = vec({1.0, -2.0});
  const Vector g = f.gradient(x);
  EXPECT_NEAR(f.value(x - 0.5 * g), f.value(x) - g.squaredNorm() / 4.0, 1e-15);
  EXPECT_TRUE(certify_descent_lemma(f, x, g, 0.5));
  EXPECT_TRUE(certify_descent_lemma(f, x, Vector::Zero(2), 0.5));
}

TEST(DescentLemma, FuzzOnShippedObjectives) {
  const std::vector<Objective> fs{make_oscillatory_1d(0.05, 2.0), make_oscillatory_1d(0.2, 2.0),
                                  make_degenerate_quadratic(diag({0.0, 0.01, 4.0})),
                                  make_quadratic(diag({1.0, 3.0}))};
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const Objective& f : fs) {
    ASSERT_TRUE(f.smoothness_L.has_value()) << f.id;
    for (int i = 0; i < 10000; ++i) {
      Vector x(f.dim), g(f.dim);
      for (int j = 0; j < f.dim; ++j) {
        x[j] = z(rng);
        g[j] = z(rng);
      }
      const double eta = u(rng) / *f.smoothness_L;
      ASSERT_TRUE(certify_descent_lemma(f, x, g, eta)) << f.id << " at " << x.transpose();
    }
  }
}

TEST(Values, MatchSchemes) {
  const Objective f = make_degenerate_quadratic(diag({0.0, 1.0}));
  const TrajectoryRecord r = nag_run(f, 1.0, 0.25, vec({1.0, 1.0}), 10);
  const Vector v = lyapunov_values(f, r);
  const LyapunovTrace tr = discrete_lyapunov_nag(f, r, r.params);
  for (Eigen::Index k = 0; k < v.size(); ++k) EXPECT_NEAR(v[k], tr.values[k], 1e-15);

  OptimizerParams gd = gd_params(0.5);
  gd.horizon = 3;
  const TrajectoryRecord rg = run_discrete(f, NoiseModel::none(), gd, vec({1.0, 1.0}));
  EXPECT_EQ(lyapunov_values(f, rg), rg.f);
}
