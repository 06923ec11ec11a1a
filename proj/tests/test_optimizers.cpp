#include <cmath>

#include <gtest/gtest.h>

#include "nagcert/optimizers.hpp"

using namespace nagcert;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Matrix diag(std::initializer_list<double> xs) { return vec(xs).asDiagonal(); }

}  // namespace

TEST(Params, NagMomentum) {
  EXPECT_DOUBLE_EQ(nag_params(1.0, 0.25).rho, 1.0 / 3.0);
  EXPECT_EQ(nag_params(1.0, 1.0).rho, 0.0);
  EXPECT_NEAR(nag_params(0.01, 1.0).rho, 0.9 / 1.1, 1e-15);
  EXPECT_THROW(nag_params(2.0, 1.0), std::invalid_argument);
  EXPECT_THROW(nag_params(0.0, 1.0), std::invalid_argument);
}

TEST(Params, AgnesConstants) {
  const OptimizerParams p = agnes_params(0.01, 0.5, 1.0, 1.0);
  // mpmath oracle
  EXPECT_NEAR(p.alpha, 0.23684210526315789, 1e-15);
  EXPECT_NEAR(p.agnes->b, 0.97332852678457523, 1e-15);
  EXPECT_NEAR(p.rho, 0.90476190476190476, 1e-15);
  EXPECT_NEAR(p.agnes->gamma_lyap, std::sqrt(p.alpha) / p.agnes->b, 1e-12);
  const double sma = std::sqrt(p.mu * p.alpha);
  EXPECT_NEAR(p.rho, (p.agnes->b - sma) / (p.agnes->b + sma), 1e-14);
}

TEST(Params, AgnesReducesToNag) {
  const OptimizerParams a = agnes_params(0.04, 0.5, 0.0);
  const OptimizerParams n = nag_params(0.04, 0.5);
  EXPECT_EQ(a.alpha, a.eta);
  EXPECT_EQ(a.rho, n.rho);
  EXPECT_EQ(a.agnes->b, 1.0);
}

TEST(Params, AgnesRejects) {
  EXPECT_THROW(agnes_params(0.01, 0.6, 1.0, 1.0), std::invalid_argument);  // eta > 1/(L(1+s^2))
  EXPECT_THROW(agnes_params(0.01, 0.5, -1.0), std::invalid_argument);
}

TEST(Schedule, AppendixForm) {
  const OptimizerParams p = decreasing_params(1.0, 1.0);
  EXPECT_DOUBLE_EQ(p.n0, 1.0);
  EXPECT_DOUBLE_EQ(p.eta, 0.25);
  EXPECT_DOUBLE_EQ(p.rho, 1.0 / 3.0);
  // mpmath oracle, mu = 0.04, L = 1
  EXPECT_NEAR(decreasing_schedule(0.04, 1.0, 0).eta, 0.69444444444444444, 1e-15);
  EXPECT_NEAR(decreasing_schedule(0.04, 1.0, 10).eta, 0.09765625, 1e-16);
  EXPECT_NEAR(decreasing_schedule(0.04, 1.0, 999).eta, 2.4751862577658969e-5, 1e-19);
  EXPECT_THROW(decreasing_params(2.0, 1.0), std::invalid_argument);
}

TEST(Schedule, MonotoneAndRootIdentity) {
  for (auto [mu, L] : {std::pair{0.04, 1.0}, std::pair{0.3, 7.0}, std::pair{1.0, 1.0}}) {
    const double n0 = std::sqrt(L / mu);
    double prev = INFINITY;
    for (int n = 0; n < 500; ++n) {
      const double eta = decreasing_schedule(mu, L, n).eta;
      EXPECT_LT(eta, prev);
      EXPECT_NEAR(std::sqrt(mu * eta), 1.0 / (n + n0 + 1.0), 1e-15);
      prev = eta;
    }
  }
}

TEST(Discrete, GradientDescentNewtonStep) {
  const Objective f = make_quadratic(diag({1.0}));
  OptimizerParams p = gd_params(1.0);
  p.horizon = 1;
  const TrajectoryRecord r = run_discrete(f, NoiseModel::none(), p, vec({5.0}));
  EXPECT_EQ(r.x(0, 1), 0.0);
}

TEST(Discrete, ZeroVelocityLookAhead) {
  const Objective f = make_ellipse_quartic();
  OptimizerParams p = nag_params(1.0, 0.01);
  p.horizon = 3;
  const TrajectoryRecord r = run_discrete(f, NoiseModel::none(), p, vec({1.5, 1.5}));
  EXPECT_EQ(r.x_prime.col(0), r.x.col(0));
  EXPECT_EQ(r.size(), 4);
  EXPECT_TRUE(std::isnan(r.g(0, 3)));
}

TEST(Discrete, AgnesMatchesNagBitwiseWithoutMultiplicativeNoise) {
  const Objective f = make_degenerate_quadratic(diag({0.0, 0.01, 1.0}));
  OptimizerParams pn = nag_params(0.01, 0.5);
  OptimizerParams pa = agnes_params(0.01, 0.5, 0.0, 1.0);
  pn.horizon = pa.horizon = 200;
  const NoiseModel noise = NoiseModel::gaussian(0.3, 0.0, 8);
  const TrajectoryRecord rn = run_discrete(f, noise, pn, Vector::Ones(3));
  const TrajectoryRecord ra = run_discrete(f, noise, pa, Vector::Ones(3));
  EXPECT_TRUE((rn.x.array() == ra.x.array()).all());
  EXPECT_TRUE((rn.v.array() == ra.v.array()).all());
}

TEST(Discrete, ReplayAndEnsembleOrder) {
  const Objective f = make_quadratic(diag({1.0, 4.0}));
  OptimizerParams p = nag_params(1.0, 0.25);
  p.horizon = 50;
  const NoiseModel noise = NoiseModel::gaussian(1.0, 0.5, 0);
  const std::vector<std::uint64_t> seeds{5, 1, 9, 2};
  const auto ens = run_ensemble(f, noise, p, Vector::Ones(2), seeds, 3);
  ASSERT_EQ(ens.size(), seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const TrajectoryRecord r = run_discrete(f, noise.with_seed(seeds[i]), p, Vector::Ones(2));
    EXPECT_TRUE((r.x.array() == ens[i].x.array()).all()) << i;
  }
}

TEST(Discrete, DivergenceGuard) {
  const Objective f = make_quadratic(diag({1.0}));
  OptimizerParams p = gd_params(3.0);  // |1 - 3| = 2 per step
  p.horizon = 100;
  EXPECT_THROW(run_discrete(f, NoiseModel::none(), p, vec({1.0})), DivergenceError);
}

TEST(Flow, CriticallyDampedClosedForm) {
  for (double mu : {1.0, 0.25}) {
    Matrix A(1, 1);
    A << mu;
    const Objective f = make_quadratic(A);
    const OptimizerParams p = flow_params(mu, 5.0, 1e-3);
    const TrajectoryRecord r = run_flow(f, p, vec({1.0}));
    const double t = r.t[r.size() - 1];
    ASSERT_NEAR(t, 5.0, 1e-9);
    const double sm = std::sqrt(mu);
    EXPECT_NEAR(r.x(0, r.size() - 1), (1.0 + sm * t) * std::exp(-sm * t), 1e-6);
  }
}

TEST(Flow, EquilibriumStaysPut) {
  const Objective f = make_degenerate_quadratic(diag({0.0, 1.0}));
  const TrajectoryRecord r = run_flow(f, flow_params(1.0, 2.0), vec({0.7, 0.0}));
  for (Eigen::Index k = 0; k < r.size(); ++k) EXPECT_EQ(r.x.col(k), vec({0.7, 0.0}));
}

TEST(Flow, EnergyMonotone) {
  const std::vector<std::pair<Objective, Vector>> cases{
      {make_oscillatory_1d(0.05, 2.0), vec({0.8})},
      {make_product_structure(1, 2, sine_scale(1), 1.0), vec({0.5, 1.0})},
      {make_squared_distance(CircleManifold{1.0}, 2.0), vec({1.4, 0.3})},
      {make_squared_distance(EllipseManifold{2.0, 1.0}, 1.0), vec({2.5, 0.4})},
      {make_ellipse_quartic(), vec({1.5, 1.5})},
      {make_degenerate_quadratic(diag({0.0, 0.01, 4.0})), vec({1.0, 1.0, 1.0})},
  };
  for (const auto& [f, x0] : cases) {
    const TrajectoryRecord r = run_flow(f, flow_params(0.5, 5.0, 1e-3, f.smoothness_L), x0);
    for (Eigen::Index k = 0; k + 1 < r.size(); ++k) ASSERT_LE(r.energy[k + 1], r.energy[k] + 1e-9) << f.id << " k=" << k;
  }
}

TEST(Flow, InterpolationEndpoints) {
  const Objective f = make_quadratic(diag({1.0}));
  const TrajectoryRecord r = run_flow(f, flow_params(1.0, 1.0), vec({1.0}));
  EXPECT_EQ(interpolate_position(r, 0.0), r.x.col(0));
  EXPECT_EQ(interpolate_position(r, r.t[r.size() - 1]), r.x.col(r.size() - 1));
}
