#include <cmath>

#include <gtest/gtest.h>

#include "nagcert/noise.hpp"
#include "nagcert/stats.hpp"

using namespace nagcert;

namespace {

Matrix diag(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v.asDiagonal();
}

}  // namespace

TEST(NormalStream, FrozenDraws) {
  // Python big-int reimplementation of the splitmix64 / Box-Muller stream
  NormalStream s(42, 7);
  EXPECT_NEAR(s.next(), -0.48403290118970428, 1e-15);
  EXPECT_NEAR(s.next(), -0.54624233444788522, 1e-15);
  EXPECT_NEAR(s.next(), -0.56976184973812182, 1e-15);
  EXPECT_NEAR(s.next(), 1.7258610602593865, 1e-15);
}

TEST(NormalStream, LagOneAutocorrelation) {
  const std::size_t n = 100000;
  std::vector<double> z;
  z.reserve(n);
  for (std::uint64_t i = 0; i < n / 2; ++i) {
    NormalStream s(3, i);
    z.push_back(s.next());
    z.push_back(s.next());
  }
  const SampleSummary m = summarize(z);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    den += (z[i] - m.mean) * (z[i] - m.mean);
    if (i + 1 < n) num += (z[i] - m.mean) * (z[i + 1] - m.mean);
  }
  EXPECT_LE(std::abs(num / den), 4.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_LE(std::abs(m.mean), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Noise, ZeroNoiseIsExact) {
  const Objective f = make_degenerate_quadratic(diag({0.0, 1.0, 3.0}));
  Vector x(3);
  x << 0.3, -1.2, 2.0;
  EXPECT_EQ(estimate_gradient(f, NoiseModel::none(), x, 17), f.gradient(x));
}

TEST(Noise, ReplayIsBitIdentical) {
  const Objective f = make_quadratic(diag({1.0, 2.0}));
  const NoiseModel m = NoiseModel::gaussian(1.0, 0.5, 99);
  Vector x(2);
  x << 0.7, -0.1;
  for (std::uint64_t k = 0; k < 10; ++k) EXPECT_EQ(estimate_gradient(f, m, x, k), estimate_gradient(f, m, x, k));
  EXPECT_NE(estimate_gradient(f, m, x, 0), estimate_gradient(f, m, x, 1));
  EXPECT_NE(estimate_gradient(f, m, x, 0), estimate_gradient(f, m.with_seed(100), x, 0));
}

TEST(Noise, AdditiveAtMinimizerIsCentred) {
  const int d = 4;
  const Objective f = make_quadratic(Matrix::Identity(d, d));
  const NoiseModel m = NoiseModel::gaussian(1.0, 0.0, 5);
  const Vector x = Vector::Zero(d);
  Vector sum = Vector::Zero(d);
  RunningStats sq;
  const std::uint64_t n = 100000;
  for (std::uint64_t k = 0; k < n; ++k) {
    const Vector g = estimate_gradient(f, m, x, k);
    sum += g;
    sq.push(g.squaredNorm());
  }
  EXPECT_LE((sum / static_cast<double>(n)).norm(), 0.02 * std::sqrt(static_cast<double>(d)));
  // total variance sigma_a^2
  EXPECT_NEAR(sq.mean(), 1.0, 4.0 * sq.standard_error());
}

TEST(Noise, StochasticIdentities) {
  const Objective f = make_degenerate_quadratic(diag({0.0, 1.0}));
  Vector x(2), v(2);
  x << 1.0, 0.0;
  v << 0.3, -0.4;
  const StochasticIdentityReport zero = verify_stochastic_identities(f, NoiseModel::none(), x, v, 1000);
  EXPECT_TRUE(zero.pass);
  for (const auto& c : zero.checks) EXPECT_NEAR(c.lhs, c.rhs, 1e-12 * std::max(1.0, std::abs(c.rhs))) << c.name;

  Vector y(2);
  y << 1.0, 0.5;  // nonzero gradient so the multiplicative term matters
  const StochasticIdentityReport r =
      verify_stochastic_identities(f, NoiseModel::gaussian(1.0, 1.0, 1), y, v, 100000);
  EXPECT_TRUE(r.pass);
  for (const auto& c : r.checks) EXPECT_TRUE(c.pass) << c.name << " z=" << c.z_score;
  EXPECT_THROW(verify_stochastic_identities(f, NoiseModel::none(), x, v, 10), std::invalid_argument);
}

TEST(Noise, ParseKinds) {
  EXPECT_EQ(parse_noise_kind("gaussian"), NoiseKind::GaussianPrototype);
  EXPECT_EQ(parse_noise_kind("zero"), NoiseKind::ZeroNoise);
  EXPECT_THROW(parse_noise_kind("laplace"), std::invalid_argument);
}
