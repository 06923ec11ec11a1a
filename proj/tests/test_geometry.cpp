#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nagcert/geometry.hpp"

using namespace nagcert;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Matrix diag(std::initializer_list<double> xs) { return vec(xs).asDiagonal(); }

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = a + (b - a) * i / (n - 1);
  return t;
}

}  // namespace

TEST(Region, ParseAndDescribe) {
  const Region b = parse_region("box{-1,2}@7");
  EXPECT_EQ(b.kind, RegionKind::Box);
  EXPECT_EQ(b.lo, -1.0);
  EXPECT_EQ(b.hi, 2.0);
  EXPECT_EQ(b.seed, 7u);
  EXPECT_EQ(parse_region(b.describe()).describe(), b.describe());
  EXPECT_EQ(parse_region("shell{0.001,1}").kind, RegionKind::LogShell);
  EXPECT_EQ(parse_region("tube{0.3}").width, 0.3);
  EXPECT_THROW(parse_region("ball{1}"), std::invalid_argument);
  EXPECT_THROW(parse_region("box{1}"), std::invalid_argument);
}

TEST(Diagnose, QuadraticIsExact) {
  const GeometryReport r = diagnose(make_quadratic(diag({1.0})), Region::box(-2.0, 2.0), 1000);
  EXPECT_NEAR(r.pl_constant_emp, 1.0, 1e-12);
  EXPECT_NEAR(r.sc_wrt_min_emp, 1.0, 1e-12);
  EXPECT_NEAR(*r.quasar_gamma, 1.0, 1e-12);
}

TEST(Diagnose, OscillatorySharpness) {
  const GeometryReport r = diagnose(make_oscillatory_1d(0.05, 2.0), Region::log_shell(1e-3, 1.0), 4000);
  const double sc = 1.0 - 0.05 * std::sqrt(17.0);
  EXPECT_NEAR(r.sc_wrt_min_emp, sc, 5e-3 * sc);
  EXPECT_NEAR(r.curvature_sup, 1.0 + 0.05 * std::sqrt(85.0), 5e-3 * (1.0 + 0.05 * std::sqrt(85.0)));
  EXPECT_GE(r.pl_constant_emp, oscillatory::pl_constant(0.05, 2.0));
}

TEST(Diagnose, PlWithoutFirstOrderConvexity) {
  // eps sqrt(1 + 4R^2) = 0.1 sqrt(101) > 1 while eps sqrt(1 + R^2) < 1
  const GeometryReport r = diagnose(make_oscillatory_1d(0.1, 5.0), Region::log_shell(1e-3, 1.0), 4000);
  EXPECT_LT(r.sc_wrt_min_emp, 0.0);
  EXPECT_GT(r.pl_constant_emp, 0.0);
}

TEST(Diagnose, HierarchyAndSmoothnessBound) {
  const std::vector<std::pair<Objective, Region>> cases{
      {make_oscillatory_1d(0.05, 2.0), Region::log_shell(1e-3, 1.0)},
      {make_oscillatory_1d(0.2, 2.0), Region::log_shell(1e-3, 1.0)},
      {make_product_structure(1, 2, sine_scale(1), 1.0), Region::box(-2.0, 2.0)},
      {make_squared_distance(CircleManifold{1.0}, 2.0), Region::tube(0.5)},
      {make_degenerate_quadratic(diag({0.0, 0.01, 4.0})), Region::box(-1.0, 1.0)},
  };
  for (const auto& [f, region] : cases) {
    const GeometryReport r = diagnose(f, region, 2000);
    if (r.sc_wrt_min_emp > 0.0) EXPECT_GE(r.pl_constant_emp, r.sc_wrt_min_emp - 1e-9) << f.id;
    if (f.smoothness_L) EXPECT_LE(r.pl_constant_emp, *f.smoothness_L + 1e-9) << f.id;
  }
}

TEST(Diagnose, QuasarThresholdOnSamples) {
  for (auto [eps, R] : {std::pair{0.05, 2.0}, std::pair{0.1, 5.0}, std::pair{0.2, 5.0}, std::pair{0.3, 4.0}}) {
    const GeometryReport r = diagnose(make_oscillatory_1d(eps, R), Region::log_shell(1e-3, 1.0), 4000);
    EXPECT_EQ(r.quasar_gamma.has_value(), oscillatory::quasar_convex(eps, R)) << eps << " " << R;
  }
}

TEST(Diagnose, Preconditions) {
  EXPECT_THROW(diagnose(make_quadratic(diag({1.0})), Region::box(-1.0, 1.0), 10), std::invalid_argument);
  // the box sits inside the ellipse, outside the tube where the closest point is unique
  EXPECT_THROW(diagnose(make_ellipse_quartic(), Region::box(-0.3, 0.3), 1000), DomainError);
}

TEST(Diagnose, Deterministic) {
  const Objective f = make_oscillatory_1d(0.075, 6.0);
  const GeometryReport a = diagnose(f, Region::log_shell(1e-3, 1.0), 2000);
  const GeometryReport b = diagnose(f, Region::log_shell(1e-3, 1.0), 2000);
  EXPECT_EQ(geometry_csv(a).str(), geometry_csv(b).str());
}

TEST(LineProbe, QuadraticIdentity) {
  const Objective f = make_quadratic(Matrix::Identity(3, 3));
  const auto rows = line_probe(f, Vector::Zero(3), vec({1.0, 2.0, -2.0}), grid(0.2, 2.0, 10), 0.01, 0.0);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.d2phi, 1.0, 1e-9);
    EXPECT_NEAR(r.mu_est, 1.0, 1e-9);
  }
}

TEST(LineProbe, SecondOrderAccuracy) {
  const Objective f = make_oscillatory_1d(0.05, 2.0);
  double prev = 0.0;
  for (double h : {0.01, 0.005, 0.0025}) {
    const auto rows = line_probe(f, vec({0.5}), vec({1.0}), {0.0}, h);
    const double err = std::abs(rows[0].d2phi - oscillatory::second_derivative(0.05, 2.0, 0.5));
    if (prev > 0.0) EXPECT_NEAR(prev / err, 4.0, 0.2);
    prev = err;
  }
}

TEST(LineProbe, Preconditions) {
  const Objective f = make_quadratic(diag({1.0}));
  EXPECT_THROW(line_probe(f, vec({0.0}), vec({1.0}), {1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(line_probe(f, vec({0.0}), vec({0.0}), {1.0}), std::invalid_argument);
  EXPECT_TRUE(std::isnan(line_probe(f, vec({0.0}), vec({1.0}), {0.05})[0].mu_est));
}

TEST(Monotonicity, NormalMotionTowardAffineSet) {
  const Objective f = make_degenerate_quadratic(diag({0.0, 1.0}));
  SampledCurve c;
  c.points.resize(2, 1001);
  c.dt = 1e-3;
  for (int k = 0; k <= 1000; ++k) c.points.col(k) = vec({0.3, 1.0 - k * 1e-3});
  const MonotonicityReport r = check_projection_monotonicity(*f.projection, c);
  EXPECT_EQ(r.min_inner, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(Monotonicity, TangentialCircleMotion) {
  const Objective f = make_squared_distance(CircleManifold{1.0}, 1.0);
  SampledCurve c;
  c.points.resize(2, 1001);
  c.dt = 1e-3;
  for (int k = 0; k <= 1000; ++k) {
    const double th = 2.0 * k * 1e-3;
    c.points.col(k) = 1.3 * vec({std::cos(th), std::sin(th)});
  }
  const MonotonicityReport r = check_projection_monotonicity(*f.projection, c);
  EXPECT_GT(r.min_inner, 0.0);
}

TEST(Monotonicity, RejectsCoarseOrInvalidCurves) {
  const Objective f = make_squared_distance(CircleManifold{1.0}, 1.0);
  SampledCurve coarse;
  coarse.points = Matrix::Ones(2, 10);
  coarse.dt = 0.1;
  EXPECT_THROW(check_projection_monotonicity(*f.projection, coarse), std::invalid_argument);
  SampledCurve through_centre;
  through_centre.points.resize(2, 1001);
  through_centre.dt = 1e-3;
  for (int k = 0; k <= 1000; ++k) through_centre.points.col(k) = vec({-0.5 + k * 1e-3, 0.0});
  EXPECT_THROW(check_projection_monotonicity(*f.projection, through_centre), DomainError);
}

TEST(NegativeCurvature, Probes) {
  EXPECT_EQ(probe_negative_curvature(make_quadratic(diag({1.0, 2.0})), Region::box(-1.0, 1.0), 1000), 0.0);
  EXPECT_GT(probe_negative_curvature(make_ellipse_quartic(), Region::box(-0.3, 0.3), 1000), 0.0);
  const double analytic = -oscillatory::strong_convexity(0.2, 2.0);
  EXPECT_NEAR(probe_negative_curvature(make_oscillatory_1d(0.2, 2.0), Region::log_shell(1e-3, 1.0), 4000), analytic,
              0.01 * analytic);
}

TEST(FdHessian, Quadratic) {
  Matrix A(2, 2);
  A << 2, 1, 1, 3;
  EXPECT_LT((fd_hessian(make_quadratic(A), vec({0.4, -1.0})) - A).norm(), 1e-8);
}
