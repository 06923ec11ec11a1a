#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace nagcert {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when an objective or projection is evaluated where it is not defined
/// (e.g. the center of a circle manifold, where the closest point is not unique).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// pi(x) = Pi x + x_star with Pi an orthogonal projection onto the tangent space
/// of an affine minimizer set and x_star its minimum-norm element.
struct AffineProjection {
  Matrix pi;
  Vector x_star;

  Vector apply(const Vector& x) const { return pi * x + x_star; }
  Matrix complement() const { return Matrix::Identity(pi.rows(), pi.cols()) - pi; }
};

enum class ProjectionKind { AffineLinear, AnalyticClosedForm, NumericNearest };

/// Closest-point projection onto the minimizer manifold.
struct ProjectionSpec {
  ProjectionKind kind = ProjectionKind::AnalyticClosedForm;
  std::function<Vector(const Vector&)> map;
  std::optional<AffineProjection> affine;  // set iff kind == AffineLinear
  int manifold_dim = 0;
  double sublevel_alpha = std::numeric_limits<double>::infinity();
  /// Draws a point on the manifold; used by optimality checks and tube sampling.
  std::function<Vector(std::mt19937_64&)> sample_manifold;

  Vector operator()(const Vector& x) const { return map(x); }
};

/// Value/gradient oracle plus whatever geometric constants are known in closed form.
struct Objective {
  std::string id;
  int dim = 1;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::optional<double> inf_value;
  std::optional<double> smoothness_L;
  std::optional<double> sc_mu;
  std::optional<double> neg_curvature_eps;
  std::optional<ProjectionSpec> projection;

  double operator()(const Vector& x) const { return value(x); }
  double gap(const Vector& x) const { return value(x) - inf_value.value_or(0.0); }
  bool has_affine_projection() const { return projection && projection->affine.has_value(); }
};

/// Smooth scalar field on the first k coordinates with a known positive lower bound.
struct ScaleFunction {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  double lower_bound = 0.0;
};

/// s(y) = 2 + mean_i sin(y_i); lower bound 1.
ScaleFunction sine_scale(int k);

struct CircleManifold {
  double radius = 1.0;
};
struct EllipseManifold {
  double a = 1.0;  // semi-axis along x
  double b = 1.0;  // semi-axis along y
};
using CurveManifold = std::variant<CircleManifold, EllipseManifold>;

/// f(x) = x^2/2 + (eps/2) x^2 sin(2R log|x|), with f(0) = f'(0) = 0.
Objective make_oscillatory_1d(double eps_osc, double R);

/// f(x) = s(x_1..x_k) * (quad_mu/2) * |(x_{k+1}..x_d)|^2.
Objective make_product_structure(int k, int d, const ScaleFunction& scale, double quad_mu);

/// f(x) = (mu/2) dist(x, M)^2 for a planar circle or ellipse M.
Objective make_squared_distance(const CurveManifold& manifold, double mu);

/// f(x, y) = (x^2/2 + 3y^2 - 1)^2.
Objective make_ellipse_quartic();

/// f(x) = x^T A x / 2 for symmetric PSD A. The minimizer set is ker A.
Objective make_quadratic(const Matrix& A);

/// As make_quadratic, but requires a nontrivial kernel.
Objective make_degenerate_quadratic(const Matrix& A);

/// Closed forms for the oscillatory family.
namespace oscillatory {
double smoothness(double eps_osc, double R);      // 1 + eps sqrt(1 + 5R^2 + 4R^4)
double sc_wrt_min(double eps_osc, double R);      // 1 - eps sqrt(1 + 4R^2)
double strong_convexity(double eps_osc, double R);  // 1 - eps sqrt(1 + 5R^2 + 4R^4)
double pl_constant(double eps_osc, double R);     // (1 - eps sqrt(1 + R^2))^2 / (1 + eps)
double second_derivative(double eps_osc, double R, double x);
bool quasar_convex(double eps_osc, double R);     // R^2 < (1 - eps^2) / eps^2
}  // namespace oscillatory

/// Nearest point on the ellipse x^2/a^2 + y^2/b^2 = 1, by Newton iteration on the
/// angle parameter. Among several stationary angles the closest is kept; exact ties
/// go to the smallest angle in [0, 2pi).
Eigen::Vector2d ellipse_nearest_point(double a, double b, const Eigen::Vector2d& p);

/// Objective from a registry identifier such as "oscillatory1d{0.05,2}",
/// "quad{0,0.01,4}", "sqdist-circle{r=1,mu=2}", "product{k=1,d=2,mu=1}",
/// "sqdist-ellipse{a,b,mu}" or "ellipse-quartic".
Objective make_objective(const std::string& id);

/// Max over the given points of |grad f - central FD gradient| / (1 + |grad f|).
double gradient_consistency_error(const Objective& f, const std::vector<Vector>& points, double h = 1e-5);

}  // namespace nagcert
