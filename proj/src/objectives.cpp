#include "nagcert/objectives.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace nagcert {

namespace oscillatory {

double smoothness(double eps_osc, double R) {
  return 1.0 + eps_osc * std::sqrt(1.0 + 5.0 * R * R + 4.0 * R * R * R * R);
}

double sc_wrt_min(double eps_osc, double R) { return 1.0 - eps_osc * std::sqrt(1.0 + 4.0 * R * R); }

double strong_convexity(double eps_osc, double R) {
  return 1.0 - eps_osc * std::sqrt(1.0 + 5.0 * R * R + 4.0 * R * R * R * R);
}

double pl_constant(double eps_osc, double R) {
  const double t = 1.0 - eps_osc * std::sqrt(1.0 + R * R);
  return t * t / (1.0 + eps_osc);
}

double second_derivative(double eps_osc, double R, double x) {
  if (x == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double xi = 2.0 * R * std::log(std::abs(x));
  return 1.0 + eps_osc * (1.0 - 2.0 * R * R) * std::sin(xi) + 3.0 * R * eps_osc * std::cos(xi);
}

bool quasar_convex(double eps_osc, double R) {
  return R * R < (1.0 - eps_osc * eps_osc) / (eps_osc * eps_osc);
}

}  // namespace oscillatory

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

std::string fmt_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

ScaleFunction sine_scale(int k) {
  require(k >= 1, "sine_scale: k must be positive");
  ScaleFunction s;
  s.value = [k](const Vector& y) { return 2.0 + y.array().sin().sum() / k; };
  s.gradient = [k](const Vector& y) -> Vector { return y.array().cos().matrix() / k; };
  s.lower_bound = 1.0;
  return s;
}

Objective make_oscillatory_1d(double eps_osc, double R) {
  require(eps_osc > 0.0 && eps_osc < 1.0, "oscillatory1d: eps_osc must lie in (0, 1)");
  require(R > 0.0, "oscillatory1d: R must be positive");

  Objective f;
  f.id = "oscillatory1d{" + fmt_num(eps_osc) + "," + fmt_num(R) + "}";
  f.dim = 1;
  f.value = [eps_osc, R](const Vector& x) {
    const double t = x[0];
    if (t == 0.0) return 0.0;
    return 0.5 * t * t * (1.0 + eps_osc * std::sin(2.0 * R * std::log(std::abs(t))));
  };
  f.gradient = [eps_osc, R](const Vector& x) {
    const double t = x[0];
    Vector g(1);
    if (t == 0.0) {
      g[0] = 0.0;
      return g;
    }
    const double xi = 2.0 * R * std::log(std::abs(t));
    g[0] = (1.0 + eps_osc * std::sin(xi) + R * eps_osc * std::cos(xi)) * t;
    return g;
  };
  f.inf_value = 0.0;
  f.smoothness_L = oscillatory::smoothness(eps_osc, R);
  if (const double mu = oscillatory::sc_wrt_min(eps_osc, R); mu > 0.0) f.sc_mu = mu;
  f.neg_curvature_eps = std::max(0.0, -oscillatory::strong_convexity(eps_osc, R));

  ProjectionSpec p;
  p.kind = ProjectionKind::AnalyticClosedForm;
  p.map = [](const Vector& x) -> Vector { return Vector::Zero(x.size()); };
  p.manifold_dim = 0;
  p.sample_manifold = [](std::mt19937_64&) -> Vector { return Vector::Zero(1); };
  f.projection = std::move(p);
  return f;
}

Objective make_product_structure(int k, int d, const ScaleFunction& scale, double quad_mu) {
  require(k >= 1 && d > k, "product: need 1 <= k < d");
  require(scale.lower_bound > 0.0, "product: scale lower bound must be positive");
  require(quad_mu > 0.0, "product: quad_mu must be positive");

  Objective f;
  f.id = "product{k=" + std::to_string(k) + ",d=" + std::to_string(d) + ",mu=" + fmt_num(quad_mu) + "}";
  f.dim = d;
  const int m = d - k;
  f.value = [=](const Vector& x) {
    return scale.value(x.head(k)) * 0.5 * quad_mu * x.tail(m).squaredNorm();
  };
  f.gradient = [=](const Vector& x) {
    Vector g(d);
    const double q = 0.5 * quad_mu * x.tail(m).squaredNorm();
    g.head(k) = scale.gradient(x.head(k)) * q;
    g.tail(m) = scale.value(x.head(k)) * quad_mu * x.tail(m);
    return g;
  };
  f.inf_value = 0.0;
  f.sc_mu = scale.lower_bound * quad_mu;

  AffineProjection affine{Matrix::Zero(d, d), Vector::Zero(d)};
  affine.pi.topLeftCorner(k, k).setIdentity();
  ProjectionSpec p;
  p.kind = ProjectionKind::AffineLinear;
  p.affine = affine;
  p.map = [affine](const Vector& x) { return affine.apply(x); };
  p.manifold_dim = k;
  p.sample_manifold = [k, d](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
    Vector z = Vector::Zero(d);
    for (int i = 0; i < k; ++i) z[i] = u(rng);
    return z;
  };
  f.projection = std::move(p);
  return f;
}

namespace {

struct CurveGeometry {
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> nearest;
  std::function<bool(const Eigen::Vector2d&)> inside;
  std::function<Eigen::Vector2d(double)> point_at;
  double reach = 0.0;
};

CurveGeometry curve_geometry(const CurveManifold& manifold) {
  CurveGeometry g;
  if (const auto* c = std::get_if<CircleManifold>(&manifold)) {
    const double r = c->radius;
    require(r > 0.0, "circle radius must be positive");
    g.nearest = [r](const Eigen::Vector2d& p) -> Eigen::Vector2d {
      const double n = p.norm();
      if (!(n > 0.0)) throw DomainError("circle projection undefined at the center");
      return r * p / n;
    };
    g.inside = [r](const Eigen::Vector2d& p) { return p.norm() < r; };
    g.point_at = [r](double th) { return Eigen::Vector2d(r * std::cos(th), r * std::sin(th)); };
    g.reach = r;
  } else {
    const auto& e = std::get<EllipseManifold>(manifold);
    const double a = e.a, b = e.b;
    require(a > 0.0 && b > 0.0, "ellipse semi-axes must be positive");
    g.nearest = [a, b](const Eigen::Vector2d& p) { return ellipse_nearest_point(a, b, p); };
    g.inside = [a, b](const Eigen::Vector2d& p) {
      return (p.x() * p.x()) / (a * a) + (p.y() * p.y()) / (b * b) < 1.0;
    };
    g.point_at = [a, b](double th) { return Eigen::Vector2d(a * std::cos(th), b * std::sin(th)); };
    // smallest radius of curvature
    g.reach = std::min(b * b / a, a * a / b);
  }
  return g;
}

/// Closest point with the validity rule shared by all planar curve objectives:
/// outside the curve the projection is unique; inside it must stay within the reach.
Eigen::Vector2d checked_nearest(const CurveGeometry& g, const Eigen::Vector2d& p) {
  const Eigen::Vector2d z = g.nearest(p);
  if (g.inside(p) && (p - z).norm() >= g.reach)
    throw DomainError("point lies outside the tubular neighborhood of the minimizer curve");
  return z;
}

ProjectionSpec curve_projection(const CurveGeometry& g, ProjectionKind kind) {
  ProjectionSpec p;
  p.kind = kind;
  p.map = [g](const Vector& x) -> Vector {
    if (x.size() != 2) throw std::invalid_argument("planar projection needs a 2-vector");
    return checked_nearest(g, Eigen::Vector2d(x[0], x[1]));
  };
  p.manifold_dim = 1;
  p.sample_manifold = [g](std::mt19937_64& rng) -> Vector {
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    return g.point_at(u(rng));
  };
  return p;
}

}  // namespace

Objective make_squared_distance(const CurveManifold& manifold, double mu) {
  require(mu > 0.0, "sqdist: mu must be positive");
  const CurveGeometry g = curve_geometry(manifold);

  Objective f;
  if (const auto* c = std::get_if<CircleManifold>(&manifold)) {
    f.id = "sqdist-circle{r=" + fmt_num(c->radius) + ",mu=" + fmt_num(mu) + "}";
  } else {
    const auto& e = std::get<EllipseManifold>(manifold);
    f.id = "sqdist-ellipse{a=" + fmt_num(e.a) + ",b=" + fmt_num(e.b) + ",mu=" + fmt_num(mu) + "}";
  }
  f.dim = 2;
  f.value = [g, mu](const Vector& x) {
    const Eigen::Vector2d p(x[0], x[1]);
    return 0.5 * mu * (p - checked_nearest(g, p)).squaredNorm();
  };
  f.gradient = [g, mu](const Vector& x) -> Vector {
    const Eigen::Vector2d p(x[0], x[1]);
    return mu * (p - checked_nearest(g, p));
  };
  f.inf_value = 0.0;
  f.sc_mu = mu;

  ProjectionSpec p = curve_projection(
      g, std::holds_alternative<CircleManifold>(manifold) ? ProjectionKind::AnalyticClosedForm
                                                          : ProjectionKind::NumericNearest);
  p.sublevel_alpha = 0.5 * mu * g.reach * g.reach;
  f.projection = std::move(p);
  return f;
}

Objective make_ellipse_quartic() {
  const double a = std::sqrt(2.0), b = 1.0 / std::sqrt(3.0);
  const CurveGeometry g = curve_geometry(EllipseManifold{a, b});

  Objective f;
  f.id = "ellipse-quartic";
  f.dim = 2;
  f.value = [](const Vector& x) {
    const double q = 0.5 * x[0] * x[0] + 3.0 * x[1] * x[1] - 1.0;
    return q * q;
  };
  f.gradient = [](const Vector& x) {
    const double q = 0.5 * x[0] * x[0] + 3.0 * x[1] * x[1] - 1.0;
    Vector gr(2);
    gr << 2.0 * q * x[0], 12.0 * q * x[1];
    return gr;
  };
  f.inf_value = 0.0;

  ProjectionSpec p = curve_projection(g, ProjectionKind::NumericNearest);
  // Largest alpha such that the inner parallel curve at distance `reach` is not
  // inside {f < alpha}; outside the ellipse the projection is always unique.
  double alpha = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 720; ++i) {
    const double th = 2.0 * std::numbers::pi * i / 720.0;
    const Eigen::Vector2d z = g.point_at(th);
    const Eigen::Vector2d n = Eigen::Vector2d(z.x() / (a * a), z.y() / (b * b)).normalized();
    Vector inner = z - g.reach * n;
    alpha = std::min(alpha, f.value(inner));
  }
  p.sublevel_alpha = alpha;
  f.projection = std::move(p);
  return f;
}

Objective make_quadratic(const Matrix& A) {
  require(A.rows() == A.cols() && A.rows() >= 1, "quadratic: A must be square");
  const double scale = std::max(1.0, A.norm());
  require((A - A.transpose()).norm() <= 1e-12 * scale, "quadratic: A must be symmetric");

  const Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  const Vector& lam = es.eigenvalues();
  const double tol = 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff());
  require(lam.minCoeff() >= -tol, "quadratic: A must be positive semidefinite");

  const int d = static_cast<int>(A.rows());
  Matrix pi = Matrix::Zero(d, d);
  int k = 0;
  std::optional<double> smallest_positive;
  for (int i = 0; i < d; ++i) {
    if (lam[i] <= tol) {
      pi += es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose();
      ++k;
    } else if (!smallest_positive || lam[i] < *smallest_positive) {
      smallest_positive = lam[i];
    }
  }

  Objective f;
  std::ostringstream id;
  id << "quad{";
  const bool diagonal = A.isDiagonal();
  for (int i = 0; i < d; ++i) id << (i ? "," : "") << (diagonal ? A(i, i) : lam[i]);
  id << "}";
  f.id = id.str();
  f.dim = d;
  f.value = [A](const Vector& x) { return 0.5 * x.dot(A * x); };
  f.gradient = [A](const Vector& x) -> Vector { return A * x; };
  f.inf_value = 0.0;
  f.smoothness_L = std::max(0.0, lam.maxCoeff());
  f.sc_mu = smallest_positive;
  f.neg_curvature_eps = 0.0;

  AffineProjection affine{pi, Vector::Zero(d)};
  ProjectionSpec p;
  p.kind = ProjectionKind::AffineLinear;
  p.affine = affine;
  p.map = [affine](const Vector& x) { return affine.apply(x); };
  p.manifold_dim = k;
  p.sample_manifold = [pi, d](std::mt19937_64& rng) -> Vector {
    std::normal_distribution<double> n(0.0, 1.0);
    Vector z(d);
    for (int i = 0; i < d; ++i) z[i] = n(rng);
    return pi * z;
  };
  f.projection = std::move(p);
  return f;
}

Objective make_degenerate_quadratic(const Matrix& A) {
  Objective f = make_quadratic(A);
  if (f.projection->manifold_dim < 1)
    throw std::invalid_argument("degenerate quadratic: A must have a nontrivial kernel");
  return f;
}

double gradient_consistency_error(const Objective& f, const std::vector<Vector>& points, double h) {
  double worst = 0.0;
  for (const Vector& x : points) {
    const Vector g = f.gradient(x);
    Vector fd(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd[i] = (f.value(xp) - f.value(xm)) / (2.0 * h);
    }
    worst = std::max(worst, (g - fd).norm() / (1.0 + g.norm()));
  }
  return worst;
}

}  // namespace nagcert
