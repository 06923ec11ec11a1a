#include "nagcert/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nagcert {

namespace {

constexpr double kGapGuard = 1e-12;

Vector random_direction(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector u(d);
  do {
    for (int i = 0; i < d; ++i) u[i] = n(rng);
  } while (u.norm() == 0.0);
  return u.normalized();
}

double log_uniform(double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

std::vector<double> parse_numbers(const std::string& body, const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("region '" + spec + "': bad number '" + item + "'");
    }
    if (used != item.size()) throw std::invalid_argument("region '" + spec + "': bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

std::string Region::describe() const {
  std::ostringstream os;
  switch (kind) {
    case RegionKind::Box: os << "box{" << lo << "," << hi << "}"; break;
    case RegionKind::LogShell: os << "shell{" << r_min << "," << r_max << "}"; break;
    case RegionKind::Tube: os << "tube{" << width << "}"; break;
  }
  os << "@" << seed;
  return os.str();
}

Region parse_region(const std::string& spec) {
  std::string s = spec;
  Region r;
  if (const auto at = s.find('@'); at != std::string::npos) {
    r.seed = std::stoull(s.substr(at + 1));
    s = s.substr(0, at);
  }
  const auto open = s.find('{');
  if (open == std::string::npos || s.back() != '}') throw std::invalid_argument("region '" + spec + "': expected name{...}");
  const std::string name = s.substr(0, open);
  const std::vector<double> a = parse_numbers(s.substr(open + 1, s.size() - open - 2), spec);
  if (name == "box" && a.size() == 2 && a[0] < a[1]) {
    r.kind = RegionKind::Box;
    r.lo = a[0];
    r.hi = a[1];
  } else if (name == "shell" && a.size() == 2 && 0.0 < a[0] && a[0] < a[1]) {
    r.kind = RegionKind::LogShell;
    r.r_min = a[0];
    r.r_max = a[1];
  } else if (name == "tube" && a.size() == 1 && a[0] > 0.0) {
    r.kind = RegionKind::Tube;
    r.width = a[0];
  } else {
    throw std::invalid_argument("region '" + spec + "': expected box{lo,hi}, shell{rmin,rmax} or tube{width}");
  }
  return r;
}

std::vector<Vector> sample_region(const Objective& f, const Region& region, std::size_t n) {
  std::mt19937_64 rng(region.seed);
  std::vector<Vector> pts;
  pts.reserve(n);
  const int d = f.dim;
  switch (region.kind) {
    case RegionKind::Box: {
      std::uniform_real_distribution<double> u(region.lo, region.hi);
      for (std::size_t i = 0; i < n; ++i) {
        Vector x(d);
        for (int j = 0; j < d; ++j) x[j] = u(rng);
        pts.push_back(x);
      }
      break;
    }
    case RegionKind::LogShell: {
      if (d == 1) {
        // both signs, log-uniform grid with endpoints included
        const std::size_t half = std::max<std::size_t>(n / 2, 2);
        const double l0 = std::log(region.r_min), l1 = std::log(region.r_max);
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t k = i % half;
          const double r = std::exp(l0 + (l1 - l0) * static_cast<double>(k) / static_cast<double>(half - 1));
          pts.push_back(Vector::Constant(1, i < half ? r : -r));
        }
      } else {
        for (std::size_t i = 0; i < n; ++i)
          pts.push_back(log_uniform(region.r_min, region.r_max, rng) * random_direction(d, rng));
      }
      break;
    }
    case RegionKind::Tube: {
      if (!f.projection || !f.projection->sample_manifold)
        throw std::invalid_argument("tube region needs a projection with a manifold sampler (" + f.id + ")");
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (std::size_t i = 0; i < n; ++i) {
        const Vector m = f.projection->sample_manifold(rng);
        const double len = region.width * (1.0 - u(rng));  // in (0, width]
        pts.push_back(m + len * random_direction(d, rng));
      }
      break;
    }
  }
  return pts;
}

Matrix fd_hessian(const Objective& f, const Vector& x) {
  const Eigen::Index d = x.size();
  const double h = 1e-4 * std::max(x.norm(), 1e-3);
  Matrix H(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Vector e = Vector::Zero(d);
    e[j] = h;
    H.col(j) = (f.gradient(x + e) - f.gradient(x - e)) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

GeometryReport diagnose(const Objective& f, const Region& region, std::size_t n_samples) {
  if (n_samples < 1000) throw std::invalid_argument("diagnose: need at least 1000 samples");
  if (!f.projection) throw std::invalid_argument("diagnose: objective " + f.id + " has no projection");

  const std::vector<Vector> pts = sample_region(f, region, n_samples);
  const double inf = std::numeric_limits<double>::infinity();
  GeometryReport r;
  r.sample_region = region.describe();
  r.samples = pts.size();
  r.pl_constant_emp = inf;
  r.sc_wrt_min_emp = inf;
  r.neg_eig_bound = inf;
  double quasar = inf;

  for (const Vector& x : pts) {
    const Vector p = f.projection->map(x);  // DomainError outside validity
    const double fx = f.value(x);
    const double fp = f.value(p);
    const Vector g = f.gradient(x);

    const Eigen::SelfAdjointEigenSolver<Matrix> es(fd_hessian(f, x), Eigen::EigenvaluesOnly);
    r.neg_eig_bound = std::min(r.neg_eig_bound, es.eigenvalues().minCoeff());
    r.curvature_sup = std::max(r.curvature_sup, es.eigenvalues().cwiseAbs().maxCoeff());

    const double gap = fx - fp;
    const Vector n = x - p;
    if (gap <= kGapGuard || n.squaredNorm() == 0.0) continue;
    ++r.quotient_samples;
    const double ip = g.dot(n);
    r.pl_constant_emp = std::min(r.pl_constant_emp, g.squaredNorm() / (2.0 * gap));
    r.sc_wrt_min_emp = std::min(r.sc_wrt_min_emp, 2.0 * (ip - gap) / n.squaredNorm());
    quasar = std::min(quasar, ip / gap);
  }
  if (r.quotient_samples == 0) throw std::invalid_argument("diagnose: every sample lies at the minimum");
  if (quasar > 0.0) r.quasar_gamma = std::min(1.0, quasar);
  return r;
}

std::vector<ProbeRow> line_probe(const Objective& f, const Vector& w, const Vector& direction,
                                 const std::vector<double>& t_grid, double h, std::optional<double> inf_phi) {
  if (!(h > 0.0)) throw std::invalid_argument("line_probe: difference step h must be positive");
  if (direction.size() != w.size() || direction.norm() == 0.0)
    throw std::invalid_argument("line_probe: direction must be a nonzero vector of the same dimension as w");
  const Vector d = direction.normalized();
  auto phi = [&](double t) { return f.value(w + t * d); };

  std::vector<ProbeRow> rows;
  rows.reserve(t_grid.size());
  double lowest = std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    ProbeRow r;
    r.t = t;
    r.phi = phi(t);
    const double up = phi(t + h), down = phi(t - h);
    r.dphi = (up - down) / (2.0 * h);
    r.d2phi = (up - 2.0 * r.phi + down) / (h * h);
    lowest = std::min(lowest, r.phi);
    rows.push_back(r);
  }
  const double inf = inf_phi.value_or(lowest);
  for (ProbeRow& r : rows)
    r.mu_est = std::abs(r.t) < 10.0 * h ? std::numeric_limits<double>::quiet_NaN()
                                        : 2.0 * (r.dphi * r.t - r.phi + inf) / (r.t * r.t);
  return rows;
}

CsvTable line_probe_csv(const std::vector<ProbeRow>& rows) {
  CsvTable t({"t", "phi", "dphi", "d2phi", "mu_est"});
  for (const ProbeRow& r : rows) t.add_row(std::vector<double>{r.t, r.phi, r.dphi, r.d2phi, r.mu_est});
  return t;
}

CsvTable geometry_csv(const GeometryReport& r) {
  CsvTable t({"quantity", "value"});
  t.add_row(std::vector<std::string>{"pl_constant_emp", format_double(r.pl_constant_emp)});
  t.add_row(std::vector<std::string>{"sc_wrt_min_emp", format_double(r.sc_wrt_min_emp)});
  t.add_row(std::vector<std::string>{"quasar_gamma", r.quasar_gamma ? format_double(*r.quasar_gamma) : ""});
  t.add_row(std::vector<std::string>{"neg_eig_bound", format_double(r.neg_eig_bound)});
  t.add_row(std::vector<std::string>{"curvature_sup", format_double(r.curvature_sup)});
  t.add_row(std::vector<std::string>{"samples", std::to_string(r.samples)});
  t.add_row(std::vector<std::string>{"quotient_samples", std::to_string(r.quotient_samples)});
  t.add_row(std::vector<std::string>{"sample_region", r.sample_region});
  return t;
}

MonotonicityReport check_projection_monotonicity(const ProjectionSpec& projection, const SampledCurve& curve) {
  const Eigen::Index m = curve.points.cols();
  if (m < 3) throw std::invalid_argument("check_projection_monotonicity: need at least 3 samples");
  if (!(curve.dt > 0.0) || curve.dt > 1e-3)
    throw std::invalid_argument("check_projection_monotonicity: sample spacing must be in (0, 1e-3]");

  Matrix z(curve.points.rows(), m);
  for (Eigen::Index k = 0; k < m; ++k) {
    try {
      z.col(k) = projection.map(curve.points.col(k));
    } catch (const DomainError& e) {
      throw DomainError("check_projection_monotonicity: curve leaves the valid region at sample " +
                        std::to_string(k) + ": " + e.what());
    }
  }
  MonotonicityReport r;
  r.min_inner = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 1; k + 1 < m; ++k) {
    const Vector xd = (curve.points.col(k + 1) - curve.points.col(k - 1)) / (2.0 * curve.dt);
    const Vector zd = (z.col(k + 1) - z.col(k - 1)) / (2.0 * curve.dt);
    r.min_inner = std::min(r.min_inner, xd.dot(zd));
    r.max_norm_product = std::max(r.max_norm_product, xd.norm() * zd.norm());
  }
  r.normalized_min = r.max_norm_product > 0.0 ? r.min_inner / r.max_norm_product : 0.0;
  r.pass = r.min_inner >= -1e-6 * r.max_norm_product;
  return r;
}

SampledCurve random_tube_curve(const CircleManifold& circle, double width, std::mt19937_64& rng, int controls,
                               int samples) {
  if (controls < 4 || samples < 3) throw std::invalid_argument("random_tube_curve: need >= 4 controls, >= 3 samples");
  if (!(width > 0.0) || width >= circle.radius)
    throw std::invalid_argument("random_tube_curve: width must lie in (0, radius)");
  std::uniform_real_distribution<double> step(0.1, 0.8);
  std::uniform_real_distribution<double> off(-0.5 * width, 0.5 * width);
  std::uniform_real_distribution<double> start(0.0, 2.0 * std::numbers::pi);

  // controls + 2 ghost points so the spline is defined on every interior segment
  std::vector<Eigen::Vector2d> c;
  double th = start(rng);
  for (int i = 0; i < controls + 2; ++i) {
    const double rad = circle.radius + off(rng);
    c.emplace_back(rad * std::cos(th), rad * std::sin(th));
    th += step(rng);
  }
  const int segments = controls - 1;
  SampledCurve out;
  out.points.resize(2, samples);
  out.dt = 1.0 / (samples - 1);
  for (int k = 0; k < samples; ++k) {
    const double s = static_cast<double>(k) / (samples - 1) * segments;
    const int i = std::min(static_cast<int>(s), segments - 1);
    const double u = s - i;
    const Eigen::Vector2d& p0 = c[i];
    const Eigen::Vector2d& p1 = c[i + 1];
    const Eigen::Vector2d& p2 = c[i + 2];
    const Eigen::Vector2d& p3 = c[i + 3];
    const double u2 = u * u, u3 = u2 * u;
    const Eigen::Vector2d p = 0.5 * ((2.0 * p1) + (p2 - p0) * u + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u2 +
                                     (3.0 * p1 - p0 - 3.0 * p2 + p3) * u3);
    out.points.col(k) = p;
  }
  return out;
}

double probe_negative_curvature(const Objective& f, const Region& region, std::size_t n_samples) {
  if (n_samples < 1000) throw std::invalid_argument("probe_negative_curvature: need at least 1000 samples");
  const std::vector<Vector> xs = sample_region(f, region, n_samples);
  std::mt19937_64 rng(region.seed ^ 0x5bd1e995ULL);
  double eps = 0.0;
  for (const Vector& x : xs) {
    const double len = log_uniform(1e-5, 1e-1, rng) * std::max(x.norm(), 1e-3);
    const Vector v = len * random_direction(f.dim, rng);
    const Vector y = x + v;
    const double q = 2.0 * (f.value(y) - f.value(x) - f.gradient(y).dot(v)) / v.squaredNorm();
    if (std::isfinite(q)) eps = std::max(eps, q);
  }
  return eps;
}

}  // namespace nagcert
