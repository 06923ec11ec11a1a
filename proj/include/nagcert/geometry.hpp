#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nagcert/csv.hpp"
#include "nagcert/objectives.hpp"

namespace nagcert {

enum class RegionKind { Box, LogShell, Tube };

/// Sampling region for landscape diagnostics.
///   Box:      uniform in [lo, hi]^d
///   LogShell: |x| log-uniform in [r_min, r_max], uniform direction (a deterministic grid in 1-D)
///   Tube:     manifold point plus a uniform offset of length <= width in a uniform direction
struct Region {
  RegionKind kind = RegionKind::Box;
  double lo = -1.0, hi = 1.0;
  double r_min = 1e-3, r_max = 1.0;
  double width = 0.5;
  std::uint64_t seed = 1;

  static Region box(double lo, double hi) { return {RegionKind::Box, lo, hi}; }
  static Region log_shell(double r_min, double r_max) {
    Region r;
    r.kind = RegionKind::LogShell;
    r.r_min = r_min;
    r.r_max = r_max;
    return r;
  }
  static Region tube(double width) {
    Region r;
    r.kind = RegionKind::Tube;
    r.width = width;
    return r;
  }

  std::string describe() const;
};

/// "box{lo,hi}", "shell{r_min,r_max}" or "tube{width}", optionally followed by "@seed".
Region parse_region(const std::string& spec);

/// n points of `region` in dimension f.dim. Deterministic for a given region seed.
std::vector<Vector> sample_region(const Objective& f, const Region& region, std::size_t n);

struct GeometryReport {
  double pl_constant_emp = 0.0;  // inf |grad f|^2 / (2 (f - inf f))
  double sc_wrt_min_emp = 0.0;   // inf 2 (<grad f, x - pi> - (f - f(pi))) / |x - pi|^2
  std::optional<double> quasar_gamma;  // min <grad f, x - pi> / (f - f(pi)), capped at 1; unset if <= 0
  double neg_eig_bound = 0.0;    // smallest sampled Hessian eigenvalue
  double curvature_sup = 0.0;    // largest sampled |Hessian eigenvalue|
  std::size_t samples = 0;
  std::size_t quotient_samples = 0;  // samples outside the 1e-12 neighbourhood of the minimum
  std::string sample_region;
};

/// Empirical geometric constants. Infima over finite samples are upper bounds on the true infima.
/// Needs n_samples >= 1000 and a projection; throws DomainError if a sample is outside its validity.
GeometryReport diagnose(const Objective& f, const Region& region, std::size_t n_samples);

/// Symmetrized central-difference Hessian from gradients, step h = 1e-4 max(|x|, 1e-3).
Matrix fd_hessian(const Objective& f, const Vector& x);

struct ProbeRow {
  double t = 0.0;
  double phi = 0.0;
  double dphi = 0.0;    // (phi(t+h) - phi(t-h)) / 2h
  double d2phi = 0.0;   // (phi(t+h) - 2 phi(t) + phi(t-h)) / h^2
  double mu_est = 0.0;  // 2 (phi'(t) t - phi(t) + inf phi) / t^2; NaN for |t| < 10 h
};

/// Line probe phi(t) = f(w + t d) with d normalized. inf phi defaults to the minimum of phi over the grid.
std::vector<ProbeRow> line_probe(const Objective& f, const Vector& w, const Vector& direction,
                                 const std::vector<double>& t_grid, double h = 0.01,
                                 std::optional<double> inf_phi = std::nullopt);

CsvTable line_probe_csv(const std::vector<ProbeRow>& rows);
CsvTable geometry_csv(const GeometryReport& r);

/// Uniformly sampled path x(t_k), t_k = k / (m - 1).
struct SampledCurve {
  Matrix points;  // d x m
  double dt = 0.0;
};

struct MonotonicityReport {
  double min_inner = 0.0;        // min <xdot, zdot>
  double max_norm_product = 0.0; // max |xdot| |zdot|
  double normalized_min = 0.0;   // min_inner / max_norm_product
  bool pass = false;
};

/// Finite-difference check that the projection moves with the curve: <xdot, d/dt pi(x)> >= 0.
/// Passes iff min <xdot, zdot> >= -1e-6 max |xdot| |zdot|. Needs dt <= 1e-3; throws DomainError
/// when the curve leaves the projection's domain.
MonotonicityReport check_projection_monotonicity(const ProjectionSpec& projection, const SampledCurve& curve);

/// Closed cubic (Catmull-Rom) curve through control points drawn in the tube of half-width `width`
/// around the circle, sampled at `samples` points. Control angles advance by random steps in (0.1, 0.8).
SampledCurve random_tube_curve(const CircleManifold& circle, double width, std::mt19937_64& rng, int controls = 8,
                               int samples = 1001);

/// Largest eps needed for <grad f(x+v), v> >= f(x+v) - f(x) - eps/2 |v|^2 over sampled pairs
/// (x from the region, |v| log-uniform between 1e-5 and 1e-1 times max(|x|, 1e-3)). Zero for convex f.
double probe_negative_curvature(const Objective& f, const Region& region, std::size_t n_samples);

}  // namespace nagcert
