#include <algorithm>
#include <cmath>
#include <numbers>

#include "nagcert/objectives.hpp"

namespace nagcert {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double th) {
  th = std::fmod(th, kTwoPi);
  return th < 0.0 ? th + kTwoPi : th;
}

}  // namespace

Eigen::Vector2d ellipse_nearest_point(double a, double b, const Eigen::Vector2d& p) {
  // Stationarity of |p - e(t)|^2 for e(t) = (a cos t, b sin t):
  //   r(t) = (a^2 - b^2) sin t cos t - a p_x sin t + b p_y cos t = 0
  const double c = a * a - b * b;
  auto residual = [&](double t) { return c * std::sin(t) * std::cos(t) - a * p.x() * std::sin(t) + b * p.y() * std::cos(t); };
  auto slope = [&](double t) { return c * std::cos(2.0 * t) - a * p.x() * std::cos(t) - b * p.y() * std::sin(t); };
  auto point = [&](double t) { return Eigen::Vector2d(a * std::cos(t), b * std::sin(t)); };

  constexpr int kStarts = 16;
  double best_t = 0.0;
  double best_d = std::numeric_limits<double>::infinity();
  bool found = false;

  auto consider = [&](double t0) {
    double t = t0;
    for (int it = 0; it < 100; ++it) {
      const double r = residual(t);
      if (std::abs(r) <= 1e-12 * std::max(1.0, a * a + b * b)) break;
      const double s = slope(t);
      double step = (s != 0.0) ? -r / s : 0.1;
      step = std::clamp(step, -0.5, 0.5);
      t += step;
    }
    if (std::abs(residual(t)) > 1e-10 * std::max(1.0, a * a + b * b)) return;
    t = wrap_angle(t);
    const double d = (p - point(t)).squaredNorm();
    // exact ties go to the smaller angle
    if (!found || d < best_d || (d == best_d && t < best_t)) {
      best_d = d;
      best_t = t;
      found = true;
    }
  };

  consider(std::atan2(a * p.y(), b * p.x()));
  for (int i = 0; i < kStarts; ++i) consider(kTwoPi * i / kStarts);
  if (!found) throw DomainError("ellipse projection did not converge");
  return point(best_t);
}

}  // namespace nagcert
