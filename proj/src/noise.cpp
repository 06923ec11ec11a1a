#include "nagcert/noise.hpp"

#include <stdexcept>
#include <limits>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "nagcert/stats.hpp"

namespace nagcert {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "zero" || s == "ZeroNoise" || s == "none") return NoiseKind::ZeroNoise;
  if (s == "gaussian" || s == "GaussianPrototype") return NoiseKind::GaussianPrototype;
  throw std::invalid_argument("unknown noise kind '" + s + "'");
}

std::string to_string(NoiseKind k) { return k == NoiseKind::ZeroNoise ? "zero" : "gaussian"; }

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t draw_index)
    : key_(splitmix64(splitmix64(seed) ^ (draw_index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL))) {}

double NormalStream::uniform() {
  // 53 random mantissa bits, mapped into (0, 1)
  const std::uint64_t bits = splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(th);
  has_spare_ = true;
  return r * std::cos(th);
}

Vector perturb_gradient(const Vector& grad, const NoiseModel& model, std::uint64_t draw_index) {
  if (model.kind == NoiseKind::ZeroNoise) return grad;
  NormalStream normals(model.seed, draw_index);
  const double n1 = normals.next();
  Vector g = (1.0 + model.sigma_m * n1) * grad;
  // N2 has total variance one, E|N2|^2 = 1, so the variance bound holds with equality
  const double sa = model.sigma_a / std::sqrt(static_cast<double>(g.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] += sa * normals.next();
  return g;
}

Vector estimate_gradient(const Objective& f, const NoiseModel& model, const Vector& x, std::uint64_t draw_index) {
  return perturb_gradient(f.gradient(x), model, draw_index);
}

StochasticIdentityReport verify_stochastic_identities(const Objective& f, const NoiseModel& model,
                                                      const Vector& x, const Vector& v, std::size_t n_draws) {
  if (n_draws < 1000)
    throw std::invalid_argument("verify_stochastic_identities: need at least 1000 draws, got " +
                                std::to_string(n_draws));
  const Vector grad = f.gradient(x);
  const Vector normal = f.projection ? Vector(x - f.projection->map(x)) : Vector(x);

  RunningStats s_grad, s_vel, s_normal, s_pythag, s_var;
  for (std::size_t i = 0; i < n_draws; ++i) {
    const Vector g = perturb_gradient(grad, model, i);
    const Vector e = g - grad;
    s_grad.push(g.dot(grad));
    s_vel.push(g.dot(v));
    s_normal.push(g.dot(normal));
    // |g|^2 - |grad|^2 - |g - grad|^2; zero in expectation
    s_pythag.push(g.squaredNorm() - grad.squaredNorm() - e.squaredNorm());
    s_var.push(e.squaredNorm());
  }

  auto z_of = [](double mean, double target, double se) {
    const double diff = mean - target;
    const double floor = 1e-13 * std::max(1.0, std::abs(target));
    if (std::abs(diff) <= floor) return 0.0;
    return se > 0.0 ? diff / se : std::copysign(std::numeric_limits<double>::infinity(), diff);
  };

  StochasticIdentityReport r;
  r.n_draws = n_draws;
  auto add = [&](std::string name, const RunningStats& s, double target) {
    IdentityCheck c;
    c.name = std::move(name);
    c.lhs = s.mean();
    c.rhs = target;
    c.z_score = z_of(s.mean(), target, s.standard_error());
    c.pass = std::abs(c.z_score) <= 4.0;
    r.checks.push_back(c);
  };
  add("E<g,grad f> = |grad f|^2", s_grad, grad.squaredNorm());
  add("E<g,v> = <grad f,v>", s_vel, grad.dot(v));
  add("E<g,x-pi(x)> = <grad f,x-pi(x)>", s_normal, grad.dot(normal));
  {
    IdentityCheck c;
    c.name = "E|g|^2 = |grad f|^2 + E|g-grad f|^2";
    c.lhs = s_pythag.mean() + grad.squaredNorm() + s_var.mean();
    c.rhs = grad.squaredNorm() + s_var.mean();
    c.z_score = z_of(s_pythag.mean(), 0.0, s_pythag.standard_error());
    c.pass = std::abs(c.z_score) <= 4.0;
    r.checks.push_back(c);
  }
  {
    IdentityCheck c;
    c.name = "E|g-grad f|^2 <= sigma_a^2 + sigma_m^2 |grad f|^2";
    c.lhs = s_var.mean();
    c.rhs = model.kind == NoiseKind::ZeroNoise
                ? 0.0
                : model.sigma_a * model.sigma_a + model.sigma_m * model.sigma_m * grad.squaredNorm();
    c.z_score = z_of(s_var.mean(), c.rhs, s_var.standard_error());
    c.pass = c.z_score <= 4.0;
    r.checks.push_back(c);
  }
  r.pass = std::all_of(r.checks.begin(), r.checks.end(), [](const IdentityCheck& c) { return c.pass; });
  return r;
}

}  // namespace nagcert
