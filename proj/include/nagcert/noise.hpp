#pragma once

#include <vector>
#include <cstdint>
#include <string>

#include "nagcert/objectives.hpp"

namespace nagcert {

enum class NoiseKind { ZeroNoise, GaussianPrototype };

/// Stochastic gradient oracle g(x, w) = (1 + sigma_m N1) grad f(x) + sigma_a N2, with N1 a standard
/// normal scalar and N2 = Z / sqrt(d), Z a standard normal vector, so E|N2|^2 = 1.
/// Draws are keyed by (seed, draw_index), so a run is a pure function of its seed.
struct NoiseModel {
  NoiseKind kind = NoiseKind::ZeroNoise;
  double sigma_a = 0.0;
  double sigma_m = 0.0;
  std::uint64_t seed = 0;

  static NoiseModel none() { return {}; }
  static NoiseModel gaussian(double sigma_a, double sigma_m, std::uint64_t seed) {
    return {NoiseKind::GaussianPrototype, sigma_a, sigma_m, seed};
  }
  NoiseModel with_seed(std::uint64_t s) const {
    NoiseModel m = *this;
    m.seed = s;
    return m;
  }
};

NoiseKind parse_noise_kind(const std::string& s);
std::string to_string(NoiseKind k);

/// Counter-based stream of standard normals for one (seed, draw_index) key.
/// Bit-identical across platforms: splitmix64 mixing and Box-Muller, no library
/// distribution state involved.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t draw_index);
  double next();

 private:
  double uniform();
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

Vector estimate_gradient(const Objective& f, const NoiseModel& model, const Vector& x, std::uint64_t draw_index);

/// Same, for a precomputed exact gradient.
Vector perturb_gradient(const Vector& grad, const NoiseModel& model, std::uint64_t draw_index);

struct IdentityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double z_score = 0.0;
  bool pass = false;
};

struct StochasticIdentityReport {
  std::vector<IdentityCheck> checks;
  std::size_t n_draws = 0;
  bool pass = false;
};

/// Empirical check of the conditional-expectation identities used by every
/// stochastic convergence proof, at a fixed look-ahead point x with velocity v:
///   E<g, grad f> = |grad f|^2,  E<g, v> = <grad f, v>,
///   E<g, x - pi(x)> = <grad f, x - pi(x)>,  E|g|^2 = |grad f|^2 + E|g - grad f|^2,
/// plus the variance envelope E|g - grad f|^2 <= sigma_a^2 + sigma_m^2 |grad f|^2.
/// Passes when every |z| <= 4 (one-sided for the envelope). Needs n_draws >= 1000.
StochasticIdentityReport verify_stochastic_identities(const Objective& f, const NoiseModel& model,
                                                      const Vector& x, const Vector& v, std::size_t n_draws);

}  // namespace nagcert
