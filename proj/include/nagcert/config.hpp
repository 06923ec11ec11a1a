#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nagcert/noise.hpp"
#include "nagcert/optimizers.hpp"

namespace nagcert {

/// Validation failure tied to a config field such as "opt.eta".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ReproduceTarget { Fig2, Fig4, Example1Table };

ReproduceTarget parse_reproduce_target(const std::string& s);
std::string to_string(ReproduceTarget t);

/// Theorem names accepted by `certify`: continuous, global, discrete, additive, decreasing, agnes.
const std::vector<std::string>& theorem_names();

/// Experiment description. Text form is one `key = value` per line, '#' starts a comment,
/// vectors and lists are comma-separated, seeds may be given as a range "first..last".
struct ExperimentConfig {
  std::string objective = "quad{1}";

  Scheme scheme = Scheme::NAG;
  std::optional<double> eta;      // default 1/L
  std::optional<double> mu;       // default: objective's strong-convexity constant
  std::optional<double> sigma_m;  // AGNES design level; default noise.sigma_m
  std::optional<double> gamma;    // flow damping; default 2 sqrt(mu)
  std::optional<double> dt;       // flow step
  int horizon = 100;              // discrete steps
  double final_time = 10.0;       // flow
  int sample_every = 1;
  std::vector<double> x0;         // default all ones
  std::vector<double> v0;         // default zero
  ScheduleForm schedule_form = ScheduleForm::Appendix;

  NoiseKind noise_kind = NoiseKind::ZeroNoise;
  double noise_sigma_a = 0.0;
  double noise_sigma_m = 0.0;
  std::uint64_t noise_seed = 0;

  std::vector<std::uint64_t> seeds;  // empty: single run with noise.seed
  std::string output = "nagcert-out";
  std::vector<std::string> certify;
  std::optional<ReproduceTarget> reproduce;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

}  // namespace nagcert
