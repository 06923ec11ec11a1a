#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace nagcert {

/// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Mean / variance accumulator (Welford).
class RunningStats {
 public:
  void push(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double standard_error() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct SampleSummary {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Mean and standard error of a sample, with the mean formed by compensated summation
/// so that reductions do not depend on accumulation order beyond rounding of the inputs.
inline SampleSummary summarize(std::span<const double> xs) {
  SampleSummary s;
  if (xs.empty()) return s;
  CompensatedSum sum;
  for (double x : xs) sum.add(x);
  const double n = static_cast<double>(xs.size());
  s.mean = sum.value() / n;
  if (xs.size() > 1) {
    CompensatedSum sq;
    for (double x : xs) sq.add((x - s.mean) * (x - s.mean));
    s.standard_error = std::sqrt(sq.value() / (n - 1.0) / n);
  }
  return s;
}

}  // namespace nagcert
