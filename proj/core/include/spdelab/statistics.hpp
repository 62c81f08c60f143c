#pragma once

#include <cstddef>
#include <span>

namespace spdelab {

/// Pairwise (cascade) summation; result depends only on the order of `xs`.
double pairwise_sum(std::span<const double> xs);

struct SampleSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;
};

SampleSummary summarize(std::span<const double> xs);

double sample_skewness(std::span<const double> xs);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_std_error = 0.0;
  double slope_ci_low = 0.0;   // 95%, Student t with n-2 dof
  double slope_ci_high = 0.0;
};

/// Ordinary least squares y = intercept + slope * x. Needs at least 2 points;
/// the slope interval is infinite with exactly 2.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct Interval {
  double low = 0.0;
  double high = 0.0;
  bool contains(double v) const { return low <= v && v <= high; }
  bool overlaps(const Interval& o) const { return low <= o.high && o.low <= high; }
};

/// Exact (Clopper-Pearson) interval for a binomial proportion. With zero hits
/// the lower end is 0 and the upper end is the one-sided bound at `level`.
Interval binomial_interval(std::size_t hits, std::size_t trials, double level = 0.95);

/// Two-sided normal-approximation interval mean +- z * se.
Interval normal_interval(double mean, double std_error, double level = 0.95);

}  // namespace spdelab
