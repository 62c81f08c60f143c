#include "spdelab/statistics.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "spdelab/errors.hpp"

namespace spdelab {

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double v : xs) s += v;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

SampleSummary summarize(std::span<const double> xs) {
  SampleSummary out;
  out.count = xs.size();
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  out.mean = pairwise_sum(xs) / n;
  if (xs.size() > 1) {
    std::vector<double> dev(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) dev[k] = (xs[k] - out.mean) * (xs[k] - out.mean);
    out.variance = pairwise_sum(dev) / (n - 1.0);
    out.std_error = std::sqrt(out.variance / n);
  }
  return out;
}

double sample_skewness(std::span<const double> xs) {
  if (xs.size() < 3) throw ContractViolation("sample_skewness: need at least 3 samples");
  const double n = static_cast<double>(xs.size());
  const double mean = pairwise_sum(xs) / n;
  std::vector<double> m2(xs.size()), m3(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double d = xs[k] - mean;
    m2[k] = d * d;
    m3[k] = d * d * d;
  }
  const double var = pairwise_sum(m2) / n;
  if (var == 0.0) return 0.0;
  return (pairwise_sum(m3) / n) / std::pow(var, 1.5);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractViolation("fit_line: size mismatch");
  if (x.size() < 2) throw ContractViolation("fit_line: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0) throw ContractViolation("fit_line: abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - fit.intercept - fit.slope * x[k];
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  if (x.size() > 2) {
    const double dof = n - 2.0;
    fit.slope_std_error = std::sqrt(sse / dof / sxx);
    boost::math::students_t dist(dof);
    const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
    fit.slope_ci_low = fit.slope - q * fit.slope_std_error;
    fit.slope_ci_high = fit.slope + q * fit.slope_std_error;
  } else {
    fit.slope_std_error = std::numeric_limits<double>::infinity();
    fit.slope_ci_low = -std::numeric_limits<double>::infinity();
    fit.slope_ci_high = std::numeric_limits<double>::infinity();
  }
  return fit;
}

Interval binomial_interval(std::size_t hits, std::size_t trials, double level) {
  if (trials == 0) throw ContractViolation("binomial_interval: no trials");
  if (hits > trials) throw ContractViolation("binomial_interval: hits exceed trials");
  const double alpha = 1.0 - level;
  const double k = static_cast<double>(hits);
  const double n = static_cast<double>(trials);
  Interval out;
  if (hits == 0) {
    out.low = 0.0;
    out.high = 1.0 - std::pow(alpha, 1.0 / n);
    return out;
  }
  out.low = boost::math::quantile(boost::math::beta_distribution<double>(k, n - k + 1.0), alpha / 2.0);
  out.high = hits == trials
                 ? 1.0
                 : boost::math::quantile(boost::math::beta_distribution<double>(k + 1.0, n - k), 1.0 - alpha / 2.0);
  return out;
}

Interval normal_interval(double mean, double std_error, double level) {
  const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + level / 2.0);
  return {mean - z * std_error, mean + z * std_error};
}

}  // namespace spdelab
