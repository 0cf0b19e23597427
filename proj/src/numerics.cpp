#include "qpinem/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qpinem/errors.hpp"

namespace qpinem {

namespace {

constexpr int kLogFactorialTableSize = 1 << 15;

const std::vector<double>& log_factorial_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kLogFactorialTableSize);
    for (int n = 0; n < kLogFactorialTableSize; ++n) {
      t[n] = std::lgamma(static_cast<double>(n) + 1.0);
    }
    return t;
  }();
  return table;
}

}  // namespace

double log_factorial(int n) {
  if (n < 0) throw DomainError("log_factorial: negative argument");
  if (n < kLogFactorialTableSize) return log_factorial_table()[n];
  int sign = 0;
  return ::lgamma_r(static_cast<double>(n) + 1.0, &sign);
}

double log_binomial(int n, int k) {
  if (k < 0 || k > n) throw DomainError("log_binomial: k outside [0, n]");
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double sum_log_terms(std::span<const LogTerm> terms) {
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms) peak = std::max(peak, t.log_magnitude);
  if (!std::isfinite(peak)) return 0.0;
  CompensatedSum acc;
  for (const auto& t : terms) {
    acc.add(t.sign * std::exp(t.log_magnitude - peak));
  }
  return acc.value() * std::exp(peak);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw FitError("fit_line: need at least two paired samples");
  }
  const double n = static_cast<double>(x.size());
  CompensatedSum sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
  }
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  CompensatedSum sxx, sxy, syy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx.add(dx * dx);
    sxy.add(dx * dy);
    syy.add(dy * dy);
  }
  if (sxx.value() <= 0.0) throw FitError("fit_line: degenerate abscissa");
  const double slope = sxy.value() / sxx.value();
  const double intercept = my - slope * mx;
  CompensatedSum ss_res;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + slope * x[i]);
    ss_res.add(r * r);
  }
  // A flat series is fitted exactly by a zero slope.
  const double r2 = syy.value() > 0.0 ? 1.0 - ss_res.value() / syy.value() : 1.0;
  return {slope, intercept, r2};
}

}  // namespace qpinem
