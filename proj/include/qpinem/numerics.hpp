#pragma once

#include <complex>
#include <span>

#include <Eigen/Dense>

namespace qpinem {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

/// ln(n!) for n >= 0. Values up to a few tens of thousands come from a table.
double log_factorial(int n);

/// ln C(n, k) for 0 <= k <= n.
double log_binomial(int n, int k);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// A real term stored as sign * exp(log_magnitude).
struct LogTerm {
  double log_magnitude;
  int sign;
};

/// Sums terms given in log-magnitude/sign form. The largest magnitude is
/// factored out before exponentiating, and the scaled terms are accumulated
/// with compensation.
double sum_log_terms(std::span<const LogTerm> terms);

/// Ordinary least squares of y on x. Returns slope, intercept and r^2.
struct LinearFit {
  double slope;
  double intercept;
  double r2;
};
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace qpinem
