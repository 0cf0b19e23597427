#include "qpinem/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "qpinem/errors.hpp"

namespace qpinem {

namespace {

// Once terms are decreasing, stop when they fall this far below the largest.
constexpr long double kTailRatio = 1e-22L;

// Cancellation in the alternating sum grows like exp(2 sqrt(n |a|^2)).
// Below this exponent the sum is used, above it the diagonal recurrence.
constexpr double kSumGrowthLimit = 12.0;

constexpr double kRescale = 1e100;

// exp of anything below this is zero in double precision, even after the
// partial sum grows by exp(kSumGrowthLimit).
constexpr double kUnderflowLog = -800.0;

// log(n! / m!) for n >= m.
long double log_factorial_ratio(int n, int m) {
  long double sum = 0.0L;
  for (int i = m + 1; i <= n; ++i) sum += std::log(static_cast<long double>(i));
  return sum;
}

bool use_sum(double x, int lower) { return 2.0 * std::sqrt(lower * x) < kSumGrowthLimit; }

// Real magnitude part of <n|D|n'> for n >= n' (d = n - n'), without the phase.
// Terms are built from their ratios to keep the relative error at r eps.
// log_ratio is log(n! / n'!).
double explicit_sum(double x, int n, int n_prime, long double log_ratio) {
  const int d = n - n_prime;
  const double log_lead =
      -0.5 * x + 0.5 * d * std::log(x) - log_factorial(d) + static_cast<double>(0.5L * log_ratio);
  if (log_lead < kUnderflowLog) return 0.0;

  long double sum = 1.0L, term = 1.0L, peak = 1.0L;
  for (int r = 1; r <= n_prime; ++r) {
    term *= -x * (n_prime - r + 1) / (static_cast<long double>(r) * (r + d));
    sum += term;
    const long double size = std::abs(term);
    if (size > peak) {
      peak = size;
    } else if (size < kTailRatio * peak) {
      break;
    }
  }
  return std::exp(log_lead) * static_cast<double>(sum);
}

// Walks the normalized Laguerre recurrence along offset d, calling
// visit(j, value) for the element (j + d, j), j = 0..last.
template <class Visit>
void walk_diagonal(double x, int d, int last, Visit&& visit) {
  double log_scale = -0.5 * x + 0.5 * d * std::log(x) - 0.5 * log_factorial(d);
  double scale = std::exp(log_scale);
  double prev = 0.0, v = 1.0;
  for (int j = 0; j <= last; ++j) {
    visit(j, scale * v);
    const double next =
        ((2.0 * j + 1.0 + d - x) * v - std::sqrt(static_cast<double>(j) * (j + d)) * prev) /
        std::sqrt((j + 1.0) * (j + 1.0 + d));
    prev = v;
    v = next;
    if (std::abs(v) > kRescale) {
      v /= kRescale;
      prev /= kRescale;
      log_scale += std::log(kRescale);
      scale = std::exp(log_scale);
    }
  }
}

Complex lower_phase(Complex a, int d) { return std::polar(1.0, d * std::arg(a)); }

// Phase of (-a*)^d.
Complex upper_phase(Complex a, int d) {
  return std::polar(d % 2 == 0 ? 1.0 : -1.0, -d * std::arg(a));
}

}  // namespace

Complex displacement_element(Complex a, int n, int n_prime) {
  if (n < 0 || n_prime < 0) throw DomainError("displacement_element: negative Fock index");
  const double mag = std::abs(a);
  if (mag == 0.0) return n == n_prime ? Complex{1.0, 0.0} : Complex{0.0, 0.0};

  const double x = mag * mag;
  const int hi = std::max(n, n_prime);
  const int lo = std::min(n, n_prime);
  const int d = hi - lo;
  double value = 0.0;
  if (use_sum(x, lo)) {
    value = explicit_sum(x, hi, lo, log_factorial_ratio(hi, lo));
  } else {
    walk_diagonal(x, d, lo, [&](int j, double v) {
      if (j == lo) value = v;
    });
  }
  return value * (n >= n_prime ? lower_phase(a, d) : upper_phase(a, d));
}

Matrix displacement_block(Complex a, int n_max) {
  if (n_max < 0) throw DomainError("displacement_block: negative n_max");
  const int dim = n_max + 1;
  Matrix m = Matrix::Zero(dim, dim);
  const double mag = std::abs(a);
  if (mag == 0.0) {
    m.setIdentity();
    return m;
  }
  const double x = mag * mag;
  std::vector<long double> log_fact(dim, 0.0L);
  for (int i = 1; i <= n_max; ++i) log_fact[i] = log_fact[i - 1] + std::log(static_cast<long double>(i));
  for (int d = 0; d <= n_max; ++d) {
    const Complex lower = lower_phase(a, d);
    const Complex upper = upper_phase(a, d);
    walk_diagonal(x, d, n_max - d, [&](int j, double v) {
      if (use_sum(x, j)) v = explicit_sum(x, j + d, j, log_fact[j + d] - log_fact[j]);
      m(j + d, j) = v * lower;
      if (d > 0) m(j, j + d) = v * upper;
    });
  }
  return m;
}

}  // namespace qpinem
