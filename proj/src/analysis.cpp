#include "qpinem/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qpinem/errors.hpp"

namespace qpinem {

double mean_photon(std::span<const double> p) {
  CompensatedSum acc;
  for (std::size_t n = 0; n < p.size(); ++n) acc.add(static_cast<double>(n) * p[n]);
  return acc.value();
}

double photon_variance(std::span<const double> p) {
  const double mean = mean_photon(p);
  CompensatedSum acc;
  for (std::size_t n = 0; n < p.size(); ++n) {
    const double d = static_cast<double>(n) - mean;
    acc.add(d * d * p[n]);
  }
  return std::max(0.0, acc.value());
}

double mandel_q(std::span<const double> p) {
  const double mean = mean_photon(p);
  if (!(mean > 0.0)) throw UndefinedQError("Mandel Q undefined for zero mean photon number");
  return (photon_variance(p) - mean) / mean;
}

ThermalFit effective_theta(std::span<const double> p, double p_floor) {
  std::vector<double> x, y;
  for (std::size_t n = 0; n < p.size(); ++n) {
    if (p[n] > p_floor) {
      x.push_back(static_cast<double>(n));
      y.push_back(std::log(p[n]));
    }
  }
  if (x.size() < 5) {
    throw FitError("thermal fit needs 5 bins above floor, found " + std::to_string(x.size()));
  }
  const LinearFit fit = fit_line(x, y);
  return {-fit.slope, fit.r2};
}

double effective_alpha(std::span<const double> p) { return std::sqrt(std::max(0.0, mean_photon(p))); }

std::vector<double> bessel_j_sequence(int order_max, double x) {
  if (order_max < 0) throw DomainError("bessel_j_sequence: negative order");
  std::vector<double> j(order_max + 1, 0.0);
  if (x == 0.0) {
    j[0] = 1.0;
    return j;
  }
  const bool negative = x < 0.0;
  x = std::abs(x);

  // Start well above both the order and the argument; the recurrence is
  // stable downward and the start value only sets an overall scale.
  const int top = std::max(order_max, static_cast<int>(std::ceil(x)));
  int start = top + 40 + static_cast<int>(10.0 * std::sqrt(static_cast<double>(top) + 1.0));
  start += start % 2;

  constexpr double kBig = 1e250;
  double above = 0.0;  // J_{m+1}
  double current = 1e-300;  // J_m
  CompensatedSum even_sum;  // J_0 + 2 sum J_{2m}, in the running scale
  for (int m = start; m >= 1; --m) {
    const double below = (2.0 * m / x) * current - above;  // J_{m-1}
    above = current;
    current = below;
    if (std::abs(current) > kBig) {
      current /= kBig;
      above /= kBig;
      for (auto& v : j) v /= kBig;
      even_sum = CompensatedSum{};
      // Restart the normalization sum from scaled values already stored.
      for (int q = m; q <= order_max; ++q) {
        if (q % 2 == 0 && q > 0) even_sum.add(2.0 * j[q]);
      }
    }
    const int order = m - 1;
    if (order <= order_max) j[order] = current;
    if (order > 0 && order % 2 == 0) {
      if (order > order_max) even_sum.add(2.0 * current);
      else if (std::abs(current) <= kBig) even_sum.add(2.0 * current);
    }
  }
  even_sum.add(current);  // J_0
  const double norm = even_sum.value();
  for (auto& v : j) v /= norm;
  if (negative) {
    for (std::size_t q = 1; q < j.size(); q += 2) j[q] = -j[q];
  }
  return j;
}

double bessel_reference(int k, double g_conventional) {
  const int order = std::abs(k);
  const double x = 2.0 * std::abs(g_conventional);
  const double jk = bessel_j_sequence(order, x)[order];
  return jk * jk;
}

int peak_count(std::span<const double> p, double min_prominence) {
  if (!(min_prominence > 0.0)) throw DomainError("peak_count: prominence threshold must be positive");
  const std::size_t n = p.size();
  auto at = [&](std::ptrdiff_t i) -> double {
    return (i < 0 || i >= static_cast<std::ptrdiff_t>(n)) ? 0.0 : p[i];
  };
  // Values this close to each other form one plateau.
  auto level = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(a, b); };
  int count = 0;
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const double h = p[i];
    std::ptrdiff_t end = i;
    while (end + 1 < static_cast<std::ptrdiff_t>(n) && level(at(end + 1), h)) ++end;
    const bool peak = h > at(i - 1) && !level(at(i - 1), h) && h > at(end + 1);
    const std::ptrdiff_t start = i;
    i = end;
    if (!peak) continue;
    // Lowest point on each side before the profile rises above h (or runs off the edge).
    double left_min = h;
    for (std::ptrdiff_t l = start - 1; l >= -1; --l) {
      const double v = at(l);
      if (v > h) break;
      left_min = std::min(left_min, v);
    }
    double right_min = h;
    for (std::ptrdiff_t r = end + 1; r <= static_cast<std::ptrdiff_t>(n); ++r) {
      const double v = at(r);
      if (v > h) break;
      right_min = std::min(right_min, v);
    }
    if (h - std::max(left_min, right_min) >= min_prominence) ++count;
  }
  return count;
}

double fidelity(const PhotonPure& a, const PhotonPure& b) {
  if (a.n_max() != b.n_max()) throw TruncationError("fidelity: truncation mismatch");
  return std::clamp(std::norm(a.amps().dot(b.amps())), 0.0, 1.0);
}

double fidelity(const PhotonPure& a, const PhotonDensity& b) {
  if (a.n_max() != b.n_max()) throw TruncationError("fidelity: truncation mismatch");
  const Complex v = a.amps().dot(b.matrix() * a.amps());
  return std::clamp(v.real(), 0.0, 1.0);
}

double fidelity(const PhotonDensity& a, const PhotonPure& b) { return fidelity(b, a); }

double fidelity(const PhotonDensity& a, const PhotonDensity& b) {
  if (a.n_max() != b.n_max()) throw TruncationError("fidelity: truncation mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> ea(a.matrix());
  const Eigen::VectorXd root = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix sqrt_a = ea.eigenvectors() * root.asDiagonal() * ea.eigenvectors().adjoint();
  Matrix inner = sqrt_a * b.matrix() * sqrt_a;
  inner = 0.5 * (inner + inner.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> ei(inner, Eigen::EigenvaluesOnly);
  const double trace_root = ei.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(trace_root * trace_root, 0.0, 1.0);
}

StatsReport compute_stats(std::span<const double> p, double p_floor, double min_prominence) {
  StatsReport s;
  s.mean_n = mean_photon(p);
  s.var_n = photon_variance(p);
  if (s.mean_n > 0.0) s.mandel_q = (s.var_n - s.mean_n) / s.mean_n;
  try {
    const ThermalFit fit = effective_theta(p, p_floor);
    s.effective_theta = fit.theta;
    s.fit_r2 = fit.r2;
  } catch (const FitError&) {
  }
  s.effective_alpha = std::sqrt(std::max(0.0, s.mean_n));
  s.peak_count = peak_count(p, min_prominence);
  return s;
}

}  // namespace qpinem
