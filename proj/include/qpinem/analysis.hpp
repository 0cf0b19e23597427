#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qpinem/fockspace.hpp"

namespace qpinem {

struct StatsReport {
  double mean_n = 0.0;
  double var_n = 0.0;
  std::optional<double> mandel_q;         // undefined when mean_n == 0
  std::optional<double> effective_theta;  // absent when the fit is impossible
  std::optional<double> fit_r2;
  double effective_alpha = 0.0;
  int peak_count = 0;
};

double mean_photon(std::span<const double> p);
double photon_variance(std::span<const double> p);

/// (Var n - <n>) / <n>; 0 for Poisson, -1 for Fock, <n> for thermal.
/// Throws UndefinedQError when <n> is zero.
double mandel_q(std::span<const double> p);

struct ThermalFit {
  double theta;
  double r2;
};

/// Minus the least-squares slope of ln p_n against n over bins above
/// `p_floor`. Throws FitError with fewer than five usable bins.
ThermalFit effective_theta(std::span<const double> p, double p_floor = 1e-12);

/// sqrt(<n>).
double effective_alpha(std::span<const double> p);

/// J_0(x) .. J_{order_max}(x) by normalized downward recurrence.
std::vector<double> bessel_j_sequence(int order_max, double x);

/// J_k^2(2|g|): electron sideband probability in the semiclassical limit.
double bessel_reference(int k, double g_conventional);

/// Strict local maxima whose topographic prominence reaches `min_prominence`.
/// The distribution is treated as zero beyond both ends.
int peak_count(std::span<const double> p, double min_prominence = 1e-3);

double fidelity(const PhotonPure& a, const PhotonPure& b);
double fidelity(const PhotonPure& a, const PhotonDensity& b);
double fidelity(const PhotonDensity& a, const PhotonPure& b);
/// Uhlmann fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2.
double fidelity(const PhotonDensity& a, const PhotonDensity& b);

StatsReport compute_stats(std::span<const double> p, double p_floor = 1e-12,
                          double min_prominence = 1e-3);

}  // namespace qpinem
