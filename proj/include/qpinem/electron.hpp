#pragma once

#include "qpinem/numerics.hpp"

namespace qpinem {

/// Closed range [lo, hi] of electron ladder indices (energy E_0 + k hbar omega).
struct LadderWindow {
  int lo = 0;
  int hi = 0;

  int size() const noexcept { return hi - lo + 1; }
  bool contains(int k) const noexcept { return k >= lo && k <= hi; }
  friend bool operator==(const LadderWindow&, const LadderWindow&) = default;
};

/// Intersection of two windows; empty results have hi < lo.
LadderWindow intersect(const LadderWindow& a, const LadderWindow& b);

/**
 * Electron amplitudes over a finite window of the energy ladder.
 *
 * Constructors produce normalized states. The ladder shifts return the raw
 * shifted amplitudes without renormalizing; whatever was pushed past the
 * window edge is reported by `leaked_weight()`.
 */
class ElectronPure {
 public:
  /// Normalizes; throws DomainError on window/amplitude mismatch or zero norm.
  static ElectronPure from_amplitudes(LadderWindow window, Vector amps);
  /// Keeps amplitudes as given (used by the shift operators).
  static ElectronPure unnormalized(LadderWindow window, Vector amps, double leaked_weight);

  const LadderWindow& window() const noexcept { return window_; }
  const Vector& amps() const noexcept { return amps_; }
  /// Amplitude at ladder index k; zero outside the window.
  Complex amp(int k) const noexcept {
    return window_.contains(k) ? amps_(k - window_.lo) : Complex{0.0, 0.0};
  }
  double norm_squared() const { return amps_.squaredNorm(); }
  double leaked_weight() const noexcept { return leaked_; }

  /// Same amplitudes embedded in a wider window. Throws if `wider` does not
  /// contain the current window.
  ElectronPure embedded(LadderWindow wider) const;

 private:
  ElectronPure(LadderWindow window, Vector amps, double leaked)
      : window_(window), amps_(std::move(amps)), leaked_(leaked) {}

  LadderWindow window_;
  Vector amps_;
  double leaked_ = 0.0;
};

ElectronPure make_delta(int k0, LadderWindow window);

/// Finite comb sum_{k=-K}^{K'} beta^k |k> / sqrt(K + K' + 1); requires |beta| = 1.
ElectronPure make_comb(int K, int K_prime, Complex beta);

/// b|k> = |k-1>. The amplitude at the lower edge leaves the window.
ElectronPure apply_b(const ElectronPure& state);
/// b^dag|k> = |k+1>. The amplitude at the upper edge leaves the window.
ElectronPure apply_b_dagger(const ElectronPure& state);

/// <psi| b^dag b |psi> over the window.
double expectation_b_dagger_b(const ElectronPure& state);

}  // namespace qpinem
