#include "qpinem/electron.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qpinem/errors.hpp"

namespace qpinem {

LadderWindow intersect(const LadderWindow& a, const LadderWindow& b) {
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

ElectronPure ElectronPure::from_amplitudes(LadderWindow window, Vector amps) {
  if (window.hi < window.lo) throw DomainError("electron window is empty");
  if (amps.size() != window.size()) throw DomainError("electron amplitudes do not match window");
  const double norm2 = amps.squaredNorm();
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) throw DomainError("electron state has zero norm");
  amps /= std::sqrt(norm2);
  return ElectronPure(window, std::move(amps), 0.0);
}

ElectronPure ElectronPure::unnormalized(LadderWindow window, Vector amps, double leaked_weight) {
  if (window.hi < window.lo) throw DomainError("electron window is empty");
  if (amps.size() != window.size()) throw DomainError("electron amplitudes do not match window");
  return ElectronPure(window, std::move(amps), leaked_weight);
}

ElectronPure ElectronPure::embedded(LadderWindow wider) const {
  if (wider.lo > window_.lo || wider.hi < window_.hi) {
    throw DomainError("embedding window must contain the current window");
  }
  Vector out = Vector::Zero(wider.size());
  out.segment(window_.lo - wider.lo, window_.size()) = amps_;
  return ElectronPure(wider, std::move(out), leaked_);
}

ElectronPure make_delta(int k0, LadderWindow window) {
  if (window.hi < window.lo) throw DomainError("electron window is empty");
  if (!window.contains(k0)) {
    throw DomainError("delta index " + std::to_string(k0) + " outside electron window");
  }
  Vector amps = Vector::Zero(window.size());
  amps(k0 - window.lo) = 1.0;
  return ElectronPure::from_amplitudes(window, std::move(amps));
}

ElectronPure make_comb(int K, int K_prime, Complex beta) {
  if (K < 0 || K_prime < 0) throw DomainError("comb extents must be non-negative");
  if (std::abs(std::abs(beta) - 1.0) > 1e-12) throw DomainError("comb phase beta must satisfy |beta| = 1");
  const LadderWindow window{-K, K_prime};
  const double scale = 1.0 / std::sqrt(static_cast<double>(K + K_prime + 1));
  Vector amps(window.size());
  // Repeated multiplication keeps beta^k exact for beta in {+-1, +-i}.
  Complex power{1.0, 0.0};
  for (int k = 0; k <= K_prime; ++k) {
    amps(k + K) = power * scale;
    power *= beta;
  }
  const Complex inverse = 1.0 / beta;
  power = inverse;
  for (int k = -1; k >= -K; --k) {
    amps(k + K) = power * scale;
    power *= inverse;
  }
  return ElectronPure::unnormalized(window, std::move(amps), 0.0);
}

ElectronPure apply_b(const ElectronPure& state) {
  const auto& w = state.window();
  const Vector& in = state.amps();
  Vector out = Vector::Zero(in.size());
  // Index i holds k = lo + i; b moves it to k - 1, i.e. index i - 1.
  for (Eigen::Index i = 1; i < in.size(); ++i) out(i - 1) = in(i);
  return ElectronPure::unnormalized(w, std::move(out), state.leaked_weight() + std::norm(in(0)));
}

ElectronPure apply_b_dagger(const ElectronPure& state) {
  const auto& w = state.window();
  const Vector& in = state.amps();
  Vector out = Vector::Zero(in.size());
  for (Eigen::Index i = 0; i + 1 < in.size(); ++i) out(i + 1) = in(i);
  return ElectronPure::unnormalized(w, std::move(out),
                                    state.leaked_weight() + std::norm(in(in.size() - 1)));
}

double expectation_b_dagger_b(const ElectronPure& state) {
  return apply_b(state).norm_squared();
}

}  // namespace qpinem
