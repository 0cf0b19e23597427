#pragma once

#include <variant>
#include <vector>

#include "qpinem/numerics.hpp"

namespace qpinem {

struct Tolerances {
  double norm = 1e-10;
  double hermitian = 1e-10;
  double psd = 1e-8;
};

/// Whether constructors reject states whose tail does not fit the truncation.
enum class TruncationCheck { strict, allow };

/**
 * Pure photon state over the Fock basis |0>..|n_max>.
 *
 * Amplitudes are normalized on construction. `discarded_weight()` is the
 * squared-norm deficit (1 - |amps|^2) removed by that renormalization, i.e.
 * the probability that fell outside the truncated window.
 */
class PhotonPure {
 public:
  /// Normalizes `amps`. Throws DomainError for an empty or zero vector.
  static PhotonPure from_amplitudes(Vector amps);

  int n_max() const noexcept { return static_cast<int>(amps_.size()) - 1; }
  const Vector& amps() const noexcept { return amps_; }
  Complex operator[](int n) const { return amps_(n); }
  double discarded_weight() const noexcept { return discarded_; }

 private:
  PhotonPure(Vector amps, double discarded) : amps_(std::move(amps)), discarded_(discarded) {}

  Vector amps_;
  double discarded_ = 0.0;
};

/**
 * Photon density matrix over |0>..|n_max>. Trace is normalized on
 * construction; the pre-normalization trace deficit is kept as
 * `discarded_weight()`.
 */
class PhotonDensity {
 public:
  /// Throws DomainError if `mat` is not square, not Hermitian within
  /// `tol.hermitian`, or has non-positive trace.
  static PhotonDensity from_matrix(Matrix mat, const Tolerances& tol = {});

  int n_max() const noexcept { return static_cast<int>(mat_.rows()) - 1; }
  const Matrix& matrix() const noexcept { return mat_; }
  double discarded_weight() const noexcept { return discarded_; }

  /// Smallest-eigenvalue test; O(N^3), so only run on request.
  bool is_positive_semidefinite(const Tolerances& tol = {}) const;

 private:
  PhotonDensity(Matrix mat, double discarded) : mat_(std::move(mat)), discarded_(discarded) {}

  Matrix mat_;
  double discarded_ = 0.0;
};

using PhotonState = std::variant<PhotonPure, PhotonDensity>;

/// |a|^2 + 8|a| <= n_max: the Poisson tail beyond eight standard deviations
/// stays outside the window.
bool coherent_fits(double abs_alpha, int n_max);

PhotonPure make_vacuum(int n_max);
PhotonPure make_fock(int n, int n_max);
PhotonPure make_coherent(Complex alpha, int n_max, TruncationCheck check = TruncationCheck::strict);
/// Geometric distribution p_n = (1 - e^-theta) e^{-n theta}, theta = hbar omega / kT.
PhotonDensity make_thermal(double theta, int n_max);

/// <n|D(alpha)|n'> for n, n' in [0, n_max].
Matrix displacement_matrix(Complex alpha, int n_max);

/// D(alpha)|n_i>, built as a finite sum of photon-added coherent states.
PhotonPure make_displaced_fock(int n_i, Complex alpha, int n_max,
                               TruncationCheck check = TruncationCheck::strict);

PhotonDensity to_density(const PhotonPure& state);
std::vector<double> distribution(const PhotonPure& state);
std::vector<double> distribution(const PhotonDensity& state);
std::vector<double> distribution(const PhotonState& state);
PhotonPure normalize(const PhotonPure& state);
PhotonDensity normalize(const PhotonDensity& state);
double purity(const PhotonDensity& state);

double mean_photon(const PhotonPure& state);
double mean_photon(const PhotonDensity& state);

}  // namespace qpinem
