#pragma once

#include <vector>

#include "qpinem/electron.hpp"
#include "qpinem/fockspace.hpp"
#include "qpinem/numerics.hpp"

namespace qpinem {

/// Dimensionless quantum coupling g_Qu of one electron pass to the cavity mode.
/// The conventional PINEM strength is g = g_Qu |alpha|.
struct Coupling {
  Complex g_qu{0.0, 0.0};

  double magnitude() const { return std::abs(g_qu); }
};

/// s_{n,n'}: amplitude for the photon number to go n' -> n while the electron
/// moves by n' - n ladder steps.
Complex kernel_element(Coupling g, int n, int n_prime);

/**
 * Precomputed s_{n,n'} over [0, n_max]^2 together with, per row and per
 * column, the contiguous index range outside of which every entry is below
 * `kBandCutoff`. Channel code iterates over these bands only.
 */
class ScatteringKernel {
 public:
  static constexpr double kBandCutoff = 1e-18;

  ScatteringKernel(Coupling g, int n_max);

  Coupling coupling() const noexcept { return g_; }
  int n_max() const noexcept { return n_max_; }
  const Matrix& matrix() const noexcept { return s_; }
  Complex operator()(int n, int n_prime) const { return s_(n, n_prime); }

  /// Rows n with s(n, .) significant lie in [row_band(n).first, .second].
  std::pair<int, int> row_band(int n) const { return row_band_[n]; }
  std::pair<int, int> col_band(int n_prime) const { return col_band_[n_prime]; }

  /// Largest index whose column is unaffected by truncation:
  /// n_max - ceil(8|g|(sqrt(n_max) + 1)), clamped at -1.
  int interior_limit() const noexcept;
  /// max |(s^dag s)[i,j] - delta_ij| over the interior block.
  double unitarity_defect() const;
  /// max | ||s(., n')||^2 - 1 | over interior columns.
  double column_norm_defect() const noexcept { return column_norm_defect_; }

 private:
  Coupling g_;
  int n_max_;
  Matrix s_;
  std::vector<std::pair<int, int>> row_band_;
  std::vector<std::pair<int, int>> col_band_;
  double column_norm_defect_ = 0.0;
};

ScatteringKernel build_kernel(Coupling g, int n_max);

/**
 * Joint electron-photon amplitudes c[k, n] over an electron window and the
 * photon truncation. Rows are ladder indices (k - window.lo), columns are n.
 */
class JointPure {
 public:
  JointPure(LadderWindow window, Matrix amps, double leaked_weight = 0.0);

  /// |psi_e> (x) |phi_p>; the electron is embedded into `window`.
  static JointPure product(const ElectronPure& electron, const PhotonPure& photon,
                           LadderWindow window);

  const LadderWindow& window() const noexcept { return window_; }
  int n_max() const noexcept { return static_cast<int>(amps_.cols()) - 1; }
  const Matrix& amps() const noexcept { return amps_; }
  Complex operator()(int k, int n) const {
    return window_.contains(k) ? amps_(k - window_.lo, n) : Complex{0.0, 0.0};
  }
  double norm_squared() const { return amps_.squaredNorm(); }
  double leaked_weight() const noexcept { return leaked_; }

  /// P(k) = sum_n |c[k,n]|^2 over the window.
  std::vector<double> electron_marginal() const;
  /// P(n) = sum_k |c[k,n]|^2.
  std::vector<double> photon_marginal() const;
  /// Unnormalized photon amplitudes c[k, .] for a fixed electron outcome.
  Vector photon_slice(int k) const;
  /// Renormalized photon state conditioned on electron outcome k.
  PhotonPure postselect(int k) const;
  /// Reduced photon density matrix (electron traced out).
  PhotonDensity trace_out_electron() const;

 private:
  LadderWindow window_;
  Matrix amps_;
  double leaked_ = 0.0;
};

/// c_f[k,n] = sum_{n'} c_i[k+n-n', n'] s[n,n']. Output shares the input window;
/// amplitude landing outside it is dropped and added to the leaked weight.
JointPure evolve_pure(const JointPure& state, const ScatteringKernel& kernel);

/// Closed-form output amplitude for a k=0 electron and coherent |alpha> input.
Complex coherent_delta_coeffs(Complex alpha, Coupling g, int k, int n);

/// Photon state after post-selecting electron outcome k, evaluated from the
/// photon-added coherent-state series and normalized over [0, n_max].
PhotonPure postselected_photon_state(Complex alpha, Coupling g, int k, int n_max,
                                     TruncationCheck check = TruncationCheck::strict);

/// P(n_from -> n_to) for a k=0 electron scattering off a Fock state.
double fock_transition_prob(int n_from, int n_to, Coupling g);

}  // namespace qpinem
