#pragma once

#include <optional>
#include <vector>

#include "qpinem/electron.hpp"
#include "qpinem/fockspace.hpp"
#include "qpinem/scattering.hpp"

namespace qpinem {

/// Dense Kraus operators E_j, j = outcomes.lo .. outcomes.hi.
class KrausFamily {
 public:
  KrausFamily(LadderWindow outcomes, std::vector<Matrix> ops);

  const LadderWindow& outcomes() const noexcept { return outcomes_; }
  const Matrix& operator[](int j) const { return ops_.at(j - outcomes_.lo); }
  std::size_t size() const noexcept { return ops_.size(); }

  /// max |(sum_j E_j^dag E_j - I)[n,m]| over n, m <= limit.
  double completeness_defect(int limit) const;

 private:
  LadderWindow outcomes_;
  std::vector<Matrix> ops_;
};

/**
 * Photon-space channel induced by one electron passing the cavity.
 *
 * For incoming electron amplitudes psi(k), outcome j (measured electron
 * index) acts on the photon state with
 *
 *     E_j[n, n'] = s[n, n'] * psi(j + n - n').
 *
 * The outcome window defaults to every index that can carry weight,
 * [k_lo - n_max, k_hi + n_max]; a narrower window may be configured, in
 * which case outcomes outside it are discarded and show up as leakage.
 * Full Kraus matrices are only materialized on request; the application
 * routines work on the kernel bands directly.
 */
class ElectronChannel {
 public:
  ElectronChannel(const ElectronPure& electron, const ScatteringKernel& kernel,
                  std::optional<LadderWindow> outcome_window = std::nullopt);

  const LadderWindow& outcomes() const noexcept { return outcomes_; }
  bool covers_all_outcomes() const noexcept { return full_window_; }
  int n_max() const noexcept { return kernel_->n_max(); }

  Matrix kraus(int j) const;
  KrausFamily family() const;

  /// sum_j E_j rho E_j^dag over the outcome window (not renormalized).
  Matrix apply_traceout(const Matrix& rho) const;
  /// E_j rho E_j^dag (not renormalized).
  Matrix apply_branch(const Matrix& rho, int j) const;
  /// trace(E_j rho E_j^dag) for every j in the outcome window.
  std::vector<double> outcome_probabilities(const Matrix& rho) const;
  /// Rows j - outcomes.lo, columns n: (E_j phi)[n].
  Matrix joint_amplitudes(const Vector& photon) const;

 private:
  ElectronPure electron_;
  const ScatteringKernel* kernel_;
  LadderWindow outcomes_;
  bool full_window_ = true;
  // R(d) = sum_k psi(k) conj(psi(k + d)) for d in [-(W-1), W-1].
  std::vector<Complex> autocorrelation_;
};

/// Convenience wrapper returning the dense family.
KrausFamily kraus_operators(const ElectronPure& electron, const ScatteringKernel& kernel,
                            std::optional<LadderWindow> outcome_window = std::nullopt);

}  // namespace qpinem
