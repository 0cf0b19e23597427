#include "qpinem/fockspace.hpp"

#include <cmath>
#include <string>

#include "qpinem/errors.hpp"
#include "qpinem/kernel.hpp"

namespace qpinem {

namespace {

void require_n_max(int n_max) {
  if (n_max < 0) throw TruncationError("n_max must be >= 0, got " + std::to_string(n_max));
}

}  // namespace

PhotonPure PhotonPure::from_amplitudes(Vector amps) {
  if (amps.size() == 0) throw DomainError("photon state needs at least one amplitude");
  const double norm2 = amps.squaredNorm();
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
    throw DomainError("photon state has zero or non-finite norm");
  }
  amps /= std::sqrt(norm2);
  return PhotonPure(std::move(amps), 1.0 - norm2);
}

PhotonDensity PhotonDensity::from_matrix(Matrix mat, const Tolerances& tol) {
  if (mat.rows() == 0 || mat.rows() != mat.cols()) {
    throw DomainError("density matrix must be square and non-empty");
  }
  const double asym = (mat - mat.adjoint()).cwiseAbs().maxCoeff();
  if (!(asym <= tol.hermitian)) {
    throw DomainError("density matrix is not Hermitian (defect " + std::to_string(asym) + ")");
  }
  Matrix herm = 0.5 * (mat + mat.adjoint());
  const double trace = herm.trace().real();
  if (!(trace > 0.0) || !std::isfinite(trace)) {
    throw DomainError("density matrix has non-positive trace");
  }
  herm /= trace;
  return PhotonDensity(std::move(herm), 1.0 - trace);
}

bool PhotonDensity::is_positive_semidefinite(const Tolerances& tol) const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(mat_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -tol.psd;
}

bool coherent_fits(double abs_alpha, int n_max) {
  return abs_alpha * abs_alpha + 8.0 * abs_alpha <= static_cast<double>(n_max);
}

PhotonPure make_vacuum(int n_max) { return make_fock(0, n_max); }

PhotonPure make_fock(int n, int n_max) {
  require_n_max(n_max);
  if (n < 0 || n > n_max) {
    throw TruncationError("Fock index " + std::to_string(n) + " outside [0, " +
                          std::to_string(n_max) + "]");
  }
  Vector amps = Vector::Zero(n_max + 1);
  amps(n) = 1.0;
  return PhotonPure::from_amplitudes(std::move(amps));
}

PhotonPure make_coherent(Complex alpha, int n_max, TruncationCheck check) {
  require_n_max(n_max);
  const double mag = std::abs(alpha);
  if (check == TruncationCheck::strict && !coherent_fits(mag, n_max)) {
    throw TruncationError("coherent state |alpha|=" + std::to_string(mag) +
                          " does not fit n_max=" + std::to_string(n_max));
  }
  if (mag == 0.0) return make_vacuum(n_max);
  Vector amps(n_max + 1);
  const double log_mag = std::log(mag);
  const double phase = std::arg(alpha);
  for (int n = 0; n <= n_max; ++n) {
    const double log_amp = -0.5 * mag * mag + n * log_mag - 0.5 * log_factorial(n);
    amps(n) = std::polar(std::exp(log_amp), n * phase);
  }
  return PhotonPure::from_amplitudes(std::move(amps));
}

PhotonDensity make_thermal(double theta, int n_max) {
  require_n_max(n_max);
  if (!(theta > 0.0)) throw DomainError("thermal state needs theta > 0");
  Matrix mat = Matrix::Zero(n_max + 1, n_max + 1);
  const double ground = -std::expm1(-theta);
  for (int n = 0; n <= n_max; ++n) mat(n, n) = ground * std::exp(-n * theta);
  return PhotonDensity::from_matrix(std::move(mat));
}

Matrix displacement_matrix(Complex alpha, int n_max) {
  require_n_max(n_max);
  return displacement_block(alpha, n_max);
}

PhotonPure make_displaced_fock(int n_i, Complex alpha, int n_max, TruncationCheck check) {
  require_n_max(n_max);
  if (n_i < 0 || n_i > n_max) {
    throw TruncationError("Fock index " + std::to_string(n_i) + " outside truncation");
  }
  const double mag = std::abs(alpha);
  if (check == TruncationCheck::strict &&
      n_i + mag * mag + 8.0 * mag * std::sqrt(2.0 * n_i + 1.0) > n_max) {
    throw TruncationError("displaced Fock state does not fit n_max=" + std::to_string(n_max));
  }
  if (mag == 0.0) return make_fock(n_i, n_max);

  // D(a)|N> = (a^dag - a*)^N |a> / sqrt(N!)
  //         = sum_r C(N,r) (-a*)^{N-r} (a^dag)^r |a> / sqrt(N!),
  // and <n|(a^dag)^r|a> = e^{-|a|^2/2} a^{n-r} sqrt(n!)/(n-r)!. All terms of
  // component n share the phase e^{i(n-N) arg a}, leaving a real alternating sum.
  const double log_mag = std::log(mag);
  const double phase = std::arg(alpha);
  Vector amps(n_max + 1);
  std::vector<LogTerm> terms;
  for (int n = 0; n <= n_max; ++n) {
    terms.clear();
    for (int r = 0; r <= std::min(n_i, n); ++r) {
      const double log_term = log_binomial(n_i, r) + (n_i + n - 2 * r) * log_mag +
                              0.5 * log_factorial(n) - log_factorial(n - r) - 0.5 * mag * mag -
                              0.5 * log_factorial(n_i);
      terms.push_back({log_term, ((n_i - r) % 2 == 0) ? 1 : -1});
    }
    amps(n) = sum_log_terms(terms) * std::polar(1.0, (n - n_i) * phase);
  }
  return PhotonPure::from_amplitudes(std::move(amps));
}

PhotonDensity to_density(const PhotonPure& state) {
  return PhotonDensity::from_matrix(state.amps() * state.amps().adjoint());
}

std::vector<double> distribution(const PhotonPure& state) {
  std::vector<double> p(state.amps().size());
  for (Eigen::Index n = 0; n < state.amps().size(); ++n) p[n] = std::norm(state.amps()(n));
  return p;
}

std::vector<double> distribution(const PhotonDensity& state) {
  std::vector<double> p(state.matrix().rows());
  for (Eigen::Index n = 0; n < state.matrix().rows(); ++n) p[n] = state.matrix()(n, n).real();
  return p;
}

std::vector<double> distribution(const PhotonState& state) {
  return std::visit([](const auto& s) { return distribution(s); }, state);
}

PhotonPure normalize(const PhotonPure& state) { return PhotonPure::from_amplitudes(state.amps()); }

PhotonDensity normalize(const PhotonDensity& state) {
  return PhotonDensity::from_matrix(state.matrix());
}

double purity(const PhotonDensity& state) {
  // trace(rho^2) = sum |rho_ij|^2 for Hermitian rho.
  return state.matrix().squaredNorm();
}

double mean_photon(const PhotonPure& state) {
  CompensatedSum acc;
  for (Eigen::Index n = 0; n < state.amps().size(); ++n) acc.add(n * std::norm(state.amps()(n)));
  return acc.value();
}

double mean_photon(const PhotonDensity& state) {
  CompensatedSum acc;
  for (Eigen::Index n = 0; n < state.matrix().rows(); ++n) acc.add(n * state.matrix()(n, n).real());
  return acc.value();
}

}  // namespace qpinem
