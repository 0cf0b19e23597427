#include "qpinem/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qpinem/errors.hpp"
#include "qpinem/kernel.hpp"

namespace qpinem {

namespace {

// e * log(mag) with the convention 0 * log(0) = 0.
double log_power(double mag, int e) {
  if (e == 0) return 0.0;
  if (mag == 0.0) return -std::numeric_limits<double>::infinity();
  return e * std::log(mag);
}

}  // namespace

Complex kernel_element(Coupling g, int n, int n_prime) {
  return displacement_element(g.g_qu, n, n_prime);
}

ScatteringKernel::ScatteringKernel(Coupling g, int n_max) : g_(g), n_max_(n_max) {
  if (n_max < 0) throw TruncationError("kernel n_max must be >= 0");
  const int dim = n_max + 1;
  s_ = displacement_block(g.g_qu, n_max);

  row_band_.assign(dim, {0, -1});
  col_band_.assign(dim, {0, -1});
  for (int row = 0; row < dim; ++row) {
    int first = -1, last = -1;
    for (int col = 0; col < dim; ++col) {
      if (std::abs(s_(row, col)) >= kBandCutoff) {
        if (first < 0) first = col;
        last = col;
      }
    }
    if (first >= 0) row_band_[row] = {first, last};
  }
  for (int col = 0; col < dim; ++col) {
    int first = -1, last = -1;
    for (int row = 0; row < dim; ++row) {
      if (std::abs(s_(row, col)) >= kBandCutoff) {
        if (first < 0) first = row;
        last = row;
      }
    }
    if (first >= 0) col_band_[col] = {first, last};
  }

  const int limit = interior_limit();
  for (int col = 0; col <= limit; ++col) {
    column_norm_defect_ = std::max(column_norm_defect_, std::abs(s_.col(col).squaredNorm() - 1.0));
  }
}

int ScatteringKernel::interior_limit() const noexcept {
  const double margin = std::ceil(8.0 * g_.magnitude() * (std::sqrt(static_cast<double>(n_max_)) + 1.0));
  return std::max(-1, n_max_ - static_cast<int>(margin));
}

double ScatteringKernel::unitarity_defect() const {
  const int limit = interior_limit();
  if (limit < 0) return 0.0;
  const auto cols = s_.leftCols(limit + 1);
  Matrix gram = cols.adjoint() * cols;
  gram -= Matrix::Identity(limit + 1, limit + 1);
  return gram.cwiseAbs().maxCoeff();
}

ScatteringKernel build_kernel(Coupling g, int n_max) { return ScatteringKernel(g, n_max); }

JointPure::JointPure(LadderWindow window, Matrix amps, double leaked_weight)
    : window_(window), amps_(std::move(amps)), leaked_(leaked_weight) {
  if (window_.hi < window_.lo) throw DomainError("joint state window is empty");
  if (amps_.rows() != window_.size() || amps_.cols() == 0) {
    throw DomainError("joint amplitudes do not match window/truncation");
  }
}

JointPure JointPure::product(const ElectronPure& electron, const PhotonPure& photon,
                             LadderWindow window) {
  const ElectronPure e = electron.embedded(window);
  Matrix amps = e.amps() * photon.amps().transpose();
  return JointPure(window, std::move(amps), e.leaked_weight());
}

std::vector<double> JointPure::electron_marginal() const {
  std::vector<double> p(amps_.rows());
  for (Eigen::Index i = 0; i < amps_.rows(); ++i) p[i] = amps_.row(i).squaredNorm();
  return p;
}

std::vector<double> JointPure::photon_marginal() const {
  std::vector<double> p(amps_.cols());
  for (Eigen::Index n = 0; n < amps_.cols(); ++n) p[n] = amps_.col(n).squaredNorm();
  return p;
}

Vector JointPure::photon_slice(int k) const {
  if (!window_.contains(k)) return Vector::Zero(amps_.cols());
  return amps_.row(k - window_.lo).transpose();
}

PhotonPure JointPure::postselect(int k) const {
  Vector slice = photon_slice(k);
  if (slice.squaredNorm() < 1e-300) {
    throw ZeroProbabilityError("post-selected outcome k=" + std::to_string(k) + " has zero weight");
  }
  return PhotonPure::from_amplitudes(std::move(slice));
}

PhotonDensity JointPure::trace_out_electron() const {
  // rho[n,m] = sum_k c[k,n] conj(c[k,m])
  Matrix rho = amps_.transpose() * amps_.conjugate();
  return PhotonDensity::from_matrix(std::move(rho));
}

JointPure evolve_pure(const JointPure& state, const ScatteringKernel& kernel) {
  if (state.n_max() != kernel.n_max()) throw TruncationError("evolve_pure: truncation mismatch");
  const LadderWindow w = state.window();
  const Matrix& in = state.amps();
  Matrix out = Matrix::Zero(in.rows(), in.cols());
  for (Eigen::Index n_prime = 0; n_prime < in.cols(); ++n_prime) {
    const auto [first, last] = kernel.col_band(static_cast<int>(n_prime));
    for (Eigen::Index i = 0; i < in.rows(); ++i) {
      const Complex c = in(i, n_prime);
      if (c == Complex{0.0, 0.0}) continue;
      const int k_in = w.lo + static_cast<int>(i);
      for (int n = first; n <= last; ++n) {
        // k + n = k' + n' is conserved.
        const int k = k_in + static_cast<int>(n_prime) - n;
        if (!w.contains(k)) continue;
        out(k - w.lo, n) += c * kernel(n, static_cast<int>(n_prime));
      }
    }
  }
  const double lost = std::max(0.0, state.norm_squared() - out.squaredNorm());
  return JointPure(w, std::move(out), state.leaked_weight() + lost);
}

Complex coherent_delta_coeffs(Complex alpha, Coupling g, int k, int n) {
  if (n < 0) throw DomainError("coherent_delta_coeffs: negative photon number");
  if (k + n < 0) return {0.0, 0.0};
  const double a = std::abs(alpha);
  const double gm = g.magnitude();
  const double x = gm * gm;
  // alpha^{k+n} g^{-k} (-|g|^2)^r = |alpha|^{k+n} |g|^{2r-k} (-1)^r e^{i((k+n) arg alpha - k arg g)}
  std::vector<LogTerm> terms;
  for (int r = std::max(0, k); r <= k + n; ++r) {
    const double log_term = -0.5 * (x + a * a) + log_power(a, k + n) + log_power(gm, 2 * r - k) +
                            0.5 * log_factorial(n) - log_factorial(r) - log_factorial(k + n - r) -
                            log_factorial(r - k);
    terms.push_back({log_term, (r % 2 == 0) ? 1 : -1});
  }
  const double phase = (k + n) * std::arg(alpha) - k * std::arg(g.g_qu);
  return sum_log_terms(terms) * std::polar(1.0, phase);
}

PhotonPure postselected_photon_state(Complex alpha, Coupling g, int k, int n_max,
                                     TruncationCheck check) {
  if (n_max < 0) throw TruncationError("n_max must be >= 0");
  const double a = std::abs(alpha);
  if (check == TruncationCheck::strict && a * a + std::abs(k) + 8.0 * a > n_max) {
    throw TruncationError("post-selected state does not fit n_max=" + std::to_string(n_max));
  }
  const double gm = g.magnitude();
  const double x = gm * gm;
  // e^{-x/2} (-g* alpha)^k sum_r (-alpha x)^r / [r! (r+k)!] (a^dag)^r |alpha>, with
  // <n|(a^dag)^r|alpha> = e^{-|alpha|^2/2} alpha^{n-r} sqrt(n!)/(n-r)!.
  Vector amps(n_max + 1);
  std::vector<LogTerm> terms;
  const int k_sign = (k % 2 == 0) ? 1 : -1;
  for (int n = 0; n <= n_max; ++n) {
    terms.clear();
    for (int r = std::max(-k, 0); r <= n; ++r) {
      const double log_term = -0.5 * (x + a * a) + log_power(gm, k + 2 * r) + log_power(a, k + n) -
                              log_factorial(r) - log_factorial(r + k) + 0.5 * log_factorial(n) -
                              log_factorial(n - r);
      terms.push_back({log_term, (r % 2 == 0) ? k_sign : -k_sign});
    }
    const double phase = k * (std::arg(alpha) - std::arg(g.g_qu)) + n * std::arg(alpha);
    amps(n) = sum_log_terms(terms) * std::polar(1.0, phase);
  }
  if (amps.squaredNorm() < 1e-300) {
    throw ZeroProbabilityError("post-selected outcome k=" + std::to_string(k) + " has zero weight");
  }
  return PhotonPure::from_amplitudes(std::move(amps));
}

double fock_transition_prob(int n_from, int n_to, Coupling g) {
  if (n_from < 0 || n_to < 0) throw DomainError("fock_transition_prob: negative Fock index");
  const double gm = g.magnitude();
  if (gm == 0.0) return n_from == n_to ? 1.0 : 0.0;
  const long double x = static_cast<long double>(gm) * gm;
  const long double log_x = std::log(x);
  // sqrt(P) = e^{-x/2} |g|^{n-N} sqrt(n! N!) |sum_r (-x)^r / [r!(N-r)!(r-N+n)!]|, the
  // |g|^{n-N} factor folded into each term so no intermediate power diverges.
  // Extended precision absorbs the cancellation of the alternating sum.
  const auto lf = [](int k) { return std::lgamma(static_cast<long double>(k) + 1.0L); };
  std::vector<long double> log_terms;
  for (int r = std::max(0, n_from - n_to); r <= n_from; ++r) {
    log_terms.push_back(-0.5L * x + (r + 0.5L * (n_to - n_from)) * log_x +
                        0.5L * (lf(n_to) + lf(n_from)) - lf(r) - lf(n_from - r) -
                        lf(r - n_from + n_to));
  }
  const long double peak = *std::max_element(log_terms.begin(), log_terms.end());
  long double sum = 0.0L;
  const int r0 = std::max(0, n_from - n_to);
  for (std::size_t i = 0; i < log_terms.size(); ++i) {
    const long double t = std::exp(log_terms[i] - peak);
    sum += ((r0 + static_cast<int>(i)) % 2 == 0) ? t : -t;
  }
  const double amp = static_cast<double>(sum * std::exp(peak));
  return amp * amp;
}

}  // namespace qpinem
