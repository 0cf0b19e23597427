#include "qpinem/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qpinem/errors.hpp"

namespace qpinem {

KrausFamily::KrausFamily(LadderWindow outcomes, std::vector<Matrix> ops)
    : outcomes_(outcomes), ops_(std::move(ops)) {
  if (static_cast<int>(ops_.size()) != outcomes_.size()) {
    throw DomainError("Kraus family size does not match outcome window");
  }
}

double KrausFamily::completeness_defect(int limit) const {
  if (ops_.empty() || limit < 0) return 0.0;
  const Eigen::Index dim = ops_.front().cols();
  Matrix sum = Matrix::Zero(dim, dim);
  for (const auto& e : ops_) sum.noalias() += e.adjoint() * e;
  sum -= Matrix::Identity(dim, dim);
  return sum.topLeftCorner(limit + 1, limit + 1).cwiseAbs().maxCoeff();
}

ElectronChannel::ElectronChannel(const ElectronPure& electron, const ScatteringKernel& kernel,
                                 std::optional<LadderWindow> outcome_window)
    : electron_(electron), kernel_(&kernel) {
  const LadderWindow ew = electron_.window();
  const LadderWindow full{ew.lo - kernel.n_max(), ew.hi + kernel.n_max()};
  if (outcome_window) {
    outcomes_ = intersect(full, *outcome_window);
    if (outcomes_.hi < outcomes_.lo) throw DomainError("outcome window excludes every outcome");
    full_window_ = outcomes_ == full;
  } else {
    outcomes_ = full;
  }

  const int w = ew.size();
  autocorrelation_.assign(2 * w - 1, Complex{0.0, 0.0});
  const Vector& psi = electron_.amps();
  for (int d = -(w - 1); d <= w - 1; ++d) {
    Complex acc{0.0, 0.0};
    for (int i = std::max(0, -d); i < w && i + d < w; ++i) acc += psi(i) * std::conj(psi(i + d));
    autocorrelation_[d + w - 1] = acc;
  }
}

namespace {

struct RowEntry {
  int col;
  Complex value;
};

// Non-negligible entries of row `a` of E_j.
void kraus_row(const ScatteringKernel& kernel, const ElectronPure& electron, int j, int a,
               std::vector<RowEntry>& out) {
  out.clear();
  const LadderWindow ew = electron.window();
  const auto [first, last] = kernel.row_band(a);
  for (int k = ew.lo; k <= ew.hi; ++k) {
    const int n_prime = j + a - k;
    if (n_prime < first || n_prime > last) continue;
    const Complex psi = electron.amp(k);
    if (psi == Complex{0.0, 0.0}) continue;
    out.push_back({n_prime, kernel(a, n_prime) * psi});
  }
}

}  // namespace

Matrix ElectronChannel::kraus(int j) const {
  const int dim = kernel_->n_max() + 1;
  Matrix e = Matrix::Zero(dim, dim);
  const LadderWindow ew = electron_.window();
  for (int a = 0; a < dim; ++a) {
    for (int k = ew.lo; k <= ew.hi; ++k) {
      const int n_prime = j + a - k;
      if (n_prime < 0 || n_prime >= dim) continue;
      e(a, n_prime) = (*kernel_)(a, n_prime) * electron_.amp(k);
    }
  }
  return e;
}

KrausFamily ElectronChannel::family() const {
  std::vector<Matrix> ops;
  ops.reserve(outcomes_.size());
  for (int j = outcomes_.lo; j <= outcomes_.hi; ++j) ops.push_back(kraus(j));
  return KrausFamily(outcomes_, std::move(ops));
}

Matrix ElectronChannel::apply_traceout(const Matrix& rho) const {
  const int dim = kernel_->n_max() + 1;
  if (rho.rows() != dim || rho.cols() != dim) throw TruncationError("channel: truncation mismatch");
  if (!full_window_) {
    Matrix out = Matrix::Zero(dim, dim);
    for (int j = outcomes_.lo; j <= outcomes_.hi; ++j) out += apply_branch(rho, j);
    return out;
  }

  // rho'[a,b] = sum_d R(d) sum_{n'} s[a,n'] rho[n', m'] conj(s[b, m']),  m' = n' + (b - a) - d.
  const Matrix s_rows = kernel_->matrix().transpose();  // column a holds row a of s
  const int w = electron_.window().size();
  Matrix out(dim, dim);
  for (int a = 0; a < dim; ++a) {
    const auto [a_first, a_last] = kernel_->row_band(a);
    const Complex* sa = s_rows.col(a).data();
    for (int b = a; b < dim; ++b) {
      const auto [b_first, b_last] = kernel_->row_band(b);
      const Complex* sb = s_rows.col(b).data();
      Complex acc{0.0, 0.0};
      for (int d = -(w - 1); d <= w - 1; ++d) {
        const Complex r = autocorrelation_[d + w - 1];
        if (r == Complex{0.0, 0.0}) continue;
        const int offset = b - a - d;
        const int lo = std::max(a_first, b_first - offset);
        const int hi = std::min(a_last, b_last - offset);
        Complex partial{0.0, 0.0};
        for (int n_prime = lo; n_prime <= hi; ++n_prime) {
          partial += sa[n_prime] * rho(n_prime, n_prime + offset) * std::conj(sb[n_prime + offset]);
        }
        acc += r * partial;
      }
      out(a, b) = acc;
      out(b, a) = std::conj(acc);
    }
    out(a, a) = Complex{out(a, a).real(), 0.0};
  }
  return out;
}

Matrix ElectronChannel::apply_branch(const Matrix& rho, int j) const {
  const int dim = kernel_->n_max() + 1;
  if (rho.rows() != dim || rho.cols() != dim) throw TruncationError("channel: truncation mismatch");
  if (!outcomes_.contains(j)) {
    throw DomainError("outcome " + std::to_string(j) + " outside the channel's outcome window");
  }
  std::vector<std::vector<RowEntry>> rows(dim);
  for (int a = 0; a < dim; ++a) kraus_row(*kernel_, electron_, j, a, rows[a]);
  Matrix out = Matrix::Zero(dim, dim);
  for (int a = 0; a < dim; ++a) {
    if (rows[a].empty()) continue;
    for (int b = a; b < dim; ++b) {
      Complex acc{0.0, 0.0};
      for (const auto& ea : rows[a]) {
        for (const auto& eb : rows[b]) acc += ea.value * rho(ea.col, eb.col) * std::conj(eb.value);
      }
      out(a, b) = acc;
      out(b, a) = std::conj(acc);
    }
    out(a, a) = Complex{out(a, a).real(), 0.0};
  }
  return out;
}

std::vector<double> ElectronChannel::outcome_probabilities(const Matrix& rho) const {
  const int dim = kernel_->n_max() + 1;
  if (rho.rows() != dim || rho.cols() != dim) throw TruncationError("channel: truncation mismatch");
  std::vector<double> p(outcomes_.size(), 0.0);
  std::vector<RowEntry> row;
  for (int j = outcomes_.lo; j <= outcomes_.hi; ++j) {
    CompensatedSum acc;
    for (int a = 0; a < dim; ++a) {
      kraus_row(*kernel_, electron_, j, a, row);
      Complex diag{0.0, 0.0};
      for (const auto& e1 : row) {
        for (const auto& e2 : row) diag += e1.value * rho(e1.col, e2.col) * std::conj(e2.value);
      }
      acc.add(diag.real());
    }
    p[j - outcomes_.lo] = std::max(0.0, acc.value());
  }
  return p;
}

Matrix ElectronChannel::joint_amplitudes(const Vector& photon) const {
  const int dim = kernel_->n_max() + 1;
  if (photon.size() != dim) throw TruncationError("channel: truncation mismatch");
  const LadderWindow ew = electron_.window();
  Matrix c = Matrix::Zero(outcomes_.size(), dim);
  for (int n = 0; n < dim; ++n) {
    const auto [first, last] = kernel_->row_band(n);
    for (int n_prime = first; n_prime <= last; ++n_prime) {
      const Complex amp = (*kernel_)(n, n_prime) * photon(n_prime);
      if (amp == Complex{0.0, 0.0}) continue;
      for (int k = ew.lo; k <= ew.hi; ++k) {
        const int j = k - n + n_prime;
        if (!outcomes_.contains(j)) continue;
        c(j - outcomes_.lo, n) += electron_.amp(k) * amp;
      }
    }
  }
  return c;
}

KrausFamily kraus_operators(const ElectronPure& electron, const ScatteringKernel& kernel,
                            std::optional<LadderWindow> outcome_window) {
  return ElectronChannel(electron, kernel, outcome_window).family();
}

}  // namespace qpinem
