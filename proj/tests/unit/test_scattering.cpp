#include <doctest.h>

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "qpinem/analysis.hpp"
#include "qpinem/errors.hpp"
#include "qpinem/scattering.hpp"

using namespace qpinem;

namespace {

Matrix kernel_oracle(Complex g, int keep, int big) {
  Matrix a = Matrix::Zero(big + 1, big + 1);
  for (int n = 1; n <= big; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const Matrix gen = g * a.adjoint() - std::conj(g) * a;
  return gen.exp().topLeftCorner(keep + 1, keep + 1);
}

JointPure coherent_run(Complex alpha, Coupling g, int n_max) {
  const LadderWindow w{-n_max, n_max};
  const ScatteringKernel kernel(g, n_max);
  return evolve_pure(JointPure::product(make_delta(0, {0, 0}), make_coherent(alpha, n_max), w), kernel);
}

}  // namespace

TEST_CASE("zero coupling gives the identity") {
  const ScatteringKernel s(Coupling{}, 10);
  CHECK((s.matrix() - Matrix::Identity(11, 11)).cwiseAbs().maxCoeff() == 0.0);
  for (int n = 0; n <= 10; ++n) CHECK(s.row_band(n) == std::pair<int, int>{n, n});
}

TEST_CASE("kernel matches the exponential of the generator") {
  for (Complex g : {Complex{0.0, 0.1}, Complex{0.0, 0.25}, Complex{0.0, 1.0}, Complex{0.3, -0.2}}) {
    const ScatteringKernel s(Coupling{g}, 40);
    CHECK((s.matrix() - kernel_oracle(g, 40, 160)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("kernel is unitary on the interior") {
  const ScatteringKernel s(Coupling{{0.0, 0.25}}, 80);
  CHECK(s.interior_limit() > 40);
  CHECK(s.unitarity_defect() < 1e-10);
  CHECK(s.column_norm_defect() < 1e-10);
}

TEST_CASE("kernel bands contain every significant entry") {
  const ScatteringKernel s(Coupling{{0.0, 1.0}}, 60);
  for (int n = 0; n <= 60; ++n) {
    const auto [lo, hi] = s.row_band(n);
    for (int m = 0; m <= 60; ++m) {
      if (m < lo || m > hi) CHECK(std::abs(s(n, m)) < ScatteringKernel::kBandCutoff);
    }
  }
}

TEST_CASE("kernel_element agrees with the matrix") {
  const Coupling g{{0.2, 0.4}};
  const ScatteringKernel s(g, 20);
  for (int n : {0, 3, 20}) {
    for (int m : {0, 7, 19}) CHECK(std::abs(kernel_element(g, n, m) - s(n, m)) < 1e-15);
  }
}

TEST_CASE("vacuum input conserves k + n") {
  const int n_max = 30;
  const JointPure out = evolve_pure(
      JointPure::product(make_delta(0, {0, 0}), make_vacuum(n_max), {-n_max, n_max}),
      ScatteringKernel(Coupling{{0.0, 0.7}}, n_max));
  for (int k = -n_max; k <= n_max; ++k) {
    for (int n = 0; n <= n_max; ++n) {
      if (k + n != 0) CHECK(out(k, n) == Complex{0.0, 0.0});
    }
  }
  // Poisson(|g|^2) on the diagonal k = -n
  CHECK(std::norm(out(-2, 2)) == doctest::Approx(std::exp(-0.49) * 0.49 * 0.49 / 2.0).epsilon(1e-12));
}

TEST_CASE("closed-form coefficients for a coherent input") {
  const Complex alpha{std::sqrt(12.0), 0.0};
  const Coupling g{{0.0, 0.4}};
  const int n_max = 60;
  const JointPure out = coherent_run(alpha, g, n_max);
  double worst = 0.0;
  for (int k = -n_max; k <= n_max; ++k) {
    for (int n = 0; n <= n_max; ++n) worst = std::max(worst, std::abs(out(k, n) - coherent_delta_coeffs(alpha, g, k, n)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("post-selected state matches the photon-added series") {
  const Complex alpha{std::sqrt(12.0), 0.0};
  const Coupling g{{0.0, 0.4}};
  const int n_max = 60;
  const JointPure out = coherent_run(alpha, g, n_max);
  for (int k : {-3, -1, 0, 2}) {
    const PhotonPure a = out.postselect(k);
    const PhotonPure b = postselected_photon_state(alpha, g, k, n_max);
    CHECK((a.amps() - b.amps()).norm() < 1e-10);
  }
}

TEST_CASE("complex coherent amplitude and coupling phase") {
  const Complex alpha{1.0, -2.0};
  const Coupling g{{0.3, 0.2}};
  const int n_max = 50;
  const JointPure out = coherent_run(alpha, g, n_max);
  for (int k : {-2, 0, 1}) {
    for (int n : {0, 4, 9}) CHECK(std::abs(out(k, n) - coherent_delta_coeffs(alpha, g, k, n)) < 1e-12);
    CHECK((out.postselect(k).amps() - postselected_photon_state(alpha, g, k, n_max).amps()).norm() < 1e-10);
  }
}

TEST_CASE("marginals and reduced state") {
  const JointPure out = coherent_run({2.0, 0.0}, Coupling{{0.0, 0.3}}, 40);
  const auto pk = out.electron_marginal();
  const auto pn = out.photon_marginal();
  double sk = 0.0, sn = 0.0;
  for (double v : pk) sk += v;
  for (double v : pn) sn += v;
  CHECK(sk == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sn == doctest::Approx(1.0).epsilon(1e-12));
  const auto reduced = distribution(out.trace_out_electron());
  for (std::size_t n = 0; n < pn.size(); ++n) CHECK(reduced[n] == doctest::Approx(pn[n]).epsilon(1e-12));
  CHECK(out.leaked_weight() < 1e-14);
}

TEST_CASE("Fock transition probabilities agree with the kernel") {
  for (double gm : {0.1, 1.0, 2.5}) {
    const Coupling g{{0.0, gm}};
    const ScatteringKernel s(g, 120);
    for (int from : {0, 1, 5, 20}) {
      for (int to : {0, 3, 20, 31}) CHECK(fock_transition_prob(from, to, g) == doctest::Approx(std::norm(s(to, from))).epsilon(1e-10));
    }
  }
}

TEST_CASE("mean gain per interaction from a Fock state") {
  for (double gm : {0.1, 1.0}) {
    const Coupling g{{0.0, gm}};
    for (int from : {0, 1, 5, 20}) {
      double mean = 0.0, total = 0.0;
      for (int to = 0; to <= 200; ++to) {
        const double p = fock_transition_prob(from, to, g);
        mean += to * p;
        total += p;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(mean - from - gm * gm) < 1e-10);
    }
  }
}

TEST_CASE("semiclassical limit reproduces Bessel sidebands") {
  // |alpha| = 30, g_Qu = 0.01: g = 0.3
  const JointPure out = coherent_run({30.0, 0.0}, Coupling{{0.0, 0.01}}, 1200);
  const auto pk = out.electron_marginal();
  for (int k = -4; k <= 4; ++k) CHECK(std::abs(pk[k + 1200] - bessel_reference(k, 0.3)) < 2e-3);
}

TEST_CASE("evolve_pure reports window leakage") {
  const int n_max = 20;
  const JointPure in = JointPure::product(make_delta(0, {0, 0}), make_fock(10, n_max), {-1, 1});
  const JointPure out = evolve_pure(in, ScatteringKernel(Coupling{{0.0, 1.0}}, n_max));
  CHECK(out.leaked_weight() > 0.1);
  CHECK(out.norm_squared() + out.leaked_weight() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(evolve_pure(in, ScatteringKernel(Coupling{}, 10)), TruncationError);
}
