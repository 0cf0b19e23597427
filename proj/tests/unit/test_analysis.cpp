#include <doctest.h>

#include <cmath>
#include <random>

#include "qpinem/analysis.hpp"
#include "qpinem/errors.hpp"

using namespace qpinem;

namespace {

std::vector<double> geometric(double theta, int n_max) {
  std::vector<double> p(n_max + 1);
  for (int n = 0; n <= n_max; ++n) p[n] = -std::expm1(-theta) * std::exp(-n * theta);
  return p;
}

}  // namespace

TEST_CASE("Mandel Q of reference distributions") {
  for (double mean : {1e-3, 0.5, 10.0, 40.0}) {
    const auto p = distribution(make_coherent({std::sqrt(mean), 0.0}, 120));
    CHECK(std::abs(mandel_q(p)) < 1e-6);
  }
  CHECK(mandel_q(distribution(make_fock(7, 10))) == doctest::Approx(-1.0));
  const double theta = std::log(1.2);
  CHECK(mandel_q(geometric(theta, 400)) == doctest::Approx(5.0).epsilon(1e-3));
  CHECK_THROWS_AS(mandel_q(distribution(make_vacuum(5))), UndefinedQError);
}

TEST_CASE("Mandel Q is bounded below on random distributions") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(1 + trial % 30);
    double total = 0.0;
    for (auto& v : p) total += (v = std::pow(u(rng), 4));
    for (auto& v : p) v /= total;
    if (mean_photon(p) == 0.0) continue;
    CHECK(mandel_q(p) >= -1.0 - 1e-10);
  }
}

TEST_CASE("effective theta") {
  const ThermalFit exact = effective_theta(geometric(0.5, 60));
  CHECK(std::abs(exact.theta - 0.5) < 1e-9);
  CHECK(std::abs(exact.r2 - 1.0) < 1e-9);

  const ThermalFit poisson = effective_theta(distribution(make_coherent({std::sqrt(10.0), 0.0}, 60)));
  CHECK(poisson.r2 < 0.95);

  CHECK_THROWS_AS(effective_theta(distribution(make_fock(3, 10))), FitError);
}

TEST_CASE("effective alpha") {
  CHECK(effective_alpha(distribution(make_coherent({std::sqrt(1000.0), 0.0}, 1300))) ==
        doctest::Approx(std::sqrt(1000.0)).epsilon(1e-6));
  CHECK(effective_alpha(distribution(make_vacuum(4))) == 0.0);
  CHECK(effective_alpha(distribution(make_fock(9, 12))) == doctest::Approx(3.0));
}

TEST_CASE("Bessel values against the standard library") {
  for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 17.3, 60.0}) {
    const auto j = bessel_j_sequence(40, x);
    for (int k = 0; k <= 40; ++k) {
      const double ref = std::cyl_bessel_j(static_cast<double>(k), x);
      CHECK(std::abs(j[k] - ref) <= 1e-12 * std::max(1.0, std::abs(ref)) + 1e-300);
    }
  }
  // high orders where the values underflow towards zero
  const auto far = bessel_j_sequence(300, 3.0);
  CHECK(far[300] >= 0.0);
  CHECK(far[300] < 1e-300);
  CHECK(far[50] == doctest::Approx(std::cyl_bessel_j(50.0, 3.0)).epsilon(1e-10));
}

TEST_CASE("Bessel reference probabilities") {
  CHECK(bessel_reference(0, 0.0) == 1.0);
  CHECK(bessel_reference(3, 0.0) == 0.0);
  CHECK(bessel_reference(-2, 0.7) == doctest::Approx(bessel_reference(2, 0.7)));
  for (double x : {0.5, 2.0, 5.0}) {
    double total = 0.0;
    for (int k = -200; k <= 200; ++k) total += bessel_reference(k, x / 2.0);
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
}

TEST_CASE("peak counting") {
  CHECK(peak_count(distribution(make_coherent({std::sqrt(10.0), 0.0}, 40))) == 1);
  CHECK(peak_count(distribution(make_fock(5, 10))) == 1);
  CHECK(peak_count(distribution(make_fock(0, 10))) == 1);
  CHECK(peak_count(distribution(make_displaced_fock(2, {3.0, 0.0}, 80))) == 3);
  CHECK(peak_count(distribution(make_displaced_fock(4, {0.0, 3.0}, 90))) == 5);
  const std::vector<double> ripple{0.1, 0.5, 0.4999, 0.49995, 0.3, 0.0};
  CHECK(peak_count(ripple) == 1);
  CHECK(peak_count(std::vector<double>{0.3, 0.3, 0.4}) == 1);
  CHECK(peak_count(std::vector<double>{0.1, 0.4, 0.4, 0.1}) == 1);
  CHECK_THROWS_AS(peak_count(ripple, 0.0), DomainError);
}

TEST_CASE("fidelity") {
  const PhotonPure a = make_coherent({1.0, 0.0}, 40);
  const PhotonPure b = make_coherent({1.2, 0.0}, 40);
  CHECK(fidelity(a, a) == doctest::Approx(1.0));
  CHECK(fidelity(make_fock(0, 4), make_fock(1, 4)) == 0.0);
  CHECK(fidelity(a, b) == doctest::Approx(std::exp(-0.04)).epsilon(1e-12));
  CHECK(fidelity(a, b) == doctest::Approx(fidelity(b, a)));
  CHECK(fidelity(a, to_density(b)) == doctest::Approx(std::exp(-0.04)).epsilon(1e-12));
  CHECK(fidelity(to_density(a), to_density(b)) == doctest::Approx(std::exp(-0.04)).epsilon(1e-8));

  const PhotonDensity t1 = make_thermal(0.7, 60);
  const PhotonDensity t2 = make_thermal(0.9, 60);
  // commuting states: (sum_n sqrt(p_n q_n))^2
  double overlap = 0.0;
  const auto p = distribution(t1), q = distribution(t2);
  for (std::size_t n = 0; n < p.size(); ++n) overlap += std::sqrt(p[n] * q[n]);
  CHECK(fidelity(t1, t2) == doctest::Approx(overlap * overlap).epsilon(1e-9));
  CHECK(fidelity(t1, t2) == doctest::Approx(fidelity(t2, t1)).epsilon(1e-9));
  CHECK(fidelity(t1, t1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(fidelity(make_fock(0, 3), make_fock(0, 4)), TruncationError);
}

TEST_CASE("stats report") {
  const StatsReport s = compute_stats(geometric(0.5, 80));
  CHECK(s.mean_n == doctest::Approx(1.0 / std::expm1(0.5)).epsilon(1e-9));
  REQUIRE(s.mandel_q);
  CHECK(*s.mandel_q == doctest::Approx(s.mean_n).epsilon(1e-6));
  REQUIRE(s.effective_theta);
  CHECK(*s.effective_theta == doctest::Approx(0.5));
  CHECK(s.peak_count == 1);

  const StatsReport v = compute_stats(distribution(make_vacuum(3)));
  CHECK_FALSE(v.mandel_q);
  CHECK_FALSE(v.effective_theta);
  CHECK(v.effective_alpha == 0.0);
}
