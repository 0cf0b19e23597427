// Acceptance checks 1-10. Run with a criterion number to execute one check,
// or without arguments to run all of them. Each check prints one line:
//   PASS|FAIL criterion N: <summary>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "qpinem/analysis.hpp"
#include "qpinem/chain.hpp"
#include "qpinem/channel.hpp"
#include "qpinem/cli/commands.hpp"
#include "qpinem/scattering.hpp"

using namespace qpinem;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

const ElectronPure kDelta = make_delta(0, {0, 0});
const CombElectron kComb30{14, 15, {0.0, -1.0}};

// 1. Kernel against exp(g a^dag - g* a), oracle generator truncated at n_max + 140.
Outcome kernel_vs_expm() {
  constexpr int kNMax = 60;
  constexpr int kOracleDim = kNMax + 140;
  constexpr double kTol = 1e-8;
  double worst = 0.0;
  for (double gm : {0.1, 0.25, 1.0}) {
    const Complex g{0.0, gm};
    Matrix a = Matrix::Zero(kOracleDim + 1, kOracleDim + 1);
    for (int n = 1; n <= kOracleDim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    const Matrix oracle = (g * a.adjoint() - std::conj(g) * a).exp().topLeftCorner(kNMax + 1, kNMax + 1);
    const ScatteringKernel s(Coupling{g}, kNMax);
    worst = std::max(worst, (s.matrix() - oracle).cwiseAbs().maxCoeff());
  }
  return {worst <= kTol, fmt("kernel vs matrix exponential, g in {0.1i,0.25i,1i}: max|diff| = %.3g (tol %.0e)", worst, kTol)};
}

// 2. Pure-state scattering of delta x coherent(sqrt 50) against the closed forms.
Outcome closed_form_coefficients() {
  constexpr int kNMax = 120;
  constexpr double kTol = 1e-8;
  const Complex alpha{std::sqrt(50.0), 0.0};
  const Coupling g{{0.0, 0.25}};
  const LadderWindow w{-kNMax, kNMax};
  const JointPure out =
      evolve_pure(JointPure::product(kDelta, make_coherent(alpha, kNMax), w), ScatteringKernel(g, kNMax));
  double worst_coeff = 0.0;
  for (int k = w.lo; k <= w.hi; ++k) {
    for (int n = 0; n <= kNMax; ++n) {
      worst_coeff = std::max(worst_coeff, std::abs(out(k, n) - coherent_delta_coeffs(alpha, g, k, n)));
    }
  }
  double worst_slice = 0.0;
  for (int k : {-2, 2}) {
    const Vector diff = out.postselect(k).amps() - postselected_photon_state(alpha, g, k, kNMax).amps();
    worst_slice = std::max(worst_slice, diff.cwiseAbs().maxCoeff());
  }
  return {worst_coeff <= kTol && worst_slice <= kTol,
          fmt("closed-form coefficients: max|diff| = %.3g, k=+-2 slices: max|diff| = %.3g (tol %.0e)", worst_coeff,
              worst_slice, kTol)};
}

// 3. Semiclassical limit at the reduced scale |alpha| = 50, g_Qu = 0.01i (g = 0.5).
Outcome bessel_limit() {
  constexpr int kNMax = 3000;
  constexpr double kTol = 1e-3;
  const Complex alpha{50.0, 0.0};
  const Coupling g{{0.0, 0.01}};
  const LadderWindow w{-30, 30};
  const JointPure out =
      evolve_pure(JointPure::product(kDelta, make_coherent(alpha, kNMax), w), ScatteringKernel(g, kNMax));
  const auto pk = out.electron_marginal();
  double worst = 0.0;
  for (int k = -10; k <= 10; ++k) worst = std::max(worst, std::abs(pk[k - w.lo] - bessel_reference(k, 0.5)));
  return {worst <= kTol, fmt("electron marginal vs J_k^2(1), |k| <= 10 at |alpha|=50: max dev = %.3g (tol %.0e)", worst, kTol)};
}

// 4. Fock builder first-passage statistics.
Outcome fock_builder() {
  constexpr int kRuns = 200;
  constexpr int kGoal = 100;
  constexpr int kNMax = 223;
  constexpr double kRelTol = 0.10;
  constexpr double kPurityTol = 1e-10;
  const auto runs = run_fock_builder_ensemble(Coupling{{0.0, 1.0}}, kGoal, kNMax, 1, kRuns, 1000, 1);
  double sum = 0.0;
  int incomplete = 0;
  int non_fock = 0;
  double worst_purity = 0.0;
  for (const auto& t : runs) {
    if (!t.hitting_step) {
      ++incomplete;
      continue;
    }
    sum += *t.hitting_step;
    for (const auto& r : t.steps) {
      worst_purity = std::max(worst_purity, std::abs(r.purity - 1.0));
      const auto nonzero = std::count_if(r.distribution.begin(), r.distribution.end(), [](double p) { return p > 1e-12; });
      if (nonzero != 1) ++non_fock;
    }
  }
  const double mean = incomplete == kRuns ? 0.0 : sum / (kRuns - incomplete);
  const bool pass = incomplete == 0 && std::abs(mean - kGoal) <= kRelTol * kGoal && worst_purity <= kPurityTol && non_fock == 0;
  return {pass, fmt("Fock builder g=1i, goal 100, %d runs: mean hitting step %.2f (target 100 +- 10%%), "
                    "max|purity-1| = %.2g, non-Fock states %d, incomplete %d",
                    kRuns, mean, worst_purity, non_fock, incomplete)};
}

// 5. Mean photon gain per delta-electron interaction, two independent paths.
Outcome mean_gain() {
  constexpr double kTol = 1e-8;
  constexpr int kNMax = 160;
  double worst_sum = 0.0;
  double worst_channel = 0.0;
  for (double gm : {0.1, 1.0}) {
    const Coupling g{{0.0, gm}};
    const ScatteringKernel s(g, kNMax);
    for (int n : {0, 1, 5, 20}) {
      double mean = 0.0;
      for (int m = 0; m <= kNMax; ++m) mean += m * fock_transition_prob(n, m, g);
      worst_sum = std::max(worst_sum, std::abs(mean - n - gm * gm));
      const TraceOutResult r = step_traceout(to_density(make_fock(n, kNMax)), kDelta, s);
      worst_channel = std::max(worst_channel, std::abs(mean_photon(r.state) - n - gm * gm));
    }
  }
  return {worst_sum <= kTol && worst_channel <= kTol,
          fmt("mean gain |g|^2: transition sums max dev %.3g, Kraus channel max dev %.3g (tol %.0e)", worst_sum,
              worst_channel, kTol)};
}

// 6. Thermalization of coherent(sqrt 10) under a trace-out chain, g = 0.1i.
Outcome thermalization() {
  constexpr int kNMax = 128;
  constexpr int kCap = 5000;
  constexpr double kR2 = 0.999;
  constexpr double kRel = 0.02;
  constexpr int kWindow = 100;
  const Trajectory t =
      run_scenario(make_coherent({std::sqrt(10.0), 0.0}, kNMax), {StepPolicy{}}, kCap, Coupling{{0.0, 0.1}}, 0);
  double best_ratio = 0.0;
  for (const auto& r : t.steps) {
    if (r.stats.mandel_q) best_ratio = std::max(best_ratio, *r.stats.mandel_q / r.stats.mean_n);
  }
  const auto converged = thermal_convergence_step(t, kRel, kWindow);
  if (!converged) {
    const auto& last = t.steps.back();
    return {false, fmt("no convergence within %d steps: max Q/<n> = %.4f (need >= %.2f for %d steps); at step %d "
                       "<n> = %.2f, r2 = %.5f, leakage %.2g",
                       kCap, best_ratio, 1.0 - kRel, kWindow, last.step, last.stats.mean_n,
                       last.stats.fit_r2.value_or(0.0), t.total_leakage)};
  }
  const auto& r = t.steps[*converged];
  const double theta = r.stats.effective_theta.value_or(0.0);
  const double thermal_mean = 1.0 / std::expm1(theta);
  const bool r2_ok = r.stats.fit_r2.value_or(0.0) >= kR2;
  const bool theta_ok = std::abs(thermal_mean - r.stats.mean_n) <= kRel * r.stats.mean_n;
  return {r2_ok && theta_ok, fmt("converged at step %d: r2 = %.5f (min %.3f), <n> = %.3f vs 1/(e^theta-1) = %.3f (tol 2%%)",
                                 *converged, r.stats.fit_r2.value_or(0.0), kR2, r.stats.mean_n, thermal_mean)};
}

// 7. Comb displacement at desk scale.
Outcome comb_displacement() {
  constexpr int kNMax = 256;
  constexpr int kSteps = 100;
  constexpr double kTheory = 0.0158;
  constexpr double kRelTol = 0.15;
  constexpr double kMaxQ = 0.05;
  RunOptions opt;
  opt.mode = ChannelMode::ensemble;
  const Trajectory t = run_scenario(make_coherent({10.0, 0.0}, kNMax), {StepPolicy{kComb30, TraceOut{}, std::nullopt}},
                                    kSteps, Coupling{{0.0, 0.0158}}, 0, opt);
  std::vector<double> x, y;
  double q_max = -1.0;
  for (const auto& r : t.steps) {
    x.push_back(r.step);
    y.push_back(r.stats.effective_alpha);
    q_max = std::max(q_max, r.stats.mandel_q.value_or(1.0));
  }
  const LinearFit fit = fit_line(x, y);
  const bool pass = std::abs(fit.slope - kTheory) <= kRelTol * kTheory && q_max < kMaxQ;
  return {pass, fmt("alpha_0 = 10, 30-tooth comb, 100 steps: slope %.6f vs %.4f (tol 15%%, r2 %.6f), max Q %.4g (< %.2f)",
                    fit.slope, kTheory, fit.r2, q_max, kMaxQ)};
}

// 8. Displaced Fock states from a 30-tooth comb.
Outcome displaced_fock() {
  constexpr int kNMax = 128;
  constexpr int kSteps = 6;
  constexpr double kMinFidelity = 0.98;
  bool pass = true;
  std::string detail = "n_i: fidelity/peaks =";
  for (int n_i : {1, 2, 4}) {
    const DisplacedFockResult r = run_displaced_fock(n_i, Coupling{{0.0, 0.5}}, kComb30, kSteps, kNMax);
    pass = pass && r.fidelity >= kMinFidelity && r.peak_count == n_i + 1;
    detail += fmt(" %d: %.4f/%d", n_i, r.fidelity, r.peak_count);
  }
  detail += fmt(" (need fidelity >= %.2f and n_i+1 peaks)", kMinFidelity);
  return {pass, detail};
}

// 9. Channel laws: completeness, trace preservation, loss decay.
Outcome channel_laws() {
  constexpr double kTol = 1e-6;
  constexpr double kDecayTol = 1e-8;
  double completeness = 0.0;
  const ScatteringKernel s60(Coupling{{0.0, 0.25}}, 60);
  for (const ElectronPure& e : {kDelta, make_comb(14, 15, {0.0, -1.0})}) {
    completeness = std::max(completeness, kraus_operators(e, s60).completeness_defect(s60.interior_limit()));
  }

  const PhotonDensity c10 = to_density(make_coherent({std::sqrt(10.0), 0.0}, 80));
  const ScatteringKernel s80(Coupling{{0.0, 0.1}}, 80);
  double trace_defect = 0.0;
  for (const ElectronPure& e : {kDelta, make_comb(14, 15, {0.0, -1.0})}) {
    trace_defect = std::max(trace_defect, std::abs(step_traceout(c10, e, s80).leakage));
  }
  for (LossMode mode : {LossMode::euler, LossMode::exact_damping}) {
    trace_defect = std::max(trace_defect, std::abs(lindblad_step(c10, 0.05, 4, mode).state.discarded_weight()));
  }

  const double decayed = mean_photon(lindblad_step(c10, 0.05, 1, LossMode::exact_damping).state);
  double decay_err = std::abs(decayed - 10.0 * std::exp(-0.1));
  const PhotonDensity th = make_thermal(0.4, 200);
  const double th_out = mean_photon(lindblad_step(th, 0.05, 1, LossMode::exact_damping).state);
  decay_err = std::max(decay_err, std::abs(th_out - mean_photon(th) * std::exp(-0.1)));

  const bool pass = completeness <= kTol && trace_defect <= kTol && decay_err <= kDecayTol;
  return {pass, fmt("completeness defect %.2g, trace defect %.2g (tol %.0e); exact damping <n> decay error %.2g (tol %.0e)",
                    completeness, trace_defect, kTol, decay_err, kDecayTol)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 10. Figure subcommands rerun into fresh directories give identical bytes.
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "qpinem_acceptance_determinism";
  fs::remove_all(root);
  struct Job {
    std::string which;
    std::optional<int> runs, steps;
  };
  const std::vector<Job> jobs{{"fig2", {}, {}}, {"fig3", 20, {}}, {"fig4", {}, 300}, {"fig5", {}, 10}, {"fig6", {}, {}}};
  int files = 0;
  std::string mismatch;
  std::ostringstream log, err;
  for (const auto& job : jobs) {
    for (const char* pass : {"a", "b"}) {
      cli::FigureOptions o;
      o.which = job.which;
      o.seed = 7;
      o.runs = job.runs;
      o.steps = job.steps;
      o.out_dir = root / job.which / pass;
      const int code = cli::cmd_figure(o, log, err);
      if (code != cli::kExitOk) return {false, job.which + " exited with code " + std::to_string(code) + ": " + err.str()};
    }
    for (const auto& entry : fs::directory_iterator(root / job.which / "a")) {
      const fs::path other = root / job.which / "b" / entry.path().filename();
      ++files;
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) mismatch += " " + job.which + "/" + entry.path().filename().string();
    }
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  if (!mismatch.empty()) return {false, "files differ on rerun:" + mismatch};
  return {files > 0, fmt("fig2..fig6 rerun with seed 7: %d output files byte-identical", files)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> checks{kernel_vs_expm, closed_form_coefficients, bessel_limit,
                                                     fock_builder,   mean_gain,                thermalization,
                                                     comb_displacement, displaced_fock,       channel_laws,
                                                     determinism};
  std::vector<int> ids;
  if (argc > 1) {
    for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  } else {
    for (int i = 1; i <= static_cast<int>(checks.size()); ++i) ids.push_back(i);
  }
  int failures = 0;
  for (int id : ids) {
    if (id < 1 || id > static_cast<int>(checks.size())) {
      std::cout << "FAIL criterion " << id << ": no such criterion\n";
      ++failures;
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[id - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << fmt(" [%.1f s]", secs) << '\n';
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
