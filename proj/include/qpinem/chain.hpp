#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "qpinem/analysis.hpp"
#include "qpinem/channel.hpp"
#include "qpinem/fockspace.hpp"
#include "qpinem/scattering.hpp"

namespace qpinem {

struct DeltaElectron {
  int k0 = 0;
};

struct CombElectron {
  int K = 14;
  int K_prime = 15;
  Complex beta{0.0, -1.0};
};

using ElectronSpec = std::variant<DeltaElectron, CombElectron>;

ElectronPure make_electron(const ElectronSpec& spec);

struct TraceOut {};
struct PostSelect {
  int k = 0;
};
struct Sample {};

using Measurement = std::variant<TraceOut, PostSelect, Sample>;

enum class LossMode { euler, exact_damping };

struct LossSpec {
  double dt_over_tau = 0.0;
  int substeps = 1;
  LossMode mode = LossMode::euler;
};

/// What happens at one interaction: which electron arrives, what is done with
/// it afterwards, and the optional cavity loss before the next arrival.
struct StepPolicy {
  ElectronSpec electron = DeltaElectron{};
  Measurement measurement = TraceOut{};
  std::optional<LossSpec> loss;
};

struct TraceOutResult {
  PhotonDensity state;
  double leakage;  // 1 - trace before renormalization
};

struct PostSelectResult {
  PhotonDensity state;
  double probability;
};

struct SampleResult {
  PhotonDensity state;
  int k;
  double probability;
  double leakage;  // 1 - sum of outcome probabilities
};

struct LossResult {
  PhotonDensity state;
  double min_eigenvalue;     // only evaluated in euler mode, else 0
  bool positivity_warning;   // min_eigenvalue < -1e-6
};

TraceOutResult step_traceout(const PhotonDensity& rho, const ElectronChannel& channel);
TraceOutResult step_traceout(const PhotonDensity& rho, const ElectronPure& electron,
                             const ScatteringKernel& kernel);

/// Throws ZeroProbabilityError if the branch probability is below 1e-14.
PostSelectResult step_postselect(const PhotonDensity& rho, const ElectronChannel& channel, int k);
PostSelectResult step_postselect(const PhotonDensity& rho, const ElectronPure& electron,
                                 const ScatteringKernel& kernel, int k);

SampleResult step_sample(const PhotonDensity& rho, const ElectronChannel& channel,
                         std::mt19937_64& rng);
SampleResult step_sample(const PhotonDensity& rho, const ElectronPure& electron,
                         const ScatteringKernel& kernel, std::mt19937_64& rng);

/**
 * Cavity loss between electrons.
 *
 * euler: rho -= h (N rho + rho N - 2 a rho a^dag) with h = dt_over_tau / substeps,
 * repeated `substeps` times. Trace is preserved exactly on the truncated space.
 *
 * exact_damping: amplitude damping with survival eta = exp(-2 dt_over_tau);
 * `substeps` has no effect.
 */
LossResult lindblad_step(const PhotonDensity& rho, double dt_over_tau, int substeps, LossMode mode);

struct StepRecord {
  int step = 0;
  std::optional<int> measured_k;
  std::optional<double> branch_probability;
  std::vector<double> distribution;
  StatsReport stats;
  double purity = 1.0;
  double leakage = 0.0;  // cumulative
  bool positivity_warning = false;
};

struct Trajectory {
  std::vector<StepRecord> steps;
  PhotonState final_state;
  bool complete = true;
  std::optional<int> hitting_step;
  double total_leakage = 0.0;
};

enum class ChannelMode { density, ensemble };

struct RunOptions {
  ChannelMode mode = ChannelMode::density;
  /// In ensemble mode, eigencomponents are kept until they cover 1 - cutoff of the trace.
  double ensemble_cutoff = 1e-8;
  /// Restricts electron outcomes; the default keeps every reachable outcome.
  std::optional<LadderWindow> outcome_window;
};

/// Policies are applied cyclically: step m uses policies[(m - 1) % size].
Trajectory run_scenario(const PhotonState& initial, const std::vector<StepPolicy>& policies,
                        int n_steps, Coupling g, std::uint64_t seed, const RunOptions& options = {});

/// n_goal + |g|^2 + 8|g|(sqrt(2 n_goal + 1) + 1) <= n_max.
bool fock_builder_fits(Coupling g, int n_goal, int n_max);

/// Vacuum start, delta electrons, sampled outcomes, stopping at the first step
/// whose Fock index reaches n_goal. `complete` is false if max_steps ran out.
/// Throws TruncationError if n_max leaves no room for the overshoot tail.
Trajectory run_fock_builder(Coupling g, int n_goal, int n_max, std::uint64_t seed, int max_steps);

/// Independent runs seeded base_seed + i; results are in run order regardless
/// of `threads`.
std::vector<Trajectory> run_fock_builder_ensemble(Coupling g, int n_goal, int n_max,
                                                  std::uint64_t base_seed, int runs,
                                                  int max_steps, int threads = 1);

struct DisplacedFockResult {
  Trajectory trajectory;
  PhotonPure target;
  double fidelity;
  int peak_count;
};

/// Trace-out chain from |n_i> with comb electrons; the result is compared
/// with D(n_steps * beta * g_Qu)|n_i>.
DisplacedFockResult run_displaced_fock(int n_i, Coupling g, const CombElectron& comb, int n_steps,
                                       int n_max);

/// First step s such that |Q - <n>| <= rel_tol * <n> holds for every step in
/// [s - window + 1, s]. Returns nullopt if that never happens.
std::optional<int> thermal_convergence_step(const Trajectory& traj, double rel_tol = 0.02,
                                            int window = 100);

}  // namespace qpinem
