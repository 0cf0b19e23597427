#include "qpinem/chain.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "qpinem/errors.hpp"

namespace qpinem {

namespace {

constexpr double kMinBranchProbability = 1e-14;
constexpr double kPositivityFloor = -1e-6;

// Uniform double in [0, 1) from the top 53 bits; fixed across standard libraries.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

PhotonDensity as_density(const PhotonState& s) {
  if (const auto* pure = std::get_if<PhotonPure>(&s)) return to_density(*pure);
  return std::get<PhotonDensity>(s);
}

PhotonDensity renormalized(Matrix m) {
  m = 0.5 * (m + m.adjoint()).eval();
  return PhotonDensity::from_matrix(std::move(m));
}

StepRecord make_record(int step, const PhotonDensity& rho, double leakage) {
  StepRecord r;
  r.step = step;
  r.distribution = distribution(rho);
  r.stats = compute_stats(r.distribution);
  r.purity = purity(rho);
  r.leakage = leakage;
  return r;
}

int fock_index(const std::vector<double>& p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

}  // namespace

ElectronPure make_electron(const ElectronSpec& spec) {
  if (const auto* d = std::get_if<DeltaElectron>(&spec)) {
    return make_delta(d->k0, LadderWindow{d->k0, d->k0});
  }
  const auto& c = std::get<CombElectron>(spec);
  return make_comb(c.K, c.K_prime, c.beta);
}

TraceOutResult step_traceout(const PhotonDensity& rho, const ElectronChannel& channel) {
  PhotonDensity out = renormalized(channel.apply_traceout(rho.matrix()));
  const double leak = out.discarded_weight();
  return {std::move(out), leak};
}

TraceOutResult step_traceout(const PhotonDensity& rho, const ElectronPure& electron,
                             const ScatteringKernel& kernel) {
  return step_traceout(rho, ElectronChannel(electron, kernel));
}

PostSelectResult step_postselect(const PhotonDensity& rho, const ElectronChannel& channel, int k) {
  Matrix branch = channel.apply_branch(rho.matrix(), k);
  const double p = branch.trace().real();
  if (!(p >= kMinBranchProbability)) {
    throw ZeroProbabilityError("outcome k=" + std::to_string(k) + " has probability " +
                               std::to_string(p));
  }
  return {renormalized(std::move(branch)), p};
}

PostSelectResult step_postselect(const PhotonDensity& rho, const ElectronPure& electron,
                                 const ScatteringKernel& kernel, int k) {
  return step_postselect(rho, ElectronChannel(electron, kernel), k);
}

SampleResult step_sample(const PhotonDensity& rho, const ElectronChannel& channel,
                         std::mt19937_64& rng) {
  const std::vector<double> p = channel.outcome_probabilities(rho.matrix());
  CompensatedSum total;
  for (double v : p) total.add(v);
  const double sum = total.value();
  if (!(sum > 0.0)) throw ZeroProbabilityError("every electron outcome has zero probability");

  const double u = uniform01(rng) * sum;
  double running = 0.0;
  std::size_t pick = p.size() - 1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    running += p[i];
    if (u < running && p[i] > 0.0) {
      pick = i;
      break;
    }
  }
  while (p[pick] == 0.0 && pick > 0) --pick;

  const int k = channel.outcomes().lo + static_cast<int>(pick);
  Matrix branch = channel.apply_branch(rho.matrix(), k);
  return {renormalized(std::move(branch)), k, p[pick] / sum, std::max(0.0, 1.0 - sum)};
}

SampleResult step_sample(const PhotonDensity& rho, const ElectronPure& electron,
                         const ScatteringKernel& kernel, std::mt19937_64& rng) {
  return step_sample(rho, ElectronChannel(electron, kernel), rng);
}

LossResult lindblad_step(const PhotonDensity& rho, double dt_over_tau, int substeps, LossMode mode) {
  if (!(dt_over_tau >= 0.0)) throw DomainError("dt_over_tau must be >= 0");
  if (substeps < 1) throw DomainError("substeps must be >= 1");
  if (dt_over_tau == 0.0) return {rho, 0.0, false};

  const int dim = rho.n_max() + 1;
  Matrix m = rho.matrix();

  if (mode == LossMode::exact_damping) {
    const double eta = std::exp(-2.0 * dt_over_tau);
    const double log_eta = -2.0 * dt_over_tau;
    const double log_loss = std::log1p(-eta);
    Matrix out = Matrix::Zero(dim, dim);
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) {
        Complex acc{0.0, 0.0};
        for (int l = 0; a + l < dim && b + l < dim; ++l) {
          const double log_w = 0.5 * (log_binomial(a + l, l) + log_binomial(b + l, l)) +
                               0.5 * (a + b) * log_eta + l * log_loss;
          acc += std::exp(log_w) * m(a + l, b + l);
        }
        out(a, b) = acc;
      }
    }
    return {renormalized(std::move(out)), 0.0, false};
  }

  const double h = dt_over_tau / substeps;
  Matrix next(dim, dim);
  for (int s = 0; s < substeps; ++s) {
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) {
        Complex v = (1.0 - h * (a + b)) * m(a, b);
        if (a + 1 < dim && b + 1 < dim) {
          v += 2.0 * h * std::sqrt(static_cast<double>(a + 1) * (b + 1)) * m(a + 1, b + 1);
        }
        next(a, b) = v;
      }
    }
    m.swap(next);
  }
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  return {PhotonDensity::from_matrix(std::move(m)), min_eig, min_eig < kPositivityFloor};
}

namespace {

// Trace-out via the dominant eigencomponents of rho: each kept |v> is pushed
// through the channel as a pure state and the branches are summed back.
TraceOutResult traceout_ensemble(const PhotonDensity& rho, const ElectronChannel& channel,
                                 double cutoff) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(rho.matrix());
  const Eigen::VectorXd& w = eig.eigenvalues();
  const int dim = static_cast<int>(w.size());
  Matrix acc = Matrix::Zero(dim, dim);
  double covered = 0.0;
  for (int i = dim - 1; i >= 0 && covered < 1.0 - cutoff; --i) {
    if (!(w(i) > 0.0)) break;
    covered += w(i);
    const Matrix c = channel.joint_amplitudes(eig.eigenvectors().col(i));
    acc.noalias() += w(i) * (c.transpose() * c.conjugate());
  }
  PhotonDensity out = renormalized(std::move(acc));
  const double leak = out.discarded_weight();
  return {std::move(out), leak};
}

}  // namespace

Trajectory run_scenario(const PhotonState& initial, const std::vector<StepPolicy>& policies,
                        int n_steps, Coupling g, std::uint64_t seed, const RunOptions& options) {
  if (n_steps < 0) throw DomainError("n_steps must be >= 0");
  if (n_steps > 0 && policies.empty()) throw DomainError("policy sequence is empty");

  PhotonDensity rho = as_density(initial);
  std::vector<StepRecord> records;
  records.reserve(n_steps + 1);
  double leakage = 0.0;
  records.push_back(make_record(0, rho, leakage));

  if (n_steps > 0) {
    const ScatteringKernel kernel(g, rho.n_max());
    std::vector<ElectronChannel> channels;
    channels.reserve(policies.size());
    for (const auto& policy : policies) {
      channels.emplace_back(make_electron(policy.electron), kernel, options.outcome_window);
      if (const auto* ps = std::get_if<PostSelect>(&policy.measurement)) {
        if (!channels.back().outcomes().contains(ps->k)) {
          throw DomainError("post-selected outcome " + std::to_string(ps->k) +
                            " outside the outcome window");
        }
      }
    }
    std::mt19937_64 rng(seed);

    for (int step = 1; step <= n_steps; ++step) {
      const std::size_t idx = static_cast<std::size_t>(step - 1) % policies.size();
      const StepPolicy& policy = policies[idx];
      const ElectronChannel& channel = channels[idx];
      std::optional<int> measured;
      std::optional<double> probability;

      if (std::holds_alternative<TraceOut>(policy.measurement)) {
        TraceOutResult r = options.mode == ChannelMode::ensemble
                               ? traceout_ensemble(rho, channel, options.ensemble_cutoff)
                               : step_traceout(rho, channel);
        rho = std::move(r.state);
        leakage += r.leakage;
      } else if (const auto* ps = std::get_if<PostSelect>(&policy.measurement)) {
        PostSelectResult r = step_postselect(rho, channel, ps->k);
        rho = std::move(r.state);
        measured = ps->k;
        probability = r.probability;
      } else {
        SampleResult r = step_sample(rho, channel, rng);
        rho = std::move(r.state);
        measured = r.k;
        probability = r.probability;
        leakage += r.leakage;
      }

      bool warning = false;
      if (policy.loss) {
        LossResult r = lindblad_step(rho, policy.loss->dt_over_tau, policy.loss->substeps,
                                     policy.loss->mode);
        rho = std::move(r.state);
        warning = r.positivity_warning;
      }

      StepRecord rec = make_record(step, rho, leakage);
      rec.measured_k = measured;
      rec.branch_probability = probability;
      rec.positivity_warning = warning;
      records.push_back(std::move(rec));
    }
  }

  return Trajectory{std::move(records), PhotonState{std::move(rho)}, true, std::nullopt, leakage};
}

bool fock_builder_fits(Coupling g, int n_goal, int n_max) {
  const double m = g.magnitude();
  return n_goal + m * m + 8.0 * m * (std::sqrt(2.0 * n_goal + 1.0) + 1.0) <= n_max;
}

namespace {

Trajectory fock_builder_run(const ScatteringKernel& kernel, const ElectronChannel& channel,
                            int n_goal, std::uint64_t seed, int max_steps) {
  PhotonDensity rho = to_density(make_vacuum(kernel.n_max()));
  std::vector<StepRecord> records;
  double leakage = 0.0;
  records.push_back(make_record(0, rho, leakage));
  std::optional<int> hit;
  if (n_goal <= 0) hit = 0;

  std::mt19937_64 rng(seed);
  for (int step = 1; !hit && step <= max_steps; ++step) {
    SampleResult r = step_sample(rho, channel, rng);
    rho = std::move(r.state);
    leakage += r.leakage;
    StepRecord rec = make_record(step, rho, leakage);
    rec.measured_k = r.k;
    rec.branch_probability = r.probability;
    if (fock_index(rec.distribution) >= n_goal) hit = step;
    records.push_back(std::move(rec));
  }

  const bool complete = hit.has_value();
  return Trajectory{std::move(records), PhotonState{std::move(rho)}, complete, hit, leakage};
}

void require_fock_builder_fits(Coupling g, int n_goal, int n_max) {
  if (n_goal < 0) throw DomainError("n_goal must be >= 0");
  if (!fock_builder_fits(g, n_goal, n_max)) {
    throw TruncationError("n_max=" + std::to_string(n_max) + " too small for n_goal=" +
                          std::to_string(n_goal));
  }
}

}  // namespace

Trajectory run_fock_builder(Coupling g, int n_goal, int n_max, std::uint64_t seed, int max_steps) {
  require_fock_builder_fits(g, n_goal, n_max);
  const ScatteringKernel kernel(g, n_max);
  const ElectronChannel channel(make_delta(0, LadderWindow{0, 0}), kernel);
  return fock_builder_run(kernel, channel, n_goal, seed, max_steps);
}

std::vector<Trajectory> run_fock_builder_ensemble(Coupling g, int n_goal, int n_max,
                                                  std::uint64_t base_seed, int runs,
                                                  int max_steps, int threads) {
  require_fock_builder_fits(g, n_goal, n_max);
  if (runs < 0) throw DomainError("runs must be >= 0");
  const ScatteringKernel kernel(g, n_max);
  const ElectronChannel channel(make_delta(0, LadderWindow{0, 0}), kernel);

  std::vector<std::optional<Trajectory>> slots(runs);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < runs; i = next++) {
      slots[i] = fock_builder_run(kernel, channel, n_goal, base_seed + static_cast<std::uint64_t>(i),
                                  max_steps);
    }
  };
  const int n_threads = std::clamp(threads, 1, std::max(1, runs));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<Trajectory> out;
  out.reserve(runs);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

DisplacedFockResult run_displaced_fock(int n_i, Coupling g, const CombElectron& comb, int n_steps,
                                       int n_max) {
  if (n_steps < 0) throw DomainError("n_steps must be >= 0");
  const Complex alpha = static_cast<double>(n_steps) * comb.beta * g.g_qu;
  PhotonPure target = make_displaced_fock(n_i, alpha, n_max);
  const std::vector<StepPolicy> policies{StepPolicy{comb, TraceOut{}, std::nullopt}};
  Trajectory traj = run_scenario(make_fock(n_i, n_max), policies, n_steps, g, 0);
  const auto& rho = std::get<PhotonDensity>(traj.final_state);
  const double f = fidelity(target, rho);
  const int peaks = traj.steps.back().stats.peak_count;
  return {std::move(traj), std::move(target), f, peaks};
}

std::optional<int> thermal_convergence_step(const Trajectory& traj, double rel_tol, int window) {
  int run = 0;
  for (const auto& rec : traj.steps) {
    const double mean = rec.stats.mean_n;
    const bool ok = rec.stats.mandel_q && mean > 0.0 &&
                    std::abs(*rec.stats.mandel_q - mean) <= rel_tol * mean;
    run = ok ? run + 1 : 0;
    if (run >= window) return rec.step;
  }
  return std::nullopt;
}

}  // namespace qpinem
