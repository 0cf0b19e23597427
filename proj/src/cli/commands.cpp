#include "qpinem/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "qpinem/analysis.hpp"
#include "qpinem/chain.hpp"
#include "qpinem/cli/config.hpp"
#include "qpinem/cli/output.hpp"
#include "qpinem/errors.hpp"
#include "qpinem/field.hpp"
#include "qpinem/scattering.hpp"

namespace qpinem::cli {

namespace {

namespace fs = std::filesystem;

int param_int(const Json& p, const char* key) {
  const Json& v = p.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(key, "expected an integer");
  return v.get<int>();
}

double param_real(const Json& p, const char* key) {
  const Json& v = p.at(key);
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}

Complex param_complex(const Json& p, const char* key) {
  const Json& v = p.at(key);
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(key, "expected [re, im]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

CombElectron param_comb(const Json& p) {
  const Json& c = p.at("comb");
  if (!c.is_object()) throw ConfigError("comb", "expected an object");
  CombElectron comb{param_int(c, "K"), param_int(c, "K_prime"), param_complex(c, "beta")};
  if (comb.K < 0 || comb.K_prime < 0) throw ConfigError("comb", "extents must be >= 0");
  if (std::abs(std::abs(comb.beta) - 1.0) > 1e-12) throw ConfigError("comb.beta", "|beta| must be 1");
  return comb;
}

Json comb_defaults() { return Json{{"K", 14}, {"K_prime", 15}, {"beta", Json::array({0.0, -1.0})}}; }

Json figure_defaults(const FigureOptions& o) {
  if (o.which == "fig2") {
    return Json{{"n_max", 120},
                {"alpha", Json::array({std::sqrt(50.0), 0.0})},
                {"g_qu", Json::array({0.0, 0.25})},
                {"postselect", Json::array({-2, 2})},
                {"jointmap_floor", 1e-16}};
  }
  if (o.which == "fig3") {
    return Json{{"n_max", 223},
                {"g_qu", Json::array({0.0, 1.0})},
                {"n_goal", 100},
                {"runs", o.runs.value_or(200)},
                {"max_steps", 1000},
                {"seed", o.seed.value_or(1)},
                {"example_runs", 2}};
  }
  if (o.which == "fig4") {
    return Json{{"n_max", 128},
                {"alpha", Json::array({std::sqrt(10.0), 0.0})},
                {"g_qu", Json::array({0.0, 0.1})},
                {"steps", o.steps.value_or(2000)},
                {"snapshot_every", 100}};
  }
  if (o.which == "fig5") {
    if (!(o.scale > 0.0 && o.scale <= 1.0)) throw ConfigError("scale", "must lie in (0, 1]");
    return Json{{"scale", o.scale},
                {"alpha", nullptr},
                {"n_max", nullptr},
                {"g_qu", Json::array({0.0, 0.0158})},
                {"comb", comb_defaults()},
                {"steps", o.steps.value_or(100)},
                {"channel_mode", "ensemble"},
                {"snapshot_every", 10}};
  }
  if (o.which == "fig6") {
    return Json{{"n_max", 128},
                {"n_i", Json::array({1, 2, 4})},
                {"g_qu", Json::array({0.0, 0.5})},
                {"comb", comb_defaults()},
                {"steps", o.steps.value_or(6)}};
  }
  throw ConfigError("figure", "unknown figure '" + o.which + "' (expected fig2..fig6)");
}

Metadata figure_meta(const std::string& which, const Json& params, double leakage,
                     std::optional<std::uint64_t> seed = std::nullopt) {
  return Metadata{"figure " + which, seed, params, leakage};
}

// Per-step photon distributions at every `every`-th step and the last one.
void write_distributions(const fs::path& path, const Trajectory& traj, int every, const Metadata& meta) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : traj.steps) {
    if (every > 0 && r.step % every != 0 && &r != &traj.steps.back()) continue;
    for (std::size_t n = 0; n < r.distribution.size(); ++n) {
      rows.push_back({std::to_string(r.step), std::to_string(n), format_real(r.distribution[n])});
    }
  }
  write_table(path, {"step", "n", "probability"}, rows, meta);
}

int figure2(const Json& p, const fs::path& out, std::ostream& log) {
  const int n_max = param_int(p, "n_max");
  const Complex alpha = param_complex(p, "alpha");
  const Coupling g{param_complex(p, "g_qu")};
  const LadderWindow window{-n_max, n_max};
  const ScatteringKernel kernel(g, n_max);
  const JointPure joint = evolve_pure(
      JointPure::product(make_delta(0, LadderWindow{0, 0}), make_coherent(alpha, n_max), window), kernel);
  const Metadata meta = figure_meta("fig2", p, joint.leaked_weight());

  write_jointmap(out / "jointmap.csv", joint, meta, param_real(p, "jointmap_floor"));

  std::vector<std::vector<std::string>> rows;
  const std::vector<double> pk = joint.electron_marginal();
  for (int k = window.lo; k <= window.hi; ++k) {
    rows.push_back({std::to_string(k), format_real(pk[k - window.lo])});
  }
  write_table(out / "electron_marginal.csv", {"k", "probability"}, rows, meta);
  write_state_snapshot(out / "initial_state.csv", make_coherent(alpha, n_max), meta);

  const Json& ks = p.at("postselect");
  if (!ks.is_array()) throw ConfigError("postselect", "expected an array of outcomes");
  for (const auto& kj : ks) {
    if (!kj.is_number_integer()) throw ConfigError("postselect", "expected integers");
    const int k = kj.get<int>();
    if (!window.contains(k)) throw ConfigError("postselect", "outcome outside the electron window");
    const std::string name = "postselect_k" + std::string(k >= 0 ? "+" : "") + std::to_string(k) + ".csv";
    write_state_snapshot(out / name, joint.postselect(k), meta);
  }
  log << "fig2: wrote joint map and " << ks.size() << " post-selected slices to " << out.string() << '\n';
  return kExitOk;
}

int figure3(const Json& p, const fs::path& out, std::ostream& log) {
  const int n_max = param_int(p, "n_max");
  const Coupling g{param_complex(p, "g_qu")};
  const int n_goal = param_int(p, "n_goal");
  const int runs = param_int(p, "runs");
  const int max_steps = param_int(p, "max_steps");
  const auto seed = p.at("seed").get<std::uint64_t>();
  if (runs < 1) throw ConfigError("runs", "must be >= 1");
  if (max_steps < 0) throw ConfigError("max_steps", "must be >= 0");

  const int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const std::vector<Trajectory> trajs =
      run_fock_builder_ensemble(g, n_goal, n_max, seed, runs, max_steps, threads);

  double leakage = 0.0;
  int incomplete = 0;
  std::vector<std::vector<std::string>> rows;
  std::map<int, int> histogram;
  double sum = 0.0;
  for (int i = 0; i < runs; ++i) {
    const Trajectory& t = trajs[i];
    leakage += t.total_leakage;
    if (!t.complete) ++incomplete;
    const int final_n = static_cast<int>(std::round(t.steps.back().stats.mean_n));
    rows.push_back({std::to_string(i), std::to_string(seed + static_cast<std::uint64_t>(i)),
                    t.hitting_step ? std::to_string(*t.hitting_step) : std::string(),
                    std::to_string(final_n), t.complete ? "1" : "0"});
    if (t.hitting_step) {
      ++histogram[*t.hitting_step];
      sum += *t.hitting_step;
    }
  }
  const Metadata meta = figure_meta("fig3", p, leakage, seed);
  write_table(out / "hitting_steps.csv", {"run", "seed", "hitting_step", "final_n", "complete"}, rows, meta);

  std::vector<std::vector<std::string>> hist_rows;
  for (const auto& [step, count] : histogram) hist_rows.push_back({std::to_string(step), std::to_string(count)});
  write_table(out / "hitting_histogram.csv", {"hitting_step", "count"}, hist_rows, meta);

  const int examples = std::min(param_int(p, "example_runs"), runs);
  for (int i = 0; i < examples; ++i) {
    std::vector<std::vector<std::string>> path_rows;
    for (const auto& r : trajs[i].steps) {
      path_rows.push_back({std::to_string(r.step), r.measured_k ? std::to_string(*r.measured_k) : std::string(),
                           std::to_string(static_cast<int>(std::round(r.stats.mean_n))), format_real(r.purity)});
    }
    write_table(out / ("fock_path_run" + std::to_string(i) + ".csv"), {"step", "measured_k", "fock_n", "purity"},
                path_rows, meta);
  }

  const int complete = runs - incomplete;
  log << "fig3: " << complete << "/" << runs << " runs reached n_goal=" << n_goal;
  if (complete > 0) log << ", mean hitting step " << format_real(sum / complete);
  log << '\n';
  return incomplete > 0 ? kExitIncomplete : kExitOk;
}

int figure4(const Json& p, const fs::path& out, std::ostream& log) {
  const int n_max = param_int(p, "n_max");
  const Complex alpha = param_complex(p, "alpha");
  const Coupling g{param_complex(p, "g_qu")};
  const int steps = param_int(p, "steps");
  const Trajectory traj = run_scenario(make_coherent(alpha, n_max), {StepPolicy{}}, steps, g, 0);
  const Metadata meta = figure_meta("fig4", p, traj.total_leakage);
  write_trajectory(out / "trajectory.csv", traj, meta);
  write_state_snapshot(out / "state_snapshot.csv", traj.final_state, meta);
  write_distributions(out / "distributions.csv", traj, param_int(p, "snapshot_every"), meta);
  log << "fig4: " << steps << " trace-out steps, final <n>=" << format_real(traj.steps.back().stats.mean_n)
      << '\n';
  return kExitOk;
}

int figure5(Json& p, const fs::path& out, std::ostream& log) {
  const double scale = param_real(p, "scale");
  if (!(scale > 0.0 && scale <= 1.0)) throw ConfigError("scale", "must lie in (0, 1]");
  if (p.at("alpha").is_null()) p["alpha"] = Json::array({std::sqrt(1000.0 * scale), 0.0});
  const Complex alpha = param_complex(p, "alpha");
  const Coupling g{param_complex(p, "g_qu")};
  const CombElectron comb = param_comb(p);
  const int steps = param_int(p, "steps");
  if (p.at("n_max").is_null()) {
    const double a_final = std::abs(alpha) + steps * std::abs(comb.beta * g.g_qu);
    p["n_max"] = std::max(256, static_cast<int>(std::ceil(a_final * a_final + 8.0 * a_final + 20.0)));
  }
  const int n_max = param_int(p, "n_max");
  RunOptions options;
  const std::string mode = p.at("channel_mode").get<std::string>();
  if (mode == "ensemble") options.mode = ChannelMode::ensemble;
  else if (mode != "density") throw ConfigError("channel_mode", "expected density or ensemble");

  const Trajectory traj = run_scenario(make_coherent(alpha, n_max), {StepPolicy{comb, TraceOut{}, std::nullopt}},
                                       steps, g, 0, options);
  const Metadata meta = figure_meta("fig5", p, traj.total_leakage);
  write_trajectory(out / "trajectory.csv", traj, meta);
  write_state_snapshot(out / "state_snapshot.csv", traj.final_state, meta);
  write_distributions(out / "distributions.csv", traj, param_int(p, "snapshot_every"), meta);

  std::vector<double> x, y;
  double q_max = 0.0;
  for (const auto& r : traj.steps) {
    x.push_back(r.step);
    y.push_back(r.stats.effective_alpha);
    if (r.stats.mandel_q) q_max = std::max(q_max, *r.stats.mandel_q);
  }
  std::vector<std::vector<std::string>> rows{{"theory_slope", format_real(std::abs(comb.beta * g.g_qu))},
                                             {"max_mandel_q", format_real(q_max)}};
  if (x.size() >= 2) {
    const LinearFit fit = fit_line(x, y);
    rows.push_back({"alpha_slope", format_real(fit.slope)});
    rows.push_back({"alpha_intercept", format_real(fit.intercept)});
    rows.push_back({"alpha_r2", format_real(fit.r2)});
    log << "fig5: effective alpha slope " << format_real(fit.slope) << " per step\n";
  }
  write_table(out / "summary.csv", {"quantity", "value"}, rows, meta);
  return kExitOk;
}

int figure6(const Json& p, const fs::path& out, std::ostream& log) {
  const int n_max = param_int(p, "n_max");
  const Coupling g{param_complex(p, "g_qu")};
  const CombElectron comb = param_comb(p);
  const int steps = param_int(p, "steps");
  const Json& nis = p.at("n_i");
  if (!nis.is_array()) throw ConfigError("n_i", "expected an array of Fock indices");

  std::vector<DisplacedFockResult> results;
  double leakage = 0.0;
  for (const auto& nj : nis) {
    if (!nj.is_number_integer()) throw ConfigError("n_i", "expected integers");
    results.push_back(run_displaced_fock(nj.get<int>(), g, comb, steps, n_max));
    leakage += results.back().trajectory.total_leakage;
  }
  const Metadata meta = figure_meta("fig6", p, leakage);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const int n_i = nis[i].get<int>();
    const auto& r = results[i];
    const std::string tag = "_n" + std::to_string(n_i) + ".csv";
    write_trajectory(out / ("trajectory" + tag), r.trajectory, meta);
    write_state_snapshot(out / ("state" + tag), r.trajectory.final_state, meta);
    write_state_snapshot(out / ("target" + tag), r.target, meta);
    write_distributions(out / ("distributions" + tag), r.trajectory, 1, meta);
    rows.push_back({std::to_string(n_i), format_real(r.fidelity), std::to_string(r.peak_count)});
    log << "fig6: n_i=" << n_i << " fidelity " << format_real(r.fidelity) << ", " << r.peak_count
        << " peaks\n";
  }
  write_table(out / "summary.csv", {"n_i", "fidelity", "peak_count"}, rows, meta);
  return kExitOk;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace

int cmd_figure(const FigureOptions& options, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    Json params = figure_defaults(options);
    for (const auto& o : options.overrides) apply_override(params, o);
    const fs::path out = options.out_dir;
    if (options.which == "fig2") return figure2(params, out, log);
    if (options.which == "fig3") return figure3(params, out, log);
    if (options.which == "fig4") return figure4(params, out, log);
    if (options.which == "fig5") return figure5(params, out, log);
    return figure6(params, out, log);
  });
}

int cmd_run(const fs::path& config_path, const std::vector<std::string>& overrides,
            const std::optional<fs::path>& out_dir, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    ScenarioConfig config = parse_config(config_path, overrides);
    if (out_dir) config.output.dir = *out_dir;
    const Json echo = to_json(config);
    const PhotonState initial = build_initial_state(config);
    RunOptions options;
    options.mode = config.channel_mode;
    options.outcome_window = config.electron_window;
    const std::uint64_t base_seed = config.seed.value_or(0);

    for (int i = 0; i < config.ensemble_size; ++i) {
      const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
      const Trajectory traj = run_scenario(initial, config.policies, config.n_steps, config.g, seed, options);
      const Metadata meta{"run", config.seed ? std::optional<std::uint64_t>(seed) : std::nullopt, echo,
                          traj.total_leakage};
      const std::string suffix = config.ensemble_size > 1 ? "_" + std::to_string(i) : std::string();
      if (config.output.trajectory) {
        write_trajectory(config.output.dir / ("trajectory" + suffix + ".csv"), traj, meta);
      }
      if (config.output.snapshot) {
        write_state_snapshot(config.output.dir / ("state_snapshot" + suffix + ".csv"), traj.final_state, meta);
      }
      for (const auto& r : traj.steps) {
        if (r.positivity_warning) err << "warning: loss step " << r.step << " produced a negative eigenvalue\n";
      }
      log << "run " << i << ": " << config.n_steps << " steps, final <n>="
          << format_real(traj.steps.back().stats.mean_n) << ", leakage " << format_real(traj.total_leakage)
          << '\n';
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_gqu(const fs::path& field_csv, double omega, double v, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const FieldProfile profile = read_field_csv(field_csv, omega, v);
    const Coupling g = compute_g_qu(profile);
    if (field_edge_ratio(profile) > 1e-6) {
      err << "warning: field is not negligible at the ends of the sampled range\n";
    }
    out << "g_qu = [" << format_real(g.g_qu.real()) << ", " << format_real(g.g_qu.imag()) << "]\n";
    out << "|g_qu| = " << format_real(g.magnitude()) << '\n';
    return static_cast<int>(kExitOk);
  });
}

}  // namespace qpinem::cli
