#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qpinem/cli/commands.hpp"

int main(int argc, char** argv) {
  namespace cli = qpinem::cli;

  CLI::App app{"Quantum PINEM simulator: electron-driven photon state shaping"};
  app.set_version_flag("--version", std::string(QPINEM_VERSION));
  app.require_subcommand(1);

  cli::FigureOptions fig;
  std::optional<std::uint64_t> fig_seed;
  std::optional<int> fig_runs, fig_steps;
  std::string fig_out = "out";
  auto* figure = app.add_subcommand("figure", "Reproduce a figure dataset (fig2..fig6)");
  figure->add_option("which", fig.which, "Figure id")->required()->check(
      CLI::IsMember({"fig2", "fig3", "fig4", "fig5", "fig6"}));
  figure->add_option("--seed", fig_seed, "Base random seed");
  figure->add_option("--scale", fig.scale, "Problem scale in (0, 1] (fig5)")->check(
      CLI::Range(0.0, 1.0));
  figure->add_option("--out", fig_out, "Output directory");
  figure->add_option("--override", fig.overrides, "key=value parameter override (repeatable)");
  figure->add_option("--runs", fig_runs, "Number of runs (fig3)");
  figure->add_option("--steps", fig_steps, "Number of interactions (fig4..fig6)");

  std::string config_path;
  std::vector<std::string> run_overrides;
  std::optional<std::string> run_out;
  std::optional<std::uint64_t> run_seed;
  auto* run = app.add_subcommand("run", "Run a scenario described by a JSON config");
  run->add_option("config", config_path, "Scenario config file")->required();
  run->add_option("--override", run_overrides, "key=value config override (repeatable)");
  run->add_option("--out", run_out, "Output directory (replaces output.dir)");
  run->add_option("--seed", run_seed, "Seed (replaces the config seed)");

  std::string field_csv;
  double omega = 0.0;
  double v = 0.0;
  auto* gqu = app.add_subcommand("gqu", "Compute g_Qu from a sampled field profile");
  gqu->add_option("field_csv", field_csv, "CSV with z, Re E_z[, Im E_z]")->required();
  gqu->add_option("--omega", omega, "Angular frequency [rad/s]")->required();
  gqu->add_option("--v", v, "Electron speed [m/s]")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  if (*figure) {
    fig.seed = fig_seed;
    fig.runs = fig_runs;
    fig.steps = fig_steps;
    fig.out_dir = fig_out;
    return cli::cmd_figure(fig, std::cout, std::cerr);
  }
  if (*run) {
    if (run_seed) run_overrides.push_back("seed=" + std::to_string(*run_seed));
    std::optional<std::filesystem::path> out;
    if (run_out) out = *run_out;
    return cli::cmd_run(config_path, run_overrides, out, std::cout, std::cerr);
  }
  return cli::cmd_gqu(field_csv, omega, v, std::cout, std::cerr);
}
