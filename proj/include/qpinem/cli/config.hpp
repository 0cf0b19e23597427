#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpinem/chain.hpp"

namespace qpinem::cli {

using Json = nlohmann::json;

struct InitialStateSpec {
  enum class Kind { vacuum, fock, coherent, thermal, displaced_fock };
  Kind kind = Kind::vacuum;
  int n = 0;
  Complex alpha{0.0, 0.0};
  double theta = 0.0;
};

struct OutputSpec {
  std::filesystem::path dir = "out";
  bool trajectory = true;
  bool snapshot = true;
};

struct ScenarioConfig {
  int n_max = 0;
  LadderWindow electron_window;  // outcome window for measured electrons
  Coupling g;
  InitialStateSpec initial;
  std::vector<StepPolicy> policies;
  int n_steps = 0;
  std::optional<std::uint64_t> seed;
  int ensemble_size = 1;
  ChannelMode channel_mode = ChannelMode::density;
  OutputSpec output;
  std::optional<double> e0_ev;
  std::optional<double> omega_rad_s;

  bool uses_sampling() const;
};

/// Sets a dotted path ("policies.0.loss.dt_over_tau=0.1") inside `doc`.
/// The value is read as JSON when it parses, otherwise as a string.
void apply_override(Json& doc, const std::string& assignment);

/// Validates and materializes defaults. Throws ConfigError naming the field.
ScenarioConfig parse_config(const Json& doc);
ScenarioConfig parse_config(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides = {});

/// Fully materialized form, used for the metadata echo.
Json to_json(const ScenarioConfig& config);

PhotonState build_initial_state(const ScenarioConfig& config);

Json complex_to_json(Complex z);

}  // namespace qpinem::cli
