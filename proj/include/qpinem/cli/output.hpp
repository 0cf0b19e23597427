#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qpinem/chain.hpp"
#include "qpinem/cli/config.hpp"

namespace qpinem::cli {

inline constexpr int kSchemaVersion = 1;

/// Fields of the "# key=value" block written at the top of every CSV file.
struct Metadata {
  std::string command;
  std::optional<std::uint64_t> seed;
  Json config;
  double leakage_total = 0.0;
};

/// Shortest text that reads back to the same double.
std::string format_real(double v);

void write_metadata(std::ostream& out, const Metadata& meta);

void write_state_snapshot(const std::filesystem::path& path, const PhotonState& state,
                          const Metadata& meta);
void write_trajectory(const std::filesystem::path& path, const Trajectory& traj, const Metadata& meta);
/// Rows (k, n, |c[k,n]|^2) for every entry above `floor`.
void write_jointmap(const std::filesystem::path& path, const JointPure& joint, const Metadata& meta,
                    double floor = 0.0);

/// Generic table: header row followed by rows of preformatted cells.
void write_table(const std::filesystem::path& path, const std::vector<std::string>& columns,
                 const std::vector<std::vector<std::string>>& rows, const Metadata& meta);

}  // namespace qpinem::cli
