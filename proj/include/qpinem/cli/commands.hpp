#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace qpinem::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitIncomplete = 4,
};

struct FigureOptions {
  std::string which;  // fig2 .. fig6
  std::optional<std::uint64_t> seed;
  double scale = 0.1;  // fig5 only
  std::filesystem::path out_dir = "out";
  std::vector<std::string> overrides;
  std::optional<int> runs;   // fig3
  std::optional<int> steps;  // fig4, fig5, fig6
};

int cmd_figure(const FigureOptions& options, std::ostream& log, std::ostream& err);

int cmd_run(const std::filesystem::path& config_path, const std::vector<std::string>& overrides,
            const std::optional<std::filesystem::path>& out_dir, std::ostream& log, std::ostream& err);

int cmd_gqu(const std::filesystem::path& field_csv, double omega, double v, std::ostream& out,
            std::ostream& err);

}  // namespace qpinem::cli
