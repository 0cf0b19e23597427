#include "qpinem/cli/output.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "qpinem/errors.hpp"

namespace qpinem::cli {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

}  // namespace

std::string format_real(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void write_metadata(std::ostream& out, const Metadata& meta) {
  out << "# schema=" << kSchemaVersion << '\n';
  out << "# version=" << QPINEM_VERSION << '\n';
  out << "# command=" << meta.command << '\n';
  out << "# seed=" << (meta.seed ? std::to_string(*meta.seed) : std::string("none")) << '\n';
  out << "# leakage_total=" << format_real(meta.leakage_total) << '\n';
  // Destination directory is not echoed.
  Json config = meta.config;
  if (config.is_object() && config.contains("output") && config["output"].is_object()) {
    config["output"].erase("dir");
  }
  out << "# config=" << config.dump() << '\n';
}

void write_state_snapshot(const std::filesystem::path& path, const PhotonState& state,
                          const Metadata& meta) {
  std::ofstream out = open_output(path);
  write_metadata(out, meta);
  out << "n,probability,re_amp,im_amp\n";
  const std::vector<double> p = distribution(state);
  const auto* pure = std::get_if<PhotonPure>(&state);
  for (std::size_t n = 0; n < p.size(); ++n) {
    out << n << ',' << format_real(p[n]) << ',';
    if (pure) {
      const Complex a = (*pure)[static_cast<int>(n)];
      out << format_real(a.real()) << ',' << format_real(a.imag());
    } else {
      out << ',';
    }
    out << '\n';
  }
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj, const Metadata& meta) {
  std::ofstream out = open_output(path);
  write_metadata(out, meta);
  out << "step,measured_k,mean_n,var_n,mandel_q,theta,theta_r2,eff_alpha,purity,leakage\n";
  for (const auto& r : traj.steps) {
    out << r.step << ',' << (r.measured_k ? std::to_string(*r.measured_k) : std::string()) << ','
        << format_real(r.stats.mean_n) << ',' << format_real(r.stats.var_n) << ','
        << optional_real(r.stats.mandel_q) << ',' << optional_real(r.stats.effective_theta) << ','
        << optional_real(r.stats.fit_r2) << ',' << format_real(r.stats.effective_alpha) << ','
        << format_real(r.purity) << ',' << format_real(r.leakage) << '\n';
  }
}

void write_jointmap(const std::filesystem::path& path, const JointPure& joint, const Metadata& meta,
                    double floor) {
  std::ofstream out = open_output(path);
  write_metadata(out, meta);
  out << "k,n,probability\n";
  const LadderWindow w = joint.window();
  for (int k = w.lo; k <= w.hi; ++k) {
    for (int n = 0; n <= joint.n_max(); ++n) {
      const double p = std::norm(joint(k, n));
      if (p > floor) out << k << ',' << n << ',' << format_real(p) << '\n';
    }
  }
}

void write_table(const std::filesystem::path& path, const std::vector<std::string>& columns,
                 const std::vector<std::vector<std::string>>& rows, const Metadata& meta) {
  std::ofstream out = open_output(path);
  write_metadata(out, meta);
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

}  // namespace qpinem::cli
