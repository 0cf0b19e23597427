#include "qpinem/field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "qpinem/errors.hpp"

namespace qpinem {

namespace {

void validate(const FieldProfile& p) {
  if (p.z.size() < 2) throw DomainError("field profile needs at least two samples");
  if (p.z.size() != p.e_z.size()) throw DomainError("field profile: z and E_z lengths differ");
  if (!(p.omega > 0.0)) throw DomainError("field profile: omega must be positive");
  if (!(p.v > 0.0)) throw DomainError("field profile: electron speed must be positive");
  for (std::size_t i = 1; i < p.z.size(); ++i) {
    if (!(p.z[i] > p.z[i - 1])) throw DomainError("field profile: z must be strictly increasing");
  }
}

bool parse_row(const std::string& line, std::vector<double>& values) {
  values.clear();
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto begin = cell.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return false;
    const auto end = cell.find_last_not_of(" \t\r");
    cell = cell.substr(begin, end - begin + 1);
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size()) return false;
      values.push_back(v);
    } catch (const std::exception&) {
      return false;
    }
  }
  return true;
}

}  // namespace

Coupling compute_g_qu(const FieldProfile& profile) {
  validate(profile);
  const double k = profile.omega / profile.v;
  Complex integral{0.0, 0.0};
  auto integrand = [&](std::size_t i) { return std::polar(1.0, -k * profile.z[i]) * profile.e_z[i]; };
  Complex prev = integrand(0);
  for (std::size_t i = 1; i < profile.z.size(); ++i) {
    const Complex cur = integrand(i);
    integral += 0.5 * (profile.z[i] - profile.z[i - 1]) * (prev + cur);
    prev = cur;
  }
  return Coupling{codata::elementary_charge / (codata::hbar * profile.omega) * integral};
}

double field_edge_ratio(const FieldProfile& profile) {
  double peak = 0.0;
  for (const auto& e : profile.e_z) peak = std::max(peak, std::abs(e));
  if (peak == 0.0) return 0.0;
  return std::max(std::abs(profile.e_z.front()), std::abs(profile.e_z.back())) / peak;
}

FieldProfile read_field_csv(const std::filesystem::path& path, double omega, double v) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open field profile " + path.string());
  FieldProfile profile;
  profile.omega = omega;
  profile.v = v;
  std::string line;
  std::vector<double> values;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!parse_row(line, values)) {
      if (line_no == 1) continue;  // header
      throw DomainError("field profile line " + std::to_string(line_no) + " is not numeric");
    }
    if (values.size() != 2 && values.size() != 3) {
      throw DomainError("field profile line " + std::to_string(line_no) + " needs 2 or 3 columns");
    }
    profile.z.push_back(values[0]);
    profile.e_z.emplace_back(values[1], values.size() == 3 ? values[2] : 0.0);
  }
  validate(profile);
  return profile;
}

}  // namespace qpinem
