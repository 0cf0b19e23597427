#pragma once

#include <filesystem>
#include <vector>

#include "qpinem/scattering.hpp"

namespace qpinem {

namespace codata {
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double hbar = 1.054571817e-34;               // J s
}  // namespace codata

/// Longitudinal field E_z(z) of the cavity mode along the electron path.
struct FieldProfile {
  std::vector<double> z;         // m, strictly increasing
  std::vector<Complex> e_z;      // V/m
  double omega = 0.0;            // rad/s
  double v = 0.0;                // m/s
};

/**
 * g_Qu = e/(hbar omega) * integral dz e^{-i omega z / v} E_z(z), trapezoidal
 * on the sample grid as given. The mode-function normalization only enters
 * through the amplitude of E_z supplied by the caller.
 */
Coupling compute_g_qu(const FieldProfile& profile);

/// max(|E(z_first)|, |E(z_last)|) / max |E|; 0 for an all-zero field. Values
/// above 1e-6 mean the sampled range cuts off a non-negligible field.
double field_edge_ratio(const FieldProfile& profile);

/// Reads "z, Re E_z[, Im E_z]" rows; a non-numeric first line is treated as a header.
FieldProfile read_field_csv(const std::filesystem::path& path, double omega, double v);

}  // namespace qpinem
