#pragma once

#include <string>
#include <vector>

namespace qacoustic {

/// Lattice and band parameters. The lattice constant is in nm.
struct MaterialParams {
  std::string name;
  double m_eff = 1.0;   ///< electron masses
  double v_s = 0.0;     ///< m/s
  double a = 0.0;       ///< nm
  double E_d = 0.0;     ///< eV
  double rho = 0.0;     ///< kg/m^3, bulk
};

struct DerivedParams {
  double q_D = 0.0;  ///< nm^-1
  double k_F = 0.0;  ///< nm^-1
  double T_D = 0.0;  ///< K
  double E_F = 0.0;  ///< eV
};

/// Throws InvalidMaterialError unless every numeric field is positive
/// (E_d may be zero: that is the uncoupled limit).
void validate(const MaterialParams& mat);

DerivedParams derive_parameters(const MaterialParams& mat);

/// Sheet density rho * a in kg/m^2; the 2D box carries one lattice layer.
double sheet_density(const MaterialParams& mat);

/// Internal-unit quantities used by the dynamics.
double mass_internal(const MaterialParams& mat);
double sound_speed_internal(const MaterialParams& mat);
/// hbar / (rho_2D v_s) in nm^3.
double coupling_volume(const MaterialParams& mat);

/// Bose occupation 1/(e^{omega/kT} - 1); exactly 0 at kT = 0.
double bose_occupation(double omega, double kT);

/// Root-mean-square deformation potential of a thermally occupied continuum
/// of modes under the Debye cutoff, in eV. It equals the spatial RMS of the
/// mean-field potential built from the same coupling, see bath.hpp.
double rms_deformation(const MaterialParams& mat, double T_K);

enum class CouplingClass { Perturbative, Nonperturbative };

struct CouplingClassification {
  CouplingClass cls;
  double K_bar;  ///< E_F / rms deformation; +inf when the deformation vanishes
};

/// K_bar > threshold is perturbative; the boundary itself is not.
CouplingClassification coupling_class(const MaterialParams& mat, double T_K,
                                      double threshold = 1.0);

const char* to_string(CouplingClass c);

/// Built-in presets: "copper" and "bi2212". Throws InvalidMaterialError otherwise.
MaterialParams material_preset(const std::string& name);
std::vector<std::string> material_preset_names();

}  // namespace qacoustic
