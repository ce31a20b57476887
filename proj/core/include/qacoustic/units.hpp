#pragma once

// Internal unit system: energy in eV, length in nm, time in hbar/eV, hbar = 1.
// Temperatures enter in kelvin and are converted with k_B.

namespace qacoustic::units {

inline constexpr double kPi = 3.14159265358979323846;

// CODATA 2018.
inline constexpr double kHbarJs = 1.054571817e-34;
inline constexpr double kHbarEvS = 6.582119569e-16;
inline constexpr double kBoltzmannEvPerK = 8.617333262e-5;
inline constexpr double kElectronMassKg = 9.1093837015e-31;
inline constexpr double kElectronVoltJ = 1.602176634e-19;

/// One internal time unit in femtoseconds.
inline constexpr double kTimeUnitFs = kHbarEvS * 1e15;

/// hbar^2 / (2 m_e) in eV nm^2.
inline constexpr double kHbar2Over2MeEvNm2 =
    kHbarJs * kHbarJs / (2.0 * kElectronMassKg) / kElectronVoltJ * 1e18;

double fs_to_internal(double t_fs);
double internal_to_fs(double t);
double per_internal_to_per_fs(double rate);

double kelvin_to_ev(double T_K);
double ev_to_kelvin(double E);

/// Sound speed in m/s to nm per internal time unit.
double speed_si_to_internal(double v_m_per_s);
double speed_internal_to_si(double v);

/// Mass in electron masses to eV^-1 nm^-2, so that k^2/(2m) is in eV.
double mass_to_internal(double m_eff);
double mass_internal_to_me(double m);

/// hbar / (rho2d * v_s) in nm^3 for rho2d in kg/m^2 and v_s in m/s.
/// E_d^2 times this volume, divided by an area, is an energy squared per wavenumber.
double coupling_volume_nm3(double rho2d_kg_per_m2, double v_m_per_s);

}  // namespace qacoustic::units
