#include "qacoustic/units.hpp"

namespace qacoustic::units {

double fs_to_internal(double t_fs) { return t_fs / kTimeUnitFs; }
double internal_to_fs(double t) { return t * kTimeUnitFs; }
double per_internal_to_per_fs(double rate) { return rate / kTimeUnitFs; }

double kelvin_to_ev(double T_K) { return T_K * kBoltzmannEvPerK; }
double ev_to_kelvin(double E) { return E / kBoltzmannEvPerK; }

// 1 m/s = 1e9 nm/s = 1e9 * hbar/eV [s] nm per time unit.
double speed_si_to_internal(double v_m_per_s) { return v_m_per_s * 1e9 * kHbarEvS; }
double speed_internal_to_si(double v) { return v / (1e9 * kHbarEvS); }

double mass_to_internal(double m_eff) { return m_eff / (2.0 * kHbar2Over2MeEvNm2); }
double mass_internal_to_me(double m) { return m * 2.0 * kHbar2Over2MeEvNm2; }

double coupling_volume_nm3(double rho2d_kg_per_m2, double v_m_per_s) {
  return kHbarJs / (rho2d_kg_per_m2 * v_m_per_s) * 1e27;
}

}  // namespace qacoustic::units
