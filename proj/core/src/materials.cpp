#include "qacoustic/materials.hpp"

#include <cmath>
#include <limits>

#include "qacoustic/error.hpp"
#include "qacoustic/quadrature.hpp"
#include "qacoustic/units.hpp"

namespace qacoustic {

void validate(const MaterialParams& mat) {
  auto require = [&](bool ok, const char* what) {
    if (!ok) throw InvalidMaterialError("material '" + mat.name + "': " + what);
  };
  require(std::isfinite(mat.a) && mat.a > 0.0, "lattice constant must be positive");
  require(std::isfinite(mat.m_eff) && mat.m_eff > 0.0, "effective mass must be positive");
  require(std::isfinite(mat.v_s) && mat.v_s > 0.0, "sound speed must be positive");
  require(std::isfinite(mat.rho) && mat.rho > 0.0, "density must be positive");
  require(std::isfinite(mat.E_d) && mat.E_d >= 0.0, "deformation constant must be >= 0");
}

DerivedParams derive_parameters(const MaterialParams& mat) {
  validate(mat);
  DerivedParams d;
  d.q_D = 2.0 * std::sqrt(units::kPi) / mat.a;
  d.k_F = 0.5 * d.q_D;
  d.T_D = units::ev_to_kelvin(d.q_D * sound_speed_internal(mat));
  d.E_F = units::kHbar2Over2MeEvNm2 / mat.m_eff * d.k_F * d.k_F;
  return d;
}

double sheet_density(const MaterialParams& mat) { return mat.rho * mat.a * 1e-9; }

double mass_internal(const MaterialParams& mat) { return units::mass_to_internal(mat.m_eff); }

double sound_speed_internal(const MaterialParams& mat) {
  return units::speed_si_to_internal(mat.v_s);
}

double coupling_volume(const MaterialParams& mat) {
  return units::coupling_volume_nm3(sheet_density(mat), mat.v_s);
}

double bose_occupation(double omega, double kT) {
  if (kT <= 0.0) return 0.0;
  return 1.0 / std::expm1(omega / kT);
}

double rms_deformation(const MaterialParams& mat, double T_K) {
  if (!(T_K >= 0.0)) throw InvalidMaterialError("temperature must be >= 0");
  const DerivedParams d = derive_parameters(mat);
  if (T_K == 0.0 || mat.E_d == 0.0) return 0.0;
  const double kT = units::kelvin_to_ev(T_K);
  const double v = sound_speed_internal(mat);
  // q^2 n(q); tends to q kT / v at the origin.
  auto integrand = [&](double q) {
    if (q == 0.0) return 0.0;
    const double x = v * q / kT;
    if (x < 1e-8) return q * kT / v;
    return q * q / std::expm1(x);
  };
  QuadratureOptions opts;
  opts.abs_tol = 1e-10;
  opts.rel_tol = 1e-12;
  const double integral = integrate(integrand, 0.0, d.q_D, opts).value;
  const double variance =
      mat.E_d * mat.E_d * coupling_volume(mat) / (2.0 * units::kPi) * integral;
  return std::sqrt(variance);
}

CouplingClassification coupling_class(const MaterialParams& mat, double T_K, double threshold) {
  const DerivedParams d = derive_parameters(mat);
  const double dv = rms_deformation(mat, T_K);
  const double K = dv > 0.0 ? d.E_F / dv : std::numeric_limits<double>::infinity();
  return {K > threshold ? CouplingClass::Perturbative : CouplingClass::Nonperturbative, K};
}

const char* to_string(CouplingClass c) {
  return c == CouplingClass::Perturbative ? "Perturbative" : "Nonperturbative";
}

MaterialParams material_preset(const std::string& name) {
  if (name == "copper") return {"copper", 1.0, 4700.0, 0.36, 10.0, 8960.0};
  if (name == "bi2212") return {"bi2212", 8.4, 2800.0, 0.54, 10.0, 5200.0};
  throw InvalidMaterialError("unknown material preset '" + name + "'");
}

std::vector<std::string> material_preset_names() { return {"copper", "bi2212"}; }

}  // namespace qacoustic
