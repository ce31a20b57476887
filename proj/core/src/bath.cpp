#include "qacoustic/bath.hpp"

#include <cmath>
#include <numbers>
#include "json.hpp"

#include "qacoustic/error.hpp"
#include "qacoustic/fft.hpp"
#include "qacoustic/units.hpp"

namespace qacoustic {

using nlohmann::json;

ModeSet enumerate_modes(const MaterialParams& mat, double L, double q_cut) {
  const DerivedParams d = derive_parameters(mat);
  if (!(L > 0.0)) throw ConfigurationError("box length must be positive");
  if (!(q_cut > 0.0) || q_cut > d.q_D * (1.0 + 1e-12))
    throw ConfigurationError("mode cutoff must lie in (0, q_D]");

  const double dk = 2.0 * units::kPi / L;
  const double r = q_cut / dk;
  const double r2 = r * r * (1.0 + 1e-12);
  const int n_max = static_cast<int>(std::floor(r)) + 1;
  const double v = sound_speed_internal(mat);
  const double coupling = mat.E_d * mat.E_d * coupling_volume(mat) / (L * L);

  ModeSet set;
  set.material = mat.name;
  set.L = L;
  set.q_cut = q_cut;
  for (int ny = -n_max; ny <= n_max; ++ny) {
    for (int nx = -n_max; nx <= n_max; ++nx) {
      const int n2 = nx * nx + ny * ny;
      if (n2 == 0 || n2 > r2) continue;
      // |q| from the integer norm keeps symmetry-equivalent modes bit-identical.
      const double qabs = dk * std::sqrt(static_cast<double>(n2));
      Mode m;
      m.nx = nx;
      m.ny = ny;
      m.q = {dk * nx, dk * ny};
      m.omega = v * qabs;
      m.g_amp = std::sqrt(coupling * qabs);
      set.modes.push_back(m);
    }
  }
  if (set.modes.empty())
    throw EmptyBathError("no reciprocal-lattice point with 0 < |q| <= q_cut for L = " +
                         std::to_string(L) + " nm");
  return set;
}

Vec2 coupling_vector(const Mode& mode, Vec2 r) {
  const double phase = dot(mode.q, r);
  return {mode.g_amp * std::cos(phase + units::kPi), mode.g_amp * std::sin(phase)};
}

const char* to_string(SamplingScheme s) {
  return s == SamplingScheme::RandomPhase ? "random_phase" : "full_gaussian";
}

SamplingScheme sampling_scheme_from_string(const std::string& s) {
  if (s == "random_phase") return SamplingScheme::RandomPhase;
  if (s == "full_gaussian") return SamplingScheme::FullGaussian;
  throw ConfigurationError("unknown sampling scheme '" + s + "'");
}

Vec2 CoherentAmplitudes::coordinates(size_t i) const {
  return {-std::numbers::sqrt2 * alpha[i].real(), -std::numbers::sqrt2 * alpha[i].imag()};
}

void CoherentAmplitudes::set_coordinates(size_t i, Vec2 X) {
  alpha[i] = {-X.x / std::numbers::sqrt2, -X.y / std::numbers::sqrt2};
}

CoherentAmplitudes sample_thermal(const ModeSet& modes, double T_K, SamplingScheme scheme,
                                  Rng& rng) {
  if (!(T_K >= 0.0)) throw ConfigurationError("temperature must be >= 0");
  CoherentAmplitudes amps;
  amps.T_K = T_K;
  amps.scheme = scheme;
  amps.alpha.assign(modes.size(), {0.0, 0.0});
  const double kT = units::kelvin_to_ev(T_K);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * units::kPi);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (size_t i = 0; i < modes.size(); ++i) {
    const double n = bose_occupation(modes.modes[i].omega, kT);
    // Draw even when n = 0 so the stream layout does not depend on T.
    if (scheme == SamplingScheme::RandomPhase) {
      amps.alpha[i] = std::polar(std::sqrt(n), phase(rng));
    } else {
      const double s = std::sqrt(0.5 * n);
      const double re = normal(rng);
      const double im = normal(rng);
      amps.alpha[i] = {s * re, s * im};
    }
  }
  return amps;
}

void check_on_grid(const ModeSet& modes, const Grid2D& grid) {
  if (std::abs(modes.L - grid.L()) > 1e-12 * grid.L())
    throw ConsistencyError("mode set box length differs from grid box length");
  for (const Mode& m : modes.modes)
    if (grid.reciprocal_index(m.nx, m.ny) < 0)
      throw ConsistencyError("mode (" + std::to_string(m.nx) + ", " + std::to_string(m.ny) +
                             ") is not resolved by an N = " + std::to_string(grid.N()) +
                             " grid");
}

std::vector<double> deformation_potential(const ModeSet& modes, const CoherentAmplitudes& amps,
                                          const Grid2D& grid, double t) {
  Fft2D fft(grid.N());
  return deformation_potential(modes, amps, grid, t, fft);
}

std::vector<double> deformation_potential(const ModeSet& modes, const CoherentAmplitudes& amps,
                                          const Grid2D& grid, double t, const Fft2D& fft) {
  check_on_grid(modes, grid);
  if (amps.alpha.size() != modes.size())
    throw ConsistencyError("amplitude count differs from mode count");
  Field spectrum(grid.size(), {0.0, 0.0});
  for (size_t i = 0; i < modes.size(); ++i) {
    const Mode& m = modes.modes[i];
    const std::complex<double> c =
        m.g_amp / std::numbers::sqrt2 * amps.alpha[i] * std::polar(1.0, -m.omega * t);
    spectrum[grid.reciprocal_index(m.nx, m.ny)] += c;
    spectrum[grid.reciprocal_index(-m.nx, -m.ny)] += std::conj(c);
  }
  fft.backward(spectrum);
  std::vector<double> V(grid.size());
  for (size_t i = 0; i < V.size(); ++i) V[i] = spectrum[i].real();
  return V;
}

CoherentAmplitudes ehrenfest_step(const ModeSet& modes, const CoherentAmplitudes& amps,
                                  const std::vector<Vec2>& expectation_g, double dt) {
  if (expectation_g.size() != modes.size() || amps.alpha.size() != modes.size())
    throw ConsistencyError("Ehrenfest inputs do not match the mode set");
  // R(theta) = exp(theta J) = [[cos, sin], [-sin, cos]].
  auto rotate = [](Vec2 v, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return Vec2{c * v.x + s * v.y, -s * v.x + c * v.y};
  };
  CoherentAmplitudes out = amps;
  for (size_t i = 0; i < modes.size(); ++i) {
    const double w = modes.modes[i].omega;
    const Vec2 G = kEhrenfestDriveWeight * expectation_g[i];
    const Vec2 JG{G.y, -G.x};
    const Vec2 X = rotate(amps.coordinates(i), w * dt) + dt * rotate(JG, 0.5 * w * dt);
    out.set_coordinates(i, X);
  }
  return out;
}

std::string to_json(const ModeSet& modes) {
  json j;
  j["material"] = modes.material;
  j["box_length_nm"] = modes.L;
  j["q_cut_per_nm"] = modes.q_cut;
  json arr = json::array();
  for (const Mode& m : modes.modes)
    arr.push_back({{"n", {m.nx, m.ny}}, {"q", {m.q.x, m.q.y}}, {"omega_eV", m.omega},
                   {"g_amp_eV", m.g_amp}});
  j["modes"] = std::move(arr);
  return j.dump(2);
}

ModeSet modeset_from_json(const std::string& text) {
  const json j = json::parse(text);
  ModeSet set;
  set.material = j.at("material").get<std::string>();
  set.L = j.at("box_length_nm").get<double>();
  set.q_cut = j.at("q_cut_per_nm").get<double>();
  for (const json& e : j.at("modes")) {
    Mode m;
    m.nx = e.at("n").at(0).get<int>();
    m.ny = e.at("n").at(1).get<int>();
    m.q = {e.at("q").at(0).get<double>(), e.at("q").at(1).get<double>()};
    m.omega = e.at("omega_eV").get<double>();
    m.g_amp = e.at("g_amp_eV").get<double>();
    set.modes.push_back(m);
  }
  return set;
}

std::string to_json(const CoherentAmplitudes& amps) {
  json j;
  j["T_K"] = amps.T_K;
  j["scheme"] = to_string(amps.scheme);
  json arr = json::array();
  for (const auto& a : amps.alpha) arr.push_back({a.real(), a.imag()});
  j["alpha"] = std::move(arr);
  return j.dump(2);
}

CoherentAmplitudes amplitudes_from_json(const std::string& text) {
  const json j = json::parse(text);
  CoherentAmplitudes amps;
  amps.T_K = j.at("T_K").get<double>();
  amps.scheme = sampling_scheme_from_string(j.at("scheme").get<std::string>());
  for (const json& a : j.at("alpha")) amps.alpha.emplace_back(a.at(0).get<double>(),
                                                              a.at(1).get<double>());
  return amps;
}

}  // namespace qacoustic
