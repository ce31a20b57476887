#include "qacoustic/propagator.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "binary_io.hpp"
#include "qacoustic/error.hpp"
#include "qacoustic/seeding.hpp"
#include "qacoustic/units.hpp"

namespace qacoustic {
namespace {

double fold(double d, double L) {
  d = std::fmod(d, L);
  if (d < -0.5 * L) d += L;
  if (d >= 0.5 * L) d -= L;
  return d;
}

void half_potential_phase(const Field& V, double dt, Field& phase) {
  phase.resize(V.size());
  const cplx minus_i_half_dt(0.0, -0.5 * dt);
  for (size_t i = 0; i < V.size(); ++i) phase[i] = std::exp(minus_i_half_dt * V[i]);
}

void strang_with_phase(Field& psi, const Field& half_phase, const StepPlan& plan,
                       const Fft2D& fft) {
  for (size_t i = 0; i < psi.size(); ++i) psi[i] *= half_phase[i];
  fft.forward(psi);
  const double inv = 1.0 / static_cast<double>(psi.size());
  for (size_t i = 0; i < psi.size(); ++i) psi[i] *= plan.kinetic_phase[i] * inv;
  fft.backward(psi);
  for (size_t i = 0; i < psi.size(); ++i) psi[i] *= half_phase[i];
}

/// Re <psi_minus| g_q |psi_plus> for every mode from one FFT of conj(psi_minus) psi_plus.
std::vector<Vec2> expectation_g(const WavepacketPair& pair, const ModeSet& modes,
                                const Grid2D& grid, const Fft2D& fft) {
  Field b(grid.size());
  for (size_t i = 0; i < b.size(); ++i) b[i] = std::conj(pair.minus[i]) * pair.plus[i];
  fft.forward(b);
  const double dA = grid.cell_area();
  std::vector<Vec2> out(modes.size());
  for (size_t m = 0; m < modes.size(); ++m) {
    const Mode& mode = modes.modes[m];
    // <e^{iq.r}> picks the -q harmonic of the forward transform.
    const cplx e_pos = dA * b[grid.reciprocal_index(-mode.nx, -mode.ny)];
    const cplx e_neg = dA * b[grid.reciprocal_index(mode.nx, mode.ny)];
    const cplx c = 0.5 * (e_pos + e_neg);
    const cplx s = (e_pos - e_neg) / cplx(0.0, 2.0);
    out[m] = {-mode.g_amp * c.real(), mode.g_amp * s.real()};
  }
  return out;
}

}  // namespace

WavepacketPair init_gaussian(const Grid2D& grid, Vec2 center, Vec2 k0, double sigma) {
  if (!(sigma >= 2.0 * grid.spacing()))
    throw ConfigurationError("packet width " + std::to_string(sigma) +
                             " nm is under-resolved: need at least two grid spacings (" +
                             std::to_string(2.0 * grid.spacing()) + " nm)");
  if (8.0 * sigma > grid.L())
    throw ConfigurationError("packet width " + std::to_string(sigma) +
                             " nm does not fit the box: need 8 sigma <= L");
  const int N = grid.N();
  const double L = grid.L();
  WavepacketPair pair;
  pair.plus.resize(grid.size());
  double norm2 = 0.0;
  for (int iy = 0; iy < N; ++iy) {
    const double dy = fold(grid.coord(iy) - center.y, L);
    for (int ix = 0; ix < N; ++ix) {
      const double dx = fold(grid.coord(ix) - center.x, L);
      const double amp = std::exp(-(dx * dx + dy * dy) / (4.0 * sigma * sigma));
      const cplx v = std::polar(amp, k0.x * dx + k0.y * dy);
      pair.plus[grid.index(ix, iy)] = v;
      norm2 += amp * amp;
    }
  }
  const double scale = 1.0 / std::sqrt(norm2 * grid.cell_area());
  for (cplx& v : pair.plus) v *= scale;
  pair.minus = pair.plus;
  return pair;
}

StepPlan make_step_plan(const Grid2D& grid, double mass, double dt, long n_steps,
                        bool feedback) {
  if (!(dt > 0.0)) throw ConfigurationError("time step must be positive");
  if (!(mass > 0.0)) throw ConfigurationError("mass must be positive");
  StepPlan plan;
  plan.dt = dt;
  plan.n_steps = n_steps;
  plan.feedback = feedback;
  plan.kinetic_phase.resize(grid.size());
  const int N = grid.N();
  for (int iy = 0; iy < N; ++iy) {
    const double ky = grid.wavenumber(iy);
    for (int ix = 0; ix < N; ++ix) {
      const double kx = grid.wavenumber(ix);
      plan.kinetic_phase[grid.index(ix, iy)] =
          std::polar(1.0, -(kx * kx + ky * ky) / (2.0 * mass) * dt);
    }
  }
  return plan;
}

Field assemble_pseudopotential(const ModeSet& modes, const CoherentAmplitudes& amps,
                               const NoiseTrajectory* noise, long step, double mf_time,
                               const Grid2D& grid, Branch branch, const Fft2D& fft) {
  check_on_grid(modes, grid);
  if (amps.alpha.size() != modes.size())
    throw ConsistencyError("amplitude count differs from mode count");
  if (noise) {
    if (noise->n_modes() != modes.size())
      throw ConsistencyError("noise trajectory was generated for a different mode set");
    if (step < 0 || step >= noise->n_steps())
      throw ConsistencyError("noise step out of range");
  }
  const double s = branch == Branch::Plus ? 1.0 : -1.0;
  const cplx I(0.0, 1.0);
  Field spectrum(grid.size(), cplx{});
  const cplx* z = noise ? noise->step(static_cast<int>(step)) : nullptr;
  for (size_t m = 0; m < modes.size(); ++m) {
    const Mode& mode = modes.modes[m];
    const cplx a = amps.alpha[m] * std::polar(1.0, -mode.omega * mf_time);
    cplx c_pos = a / std::numbers::sqrt2;
    cplx c_neg = std::conj(a) / std::numbers::sqrt2;
    if (z) {
      const cplx zeta0 = z[4 * m + 0] - 0.5 * s * z[4 * m + 2];
      const cplx zeta1 = z[4 * m + 1] - 0.5 * s * z[4 * m + 3];
      // -zeta . g_q(r) with g_q = g_amp (-cos q.r, sin q.r).
      c_pos += 0.5 * (zeta0 + I * zeta1);
      c_neg += 0.5 * (zeta0 - I * zeta1);
    }
    spectrum[grid.reciprocal_index(mode.nx, mode.ny)] += mode.g_amp * c_pos;
    spectrum[grid.reciprocal_index(-mode.nx, -mode.ny)] += mode.g_amp * c_neg;
  }
  fft.backward(spectrum);
  // The bra branch enters as <psi_-|; its ket therefore evolves under the adjoint,
  // which keeps <psi_-| holomorphic in the noise.
  if (branch == Branch::Minus)
    for (cplx& v : spectrum) v = std::conj(v);
  return spectrum;
}

void strang_step(Field& psi, const Field& potential, const StepPlan& plan, const Fft2D& fft) {
  Field phase;
  half_potential_phase(potential, plan.dt, phase);
  strang_with_phase(psi, phase, plan, fft);
}

void strang_step(WavepacketPair& pair, const StepPlan& plan, const Fft2D& fft,
                 const Field& potential_plus, const Field& potential_minus) {
  strang_step(pair.plus, potential_plus, plan, fft);
  strang_step(pair.minus, potential_minus, plan, fft);
  ++pair.step;
}

double effective_sigma(const TrajectoryConfig& cfg) {
  return cfg.sigma > 0.0 ? cfg.sigma : 0.02 * cfg.L;
}

Vec2 effective_center(const TrajectoryConfig& cfg) {
  return cfg.center.value_or(Vec2{0.5 * cfg.L, 0.5 * cfg.L});
}

Vec2 effective_k0(const TrajectoryConfig& cfg) {
  return cfg.k0.value_or(Vec2{derive_parameters(cfg.material).k_F, 0.0});
}

double recommended_dt(const TrajectoryConfig& cfg) {
  const DerivedParams d = derive_parameters(cfg.material);
  const double q_cut = cfg.q_cut_fraction * d.q_D;
  const double sigma = effective_sigma(cfg);
  double v_scale = rms_deformation(cfg.material, cfg.T_K);
  if (cfg.noise_enabled && cfg.material.E_d > 0.0) {
    // Continuum estimate of sqrt(sum_q g_amp^2 / 2) under the cutoff.
    const double g2_sum = cfg.material.E_d * cfg.material.E_d * coupling_volume(cfg.material) *
                          q_cut * q_cut * q_cut / (6.0 * units::kPi);
    v_scale += 3.0 * std::sqrt(0.5 * g2_sum);
  }
  const double k_band = norm(effective_k0(cfg)) + q_cut + 1.5 / sigma;
  const double kinetic = k_band * k_band / (2.0 * mass_internal(cfg.material));
  const double scale = std::max(v_scale, kinetic);
  return 0.1 / scale;
}

void validate(const TrajectoryConfig& cfg) {
  const DerivedParams d = derive_parameters(cfg.material);
  const Grid2D grid(cfg.N, cfg.L);
  if (!(cfg.q_cut_fraction > 0.0 && cfg.q_cut_fraction <= 1.0))
    throw ConfigurationError("q_cut_fraction must lie in (0, 1]");
  const double q_cut = cfg.q_cut_fraction * d.q_D;
  const double k_need = std::max(d.k_F, norm(effective_k0(cfg))) + q_cut;
  if (!(grid.k_max() > k_need)) {
    std::ostringstream msg;
    msg << "grid does not resolve scattered momenta: pi N / L = " << grid.k_max()
        << " nm^-1 must exceed k_F + q_cut = " << k_need << " nm^-1";
    throw ConfigurationError(msg.str());
  }
  if (!(cfg.T_K >= 0.0)) throw ConfigurationError("temperature must be >= 0");
  if (cfg.n_steps < 1) throw ConfigurationError("n_steps must be >= 1");
  if (cfg.record_stride < 1) throw ConfigurationError("record_stride must be >= 1");
  if (!(cfg.divergence_bound > 1.0)) throw ConfigurationError("divergence bound must be > 1");
  if (!(cfg.dt > 0.0)) throw ConfigurationError("time step must be positive");
  const double dt_max = recommended_dt(cfg);
  if (cfg.dt > dt_max * (1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "time step " << units::internal_to_fs(cfg.dt) << " fs exceeds the stability bound "
        << units::internal_to_fs(dt_max) << " fs";
    throw ConfigurationError(msg.str());
  }
  // Checked last: the packet constraints need the grid.
  init_gaussian(grid, effective_center(cfg), effective_k0(cfg), effective_sigma(cfg));
}

TrajectoryRunner::TrajectoryRunner(const TrajectoryConfig& cfg)
    : cfg_(cfg), grid_(cfg.N, cfg.L) {
  validate(cfg_);
  const DerivedParams d = derive_parameters(cfg_.material);
  modes_ = enumerate_modes(cfg_.material, cfg_.L, cfg_.q_cut_fraction * d.q_D);
  check_on_grid(modes_, grid_);
  plan_ = make_step_plan(grid_, mass_internal(cfg_.material), cfg_.dt, cfg_.n_steps,
                         cfg_.feedback);
  fft_ = std::make_unique<Fft2D>(grid_.N());
  if (cfg_.noise_enabled)
    noise_ = std::make_unique<NoiseGenerator>(modes_, cfg_.dt, static_cast<int>(cfg_.n_steps));
}

ObservableSeries TrajectoryRunner::run(std::uint64_t seed) const {
  Rng bath_rng(derive_seed(seed, 0));
  CoherentAmplitudes amps = sample_thermal(modes_, cfg_.T_K, cfg_.scheme, bath_rng);
  std::optional<NoiseTrajectory> noise;
  if (noise_) noise = noise_->generate(derive_seed(seed, 1));

  const Vec2 center = effective_center(cfg_);
  WavepacketPair pair = init_gaussian(grid_, center, effective_k0(cfg_), effective_sigma(cfg_));
  const bool two_branches = noise.has_value();
  const Fft2D& fft = *fft_;

  ObservableSeries series;
  Vec2 frame = center;
  auto record = [&](double t) {
    if (!two_branches) pair.minus = pair.plus;
    frame = track_center(pair, grid_, frame);
    const MomentumExpectation p = momentum_expect(pair, grid_, fft);
    const PositionMoments pm = position_moments(pair, grid_, frame);
    const cplx O = overlap(pair, grid_);
    series.t_fs.push_back(units::internal_to_fs(t));
    series.px.push_back(p.px);
    series.x.push_back(pm.x);
    series.y.push_back(pm.y);
    series.r2.push_back(pm.r2);
    series.overlap.push_back(O);
    series.frame.push_back(frame);
    series.stderr_px.push_back(0.0);
    if (cfg_.feedback) series.g_expect.push_back(expectation_g(pair, modes_, grid_, fft));
    return std::isfinite(std::abs(O)) && std::abs(O) <= cfg_.divergence_bound;
  };

  record(0.0);
  Field phase_plus, phase_minus;
  const NoiseTrajectory* z = noise ? &*noise : nullptr;
  for (long j = 0; j < cfg_.n_steps; ++j) {
    const double t = j * cfg_.dt;
    // With feedback the amplitudes already hold X(t); otherwise rotate X(0) to t.
    const double mf_time = cfg_.feedback ? 0.0 : t;
    std::vector<Vec2> g_now;
    if (cfg_.feedback) {
      if (!two_branches) pair.minus = pair.plus;
      g_now = expectation_g(pair, modes_, grid_, fft);
    }
    half_potential_phase(
        assemble_pseudopotential(modes_, amps, z, j, mf_time, grid_, Branch::Plus, fft),
        cfg_.dt, phase_plus);
    strang_with_phase(pair.plus, phase_plus, plan_, fft);
    if (two_branches) {
      half_potential_phase(
          assemble_pseudopotential(modes_, amps, z, j, mf_time, grid_, Branch::Minus, fft),
          cfg_.dt, phase_minus);
      strang_with_phase(pair.minus, phase_minus, plan_, fft);
    }
    ++pair.step;
    if (cfg_.feedback) amps = ehrenfest_step(modes_, amps, g_now, cfg_.dt);
    if ((j + 1) % cfg_.record_stride == 0 || j + 1 == cfg_.n_steps) {
      if (!record((j + 1) * cfg_.dt)) {
        series.divergent = true;
        series.n_divergent = 1;
        break;
      }
    }
  }
  return series;
}

ObservableSeries run_trajectory(const TrajectoryConfig& cfg, std::uint64_t seed) {
  return TrajectoryRunner(cfg).run(seed);
}

EnsembleResult run_ensemble(const TrajectoryRunner& runner, const EnsembleOptions& opts) {
  if (opts.n_realizations < 1) throw ConfigurationError("need at least one realization");
  EnsembleResult result;
  const size_t n = opts.n_realizations;
  result.seeds.resize(n);
  for (size_t r = 0; r < n; ++r) result.seeds[r] = derive_seed(opts.master_seed, r);

  std::vector<ObservableSeries> runs(n);
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (size_t r = next++; r < n; r = next++) {
      try {
        runs[r] = runner.run(result.seeds[r]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const unsigned threads =
      static_cast<unsigned>(std::clamp<size_t>(opts.max_parallel, 1, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  result.mean = ensemble_average(runs);
  result.n_divergent = result.mean.n_divergent;
  if (opts.keep_realizations) result.realizations = std::move(runs);
  return result;
}

EnsembleResult run_ensemble(const TrajectoryConfig& cfg, const EnsembleOptions& opts) {
  return run_ensemble(TrajectoryRunner(cfg), opts);
}

void write_checkpoint(std::ostream& os, const Grid2D& grid, const WavepacketPair& pair) {
  os.write("QACK", 4);
  detail::write_u64(os, static_cast<std::uint64_t>(grid.N()));
  detail::write_f64(os, grid.L());
  detail::write_u64(os, static_cast<std::uint64_t>(pair.step));
  for (const Field* f : {&pair.plus, &pair.minus})
    for (const cplx& v : *f) {
      detail::write_f64(os, v.real());
      detail::write_f64(os, v.imag());
    }
}

WavepacketPair read_checkpoint(std::istream& is, const Grid2D& grid) {
  char magic[4] = {};
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "QACK") throw Error("not a checkpoint stream");
  const auto N = detail::read_u64(is);
  const double L = detail::read_f64(is);
  if (static_cast<int>(N) != grid.N() || L != grid.L())
    throw ConsistencyError("checkpoint grid differs from the requested grid");
  WavepacketPair pair;
  pair.step = static_cast<long>(detail::read_u64(is));
  for (Field* f : {&pair.plus, &pair.minus}) {
    f->resize(grid.size());
    for (cplx& v : *f) {
      const double re = detail::read_f64(is);
      const double im = detail::read_f64(is);
      v = {re, im};
    }
  }
  return pair;
}

}  // namespace qacoustic
