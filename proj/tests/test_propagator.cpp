#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "qacoustic/error.hpp"
#include "qacoustic/propagator.hpp"
#include "qacoustic/seeding.hpp"
#include "qacoustic/units.hpp"

using namespace qacoustic;

namespace {

double fold(double d, double L) {
  d = std::fmod(d, L);
  if (d < -0.5 * L) d += L;
  if (d >= 0.5 * L) d -= L;
  return d;
}

struct AxisMoments {
  double mean_x = 0, mean_y = 0, var_x = 0, var_y = 0, norm = 0;
};

// Moments of |psi|^2 about `ref`, computed independently of the observables module.
AxisMoments axis_moments(const Field& psi, const Grid2D& g, Vec2 ref) {
  AxisMoments m;
  double sx = 0, sy = 0, sxx = 0, syy = 0, w = 0;
  for (int iy = 0; iy < g.N(); ++iy)
    for (int ix = 0; ix < g.N(); ++ix) {
      const double p = std::norm(psi[g.index(ix, iy)]);
      const double dx = fold(g.coord(ix) - ref.x, g.L());
      const double dy = fold(g.coord(iy) - ref.y, g.L());
      w += p;
      sx += p * dx;
      sy += p * dy;
      sxx += p * dx * dx;
      syy += p * dy * dy;
    }
  m.norm = w * g.cell_area();
  m.mean_x = sx / w;
  m.mean_y = sy / w;
  m.var_x = sxx / w - m.mean_x * m.mean_x;
  m.var_y = syy / w - m.mean_y * m.mean_y;
  return m;
}

double field_distance(const Field& a, const Field& b, const Grid2D& g) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s * g.cell_area());
}

TrajectoryConfig small_config(double T_over_TD, bool noise) {
  TrajectoryConfig c;
  c.material = material_preset("copper");
  c.N = 32;
  c.L = 6.4;
  c.sigma = 0.4;
  c.T_K = T_over_TD * derive_parameters(c.material).T_D;
  c.noise_enabled = noise;
  c.dt = recommended_dt(c);
  c.n_steps = 40;
  c.record_stride = 10;
  return c;
}

}  // namespace

TEST_CASE("gaussian initial state") {
  const Grid2D g(64, 6.4);
  const double kF = derive_parameters(material_preset("copper")).k_F;
  const Vec2 c{3.2, 3.2};
  const WavepacketPair pair = init_gaussian(g, c, {kF, 0.0}, 0.4);
  CHECK(pair.plus == pair.minus);
  const AxisMoments m = axis_moments(pair.plus, g, c);
  CHECK(std::abs(m.norm - 1.0) < 1e-12);
  CHECK(std::abs(m.var_x - 0.16) < 1e-6);
  CHECK(std::abs(m.var_y - 0.16) < 1e-6);
  const Fft2D fft(64);
  CHECK(std::abs(momentum_expect(pair, g, fft).px - kF) < 1e-6);
  CHECK(std::abs(momentum_expect(pair, g, fft).py) < 1e-9);

  CHECK_THROWS_AS(init_gaussian(g, c, {0, 0}, 0.15), ConfigurationError);
  CHECK_THROWS_AS(init_gaussian(g, c, {0, 0}, 1.0), ConfigurationError);
}

TEST_CASE("pseudopotential assembly") {
  const MaterialParams cu = material_preset("copper");
  const double TD = derive_parameters(cu).T_D;
  const Grid2D g(32, 6.4);
  const Fft2D fft(32);
  const ModeSet modes = enumerate_modes(cu, 6.4, derive_parameters(cu).q_D);
  const double dt = 0.05;
  Rng rng(3);
  const CoherentAmplitudes amps = sample_thermal(modes, TD, SamplingScheme::RandomPhase, rng);
  const NoiseGenerator gen(modes, dt, 8);
  const NoiseTrajectory noise = gen.generate(11);

  SUBCASE("cold bath without noise gives no field") {
    CoherentAmplitudes zero = amps;
    for (auto& a : zero.alpha) a = 0.0;
    for (const cplx& v : assemble_pseudopotential(modes, zero, nullptr, 0, 0.0, g,
                                                  Branch::Plus, fft))
      CHECK(std::abs(v) == 0.0);
  }

  SUBCASE("without noise it is the deformation potential") {
    const double t = 0.7;
    const auto V = deformation_potential(modes, amps, g, t, fft);
    for (Branch b : {Branch::Plus, Branch::Minus}) {
      const Field P = assemble_pseudopotential(modes, amps, nullptr, 0, t, g, b, fft);
      double worst = 0, vmax = 0;
      for (size_t i = 0; i < V.size(); ++i) {
        worst = std::max(worst, std::abs(P[i] - V[i]));
        vmax = std::max(vmax, std::abs(V[i]));
      }
      CHECK(worst < 1e-9 * vmax);
    }
  }

  SUBCASE("FFT assembly equals the direct mode sum") {
    const long step = 5;
    const double t = step * dt;
    CoherentAmplitudes rotated = amps;
    for (size_t i = 0; i < modes.size(); ++i)
      rotated.alpha[i] *= std::polar(1.0, -modes.modes[i].omega * t);
    std::mt19937_64 pick(17);
    std::uniform_int_distribution<size_t> u(0, g.size() - 1);
    for (Branch b : {Branch::Plus, Branch::Minus}) {
      const double s = b == Branch::Plus ? 1.0 : -1.0;
      const Field P = assemble_pseudopotential(modes, amps, &noise, step, t, g, b, fft);
      double vmax = 0;
      for (const cplx& v : P) vmax = std::max(vmax, std::abs(v));
      for (int k = 0; k < 16; ++k) {
        const size_t idx = u(pick);
        const Vec2 r = g.point(idx);
        cplx direct = 0.0;
        for (size_t i = 0; i < modes.size(); ++i) {
          const Vec2 gq = coupling_vector(modes.modes[i], r);
          const Vec2 X = rotated.coordinates(i);
          const cplx c0 = X.x - noise.value(step, i, 0) + 0.5 * s * noise.value(step, i, 2);
          const cplx c1 = X.y - noise.value(step, i, 1) + 0.5 * s * noise.value(step, i, 3);
          direct += c0 * gq.x + c1 * gq.y;
        }
        // The bra branch is handed back as its adjoint.
        if (b == Branch::Minus) direct = std::conj(direct);
        CHECK(std::abs(P[idx] - direct) < 1e-9 * vmax);
      }
    }
  }
}

TEST_CASE("free evolution") {
  const Grid2D g(64, 12.8);
  const Fft2D fft(64);
  const double mass = mass_internal(material_preset("copper"));
  const double sigma = 0.4, dt = 0.01;
  const Vec2 c{6.4, 6.4};
  const Vec2 k0{2.0, -1.0};
  WavepacketPair pair = init_gaussian(g, c, k0, sigma);
  const StepPlan plan = make_step_plan(g, mass, dt, 100);
  const Field zero(g.size(), 0.0);
  for (int j = 0; j < 100; ++j) strang_step(pair.plus, zero, plan, fft);
  const double t = 100 * dt;
  const Vec2 moved{c.x + k0.x / mass * t, c.y + k0.y / mass * t};
  const AxisMoments m = axis_moments(pair.plus, g, moved);
  const double s2 = sigma * sigma * (1.0 + std::pow(t / (2.0 * mass * sigma * sigma), 2));
  CHECK(std::abs(m.var_x / s2 - 1.0) < 1e-6);
  CHECK(std::abs(m.var_y / s2 - 1.0) < 1e-6);
  CHECK(std::abs(m.mean_x) < 1e-9);
  CHECK(std::abs(m.mean_y) < 1e-9);
  CHECK(std::abs(m.norm - 1.0) < 1e-12);
}

TEST_CASE("constant potential is a global phase") {
  const Grid2D g(32, 6.4);
  const Fft2D fft(32);
  const double mass = mass_internal(material_preset("copper"));
  const WavepacketPair start = init_gaussian(g, {3.2, 3.2}, {1.0, 0.0}, 0.4);
  const StepPlan plan = make_step_plan(g, mass, 0.02, 50);
  Field a = start.plus, b = start.plus;
  const Field zero(g.size(), 0.0), flat(g.size(), cplx(0.37, 0.0));
  for (int j = 0; j < 50; ++j) {
    strang_step(a, zero, plan, fft);
    strang_step(b, flat, plan, fft);
  }
  const cplx phase = std::polar(1.0, -0.37 * 50 * 0.02);
  for (cplx& v : a) v *= phase;
  CHECK(field_distance(a, b, g) < 1e-12);
}

TEST_CASE("Strang splitting is second order on a static snapshot") {
  const MaterialParams cu = material_preset("copper");
  const Grid2D g(32, 6.4);
  const Fft2D fft(32);
  const ModeSet modes = enumerate_modes(cu, 6.4, derive_parameters(cu).q_D);
  Rng rng(8);
  const auto amps = sample_thermal(modes, derive_parameters(cu).T_D, SamplingScheme::RandomPhase,
                                   rng);
  const auto Vr = deformation_potential(modes, amps, g, 0.0, fft);
  const Field V(Vr.begin(), Vr.end());
  const double mass = mass_internal(cu);
  const WavepacketPair start = init_gaussian(g, {3.2, 3.2}, {derive_parameters(cu).k_F, 0}, 0.4);
  const double T = 2.0;
  auto evolve = [&](int n) {
    Field psi = start.plus;
    const StepPlan plan = make_step_plan(g, mass, T / n, n);
    for (int j = 0; j < n; ++j) strang_step(psi, V, plan, fft);
    return psi;
  };
  const Field ref = evolve(40 * 16);
  const double e1 = field_distance(evolve(40), ref, g);
  const double e2 = field_distance(evolve(80), ref, g);
  const double e3 = field_distance(evolve(160), ref, g);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
  CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("trajectories") {
  SUBCASE("without coupling the momentum is conserved") {
    TrajectoryConfig c = small_config(1.0, true);
    c.material.E_d = 0.0;
    c.dt = recommended_dt(c);
    const ObservableSeries s = run_trajectory(c, 4);
    for (const cplx& p : s.px) CHECK(std::abs(p - s.px[0]) < 1e-10);
    for (const cplx& o : s.overlap) CHECK(std::abs(o - 1.0) < 1e-12);
  }

  SUBCASE("same seed is bit-identical, other seeds differ") {
    const TrajectoryRunner runner(small_config(1.0, true));
    const ObservableSeries a = runner.run(99), b = runner.run(99), c = runner.run(100);
    CHECK(a.px == b.px);
    CHECK(a.r2 == b.r2);
    CHECK(a.overlap == b.overlap);
    CHECK(a.px != c.px);
  }

  SUBCASE("mean field keeps the two branches equal") {
    const TrajectoryRunner runner(small_config(1.0, false));
    const ObservableSeries s = runner.run(5);
    for (const cplx& o : s.overlap) CHECK(std::abs(o - 1.0) < 1e-12);
    for (const cplx& p : s.px) CHECK(std::abs(p.imag()) < 1e-12);
  }

  SUBCASE("the box length is a period of the packet position") {
    TrajectoryConfig a = small_config(1.0, true);
    TrajectoryConfig b = a;
    b.center = Vec2{3.2 + 6.4, 3.2 - 6.4};
    a.center = Vec2{3.2, 3.2};
    const ObservableSeries sa = run_trajectory(a, 12), sb = run_trajectory(b, 12);
    for (size_t i = 0; i < sa.size(); ++i) {
      CHECK(std::abs(sa.px[i] - sb.px[i]) < 1e-9);
      CHECK(std::abs(sa.r2[i] - sb.r2[i]) < 1e-9);
    }
  }

  SUBCASE("invalid configurations are refused") {
    TrajectoryConfig c = small_config(1.0, true);
    c.dt *= 2.0;
    CHECK_THROWS_AS(TrajectoryRunner{c}, ConfigurationError);
    c = small_config(1.0, true);
    c.N = 16;
    CHECK_THROWS_AS(TrajectoryRunner{c}, ConfigurationError);
    c = small_config(1.0, true);
    c.n_steps = 0;
    CHECK_THROWS_AS(TrajectoryRunner{c}, ConfigurationError);
  }
}

TEST_CASE("ensembles") {
  const TrajectoryRunner runner(small_config(1.0, true));

  SUBCASE("a single member equals the direct run") {
    EnsembleOptions o;
    o.n_realizations = 1;
    o.master_seed = 21;
    const EnsembleResult e = run_ensemble(runner, o);
    const ObservableSeries s = runner.run(derive_seed(21, 0));
    CHECK(e.seeds[0] == derive_seed(21, 0));
    CHECK(e.mean.px == s.px);
    CHECK(e.mean.overlap == s.overlap);
  }

  SUBCASE("parallel and serial agree exactly") {
    EnsembleOptions o;
    o.n_realizations = 4;
    o.master_seed = 3;
    const EnsembleResult serial = run_ensemble(runner, o);
    o.max_parallel = 3;
    const EnsembleResult parallel = run_ensemble(runner, o);
    CHECK(serial.mean.px == parallel.mean.px);
    CHECK(serial.mean.r2 == parallel.mean.r2);
  }

  SUBCASE("standard error shrinks like one over root n") {
    EnsembleOptions o;
    o.master_seed = 8;
    o.n_realizations = 6;
    const double small = run_ensemble(runner, o).mean.stderr_px.back();
    o.n_realizations = 24;
    const double large = run_ensemble(runner, o).mean.stderr_px.back();
    CHECK(small / large > 1.2);
    CHECK(small / large < 3.5);
  }
}

TEST_CASE("checkpoint round-trip") {
  const Grid2D g(16, 3.2);
  WavepacketPair p = init_gaussian(g, {1.6, 1.6}, {1, 2}, 0.4);
  for (cplx& v : p.minus) v *= cplx(0.5, 0.25);
  p.step = 123;
  std::stringstream ss;
  write_checkpoint(ss, g, p);
  CHECK(ss.str().size() == 4 + 8 + 8 + 8 + 2 * 16 * 16 * 16);
  const WavepacketPair back = read_checkpoint(ss, g);
  CHECK(back.plus == p.plus);
  CHECK(back.minus == p.minus);
  CHECK(back.step == 123);
  std::stringstream again(ss.str());
  CHECK_THROWS_AS(read_checkpoint(again, Grid2D(32, 3.2)), ConsistencyError);
}
