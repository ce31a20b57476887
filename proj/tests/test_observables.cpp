#include <cmath>
#include <random>

#include "doctest.h"
#include "qacoustic/error.hpp"
#include "qacoustic/propagator.hpp"

using namespace qacoustic;

namespace {

ObservableSeries synthetic(size_t n, double t_end, const auto& px_of_t) {
  ObservableSeries s;
  for (size_t j = 0; j < n; ++j) {
    const double t = t_end * j / (n - 1);
    s.t_fs.push_back(t);
    s.px.push_back(px_of_t(t));
    s.x.push_back(0.0);
    s.y.push_back(0.0);
    s.r2.push_back(0.0);
    s.overlap.push_back(1.0);
    s.frame.push_back({});
    s.stderr_px.push_back(0.0);
  }
  return s;
}

}  // namespace

TEST_CASE("momentum expectation") {
  const Grid2D g(256, 12.8);
  const Fft2D fft(256);

  SUBCASE("a packet at rest carries no momentum") {
    const WavepacketPair p = init_gaussian(g, {6.4, 6.4}, {0, 0}, 0.6);
    const auto m = momentum_expect(p, g, fft);
    CHECK(std::abs(m.px) < 1e-12);
    CHECK(std::abs(m.py) < 1e-12);
  }

  SUBCASE("a boosted packet matches a sixth-order finite difference") {
    const Vec2 k0{2.0, 0.5};
    WavepacketPair p = init_gaussian(g, {6.4, 6.4}, k0, 0.6);
    // Make the branches differ so the bilinear form is exercised.
    p.minus = init_gaussian(g, {6.5, 6.3}, {1.8, 0.4}, 0.6).plus;
    const auto m = momentum_expect(p, g, fft);
    const int N = g.N();
    const double h = g.spacing();
    const double c[3] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
    cplx fd = 0.0;
    for (int iy = 0; iy < N; ++iy)
      for (int ix = 0; ix < N; ++ix) {
        cplx d = 0.0;
        for (int s = 1; s <= 3; ++s)
          d += c[s - 1] * (p.plus[g.index((ix + s) % N, iy)] -
                           p.plus[g.index((ix - s + N) % N, iy)]);
        d /= h;
        fd += std::conj(p.minus[g.index(ix, iy)]) * cplx(0.0, -1.0) * d;
      }
    fd *= g.cell_area();
    CHECK(std::abs(m.px - fd) < 1e-6 * std::abs(fd));
  }

  SUBCASE("for equal branches the expectations are real") {
    const WavepacketPair p = init_gaussian(g, {3.0, 7.0}, {1.5, -2.5}, 0.6);
    const auto m = momentum_expect(p, g, fft);
    CHECK(std::abs(m.px.imag()) < 1e-12);
    CHECK(m.px.real() == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(m.py.real() == doctest::Approx(-2.5).epsilon(1e-9));
    CHECK(std::abs(overlap(p, g) - 1.0) < 1e-12);
    CHECK(std::abs(position_moments(p, g, {3.0, 7.0}).x.imag()) < 1e-14);
  }
}

TEST_CASE("diagonal multipliers in k") {
  const Grid2D g(64, 6.4);
  const Fft2D fft(64);
  WavepacketPair p = init_gaussian(g, {3.2, 3.2}, {2.0, 1.0}, 0.4);
  p.minus = init_gaussian(g, {3.3, 3.2}, {2.2, 1.0}, 0.4).plus;
  std::vector<double> kx(g.size()), k2(g.size());
  for (int iy = 0; iy < g.N(); ++iy)
    for (int ix = 0; ix < g.N(); ++ix) {
      kx[g.index(ix, iy)] = g.wavenumber(ix);
      k2[g.index(ix, iy)] = std::pow(g.wavenumber(ix), 2) + std::pow(g.wavenumber(iy), 2);
    }
  CHECK(std::abs(fourier_expect(p, g, fft, kx) - momentum_expect(p, g, fft).px) < 1e-12);

  // Applying p_x twice is the k_x^2 part of the k^2 multiplier.
  std::vector<double> kx2(g.size());
  for (size_t i = 0; i < g.size(); ++i) kx2[i] = kx[i] * kx[i];
  Field a = p.plus;
  fft.forward(a);
  for (size_t i = 0; i < a.size(); ++i) a[i] *= kx[i] / double(g.size());
  fft.backward(a);
  WavepacketPair once{a, p.minus, 0};
  CHECK(std::abs(fourier_expect(once, g, fft, kx) - fourier_expect(p, g, fft, kx2)) < 1e-10);
  CHECK_THROWS_AS(fourier_expect(p, g, fft, std::vector<double>(3)), ConsistencyError);
}

TEST_CASE("position moments and tracking") {
  const Grid2D g(64, 6.4);
  const WavepacketPair p = init_gaussian(g, {0.3, 6.2}, {0, 0}, 0.4);
  // The packet straddles the boundary; the tracked frame lands on the image nearest the hint.
  const Vec2 c = track_center(p, g, {0.0, 0.0});
  CHECK(std::abs(c.x - 0.3) < 1e-9);
  CHECK(std::abs(c.y + 0.2) < 1e-9);
  const auto m = position_moments(p, g, c);
  CHECK(std::abs(m.x) < 1e-10);
  CHECK(std::abs(m.y) < 1e-10);
  CHECK(m.r2.real() == doctest::Approx(2 * 0.16).epsilon(1e-9));
}

TEST_CASE("relaxation fits") {
  SUBCASE("exact exponential") {
    const auto s = synthetic(200, 10.0, [](double t) { return cplx(4.9 * std::exp(-0.3 * t)); });
    const auto f = fit_relaxation(s);
    CHECK(f.ok);
    CHECK(f.inv_tau_per_fs == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(f.tau_fs == doctest::Approx(1.0 / 0.3).epsilon(1e-12));
    CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    // Stops where Re px falls below 0.2 of its start.
    CHECK(f.t_end_fs <= std::log(5.0) / 0.3 + 1e-9);
  }

  SUBCASE("five percent noise keeps the rate within ten percent") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n(0.0, 0.05);
    const auto s =
        synthetic(400, 5.0, [&](double t) { return cplx(std::exp(-0.2 * t) * (1.0 + n(rng))); });
    const auto f = fit_relaxation(s);
    CHECK(f.ok);
    CHECK(f.inv_tau_per_fs == doctest::Approx(0.2).epsilon(0.1));
  }

  SUBCASE("a constant signal is not a decay") {
    const auto s = synthetic(100, 5.0, [](double) { return cplx(2.0); });
    const auto f = fit_relaxation(s);
    CHECK_FALSE(f.ok);
    CHECK(std::isinf(f.tau_fs));
    CHECK_FALSE(f.diagnostic.empty());
  }

  SUBCASE("non-positive start and short windows fail gracefully") {
    CHECK_FALSE(fit_relaxation(synthetic(50, 5.0, [](double) { return cplx(-1.0); })).ok);
    CHECK_FALSE(fit_relaxation(synthetic(5, 5.0, [](double t) { return cplx(std::exp(-t)); })).ok);
    const auto s = synthetic(100, 5.0, [](double t) { return cplx(std::exp(-0.1 * t)); });
    CHECK_FALSE(fit_relaxation(s, {10.0, -1.0}).ok);
    const auto w = fit_relaxation(s, {1.0, 3.0});
    CHECK(w.ok);
    CHECK(w.t_begin_fs >= 1.0);
    CHECK(w.t_end_fs <= 3.0);
  }
}

TEST_CASE("spread measure") {
  SUBCASE("a frozen packet gives its own width") {
    auto s = synthetic(101, 40.0, [](double) { return cplx(1.0); });
    for (auto& r : s.r2) r = 2 * 0.16;
    CHECK(spread_xi(s).xi_nm == doctest::Approx(std::sqrt(0.32)).epsilon(1e-12));
  }

  SUBCASE("a free packet matches the closed form") {
    const double sigma = 0.4, a = 0.3;  // a = hbar / (2 m sigma^2) per fs
    auto s = synthetic(4001, 40.0, [](double) { return cplx(1.0); });
    for (size_t j = 0; j < s.size(); ++j) {
      const double t = s.t_fs[j];
      s.r2[j] = 2 * sigma * sigma * (1 + a * a * t * t) + 0.25;
      s.x[j] = 0.5;  // shifts r2 and x^2 together
    }
    const double T = 40.0;
    const double expect = std::sqrt(2 * sigma * sigma * (1 + a * a * T * T / 3));
    CHECK(std::abs(spread_xi(s, T).xi_nm / expect - 1.0) < 1e-4);
    const double half = std::sqrt(2 * sigma * sigma * (1 + a * a * 20.0 * 20.0 / 3));
    CHECK(std::abs(spread_xi(s, 20.0).xi_nm / half - 1.0) < 1e-4);
    // Between samples: the window end is interpolated.
    CHECK(std::abs(spread_xi(s, 20.005).xi_nm / half - 1.0) < 1e-3);
  }

  SUBCASE("negative variances are clamped and counted") {
    auto s = synthetic(11, 40.0, [](double) { return cplx(1.0); });
    s.r2[3] = -1.0;
    const auto r = spread_xi(s);
    CHECK(r.clamped_points == 1);
  }

  SUBCASE("a series shorter than the window is refused") {
    const auto s = synthetic(11, 10.0, [](double) { return cplx(1.0); });
    CHECK_THROWS_AS(spread_xi(s, 40.0), ConfigurationError);
  }
}

TEST_CASE("ensemble average") {
  auto a = synthetic(5, 1.0, [](double) { return cplx(1.0); });
  auto b = synthetic(5, 1.0, [](double) { return cplx(3.0); });
  auto bad = a;
  bad.divergent = true;
  const auto m = ensemble_average({a, b, bad});
  CHECK(m.n_realizations == 2);
  CHECK(m.n_divergent == 1);
  CHECK(m.px[2] == cplx(2.0));
  // Sample standard deviation sqrt(2) over sqrt(2) members.
  CHECK(m.stderr_px[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(ensemble_average({bad}), EnsembleFailureError);
}
