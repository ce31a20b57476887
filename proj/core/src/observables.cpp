#include "qacoustic/observables.hpp"

#include <cmath>
#include <limits>

#include "qacoustic/error.hpp"
#include "qacoustic/fft.hpp"
#include "qacoustic/units.hpp"

namespace qacoustic {
namespace {

double fold(double d, double L) {
  d = std::fmod(d, L);
  if (d < -0.5 * L) d += L;
  if (d >= 0.5 * L) d -= L;
  return d;
}

}  // namespace

cplx overlap(const WavepacketPair& pair, const Grid2D& grid) {
  cplx s{};
  for (size_t i = 0; i < grid.size(); ++i) s += std::conj(pair.minus[i]) * pair.plus[i];
  return s * grid.cell_area();
}

MomentumExpectation momentum_expect(const WavepacketPair& pair, const Grid2D& grid,
                                    const Fft2D& fft) {
  Field a = pair.plus;
  Field b = pair.minus;
  fft.forward(a);
  fft.forward(b);
  const int N = grid.N();
  cplx sx{}, sy{};
  for (int iy = 0; iy < N; ++iy) {
    const double ky = grid.wavenumber(iy);
    for (int ix = 0; ix < N; ++ix) {
      const size_t i = grid.index(ix, iy);
      const cplx w = std::conj(b[i]) * a[i];
      sx += grid.wavenumber(ix) * w;
      sy += ky * w;
    }
  }
  // Parseval: sum_r conj(f) g = (1 / N^2) sum_k conj(F) G.
  const double norm = grid.cell_area() / static_cast<double>(grid.size());
  return {sx * norm, sy * norm};
}

cplx fourier_expect(const WavepacketPair& pair, const Grid2D& grid, const Fft2D& fft,
                    const std::vector<double>& multiplier) {
  if (multiplier.size() != grid.size()) throw ConsistencyError("multiplier size mismatch");
  Field a = pair.plus;
  Field b = pair.minus;
  fft.forward(a);
  fft.forward(b);
  cplx s{};
  for (size_t i = 0; i < grid.size(); ++i) s += multiplier[i] * std::conj(b[i]) * a[i];
  return s * grid.cell_area() / static_cast<double>(grid.size());
}

PositionMoments position_moments(const WavepacketPair& pair, const Grid2D& grid, Vec2 frame) {
  const int N = grid.N();
  const double L = grid.L();
  std::vector<double> dx(N), dy(N);
  for (int i = 0; i < N; ++i) {
    dx[i] = fold(grid.coord(i) - frame.x, L);
    dy[i] = fold(grid.coord(i) - frame.y, L);
  }
  cplx sx{}, sy{}, sr{};
  for (int iy = 0; iy < N; ++iy) {
    for (int ix = 0; ix < N; ++ix) {
      const size_t i = grid.index(ix, iy);
      const cplx w = std::conj(pair.minus[i]) * pair.plus[i];
      sx += dx[ix] * w;
      sy += dy[iy] * w;
      sr += (dx[ix] * dx[ix] + dy[iy] * dy[iy]) * w;
    }
  }
  const double dA = grid.cell_area();
  return {sx * dA, sy * dA, sr * dA};
}

Vec2 track_center(const WavepacketPair& pair, const Grid2D& grid, Vec2 previous) {
  const int N = grid.N();
  const double L = grid.L();
  const double k = 2.0 * units::kPi / L;
  std::vector<cplx> ex(N), ey(N);
  for (int i = 0; i < N; ++i) ex[i] = ey[i] = std::polar(1.0, k * grid.coord(i));
  cplx mx{}, my{};
  for (int iy = 0; iy < N; ++iy) {
    for (int ix = 0; ix < N; ++ix) {
      const size_t i = grid.index(ix, iy);
      const double w = std::norm(pair.plus[i]) + std::norm(pair.minus[i]);
      mx += w * ex[ix];
      my += w * ey[iy];
    }
  }
  const double cx = std::arg(mx) / k;
  const double cy = std::arg(my) / k;
  return {previous.x + fold(cx - previous.x, L), previous.y + fold(cy - previous.y, L)};
}

ObservableSeries ensemble_average(const std::vector<ObservableSeries>& runs) {
  std::vector<const ObservableSeries*> good;
  size_t divergent = 0;
  for (const ObservableSeries& r : runs) {
    if (r.divergent)
      ++divergent;
    else
      good.push_back(&r);
  }
  if (good.empty())
    throw EnsembleFailureError("all " + std::to_string(runs.size()) +
                               " realizations diverged");
  const size_t n = good.size();
  const size_t T = good.front()->size();
  for (const ObservableSeries* r : good)
    if (r->size() != T) throw ConsistencyError("realizations recorded different time grids");

  ObservableSeries out;
  out.t_fs = good.front()->t_fs;
  out.n_realizations = n;
  out.n_divergent = divergent;
  out.px.assign(T, {});
  out.x.assign(T, {});
  out.y.assign(T, {});
  out.r2.assign(T, {});
  out.overlap.assign(T, {});
  out.frame.assign(T, {});
  out.stderr_px.assign(T, 0.0);

  for (size_t j = 0; j < T; ++j) {
    Vec2 f{};
    for (const ObservableSeries* r : good) f = f + r->frame[j];
    f = (1.0 / n) * f;
    out.frame[j] = f;
    double sum_re = 0.0, sum_sq = 0.0;
    for (const ObservableSeries* r : good) {
      // Exact change of origin from the run's frame to the common one.
      const Vec2 d = r->frame[j] - f;
      const cplx O = r->overlap[j];
      out.px[j] += r->px[j];
      out.overlap[j] += O;
      out.x[j] += d.x * O + r->x[j];
      out.y[j] += d.y * O + r->y[j];
      out.r2[j] += dot(d, d) * O + 2.0 * (d.x * r->x[j] + d.y * r->y[j]) + r->r2[j];
      sum_re += r->px[j].real();
      sum_sq += r->px[j].real() * r->px[j].real();
    }
    const double inv = 1.0 / n;
    out.px[j] *= inv;
    out.overlap[j] *= inv;
    out.x[j] *= inv;
    out.y[j] *= inv;
    out.r2[j] *= inv;
    if (n > 1) {
      const double mean = sum_re * inv;
      const double var = std::max(sum_sq * inv - mean * mean, 0.0) * n / (n - 1.0);
      out.stderr_px[j] = std::sqrt(var * inv);
    }
  }
  if (!good.front()->g_expect.empty()) {
    out.g_expect = good.front()->g_expect;
    for (size_t j = 0; j < out.g_expect.size(); ++j)
      for (size_t m = 0; m < out.g_expect[j].size(); ++m) {
        Vec2 s{};
        for (const ObservableSeries* r : good) s = s + r->g_expect[j][m];
        out.g_expect[j][m] = (1.0 / n) * s;
      }
  }
  return out;
}

RelaxationFit fit_relaxation(const ObservableSeries& series, FitWindow window) {
  RelaxationFit fit;
  fit.tau_fs = std::numeric_limits<double>::infinity();
  const size_t n = series.size();
  size_t first = 0;
  while (first < n && series.t_fs[first] < window.t_begin_fs) ++first;
  if (first >= n) {
    fit.diagnostic = "window starts after the last sample";
    return fit;
  }
  const double p0 = series.px[first].real();
  if (!(p0 > 0.0)) {
    fit.diagnostic = "Re<p_x> is not positive at the window start";
    return fit;
  }
  size_t last = first;  // inclusive
  for (size_t j = first; j < n; ++j) {
    const double p = series.px[j].real();
    if (window.t_end_fs >= 0.0) {
      if (series.t_fs[j] > window.t_end_fs) break;
      if (!(p > 0.0)) break;
    } else if (!(p > 0.2 * p0)) {
      break;
    }
    last = j;
  }
  fit.points = last - first + 1;
  fit.t_begin_fs = series.t_fs[first];
  fit.t_end_fs = series.t_fs[last];
  if (fit.points < 10) {
    fit.diagnostic = "fewer than 10 usable samples in the window";
    return fit;
  }
  double st = 0, sy = 0, stt = 0, sty = 0;
  const double m = static_cast<double>(fit.points);
  for (size_t j = first; j <= last; ++j) {
    const double t = series.t_fs[j];
    const double y = std::log(series.px[j].real());
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  const double denom = m * stt - st * st;
  const double slope = (m * sty - st * sy) / denom;
  const double icept = (sy - slope * st) / m;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / m;
  for (size_t j = first; j <= last; ++j) {
    const double y = std::log(series.px[j].real());
    const double r = y - (icept + slope * series.t_fs[j]);
    ss_res += r * r;
    ss_tot += (y - ybar) * (y - ybar);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  fit.inv_tau_per_fs = -slope;
  // A decay below rounding over the whole window is no decay.
  if (!(slope * (fit.t_end_fs - fit.t_begin_fs) < -1e-12)) {
    fit.diagnostic = "no decay: fitted slope is not negative";
    return fit;
  }
  fit.ok = true;
  fit.tau_fs = -1.0 / slope;
  return fit;
}

SpreadResult spread_xi(const ObservableSeries& series, double T_window_fs) {
  if (!(T_window_fs > 0.0)) throw ConfigurationError("spread window must be positive");
  const size_t n = series.size();
  if (n < 2 || series.t_fs.front() > 0.0 || series.t_fs.back() < T_window_fs * (1.0 - 1e-12))
    throw ConfigurationError("series does not cover the spread window");
  SpreadResult res;
  auto variance = [&](size_t j) {
    const double v = series.r2[j].real() - series.x[j].real() * series.x[j].real() -
                     series.y[j].real() * series.y[j].real();
    if (v < 0.0) {
      ++res.clamped_points;
      return 0.0;
    }
    return v;
  };
  double integral = 0.0;
  double prev = variance(0);
  for (size_t j = 1; j < n; ++j) {
    const double t0 = series.t_fs[j - 1];
    const double t1 = series.t_fs[j];
    if (t0 >= T_window_fs) break;
    const double cur = variance(j);
    if (t1 <= T_window_fs) {
      integral += 0.5 * (prev + cur) * (t1 - t0);
    } else {
      const double f = (T_window_fs - t0) / (t1 - t0);
      const double mid = prev + f * (cur - prev);
      integral += 0.5 * (prev + mid) * (T_window_fs - t0);
    }
    prev = cur;
  }
  res.xi_nm = std::sqrt(integral / T_window_fs);
  return res;
}

}  // namespace qacoustic
