#include "qacoustic/noise.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>

#include "binary_io.hpp"
#include "qacoustic/error.hpp"
#include "qacoustic/fft.hpp"
#include "qacoustic/seeding.hpp"

namespace qacoustic {
namespace {

using Mat4 = Eigen::Matrix<cplx, 4, 4, Eigen::RowMajor>;

Mat4 to_eigen(const Block4& b) { return Eigen::Map<const Mat4>(b.data()); }

Block4 from_eigen(const Mat4& m) {
  Block4 b;
  Eigen::Map<Mat4>(b.data()) = m;
  return b;
}

double frob(const Block4& b) {
  double s = 0.0;
  for (const cplx& v : b) s += std::norm(v);
  return std::sqrt(s);
}

/// H with H H^T = G for complex symmetric G, via the real symmetric pencil
/// [[A, B], [B, -A]] of G = A + iB: an eigenpair (s, [x; y]) with s >= 0 gives
/// a Takagi vector u = x + iy with G conj(u) = s u.
Mat4 takagi_factor(const Mat4& G) {
  Eigen::Matrix<double, 8, 8> S;
  S.topLeftCorner<4, 4>() = G.real();
  S.topRightCorner<4, 4>() = G.imag();
  S.bottomLeftCorner<4, 4>() = G.imag();
  S.bottomRightCorner<4, 4>() = -G.real();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 8, 8>> es(S);
  Mat4 H = Mat4::Zero();
  // Eigenvalues ascend; the four largest are the non-negative half of the +/- pairs.
  for (int c = 0; c < 4; ++c) {
    const double s = std::max(es.eigenvalues()(4 + c), 0.0);
    const auto v = es.eigenvectors().col(4 + c);
    for (int r = 0; r < 4; ++r) H(r, c) = std::sqrt(s) * cplx(v(r), v(4 + r));
  }
  return H;
}

}  // namespace

using detail::read_f64;
using detail::read_u64;
using detail::write_f64;
using detail::write_u64;

Mat2 operator*(const Mat2& a, const Mat2& b) {
  return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
          a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
}

KernelValue kernel_eval(double omega, double lag) {
  const double c = std::cos(omega * lag);
  const double s = std::sin(omega * lag);
  return {{c, -s, s, c}, {s, 0.0, 0.0, -s}};
}

double heaviside(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? 0.0 : 0.5); }

Block4 covariance_block(double omega, double lag) {
  const KernelValue k = kernel_eval(omega, lag);
  const cplx I(0.0, 1.0);
  Block4 b{};
  at(b, 0, 0) = 0.5 * k.L.m00;
  at(b, 0, 1) = 0.5 * k.L.m01;
  at(b, 1, 0) = 0.5 * k.L.m10;
  at(b, 1, 1) = 0.5 * k.L.m11;
  const double before = heaviside(-lag);
  const double after = heaviside(lag);
  at(b, 0, 2) = I * k.M.m00 * before;
  at(b, 1, 3) = I * k.M.m11 * before;
  at(b, 2, 0) = -I * k.M.m00 * after;
  at(b, 3, 1) = -I * k.M.m11 * after;
  return b;
}

CovSequence::CovSequence(double omega, double dt, int n_steps)
    : omega_(omega), dt_(dt), n_(n_steps) {
  if (n_steps < 1) throw ConfigurationError("noise needs at least one step");
  blocks_.reserve(static_cast<size_t>(2 * n_steps - 1));
  for (int j = -(n_steps - 1); j <= n_steps - 1; ++j)
    blocks_.push_back(covariance_block(omega, j * dt));
}

CovSequence build_cov_sequence(double omega, double dt, int n_steps) {
  return CovSequence(omega, dt, n_steps);
}

int padded_length(int n_steps) {
  int p = 1;
  while (p < n_steps) p <<= 1;
  return 2 * p;
}

std::vector<Block4> spectral_covariance(double omega, double dt, int n_steps) {
  const CovSequence seq(omega, dt, n_steps);
  const int P = padded_length(n_steps);
  std::vector<Block4> G(static_cast<size_t>(P));
  std::vector<cplx> line(static_cast<size_t>(P));
  Fft1D fft(P);
  for (int e = 0; e < 16; ++e) {
    std::fill(line.begin(), line.end(), cplx{});
    for (int j = 0; j < n_steps; ++j) line[j] = seq.at(j)[e];
    for (int j = 1; j < n_steps; ++j) line[P - j] = seq.at(-j)[e];
    fft.forward(line.data());
    for (int k = 0; k < P; ++k) G[k][e] = line[k];
  }
  return G;
}

NoiseFilter factorize_spectrum(const std::vector<Block4>& G, double tol) {
  const int P = static_cast<int>(G.size());
  if (P < 2 || (P & (P - 1)) != 0)
    throw FactorizationError("spectral covariance length must be a power of two >= 2");
  double scale = 0.0;
  for (const Block4& g : G) {
    for (const cplx& v : g)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw FactorizationError("spectral covariance contains non-finite entries");
    scale = std::max(scale, frob(g));
  }
  NoiseFilter f;
  f.P = P;
  f.H.assign(static_cast<size_t>(P), Block4{});
  if (scale == 0.0) return f;

  double worst = 0.0;
  auto check = [&](const Mat4& recon, const Block4& target, int k) {
    const double r = (recon - to_eigen(target)).norm() / scale;
    worst = std::max(worst, r);
    if (r > tol)
      throw FactorizationError("spectral covariance is not factorizable at bin " +
                               std::to_string(k) + " (relative residual " +
                               std::to_string(r) + "); the kernel violates C(-t) = C(t)^T");
  };

  for (int k : {0, P / 2}) {
    const Mat4 g = to_eigen(G[k]);
    const Mat4 sym = 0.5 * (g + g.transpose());
    const Mat4 H = takagi_factor(sym);
    check(H * H.transpose(), G[k], k);
    f.H[k] = from_eigen(H);
  }
  for (int k = 1; k < P / 2; ++k) {
    const Mat4 g = to_eigen(G[k]);
    Eigen::JacobiSVD<Mat4> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Matrix<double, 4, 1> root = svd.singularValues().cwiseSqrt();
    const Mat4 Hneg = svd.matrixU() * root.asDiagonal();
    const Mat4 Hpos = svd.matrixV().conjugate() * root.asDiagonal();
    check(Hneg * Hpos.transpose(), G[k], k);
    check(Hpos * Hneg.transpose(), G[P - k], P - k);
    f.H[k] = from_eigen(Hpos);
    f.H[P - k] = from_eigen(Hneg);
  }
  f.residual = worst;
  return f;
}

NoiseFilter make_noise_filter(double omega, double dt, int n_steps) {
  NoiseFilter f = factorize_spectrum(spectral_covariance(omega, dt, n_steps));
  f.omega = omega;
  return f;
}

NoiseTrajectory::NoiseTrajectory(size_t n_modes, int n_steps, double dt, std::uint64_t seed)
    : n_modes_(n_modes),
      n_steps_(n_steps),
      dt_(dt),
      seed_(seed),
      data_(n_modes * static_cast<size_t>(n_steps) * 4) {}

NoiseGenerator::NoiseGenerator(const ModeSet& modes, double dt, int n_steps)
    : dt_(dt), n_steps_(n_steps), P_(padded_length(n_steps)) {
  std::vector<double> omegas;
  omegas.reserve(modes.size());
  for (const Mode& m : modes.modes) omegas.push_back(m.omega);
  build(omegas);
}

NoiseGenerator::NoiseGenerator(double omega, double dt, int n_steps)
    : dt_(dt), n_steps_(n_steps), P_(padded_length(n_steps)) {
  build({omega});
}

void NoiseGenerator::build(const std::vector<double>& omegas) {
  if (!(dt_ > 0.0)) throw ConfigurationError("noise time step must be positive");
  if (n_steps_ < 1) throw ConfigurationError("noise needs at least one step");
  std::map<double, std::shared_ptr<const NoiseFilter>> by_omega;
  for (double w : omegas) {
    auto it = by_omega.find(w);
    if (it == by_omega.end()) {
      it = by_omega.emplace(w, std::make_shared<NoiseFilter>(make_noise_filter(w, dt_, n_steps_)))
               .first;
      filters_.push_back(it->second);
    }
    mode_filter_.push_back(it->second.get());
  }
}

size_t NoiseGenerator::filter_bytes() const {
  return filters_.size() * static_cast<size_t>(P_) * sizeof(Block4);
}

NoiseTrajectory NoiseGenerator::generate(std::uint64_t seed) const {
  NoiseTrajectory traj(mode_filter_.size(), n_steps_, dt_, seed);
  Fft1D fft(P_);
  std::array<std::vector<cplx>, 4> w;
  std::array<std::vector<cplx>, 4> z;
  for (auto& v : w) v.resize(static_cast<size_t>(P_));
  for (auto& v : z) v.resize(static_cast<size_t>(P_));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double inv_P = 1.0 / P_;
  for (size_t m = 0; m < mode_filter_.size(); ++m) {
    Rng rng(derive_seed(seed, m));
    for (auto& v : w) {
      for (cplx& x : v) x = normal(rng);
      fft.forward(v.data());
    }
    const std::vector<Block4>& H = mode_filter_[m]->H;
    for (int k = 0; k < P_; ++k) {
      const Block4& h = H[k];
      for (int a = 0; a < 4; ++a)
        z[a][k] = h[a * 4 + 0] * w[0][k] + h[a * 4 + 1] * w[1][k] + h[a * 4 + 2] * w[2][k] +
                  h[a * 4 + 3] * w[3][k];
    }
    for (int a = 0; a < 4; ++a) {
      fft.backward(z[a].data());
      for (int j = 0; j < n_steps_; ++j) traj.value(j, m, a) = z[a][j] * inv_P;
    }
  }
  return traj;
}

NoiseTrajectory generate(const ModeSet& modes, double dt, int n_steps, std::uint64_t seed) {
  return NoiseGenerator(modes, dt, n_steps).generate(seed);
}

CovarianceValidator::CovarianceValidator(double omega, double dt, int max_lag, size_t mode)
    : omega_(omega),
      dt_(dt),
      max_lag_(max_lag),
      mode_(mode),
      sum_(static_cast<size_t>(max_lag + 1) * 16),
      sum_sq_(static_cast<size_t>(max_lag + 1) * 16) {}

void CovarianceValidator::add(const NoiseTrajectory& traj) {
  const int n = traj.n_steps();
  if (max_lag_ >= n) throw ConfigurationError("validation lag window exceeds trajectory length");
  if (mode_ >= traj.n_modes()) throw ConsistencyError("validation mode index out of range");
  int M = 1;
  while (M < n + max_lag_) M <<= 1;
  Fft1D fft(M);
  std::array<std::vector<cplx>, 4> F;
  for (int a = 0; a < 4; ++a) {
    F[a].assign(static_cast<size_t>(M), cplx{});
    for (int s = 0; s < n; ++s) F[a][s] = traj.value(s, mode_, a);
    fft.forward(F[a].data());
  }
  std::vector<cplx> prod(static_cast<size_t>(M));
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      for (int k = 0; k < M; ++k) prod[k] = F[a][(M - k) % M] * F[b][k];
      fft.backward(prod.data());
      for (int lag = 0; lag <= max_lag_; ++lag) {
        const cplx v = prod[lag] / (double(M) * (n - lag));
        const size_t idx = static_cast<size_t>(lag) * 16 + a * 4 + b;
        sum_[idx] += v;
        sum_sq_[idx] += std::norm(v);
      }
    }
  }
  ++n_;
}

CovarianceValidator::Report CovarianceValidator::report(double n_sigma) const {
  Report rep;
  rep.realizations = n_;
  rep.max_lag = max_lag_;
  rep.pass = n_ > 1;
  for (int lag = 0; lag <= max_lag_; ++lag) {
    const Block4 target = covariance_block(omega_, lag * dt_);
    LagRow row;
    row.lag = lag;
    Block4 mean{};
    for (int e = 0; e < 16; ++e) {
      const size_t idx = static_cast<size_t>(lag) * 16 + e;
      const cplx mu = n_ ? sum_[idx] / double(n_) : cplx{};
      mean[e] = mu;
      double se = 0.0;
      if (n_ > 1) {
        const double var = std::max(sum_sq_[idx] / double(n_) - std::norm(mu), 0.0) *
                           double(n_) / double(n_ - 1);
        se = std::sqrt(var / double(n_));
      }
      const double dev = std::abs(mu - target[e]);
      const double z = se > 0.0 ? dev / se : (dev > 0.0 ? INFINITY : 0.0);
      if (dev > row.max_deviation) {
        row.max_deviation = dev;
        row.error_bar = se;
      }
      row.max_z = std::max(row.max_z, z);
      rep.error_bar = std::max(rep.error_bar, se);
      if (!(z <= n_sigma)) rep.pass = false;
    }
    rep.max_deviation = std::max(rep.max_deviation, row.max_deviation);
    rep.max_z = std::max(rep.max_z, row.max_z);
    rep.rows.push_back(row);
    rep.mean.push_back(mean);
  }
  return rep;
}

CovarianceValidator::Report validate_statistics(const std::vector<NoiseTrajectory>& trajectories,
                                                double omega, int max_lag, size_t mode) {
  if (trajectories.empty()) throw ConfigurationError("no trajectories to validate");
  CovarianceValidator v(omega, trajectories.front().dt(), max_lag, mode);
  for (const NoiseTrajectory& t : trajectories) v.add(t);
  return v.report();
}

void write_noise_dump(std::ostream& os, const NoiseTrajectory& traj) {
  write_u64(os, traj.n_modes());
  write_u64(os, static_cast<std::uint64_t>(traj.n_steps()));
  write_f64(os, traj.dt());
  for (const cplx& v : traj.raw()) {
    write_f64(os, v.real());
    write_f64(os, v.imag());
  }
}

NoiseTrajectory read_noise_dump(std::istream& is) {
  const std::uint64_t modes = read_u64(is);
  const std::uint64_t steps = read_u64(is);
  const double dt = read_f64(is);
  NoiseTrajectory traj(modes, static_cast<int>(steps), dt, 0);
  for (cplx& v : traj.raw()) {
    const double re = read_f64(is);
    const double im = read_f64(is);
    v = {re, im};
  }
  return traj;
}

}  // namespace qacoustic
