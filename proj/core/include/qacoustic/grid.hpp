#pragma once

#include <complex>
#include <vector>

#include "qacoustic/vec2.hpp"

namespace qacoustic {

using Field = std::vector<std::complex<double>>;

/// Periodic square grid. Point (ix, iy) sits at (ix, iy) * spacing and is
/// stored at iy * N + ix; reciprocal index j maps to wavenumber
/// (2 pi / L) * (j < N/2 ? j : j - N).
class Grid2D {
 public:
  /// Throws ConfigurationError unless N is a power of two >= 4 and L > 0.
  Grid2D(int N, double L);

  int N() const { return N_; }
  double L() const { return L_; }
  double spacing() const { return L_ / N_; }
  double cell_area() const { return spacing() * spacing(); }
  size_t size() const { return static_cast<size_t>(N_) * N_; }
  /// Largest wavenumber component, pi N / L.
  double k_max() const;

  double coord(int i) const { return i * spacing(); }
  Vec2 point(size_t idx) const { return {coord(int(idx % N_)), coord(int(idx / N_))}; }
  double wavenumber(int j) const { return k_step() * signed_index(j); }
  double k_step() const;
  int signed_index(int j) const { return j < N_ / 2 ? j : j - N_; }

  /// Storage index of the reciprocal vector (2 pi / L)(nx, ny), or -1 when
  /// |nx| or |ny| >= N/2 (the harmonic would alias).
  long reciprocal_index(int nx, int ny) const;

  size_t index(int ix, int iy) const { return static_cast<size_t>(iy) * N_ + ix; }

  bool operator==(const Grid2D& o) const { return N_ == o.N_ && L_ == o.L_; }

 private:
  int N_;
  double L_;
};

}  // namespace qacoustic
