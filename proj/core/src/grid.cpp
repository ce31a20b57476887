#include "qacoustic/grid.hpp"

#include <string>

#include "qacoustic/error.hpp"
#include "qacoustic/units.hpp"

namespace qacoustic {

Grid2D::Grid2D(int N, double L) : N_(N), L_(L) {
  if (N < 4 || (N & (N - 1)) != 0)
    throw ConfigurationError("grid size N must be a power of two >= 4, got " +
                             std::to_string(N));
  if (!(L > 0.0)) throw ConfigurationError("box length must be positive");
}

double Grid2D::k_step() const { return 2.0 * units::kPi / L_; }
double Grid2D::k_max() const { return units::kPi * N_ / L_; }

long Grid2D::reciprocal_index(int nx, int ny) const {
  const int h = N_ / 2;
  if (nx >= h || nx <= -h || ny >= h || ny <= -h) return -1;
  const int jx = nx < 0 ? nx + N_ : nx;
  const int jy = ny < 0 ? ny + N_ : ny;
  return static_cast<long>(jy) * N_ + jx;
}

}  // namespace qacoustic
