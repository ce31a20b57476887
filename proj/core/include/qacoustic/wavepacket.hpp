#pragma once

#include "qacoustic/grid.hpp"

namespace qacoustic {

/// The two branches of rho = |psi_plus><psi_minus| on one grid.
/// Each field is normalized as sum |psi|^2 * cell_area.
struct WavepacketPair {
  Field plus;
  Field minus;
  long step = 0;
};

}  // namespace qacoustic
