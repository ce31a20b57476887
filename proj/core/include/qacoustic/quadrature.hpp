#pragma once

#include <functional>

namespace qacoustic {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_intervals = 2000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

/// Globally adaptive 7/15-point Gauss-Kronrod integration on a finite [a, b].
/// The interval with the largest error estimate is bisected until
/// error <= max(abs_tol, rel_tol * |value|). Throws QuadratureError naming
/// the worst remaining subinterval when max_intervals is exhausted.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts = {});

}  // namespace qacoustic
