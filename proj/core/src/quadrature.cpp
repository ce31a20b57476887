#include "qacoustic/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "qacoustic/error.hpp"

namespace qacoustic {
namespace {

// Nodes in [0, 1]; the Gauss nodes are the odd-indexed Kronrod nodes.
constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXk[j];
    const double sum = f(c - dx) + f(c + dx);
    kron += kWk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts) {
  if (a == b) return {};
  std::priority_queue<Segment> heap;
  Segment first = gk15(f, a, b);
  double value = first.value;
  double error = first.error;
  heap.push(first);
  int intervals = 1;
  auto converged = [&] {
    return error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(value));
  };
  while (!converged()) {
    if (intervals >= opts.max_intervals) {
      const Segment worst = heap.top();
      std::ostringstream msg;
      msg << "quadrature did not converge on [" << a << ", " << b << "]: error " << error
          << " after " << intervals << " intervals; worst subinterval [" << worst.a << ", "
          << worst.b << "] with error " << worst.error;
      throw QuadratureError(msg.str(), worst.a, worst.b);
    }
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Segment left = gk15(f, worst.a, mid);
    const Segment right = gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Re-sum to shed the drift of the running updates.
  double total = 0.0;
  double total_err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  return {total, total_err, intervals};
}

}  // namespace qacoustic
