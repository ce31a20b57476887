#include "qacoustic/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace qacoustic {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

}  // namespace

struct Fft1D::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

Fft1D::Fft1D(int n) : n_(n), plans_(std::make_unique<Plans>()) {
  std::vector<cplx> scratch(static_cast<size_t>(n));
  std::lock_guard lock(planner_mutex());
  plans_->fwd = fftw_plan_dft_1d(n, as_fftw(scratch.data()), as_fftw(scratch.data()),
                                 FFTW_FORWARD, kFlags);
  plans_->bwd = fftw_plan_dft_1d(n, as_fftw(scratch.data()), as_fftw(scratch.data()),
                                 FFTW_BACKWARD, kFlags);
}

Fft1D::~Fft1D() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plans_->fwd);
  fftw_destroy_plan(plans_->bwd);
}

void Fft1D::forward(cplx* data) const {
  fftw_execute_dft(plans_->fwd, as_fftw(data), as_fftw(data));
}
void Fft1D::backward(cplx* data) const {
  fftw_execute_dft(plans_->bwd, as_fftw(data), as_fftw(data));
}

struct Fft2D::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

Fft2D::Fft2D(int n) : n_(n), plans_(std::make_unique<Plans>()) {
  std::vector<cplx> scratch(static_cast<size_t>(n) * n);
  std::lock_guard lock(planner_mutex());
  plans_->fwd = fftw_plan_dft_2d(n, n, as_fftw(scratch.data()), as_fftw(scratch.data()),
                                 FFTW_FORWARD, kFlags);
  plans_->bwd = fftw_plan_dft_2d(n, n, as_fftw(scratch.data()), as_fftw(scratch.data()),
                                 FFTW_BACKWARD, kFlags);
}

Fft2D::~Fft2D() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plans_->fwd);
  fftw_destroy_plan(plans_->bwd);
}

void Fft2D::forward(cplx* data) const {
  fftw_execute_dft(plans_->fwd, as_fftw(data), as_fftw(data));
}
void Fft2D::backward(cplx* data) const {
  fftw_execute_dft(plans_->bwd, as_fftw(data), as_fftw(data));
}

}  // namespace qacoustic
