#pragma once

#include <complex>
#include <memory>
#include <vector>

namespace qacoustic {

using cplx = std::complex<double>;

/// Unnormalized in-place complex DFTs backed by FFTW.
/// forward: X_k = sum_n x_n e^{-2 pi i k n / n_total}; backward uses e^{+...}.
/// Plans are created with FFTW_ESTIMATE so results do not depend on timing.
/// Execution is thread-safe; construction serializes on a global lock.
class Fft1D {
 public:
  explicit Fft1D(int n);
  ~Fft1D();
  Fft1D(const Fft1D&) = delete;
  Fft1D& operator=(const Fft1D&) = delete;

  int size() const { return n_; }
  void forward(cplx* data) const;
  void backward(cplx* data) const;

 private:
  int n_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

/// Row-major n x n transform; element (ix, iy) lives at iy * n + ix.
class Fft2D {
 public:
  explicit Fft2D(int n);
  ~Fft2D();
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  int size() const { return n_; }
  void forward(cplx* data) const;
  void backward(cplx* data) const;
  void forward(std::vector<cplx>& v) const { forward(v.data()); }
  void backward(std::vector<cplx>& v) const { backward(v.data()); }

 private:
  int n_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

}  // namespace qacoustic
