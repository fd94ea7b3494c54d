#pragma once

#include <complex>
#include <span>

#include <fftw3.h>

namespace kshear::detail {

// Real-to-complex FFTW plans with private aligned buffers. An instance is not
// safe to share between threads; fft2d()/fft1d() hand out thread-local ones.
class Fft2D {
public:
  Fft2D(int nx, int ny);
  ~Fft2D();
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  /// out = FFT(in) / (nx * ny); out has nx * (ny/2 + 1) entries.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  /// out = unnormalized inverse of in.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

private:
  int nx_;
  int ny_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan r2c_ = nullptr;
  fftw_plan c2r_ = nullptr;
};

class Fft1D {
public:
  explicit Fft1D(int n);
  ~Fft1D();
  Fft1D(const Fft1D&) = delete;
  Fft1D& operator=(const Fft1D&) = delete;

  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

private:
  int n_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan r2c_ = nullptr;
  fftw_plan c2r_ = nullptr;
};

Fft2D& fft2d(int nx, int ny);
Fft1D& fft1d(int n);

}  // namespace kshear::detail
