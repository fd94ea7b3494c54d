#include "fft.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <utility>

namespace kshear::detail {
namespace {

// The FFTW planner is not reentrant.
std::mutex& plannerMutex() {
  static std::mutex m;
  return m;
}

template <typename T>
T* allocate(std::size_t n) {
  void* p = fftw_malloc(sizeof(T) * n);
  if (p == nullptr) throw std::bad_alloc();
  return static_cast<T*>(p);
}

}  // namespace

Fft2D::Fft2D(int nx, int ny) : nx_(nx), ny_(ny) {
  const std::size_t nr = static_cast<std::size_t>(nx) * ny;
  const std::size_t nc = static_cast<std::size_t>(nx) * (ny / 2 + 1);
  real_ = allocate<double>(nr);
  spec_ = allocate<fftw_complex>(nc);
  std::lock_guard lock(plannerMutex());
  r2c_ = fftw_plan_dft_r2c_2d(nx, ny, real_, spec_, FFTW_ESTIMATE);
  c2r_ = fftw_plan_dft_c2r_2d(nx, ny, spec_, real_, FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
}

Fft2D::~Fft2D() {
  std::lock_guard lock(plannerMutex());
  fftw_destroy_plan(r2c_);
  fftw_destroy_plan(c2r_);
  fftw_free(real_);
  fftw_free(spec_);
}

void Fft2D::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.end(), real_);
  fftw_execute(r2c_);
  const double scale = 1.0 / (static_cast<double>(nx_) * ny_);
  const auto* s = reinterpret_cast<const std::complex<double>*>(spec_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s[i] * scale;
}

void Fft2D::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  std::memcpy(spec_, in.data(), in.size() * sizeof(fftw_complex));
  fftw_execute(c2r_);
  std::copy(real_, real_ + out.size(), out.begin());
}

Fft1D::Fft1D(int n) : n_(n) {
  real_ = allocate<double>(static_cast<std::size_t>(n));
  spec_ = allocate<fftw_complex>(static_cast<std::size_t>(n / 2 + 1));
  std::lock_guard lock(plannerMutex());
  r2c_ = fftw_plan_dft_r2c_1d(n, real_, spec_, FFTW_ESTIMATE);
  c2r_ = fftw_plan_dft_c2r_1d(n, spec_, real_, FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
}

Fft1D::~Fft1D() {
  std::lock_guard lock(plannerMutex());
  fftw_destroy_plan(r2c_);
  fftw_destroy_plan(c2r_);
  fftw_free(real_);
  fftw_free(spec_);
}

void Fft1D::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.end(), real_);
  fftw_execute(r2c_);
  const double scale = 1.0 / n_;
  const auto* s = reinterpret_cast<const std::complex<double>*>(spec_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s[i] * scale;
}

void Fft1D::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  std::memcpy(spec_, in.data(), in.size() * sizeof(fftw_complex));
  fftw_execute(c2r_);
  std::copy(real_, real_ + out.size(), out.begin());
}

Fft2D& fft2d(int nx, int ny) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<Fft2D>> cache;
  auto& slot = cache[{nx, ny}];
  if (!slot) slot = std::make_unique<Fft2D>(nx, ny);
  return *slot;
}

Fft1D& fft1d(int n) {
  thread_local std::map<int, std::unique_ptr<Fft1D>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fft1D>(n);
  return *slot;
}

}  // namespace kshear::detail
