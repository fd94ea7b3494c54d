#include "kshear/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "kshear/errors.hpp"

namespace kshear {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// (i w)^order for real w.
Complex iPow(double w, int order) {
  static constexpr Complex kUnit[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return kUnit[order % 4] * std::pow(w, order);
}

// Weight of a stored half-spectrum column in a full-lattice sum.
double columnWeight(int jy, int Ny) {
  return (jy == 0 || jy == Ny / 2) ? 1.0 : 2.0;
}

void requireSameGrid(const SpectralField2D& a, const SpectralField2D& b, const char* op) {
  if (!(a.grid() == b.grid())) {
    throw InvalidInput(std::string(op) + ": operands live on different grids");
  }
}

}  // namespace

// -- Grid2D -------------------------------------------------------------------

Grid2D::Grid2D(double l1, double l2, int nx, int ny) : L1(l1), L2(l2), Nx(nx), Ny(ny) {
  if (!(l1 > 0.0) || !(l2 > 0.0)) throw InvalidInput("Grid2D: periods must be positive");
  if (nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0) {
    throw InvalidInput("Grid2D: Nx and Ny must be even and >= 8");
  }
}

double Grid2D::kappa(int k) const { return (kTwoPi / L1) * k; }
double Grid2D::eta(int j) const { return (kTwoPi / L2) * j; }

// -- SpectralField2D ----------------------------------------------------------

SpectralField2D::SpectralField2D(const Grid2D& grid)
    : grid_(grid), half_(static_cast<std::size_t>(grid.Nx) * grid.halfNy()) {}

Complex SpectralField2D::coeff(int k, int j) const {
  const int H = grid_.halfNy();
  if (j >= 0) return half_[static_cast<std::size_t>(row(k)) * H + j];
  if (j == -grid_.Ny / 2) return half_[static_cast<std::size_t>(row(k)) * H + grid_.Ny / 2];
  const int mk = (k == -grid_.Nx / 2) ? k : -k;
  return std::conj(half_[static_cast<std::size_t>(row(mk)) * H - j]);
}

void SpectralField2D::setCoeff(int k, int j, Complex value) {
  const int H = grid_.halfNy();
  const int mk = (k == -grid_.Nx / 2) ? k : -k;
  if (j == 0 || j == -grid_.Ny / 2) {
    const int col = (j == 0) ? 0 : grid_.Ny / 2;
    if (row(k) == row(mk)) value = Complex(value.real(), 0.0);
    half_[static_cast<std::size_t>(row(k)) * H + col] = value;
    half_[static_cast<std::size_t>(row(mk)) * H + col] = std::conj(value);
  } else if (j > 0) {
    half_[static_cast<std::size_t>(row(k)) * H + j] = value;
  } else {
    half_[static_cast<std::size_t>(row(mk)) * H - j] = std::conj(value);
  }
}

void SpectralField2D::enforceHermitian() {
  const int H = grid_.halfNy();
  for (int col : {0, grid_.Ny / 2}) {
    for (int ix = 0; ix < grid_.Nx; ++ix) {
      const int jx = (grid_.Nx - ix) % grid_.Nx;
      if (jx < ix) continue;
      Complex& a = half_[static_cast<std::size_t>(ix) * H + col];
      Complex& b = half_[static_cast<std::size_t>(jx) * H + col];
      const Complex avg = 0.5 * (a + std::conj(b));
      a = avg;
      b = std::conj(avg);
    }
  }
}

double SpectralField2D::hermitianDefect() const {
  const int H = grid_.halfNy();
  double worst = 0.0;
  for (int col : {0, grid_.Ny / 2}) {
    for (int ix = 0; ix < grid_.Nx; ++ix) {
      const int jx = (grid_.Nx - ix) % grid_.Nx;
      const Complex a = half_[static_cast<std::size_t>(ix) * H + col];
      const Complex b = half_[static_cast<std::size_t>(jx) * H + col];
      worst = std::max(worst, std::abs(a - std::conj(b)));
    }
  }
  return worst;
}

bool SpectralField2D::allFinite() const {
  return std::all_of(half_.begin(), half_.end(), [](const Complex& c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
  });
}

// -- Profile1D ------------------------------------------------------------------

Profile1D::Profile1D(double L2, int Ny) : L2_(L2), Ny_(Ny), half_(static_cast<std::size_t>(Ny / 2 + 1)) {
  if (!(L2 > 0.0)) throw InvalidInput("Profile1D: period must be positive");
  if (Ny < 2 || Ny % 2 != 0) throw InvalidInput("Profile1D: Ny must be even");
}

double Profile1D::eta(int j) const { return (kTwoPi / L2_) * j; }

Complex Profile1D::coeff(int j) const {
  if (j >= 0) return half_[static_cast<std::size_t>(j)];
  if (j == -Ny_ / 2) return half_[static_cast<std::size_t>(Ny_ / 2)];
  return std::conj(half_[static_cast<std::size_t>(-j)]);
}

void Profile1D::setCoeff(int j, Complex value) {
  if (j == 0 || j == -Ny_ / 2) {
    half_[static_cast<std::size_t>(j == 0 ? 0 : Ny_ / 2)] = Complex(value.real(), 0.0);
  } else if (j > 0) {
    half_[static_cast<std::size_t>(j)] = value;
  } else {
    half_[static_cast<std::size_t>(-j)] = std::conj(value);
  }
}

// -- transforms -----------------------------------------------------------------

SpectralField2D forward(const Grid2D& grid, std::span<const double> samples) {
  if (samples.size() != grid.physicalSize()) {
    throw InvalidInput("forward: expected " + std::to_string(grid.Nx) + "x" +
                       std::to_string(grid.Ny) + " samples, got " +
                       std::to_string(samples.size()));
  }
  SpectralField2D out(grid);
  detail::fft2d(grid.Nx, grid.Ny).forward(samples, out.half());
  return out;
}

std::vector<double> inverse(const SpectralField2D& field) {
  const Grid2D& g = field.grid();
  std::vector<double> out(g.physicalSize());
  detail::fft2d(g.Nx, g.Ny).inverse(field.half(), out);
  return out;
}

Profile1D forward(double L2, std::span<const double> samples) {
  Profile1D out(L2, static_cast<int>(samples.size()));
  detail::fft1d(out.Ny()).forward(samples, out.half());
  return out;
}

std::vector<double> inverse(const Profile1D& profile) {
  std::vector<double> out(static_cast<std::size_t>(profile.Ny()));
  detail::fft1d(profile.Ny()).inverse(profile.half(), out);
  return out;
}

Profile1D resize(const Profile1D& profile, int Ny) {
  Profile1D out(profile.L2(), Ny);
  const int n = std::min(profile.Ny(), Ny) / 2;
  for (int j = 0; j < n; ++j) out.half()[static_cast<std::size_t>(j)] = profile.half()[static_cast<std::size_t>(j)];
  if (Ny > profile.Ny()) {
    // The old Nyquist term c cos(eta y) becomes a +/- pair of c/2.
    out.half()[static_cast<std::size_t>(profile.Ny() / 2)] = 0.5 * profile.half()[static_cast<std::size_t>(profile.Ny() / 2)];
  }
  return out;
}

std::vector<double> resample(const Profile1D& profile, int M) {
  if (M < profile.Ny() || M % 2 != 0) throw InvalidInput("resample: M must be even and >= Ny");
  return inverse(resize(profile, M));
}

double evaluate(const Profile1D& profile, double y, int order) {
  const int Ny = profile.Ny();
  double sum = (order == 0) ? profile.half()[0].real() : 0.0;
  for (int j = 1; j < Ny / 2; ++j) {
    const double w = profile.eta(j);
    sum += 2.0 * (profile.half()[static_cast<std::size_t>(j)] * iPow(w, order) *
                  std::polar(1.0, w * y)).real();
  }
  const double wn = profile.eta(Ny / 2);
  sum += profile.half()[static_cast<std::size_t>(Ny / 2)].real() * std::pow(wn, order) *
         std::cos(wn * y + order * std::numbers::pi / 2.0);
  return sum;
}

// -- spectral operators -----------------------------------------------------------

SpectralField2D derivative(const SpectralField2D& field, Axis axis, int order) {
  if (order < 0 || order > 4) throw InvalidInput("derivative: order must be in [0, 4]");
  const Grid2D& g = field.grid();
  const int H = g.halfNy();
  SpectralField2D out = field;
  auto data = out.half();
  for (int ix = 0; ix < g.Nx; ++ix) {
    const int k = field.kOfRow(ix);
    for (int jy = 0; jy < H; ++jy) {
      Complex m;
      if (axis == Axis::X) {
        m = (order % 2 == 1 && k == -g.Nx / 2) ? Complex(0.0) : iPow(g.kappa(k), order);
      } else {
        m = (order % 2 == 1 && jy == g.Ny / 2) ? Complex(0.0) : iPow(g.eta(jy), order);
      }
      data[static_cast<std::size_t>(ix) * H + jy] *= m;
    }
  }
  return out;
}

SpectralField2D laplacian(const SpectralField2D& field) {
  const Grid2D& g = field.grid();
  const int H = g.halfNy();
  SpectralField2D out = field;
  auto data = out.half();
  for (int ix = 0; ix < g.Nx; ++ix) {
    const double kx = g.kappa(field.kOfRow(ix));
    for (int jy = 0; jy < H; ++jy) {
      const double ky = g.eta(jy);
      data[static_cast<std::size_t>(ix) * H + jy] *= -(kx * kx + ky * ky);
    }
  }
  return out;
}

SpectralField2D bilaplacian(const SpectralField2D& field) { return laplacian(laplacian(field)); }

Profile1D derivative(const Profile1D& profile, int order) {
  if (order < 0) throw InvalidInput("derivative: negative order");
  Profile1D out = profile;
  const int Ny = profile.Ny();
  for (int j = 0; j <= Ny / 2; ++j) {
    const Complex m = (order % 2 == 1 && j == Ny / 2) ? Complex(0.0) : iPow(profile.eta(j), order);
    out.half()[static_cast<std::size_t>(j)] *= m;
  }
  return out;
}

SpectralField2D dealias(const SpectralField2D& field) {
  const Grid2D& g = field.grid();
  const int H = g.halfNy();
  const int kmax = g.dealiasK();
  const int jmax = g.dealiasJ();
  SpectralField2D out = field;
  auto data = out.half();
  for (int ix = 0; ix < g.Nx; ++ix) {
    const bool keepRow = std::abs(field.kOfRow(ix)) <= kmax;
    for (int jy = 0; jy < H; ++jy) {
      if (!keepRow || jy > jmax) data[static_cast<std::size_t>(ix) * H + jy] = 0.0;
    }
  }
  return out;
}

bool isDealiased(const SpectralField2D& field) {
  const Grid2D& g = field.grid();
  const int H = g.halfNy();
  for (int ix = 0; ix < g.Nx; ++ix) {
    const bool keepRow = std::abs(field.kOfRow(ix)) <= g.dealiasK();
    for (int jy = 0; jy < H; ++jy) {
      if ((!keepRow || jy > g.dealiasJ()) &&
          field.half()[static_cast<std::size_t>(ix) * H + jy] != Complex(0.0)) {
        return false;
      }
    }
  }
  return true;
}

SpectralField2D dealiasedProduct(const SpectralField2D& a, const SpectralField2D& b) {
  requireSameGrid(a, b, "dealiasedProduct");
  std::vector<double> fa = inverse(dealias(a));
  const std::vector<double> fb = inverse(dealias(b));
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  return dealias(forward(a.grid(), fa));
}

SpectralField2D dealiasedProduct(const Profile1D& a, const SpectralField2D& b) {
  return dealiasedProduct(fromProfile(b.grid(), a), b);
}

Decomposition decompose(const SpectralField2D& field) {
  const Grid2D& g = field.grid();
  const int H = g.halfNy();
  Decomposition d{Profile1D(g.L2, g.Ny), field};
  std::copy_n(field.half().begin(), H, d.mean.half().begin());
  std::fill_n(d.fluctuation.half().begin(), H, Complex(0.0));
  return d;
}

SpectralField2D fromProfile(const Grid2D& grid, const Profile1D& profile) {
  if (profile.Ny() != grid.Ny || profile.L2() != grid.L2) {
    throw InvalidInput("fromProfile: profile y-grid does not match the field grid");
  }
  SpectralField2D out(grid);
  std::copy(profile.half().begin(), profile.half().end(), out.half().begin());
  return out;
}

double normSq(const SpectralField2D& field) { return inner(field, field); }

double norm(const SpectralField2D& field) { return std::sqrt(normSq(field)); }

double inner(const SpectralField2D& a, const SpectralField2D& b) {
  requireSameGrid(a, b, "inner");
  const Grid2D& g = a.grid();
  const int H = g.halfNy();
  double sum = 0.0;
  for (int ix = 0; ix < g.Nx; ++ix) {
    for (int jy = 0; jy < H; ++jy) {
      const std::size_t i = static_cast<std::size_t>(ix) * H + jy;
      sum += columnWeight(jy, g.Ny) * (a.half()[i] * std::conj(b.half()[i])).real();
    }
  }
  return g.area() * sum;
}

double normSq(const Profile1D& profile) {
  double sum = 0.0;
  for (int j = 0; j <= profile.Ny() / 2; ++j) {
    sum += columnWeight(j, profile.Ny()) * std::norm(profile.half()[static_cast<std::size_t>(j)]);
  }
  return profile.L2() * sum;
}

SpectralField2D operator+(const SpectralField2D& a, const SpectralField2D& b) {
  requireSameGrid(a, b, "operator+");
  SpectralField2D out = a;
  for (std::size_t i = 0; i < out.half().size(); ++i) out.half()[i] += b.half()[i];
  return out;
}

SpectralField2D operator-(const SpectralField2D& a, const SpectralField2D& b) {
  requireSameGrid(a, b, "operator-");
  SpectralField2D out = a;
  for (std::size_t i = 0; i < out.half().size(); ++i) out.half()[i] -= b.half()[i];
  return out;
}

SpectralField2D operator*(double s, const SpectralField2D& a) {
  SpectralField2D out = a;
  for (auto& c : out.half()) c *= s;
  return out;
}

}  // namespace kshear
