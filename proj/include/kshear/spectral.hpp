#pragma once

// Spectral representation of real periodic fields on [0,L1) x [0,L2).
//
// Coefficient convention: f(x,y) = sum_{k,j} c(k,j) exp(i(kappa_k x + eta_j y))
// with kappa_k = 2 pi k / L1 and eta_j = 2 pi j / L2, so the forward transform
// divides by Nx*Ny and the inverse is the plain sum. The logical index space is
// k in [-Nx/2, Nx/2), j in [-Ny/2, Ny/2); storage keeps only j >= 0 (the
// remaining half follows from Hermitian symmetry c(-k,-j) = conj(c(k,j))).
//
// Physical samples are row-major with x as the slow index:
// f[ix * Ny + iy] = f(ix * L1 / Nx, iy * L2 / Ny).

#include <complex>
#include <span>
#include <vector>

namespace kshear {

using Complex = std::complex<double>;

struct Grid2D {
  double L1 = 0.0;
  double L2 = 0.0;
  int Nx = 0;
  int Ny = 0;

  Grid2D() = default;
  Grid2D(double l1, double l2, int nx, int ny);

  double kappa(int k) const;
  double eta(int j) const;

  /// Largest |k| (resp. |j|) retained by the 2/3 rule: 3|k| < Nx.
  int dealiasK() const { return (Nx - 1) / 3; }
  int dealiasJ() const { return (Ny - 1) / 3; }

  std::size_t physicalSize() const { return static_cast<std::size_t>(Nx) * Ny; }
  int halfNy() const { return Ny / 2 + 1; }
  double area() const { return L1 * L2; }

  bool operator==(const Grid2D&) const = default;
};

enum class Axis { X, Y };

class SpectralField2D {
public:
  SpectralField2D() = default;
  explicit SpectralField2D(const Grid2D& grid);

  const Grid2D& grid() const { return grid_; }

  /// Coefficient at logical index (k, j); Hermitian partner resolved on read.
  Complex coeff(int k, int j) const;
  /// Sets (k, j) and its Hermitian partner (-k, -j).
  void setCoeff(int k, int j, Complex value);

  std::span<const Complex> half() const { return half_; }
  std::span<Complex> half() { return half_; }

  /// Storage row for logical k, and logical k of a storage row.
  int row(int k) const { return k < 0 ? k + grid_.Nx : k; }
  int kOfRow(int ix) const { return ix < grid_.Nx / 2 ? ix : ix - grid_.Nx; }

  /// Symmetrizes the self-conjugate planes j = 0 and j = Ny/2.
  void enforceHermitian();
  /// Largest |c(k,j) - conj(c(-k,-j))| over the self-conjugate planes.
  double hermitianDefect() const;

  bool allFinite() const;

private:
  Grid2D grid_;
  std::vector<Complex> half_;
};

/// Coefficients of a real function of y alone, indexed by j in [-Ny/2, Ny/2).
class Profile1D {
public:
  Profile1D() = default;
  Profile1D(double L2, int Ny);

  double L2() const { return L2_; }
  int Ny() const { return Ny_; }
  double eta(int j) const;

  Complex coeff(int j) const;
  void setCoeff(int j, Complex value);

  std::span<const Complex> half() const { return half_; }
  std::span<Complex> half() { return half_; }

private:
  double L2_ = 0.0;
  int Ny_ = 0;
  std::vector<Complex> half_;
};

// -- transforms ---------------------------------------------------------------

SpectralField2D forward(const Grid2D& grid, std::span<const double> samples);
std::vector<double> inverse(const SpectralField2D& field);

Profile1D forward(double L2, std::span<const double> samples);
std::vector<double> inverse(const Profile1D& profile);

/// Same function on a different y-grid: zero-padding or truncating the spectrum.
Profile1D resize(const Profile1D& profile, int Ny);

/// Trigonometric interpolation of a profile onto M equispaced points.
std::vector<double> resample(const Profile1D& profile, int M);

/// Value of the order-th y-derivative of the profile's trigonometric series at y.
double evaluate(const Profile1D& profile, double y, int order = 0);

// -- spectral operators ---------------------------------------------------------

/// Multiplies coefficients by (i kappa)^order or (i eta)^order; order <= 4.
SpectralField2D derivative(const SpectralField2D& field, Axis axis, int order);
SpectralField2D laplacian(const SpectralField2D& field);
SpectralField2D bilaplacian(const SpectralField2D& field);
Profile1D derivative(const Profile1D& profile, int order);

/// Zeroes every mode outside the 2/3-rule box.
SpectralField2D dealias(const SpectralField2D& field);
bool isDealiased(const SpectralField2D& field);

/// Pointwise product computed with the 2/3 rule: both factors are truncated,
/// multiplied in physical space and the result truncated again.
SpectralField2D dealiasedProduct(const SpectralField2D& a, const SpectralField2D& b);

/// Product with a y-only factor (e.g. a shear profile); same truncation rules.
SpectralField2D dealiasedProduct(const Profile1D& a, const SpectralField2D& b);

struct Decomposition {
  Profile1D mean;               ///< x-average <f>(y), the k = 0 column.
  SpectralField2D fluctuation;  ///< f - <f>.
};

Decomposition decompose(const SpectralField2D& field);

/// Embeds a y-profile as an x-independent field.
SpectralField2D fromProfile(const Grid2D& grid, const Profile1D& profile);

/// L2(T^2) quantities via Parseval: ||f||^2 = L1 L2 sum |c|^2.
double normSq(const SpectralField2D& field);
double norm(const SpectralField2D& field);
double inner(const SpectralField2D& a, const SpectralField2D& b);
/// L2(T^1) norm squared: L2 sum |c_j|^2.
double normSq(const Profile1D& profile);

SpectralField2D operator+(const SpectralField2D& a, const SpectralField2D& b);
SpectralField2D operator-(const SpectralField2D& a, const SpectralField2D& b);
SpectralField2D operator*(double s, const SpectralField2D& a);

}  // namespace kshear
