#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kshear/profiles.hpp"

namespace kshear {

/// full: nu (kappa^2 + eta^2)^2 + i kappa u;  hypoelliptic: nu eta^4 + i kappa u.
enum class Variant { Full, Hypoelliptic };

std::string toString(Variant v);
Variant parseVariant(const std::string& s);

/// H = nu Delta_k^2 + i kappa u(y) on y-Fourier modes |j| <= J, index r = j + J.
/// kappa is the physical wavenumber 2 pi k / L1.
class ModeOperator {
public:
  double nu() const { return nu_; }
  double kappa() const { return kappa_; }
  int J() const { return J_; }
  int size() const { return 2 * J_ + 1; }
  Variant variant() const { return variant_; }
  const ShearProfile& profile() const { return profile_; }

  /// Real diagonal D.
  const Eigen::VectorXd& diagonal() const { return diag_; }
  /// uhat_d for d = -bandwidth..bandwidth (index d + bandwidth); T(r, r') = uhat_{r - r'}.
  const std::vector<Complex>& uhat() const { return uhat_; }
  /// Largest |d| with uhat_d treated as nonzero.
  int bandwidth() const { return bandwidth_; }

  /// Dense D + i kappa T.
  Eigen::MatrixXcd matrix() const;
  /// Hermitian convolution matrix T.
  Eigen::MatrixXcd toeplitz() const;

  double minU() const { return minU_; }
  double maxU() const { return maxU_; }

private:
  friend ModeOperator assemble(double, double, const ShearProfile&, int, Variant);

  double nu_ = 0.0;
  double kappa_ = 0.0;
  int J_ = 0;
  Variant variant_ = Variant::Full;
  ShearProfile profile_;
  Eigen::VectorXd diag_;
  std::vector<Complex> uhat_;
  int bandwidth_ = 0;
  double minU_ = 0.0;
  double maxU_ = 0.0;
};

/// Throws UnresolvedProfile (with the required J) if the profile's relative
/// spectral tail beyond J exceeds 1e-12.
ModeOperator assemble(double nu, double kappa, const ShearProfile& profile, int J,
                      Variant variant = Variant::Full);

/// Smallest singular value of (H - i lambda I): banded LU of the shifted
/// matrix, Lanczos on its inverse Gram operator. 0 if the shift is singular.
double resolventMinSV(const ModeOperator& op, double lambda);

struct PsiResult {
  double psi = 0.0;
  double argminLambda = 0.0;
};

struct PsiOptions {
  int gridPoints = 801;
};

/// min over real lambda of resolventMinSV: dense scan of
/// [min(kappa u) - 2 nu kappa^4 - 1, max(kappa u) + 2 nu kappa^4 + 1], then
/// golden-section refinement around each grid-local minimum down to a
/// lambda bracket of searchTol.
PsiResult psi(const ModeOperator& op, double searchTol = 1e-9, const PsiOptions& options = {});

/// exp(A) by scaling and squaring with a diagonal Pade approximant.
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& A);

struct NormResult {
  double value = 0.0;
  bool underflow = false;
};

/// ||exp(-t H)||_2, largest singular value by dense SVD.
NormResult semigroupNorm(const ModeOperator& op, double t);

struct RateResult {
  double rate = 0.0;
  double crossingTime = 0.0;
  bool failed = false;  ///< threshold not reached for t <= 1e8
};

/// -log(threshold) / t* with t* the first time ||exp(-tH)|| <= threshold.
/// psiHint (if positive) supplies the bracket t <= (pi/2 - log threshold) / psi.
RateResult measuredDecayRate(const ModeOperator& op, double threshold, double psiHint = -1.0);

struct DecayMeasurement {
  std::string variant;
  std::string profile;
  int mEff = 0;
  double nu = 0.0;
  double kappa = 0.0;
  int J = 0;
  double psi = 0.0;
  double argminLambda = 0.0;
  double rateThreshold = 0.0;
  double measuredRate = 0.0;  ///< NaN when not measured
  /// exp(-t* psi + pi/2) - threshold: nonnegative iff the bound holds at t*.
  double gpMargin = 0.0;
  bool jConverged = false;
  double jRelativeChange = 0.0;
  bool rateFailed = false;
};

struct MeasureOptions {
  double searchTol = 1e-9;
  double threshold = 0.1353352832366127;  // e^-2
  bool measureRate = true;
  bool doublingCheck = true;
  double doublingTol = 1e-6;
  PsiOptions psiOptions;
};

DecayMeasurement measure(double nu, double kappa, const ShearProfile& profile, int J, Variant variant,
                         const MeasureOptions& options = {});

enum class FitQuantity { Psi, MeasuredRate };
enum class FitVariable { Nu, Kappa };

struct ScalingFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double residual = 0.0;  ///< max relative deviation of the data from the fit
};

/// Log-log least squares of quantity against variable. Needs >= 4 points,
/// the other variable fixed, and a span of at least minDecades decades.
ScalingFit fitScaling(const std::vector<DecayMeasurement>& data, FitQuantity quantity,
                      FitVariable variable, double minDecades = 2.0);

}  // namespace kshear
