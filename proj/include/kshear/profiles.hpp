#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "kshear/spectral.hpp"

namespace kshear {

struct ShearProfile {
  Profile1D samples;
  int declaredOrder = 2;  ///< maximal critical-point order m
  std::string label;

  double L2() const { return samples.L2(); }
  int Ny() const { return samples.Ny(); }
  /// Values on the y-grid.
  std::vector<double> values() const { return inverse(samples); }
};

/// u(y) = sin(2 pi y / L2)^m with declaredOrder max(2, m).
ShearProfile sinPowerProfile(int m, double L2, int Ny);

ShearProfile constantProfile(double value, double L2, int Ny);

/// Builds a profile from equispaced samples of one period (y_i = i L2 / M),
/// interpolated spectrally onto Ny points.
ShearProfile profileFromSamples(const std::vector<double>& u, double L2, int Ny, int declaredOrder,
                                std::string label);

/// Reads "y,u" rows (header and '#' lines skipped). The y column must be an
/// equispaced grid starting at 0 and the row count must be even.
ShearProfile loadProfileCsv(const std::string& path, double L2, int Ny, int declaredOrder);

/// Energy fraction carried by |j| > Ny/4.
double tailEnergyFraction(const Profile1D& profile);

struct CriticalPoint {
  double y = 0.0;
  int order = 0;
};

/// Zeros of u' with their order (smallest q >= 2 with u^(q) != 0). Derivative
/// magnitudes are compared against tol * max|u| * (2 pi / L2)^q, floored at
/// the rounding level of the spectral sum.
/// Throws UnresolvedProfile if tailEnergyFraction > tol.
std::vector<CriticalPoint> criticalPoints(const ShearProfile& profile, double tol = 1e-8);

struct AuditCell {
  double lambda = 0.0;
  double delta = 0.0;
  double c = 0.0;                ///< largest admissible constant (inf if unconstrained)
  std::vector<double> centers;   ///< at most N ball centers
};

struct AssumptionAudit {
  int m = 0;
  int N = 0;
  double delta0 = 0.0;
  std::vector<double> lambdaGrid;
  std::vector<double> deltaGrid;
  std::vector<double> cMinByDelta;  ///< min over lambda for each delta
  double c1Estimate = 0.0;
  double worstLambda = 0.0;
  double worstDelta = 0.0;
  /// Log-log slope of cMinByDelta over the smaller half of the delta grid.
  double smallDeltaSlope = 0.0;
  /// Largest grid delta such that every smaller grid delta has cMin > 0.
  double largestPassingDelta0 = 0.0;
  std::vector<AuditCell> cells;  ///< row-major: lambda outer, delta inner
  bool pass = false;
};

struct AuditOptions {
  int finePoints = 16384;
  int minCellsPerDelta = 8;
  double maxSlope = 0.5;
};

/// Uniform grid over [min u - 1, max u + 1] merged with the critical values of u.
std::vector<double> defaultLambdaGrid(const ShearProfile& profile, int points = 400);
/// 16 log-spaced points strictly inside (delta0 / 100, delta0).
std::vector<double> defaultDeltaGrid(double delta0, int points = 16);
/// Largest delta0 with cos(2 pi delta0 / L2) >= 1/2.
double defaultDelta0(double L2);

AssumptionAudit auditAssumption(const ShearProfile& profile, int m, int N, double delta0,
                                const std::vector<double>& lambdaGrid,
                                const std::vector<double>& deltaGrid,
                                const AuditOptions& options = {});

nlohmann::json toJson(const AssumptionAudit& audit, bool includeCenters = true);

}  // namespace kshear
