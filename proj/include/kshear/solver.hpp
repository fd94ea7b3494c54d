#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kshear/profiles.hpp"
#include "kshear/spectral.hpp"

namespace kshear {

struct ModeValue {
  int k = 0;
  int j = 0;
  Complex value;
};

struct InitSpec {
  enum class Kind { Random, Modes, File };
  Kind kind = Kind::Random;

  // Random: |c(k,j)| = amplitude (1 + q^2)^(-decayExponent/2), phases hashed
  // from (seed, k, j) so the data do not depend on the grid size.
  double decayExponent = 4.0;
  double amplitude = 1.0;
  int maxK = -1;  ///< |k| cap, -1 for none
  int maxJ = -1;
  double normalizeTo = -1.0;  ///< rescale to this L2 norm when > 0

  // Modes: explicit coefficients plus a constant.
  std::vector<ModeValue> modes;
  double constant = 0.0;

  // File: spectral checkpoint on the same grid.
  std::string path;
};

struct SolverConfig {
  Grid2D grid;
  double nu = 1e-3;
  ShearProfile profile;
  double dt = 0.01;
  double tEnd = 1.0;
  bool dealias = true;
  bool nonlinear = true;
  std::uint64_t seed = 0;
  InitSpec init;
  int checkEvery = 1;  ///< steps between reality/dealias invariant checks
  std::vector<double> sampleTimes;
};

struct SolverState {
  SpectralField2D phi;
  double t = 0.0;
  std::uint64_t step = 0;
};

/// l(k,j) = nu (q^2 - q^4), q^2 = kappa_k^2 + eta_j^2.
double linearSymbol(const Grid2D& grid, double nu, int k, int j);
/// Symbol in half-spectrum storage order.
std::vector<double> linearSymbol(const Grid2D& grid, double nu);

/// 0.5 / (max|u| kappa_max + nu max(q^2 - q^4)_+ + 1), kappa_max = 2 pi (Nx/2) / L1.
double stabilityCap(const SolverConfig& config);

/// Throws InvalidInput for inconsistent configurations (dt above the cap,
/// tEnd <= 0, profile period mismatch, ...).
void validate(const SolverConfig& config);

/// The shear profile interpolated onto the solver's y-grid.
Profile1D profileOnGrid(const SolverConfig& config);

/// N(phi) = -u d_x phi - (nu/2) |grad phi|^2. Throws BlowUp on non-finite input.
SpectralField2D nonlinearRHS(const SpectralField2D& phi, const Profile1D& u, double nu, bool dealias = true);

SpectralField2D initialField(const SolverConfig& config);

/// ETDRK4 on the diagonal symbol; phi-functions by a 32-point contour mean.
class Stepper {
public:
  explicit Stepper(const SolverConfig& config);
  SolverState step(const SolverState& s) const;
  const SolverConfig& config() const { return config_; }
  const Profile1D& u() const { return u_; }

private:
  SpectralField2D rhs(const SpectralField2D& phi) const;

  SolverConfig config_;
  Profile1D u_;
  std::vector<double> uPhys_;
  std::vector<double> E_, E2_;
  std::vector<double> Q_, f1_, f2_, f3_;
};

struct Trajectory {
  std::vector<SolverState> samples;
  SolverState last;  ///< final state, or the last finite state before blow-up
  bool blewUp = false;
  double blowUpTime = 0.0;
};

using StepObserver = std::function<void(const SolverState&)>;

/// Steps from the initial field to tEnd with fixed dt; the observer sees the
/// initial state and every subsequent one. Samples are the steps nearest to
/// the requested sample times.
Trajectory run(const SolverConfig& config, const StepObserver& observer = {});

struct GrowthCheck {
  double measuredRate = 0.0;
  double expectedRate = 0.0;
  bool contaminated = false;  ///< amplitude above the linear regime (1e-6)
};

/// Runs the full equation from a single mode (k,j) of the given amplitude
/// with u = 0 and fits d log|c(k,j)| / dt over the run.
GrowthCheck linearizedGrowthCheck(const SolverConfig& config, int k, int j, double amplitude);

}  // namespace kshear
