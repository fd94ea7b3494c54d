#include "kshear/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kshear/errors.hpp"
#include "kshear/field_io.hpp"

namespace kshear {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kContourPoints = 32;
constexpr double kBlowUpNorm = 1e8;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform phase in [0, 2 pi) determined by (seed, k, j) alone.
double hashedPhase(std::uint64_t seed, int k, int j) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(k)));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(static_cast<std::int64_t>(j)) << 1));
  return kTwoPi * static_cast<double>(h >> 11) * 0x1.0p-53;
}

// -u phi_x - (nu/2)|grad phi|^2 from physical samples of u.
SpectralField2D rhsFromPhysicalU(const SpectralField2D& phi, const std::vector<double>& uPhys, double nu,
                                 bool dealiasOn) {
  if (!phi.allFinite()) throw BlowUp("nonlinearRHS: non-finite field", std::numeric_limits<double>::quiet_NaN());
  SpectralField2D dx = derivative(phi, Axis::X, 1);
  SpectralField2D dy = derivative(phi, Axis::Y, 1);
  if (dealiasOn) {
    dx = dealias(dx);
    dy = dealias(dy);
  }
  const std::vector<double> px = inverse(dx);
  const std::vector<double> py = inverse(dy);
  const std::size_t Ny = static_cast<std::size_t>(phi.grid().Ny);
  std::vector<double> out(px.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = -uPhys[i % Ny] * px[i] - 0.5 * nu * (px[i] * px[i] + py[i] * py[i]);
  }
  SpectralField2D n = forward(phi.grid(), out);
  return dealiasOn ? dealias(n) : n;
}

std::vector<double> physicalU(const Profile1D& u, bool dealiasOn) {
  if (!dealiasOn) return inverse(u);
  Profile1D t = u;
  for (int j = 0; j <= u.Ny() / 2; ++j) {
    if (3 * j >= u.Ny()) t.half()[static_cast<std::size_t>(j)] = 0.0;
  }
  return inverse(t);
}

}  // namespace

double linearSymbol(const Grid2D& grid, double nu, int k, int j) {
  const double q2 = grid.kappa(k) * grid.kappa(k) + grid.eta(j) * grid.eta(j);
  return nu * (q2 - q2 * q2);
}

std::vector<double> linearSymbol(const Grid2D& grid, double nu) {
  const int H = grid.halfNy();
  std::vector<double> out(static_cast<std::size_t>(grid.Nx) * H);
  SpectralField2D probe(grid);
  for (int ix = 0; ix < grid.Nx; ++ix) {
    for (int j = 0; j < H; ++j) {
      out[static_cast<std::size_t>(ix) * H + j] = linearSymbol(grid, nu, probe.kOfRow(ix), j);
    }
  }
  return out;
}

Profile1D profileOnGrid(const SolverConfig& config) {
  if (std::abs(config.profile.L2() - config.grid.L2) > 1e-12 * config.grid.L2) {
    throw InvalidInput("solver: profile period differs from L2");
  }
  Profile1D p = resize(config.profile.samples, config.grid.Ny);
  Profile1D out(config.grid.L2, config.grid.Ny);
  std::copy(p.half().begin(), p.half().end(), out.half().begin());
  return out;
}

double stabilityCap(const SolverConfig& config) {
  const Grid2D& g = config.grid;
  const auto u = resample(profileOnGrid(config), std::max(4096, g.Ny));
  double umax = 0.0;
  for (double v : u) umax = std::max(umax, std::abs(v));
  const double kappaMax = kTwoPi * (g.Nx / 2) / g.L1;
  double growth = 0.0;
  for (int k = -g.Nx / 2; k < g.Nx / 2; ++k) {
    for (int j = -g.Ny / 2; j < g.Ny / 2; ++j) {
      const double q2 = g.kappa(k) * g.kappa(k) + g.eta(j) * g.eta(j);
      growth = std::max(growth, q2 - q2 * q2);
    }
  }
  return 0.5 / (umax * kappaMax + config.nu * growth + 1.0);
}

void validate(const SolverConfig& config) {
  if (!(config.nu > 0.0) || !std::isfinite(config.nu)) throw InvalidInput("solver: nu must be positive");
  if (!(config.tEnd > 0.0) || !std::isfinite(config.tEnd)) throw InvalidInput("solver: tEnd must be positive");
  if (!(config.dt > 0.0)) throw InvalidInput("solver: dt must be positive");
  if (config.checkEvery < 1) throw InvalidInput("solver: checkEvery must be >= 1");
  const double cap = stabilityCap(config);
  if (config.dt > cap) {
    throw InvalidInput("solver: dt = " + std::to_string(config.dt) + " exceeds the stability cap " +
                       std::to_string(cap));
  }
  for (double t : config.sampleTimes) {
    if (t < 0.0 || t > config.tEnd * (1 + 1e-12)) throw InvalidInput("solver: sample time outside [0, tEnd]");
  }
}

SpectralField2D nonlinearRHS(const SpectralField2D& phi, const Profile1D& u, double nu, bool dealiasOn) {
  if (u.Ny() != phi.grid().Ny) throw InvalidInput("nonlinearRHS: profile and field y-grids differ");
  return rhsFromPhysicalU(phi, physicalU(u, dealiasOn), nu, dealiasOn);
}

SpectralField2D initialField(const SolverConfig& config) {
  const Grid2D& g = config.grid;
  const InitSpec& init = config.init;
  SpectralField2D phi(g);
  switch (init.kind) {
    case InitSpec::Kind::Random: {
      const int K = config.dealias ? g.dealiasK() : g.Nx / 2 - 1;
      const int J = config.dealias ? g.dealiasJ() : g.Ny / 2 - 1;
      for (int k = -K; k <= K; ++k) {
        if (init.maxK >= 0 && std::abs(k) > init.maxK) continue;
        for (int j = 0; j <= J; ++j) {
          if (init.maxJ >= 0 && j > init.maxJ) continue;
          if (j == 0 && k <= 0) continue;  // (0,0) left at zero; k < 0 set via Hermitian symmetry
          const double q2 = g.kappa(k) * g.kappa(k) + g.eta(j) * g.eta(j);
          const double mod = init.amplitude * std::pow(1.0 + q2, -init.decayExponent / 2.0);
          phi.setCoeff(k, j, std::polar(mod, hashedPhase(config.seed, k, j)));
        }
      }
      break;
    }
    case InitSpec::Kind::Modes: {
      for (const auto& m : init.modes) {
        if (m.k < -g.Nx / 2 || m.k >= g.Nx / 2 || m.j < -g.Ny / 2 || m.j >= g.Ny / 2) {
          throw InvalidInput("initialField: mode outside the grid");
        }
        phi.setCoeff(m.k, m.j, m.value);
      }
      phi.setCoeff(0, 0, init.constant);
      break;
    }
    case InitSpec::Kind::File: {
      FieldCheckpoint cp = readCheckpoint(std::filesystem::path(init.path));
      if (!(cp.field.grid() == g)) throw InvalidInput("initialField: checkpoint grid differs from the config grid");
      phi = cp.field;
      break;
    }
  }
  if (init.normalizeTo > 0.0) {
    const double n = norm(phi);
    if (n == 0.0) throw InvalidInput("initialField: cannot normalize a zero field");
    phi = (init.normalizeTo / n) * phi;
  }
  if (config.dealias) phi = dealias(phi);
  return phi;
}

Stepper::Stepper(const SolverConfig& config)
    : config_(config), u_(profileOnGrid(config)), uPhys_(physicalU(u_, config.dealias)) {
  const auto ell = linearSymbol(config.grid, config.nu);
  const double h = config.dt;
  const std::size_t n = ell.size();
  E_.resize(n);
  E2_.resize(n);
  Q_.resize(n);
  f1_.resize(n);
  f2_.resize(n);
  f3_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double L = ell[i] * h;
    E_[i] = std::exp(L);
    E2_[i] = std::exp(L / 2.0);
    Complex q = 0.0, a = 0.0, b = 0.0, c = 0.0;
    for (int p = 0; p < kContourPoints; ++p) {
      const Complex z = L + std::polar(1.0, std::numbers::pi * (p + 0.5) / kContourPoints * 2.0);
      const Complex ez = std::exp(z);
      const Complex z3 = z * z * z;
      q += (std::exp(z / 2.0) - 1.0) / z;
      a += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
      b += (2.0 + z + ez * (z - 2.0)) / z3;
      c += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
    }
    Q_[i] = h * q.real() / kContourPoints;
    f1_[i] = h * a.real() / kContourPoints;
    f2_[i] = h * b.real() / kContourPoints;
    f3_[i] = h * c.real() / kContourPoints;
  }
}

SpectralField2D Stepper::rhs(const SpectralField2D& phi) const {
  if (!config_.nonlinear) return SpectralField2D(phi.grid());
  return rhsFromPhysicalU(phi, uPhys_, config_.nu, config_.dealias);
}

SolverState Stepper::step(const SolverState& s) const {
  const auto& v = s.phi;
  const std::size_t n = v.half().size();
  auto combine = [&](auto&& fn) {
    SpectralField2D out(v.grid());
    auto o = out.half();
    for (std::size_t i = 0; i < n; ++i) o[i] = fn(i);
    return out;
  };
  const auto vh = v.half();
  const SpectralField2D Nv = rhs(v);
  const auto nv = Nv.half();
  const SpectralField2D a = combine([&](std::size_t i) { return E2_[i] * vh[i] + Q_[i] * nv[i]; });
  const SpectralField2D Na = rhs(a);
  const auto na = Na.half();
  const SpectralField2D b = combine([&](std::size_t i) { return E2_[i] * vh[i] + Q_[i] * na[i]; });
  const SpectralField2D Nb = rhs(b);
  const auto nb = Nb.half();
  const auto ah = a.half();
  const SpectralField2D c = combine([&](std::size_t i) { return E2_[i] * ah[i] + Q_[i] * (2.0 * nb[i] - nv[i]); });
  const SpectralField2D Nc = rhs(c);
  const auto nc = Nc.half();
  SolverState out;
  out.phi = combine([&](std::size_t i) {
    return E_[i] * vh[i] + f1_[i] * nv[i] + 2.0 * f2_[i] * (na[i] + nb[i]) + f3_[i] * nc[i];
  });
  out.step = s.step + 1;
  out.t = static_cast<double>(out.step) * config_.dt;
  return out;
}

Trajectory run(const SolverConfig& config, const StepObserver& observer) {
  validate(config);
  const Stepper stepper(config);
  const auto nSteps = static_cast<std::uint64_t>(std::llround(std::ceil(config.tEnd / config.dt - 1e-9)));

  std::vector<std::uint64_t> sampleSteps;
  for (double t : config.sampleTimes) sampleSteps.push_back(static_cast<std::uint64_t>(std::llround(t / config.dt)));

  Trajectory traj;
  SolverState s{initialField(config), 0.0, 0};
  auto record = [&](const SolverState& st) {
    for (auto step : sampleSteps) {
      if (step == st.step) traj.samples.push_back(st);
    }
    if (observer) observer(st);
  };
  record(s);
  for (std::uint64_t i = 0; i < nSteps; ++i) {
    SolverState next;
    try {
      next = stepper.step(s);
    } catch (const BlowUp&) {
      traj.blewUp = true;
      traj.blowUpTime = s.t;
      break;
    }
    const double nrm = norm(next.phi);
    if (!std::isfinite(nrm) || nrm > kBlowUpNorm) {
      traj.blewUp = true;
      traj.blowUpTime = next.t;
      break;
    }
    if (next.step % static_cast<std::uint64_t>(config.checkEvery) == 0) {
      const double scale = std::max(1.0, nrm);
      if (next.phi.hermitianDefect() > 1e-12 * scale) throw std::logic_error("solver: reality invariant violated");
      if (config.dealias && !isDealiased(next.phi)) throw std::logic_error("solver: dealias invariant violated");
    }
    s = std::move(next);
    record(s);
  }
  traj.last = s;
  return traj;
}

GrowthCheck linearizedGrowthCheck(const SolverConfig& config, int k, int j, double amplitude) {
  SolverConfig c = config;
  const auto u = resample(profileOnGrid(config), std::max(64, config.grid.Ny));
  for (double v : u) {
    if (v != 0.0) throw InvalidInput("linearizedGrowthCheck: requires u = 0");
  }
  c.init = InitSpec{};
  c.init.kind = InitSpec::Kind::Modes;
  c.init.modes = {{k, j, Complex(amplitude, 0.0)}};
  c.sampleTimes.clear();
  GrowthCheck out;
  out.expectedRate = linearSymbol(config.grid, config.nu, k, j);
  out.contaminated = amplitude > 1e-6;
  std::vector<double> ts, ls;
  run(c, [&](const SolverState& s) {
    ts.push_back(s.t);
    ls.push_back(std::log(std::abs(s.phi.coeff(k, j))));
  });
  const double n = static_cast<double>(ts.size());
  double mt = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i] / n;
    ml += ls[i] / n;
  }
  double stt = 0.0, stl = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    stl += (ts[i] - mt) * (ls[i] - ml);
  }
  out.measuredRate = stl / stt;
  return out;
}

}  // namespace kshear
