#include <doctest.h>

#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "kshear/diagnostics.hpp"
#include "kshear/errors.hpp"
#include "oracles.hpp"

using namespace kshear;

namespace {

constexpr double kPi = std::numbers::pi;

BootstrapLedger synthetic(const std::vector<double>& t, const std::vector<double>& normNeq,
                          const std::vector<double>& lapNeqSq = {}) {
  BootstrapLedger l;
  l.nu = 1.0;
  l.L1 = 2 * kPi;
  l.L2 = 2 * kPi;
  for (std::size_t i = 0; i < t.size(); ++i) {
    StateNorms n;
    n.normPhiNeq = normNeq[i];
    n.lapNeqSq = lapNeqSq.empty() ? 0.0 : lapNeqSq[i];
    l.record(t[i], n);
  }
  return l;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

// Brute-force pair scans.
double bruteDecay(const BootstrapLedger& l, double lambda, double P, double d) {
  double w = 0.0;
  for (std::size_t s = 0; s < l.size(); ++s)
    for (std::size_t t = s; t < l.size(); ++t)
      w = std::max(w, l.normPhiNeq[t] / (P * std::exp(-lambda * (l.times[t] - l.times[s]) / d) * l.normPhiNeq[s]));
  return w;
}

double bruteDissipation(const BootstrapLedger& l, double cap) {
  double w = 0.0;
  for (std::size_t s = 0; s < l.size(); ++s)
    for (std::size_t t = s; t < l.size(); ++t)
      w = std::max(w, (l.dissipationIntegral[t] - l.dissipationIntegral[s]) / (cap * l.normPhiNeq[s] * l.normPhiNeq[s]));
  return w;
}

// Direct evaluation of the trigonometric series and its gradient at (x, y).
struct PointValue {
  double f, fx, fy, fxx, fyy, fxy;
};

PointValue evalSeries(const SpectralField2D& phi, double x, double y) {
  const Grid2D& g = phi.grid();
  PointValue p{};
  for (int k = -g.Nx / 2; k < g.Nx / 2; ++k) {
    for (int j = -g.Ny / 2; j < g.Ny / 2; ++j) {
      const Complex c = phi.coeff(k, j);
      const double kx = g.kappa(k), ky = g.eta(j);
      const Complex e = c * std::exp(Complex(0.0, kx * x + ky * y));
      p.f += e.real();
      p.fx += (Complex(0, kx) * e).real();
      p.fy += (Complex(0, ky) * e).real();
      p.fxx += (-kx * kx * e).real();
      p.fyy += (-ky * ky * e).real();
    }
  }
  return p;
}

SpectralField2D randomDealiased(const Grid2D& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  SpectralField2D f(g);
  for (int k = -g.dealiasK(); k <= g.dealiasK(); ++k)
    for (int j = 0; j <= g.dealiasJ(); ++j) {
      if (j == 0 && k < 0) continue;
      f.setCoeff(k, j, j == 0 && k == 0 ? Complex(d(rng), 0) : Complex(d(rng), d(rng)));
    }
  return f;
}

}  // namespace

TEST_CASE("ledger entries for simple fields") {
  const Grid2D g(2 * kPi, 3.0, 16, 16);
  SUBCASE("x-independent field has no fluctuation") {
    const auto phi = forward(g, oracle::sample(g, [](double, double y) { return std::cos(2 * kPi * y / 3.0) + 2.0; }));
    const auto n = stateNorms(phi);
    CHECK(n.normPhiNeq == 0.0);
    CHECK(n.gradNeqSq == 0.0);
    CHECK(n.phiBar == doctest::Approx(2.0));
    const double w = 2 * kPi / 3.0;
    CHECK(n.normPsi == doctest::Approx(std::sqrt(3.0 / 2.0) * w));
  }
  SUBCASE("cos x") {
    const auto f = oracle::sample(g, [](double x, double) { return std::cos(x); });
    const auto n = stateNorms(forward(g, f));
    CHECK(n.normPhiNeq == doctest::Approx(std::sqrt(g.area() / 2.0)).epsilon(1e-14));
    CHECK(n.normPhiNeq == doctest::Approx(std::sqrt(oracle::quadratureNormSq(g, f))).epsilon(1e-14));
    CHECK(n.normPsi == 0.0);
  }
}

TEST_CASE("ledger norms match a physical-space quadrature oracle") {
  const Grid2D g(4.0, 2.5, 12, 12);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto phi = randomDealiased(g, seed);
    const auto n = stateNorms(phi);
    double neq2 = 0, lapNeq = 0, gradNeq = 0, all = 0, lap = 0, grad = 0, cub = 0;
    std::vector<double> mean(g.Ny, 0.0), meanY(g.Ny, 0.0);
    std::vector<PointValue> pts(g.physicalSize());
    for (int ix = 0; ix < g.Nx; ++ix)
      for (int iy = 0; iy < g.Ny; ++iy) {
        const auto p = evalSeries(phi, ix * g.L1 / g.Nx, iy * g.L2 / g.Ny);
        pts[ix * g.Ny + iy] = p;
        mean[iy] += p.f / g.Nx;
        meanY[iy] += p.fy / g.Nx;
      }
    // x-average fields and their derivatives, again by series
    std::vector<double> meanLap(g.Ny), meanYYY(g.Ny);
    for (int iy = 0; iy < g.Ny; ++iy) {
      const double y = iy * g.L2 / g.Ny;
      double yy = 0, yyy = 0;
      for (int j = -g.Ny / 2; j < g.Ny / 2; ++j) {
        const double e = g.eta(j);
        const Complex v = phi.coeff(0, j) * std::exp(Complex(0, e * y));
        yy += (-e * e * v).real();
        yyy += (Complex(0, -e * e * e) * v).real();
      }
      meanLap[iy] = yy;
      meanYYY[iy] = yyy;
    }
    for (int ix = 0; ix < g.Nx; ++ix)
      for (int iy = 0; iy < g.Ny; ++iy) {
        const auto& p = pts[ix * g.Ny + iy];
        const double fn = p.f - mean[iy];
        const double fxn = p.fx, fyn = p.fy - meanY[iy];
        const double lapn = p.fxx + p.fyy - meanLap[iy];
        neq2 += fn * fn;
        gradNeq += fxn * fxn + fyn * fyn;
        lapNeq += lapn * lapn;
        all += p.f * p.f;
        grad += p.fx * p.fx + p.fy * p.fy;
        lap += (p.fxx + p.fyy) * (p.fxx + p.fyy);
        cub += (p.fx * p.fx + p.fy * p.fy) * p.f;
      }
    const double dA = g.area() / g.physicalSize();
    double psi2 = 0, psiYY = 0, bar = 0;
    for (int iy = 0; iy < g.Ny; ++iy) {
      psi2 += meanY[iy] * meanY[iy] * g.L2 / g.Ny;
      psiYY += meanYYY[iy] * meanYYY[iy] * g.L2 / g.Ny;
      bar += mean[iy] / g.Ny;
    }
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(b)); };
    CHECK(close(n.normPhiNeq, std::sqrt(neq2 * dA)));
    CHECK(close(n.gradNeqSq, gradNeq * dA));
    CHECK(close(n.lapNeqSq, lapNeq * dA));
    CHECK(close(n.normPhiSq, all * dA));
    CHECK(close(n.gradSq, grad * dA));
    CHECK(close(n.lapSq, lap * dA));
    CHECK(close(n.cubic, cub * dA));
    CHECK(close(n.normPsi, std::sqrt(psi2)));
    CHECK(close(n.psiYYSq, psiYY));
    CHECK(close(n.phiBar, bar));
  }
}

TEST_CASE("ledger integrals and time ordering") {
  BootstrapLedger l;
  l.nu = 0.5;
  StateNorms a;
  a.lapNeqSq = 2.0;
  a.psiYYSq = 4.0;
  l.record(0.0, a);
  a.lapNeqSq = 6.0;
  l.record(1.0, a);
  CHECK(l.dissipationIntegral.back() == doctest::Approx(0.5 * 4.0));
  CHECK(l.psiDissipation.back() == doctest::Approx(0.5 * 4.0));
  CHECK_THROWS_AS(l.record(1.0, a), InvalidInput);
  CHECK_THROWS_AS(l.record(0.5, a), InvalidInput);
}

TEST_CASE("auditDecay on synthetic ledgers") {
  const double lambda = 0.3;
  const auto t = linspace(0.0, 100.0, 401);
  std::vector<double> decay(t.size()), flat(t.size(), 1.0);
  for (std::size_t i = 0; i < t.size(); ++i) decay[i] = std::exp(-lambda * t[i] / 4.0);
  for (double P : {4.0, 8.0}) {
    const auto r = auditDecay(synthetic(t, decay), lambda, P, 4.0);
    CHECK(r.pass);
    CHECK(r.worstRatio == doctest::Approx(1.0 / P).epsilon(1e-12));
  }
  const auto f = auditDecay(synthetic(t, flat), lambda, 4.0, 4.0);
  CHECK_FALSE(f.pass);
  CHECK(f.s == 0.0);
  CHECK(f.t == 100.0);
  CHECK(f.worstRatio == doctest::Approx(std::exp(lambda * 100.0 / 4.0) / 4.0));
  CHECK_THROWS_AS(auditDecay(BootstrapLedger{}, lambda, 4.0, 4.0), InvalidInput);
  CHECK_THROWS_AS(auditDecay(synthetic(t, flat), 0.0, 4.0, 4.0), InvalidInput);
}

TEST_CASE("auditDecay equals the exhaustive pair scan and is monotone in the prefactor") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> t = {0.0}, v = {u(rng)};
    for (int i = 1; i < 60; ++i) {
      t.push_back(t.back() + 0.1 + u(rng));
      v.push_back(v.back() * std::exp(-0.3 * u(rng) + 0.25));
    }
    const auto l = synthetic(t, v);
    const double lambda = 0.05 + 0.1 * u(rng);
    const auto r4 = auditDecay(l, lambda, 4.0, 4.0);
    CHECK(r4.worstRatio == doctest::Approx(bruteDecay(l, lambda, 4.0, 4.0)).epsilon(1e-12));
    const auto r8 = auditDecay(l, lambda, 8.0, 4.0);
    CHECK(r8.worstRatio == doctest::Approx(r4.worstRatio / 2.0).epsilon(1e-12));
    if (r4.pass) CHECK(r8.pass);
    CHECK(r4.pass == (r4.worstRatio <= 1.0 + r4.tolerance));
  }
}

TEST_CASE("auditDissipation single-mode closed form and injected growth") {
  const double nu = 0.01, q4 = 16.0;
  const auto t = linspace(0.0, 20.0, 4001);
  std::vector<double> a(t.size()), lap(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    a[i] = std::exp(-nu * q4 * t[i]);
    lap[i] = q4 * a[i] * a[i];
  }
  auto l = synthetic(t, a, lap);
  l.nu = nu;
  l.dissipationIntegral.clear();
  l.dissipationIntegral.push_back(0.0);
  for (std::size_t i = 1; i < t.size(); ++i)
    l.dissipationIntegral.push_back(l.dissipationIntegral.back() + nu * 0.5 * (t[i] - t[i - 1]) * (lap[i - 1] + lap[i]));
  const auto r = auditDissipation(l, 2.0);
  // nu int_s^t ||Lap||^2 = (1/2)||phi(s)||^2 (1 - e^{-2 nu q^4 (t - s)})
  CHECK(r.pass);
  CHECK(r.worstRatio == doctest::Approx(0.25 * (1.0 - std::exp(-2.0 * nu * q4 * 20.0))).epsilon(1e-5));
  CHECK(r.worstRatio == doctest::Approx(bruteDissipation(l, 2.0)).epsilon(1e-12));

  std::vector<double> grow(t.size(), 1.0), big(t.size(), 1000.0);
  auto g = synthetic(t, grow, big);
  const auto rg = auditDissipation(g, 2.0);
  CHECK_FALSE(rg.pass);
  CHECK(rg.worstRatio == doctest::Approx(bruteDissipation(g, 2.0)));
  CHECK_THROWS_AS(auditDissipation(BootstrapLedger{}, 2.0), InvalidInput);
}

TEST_CASE("tau* contraction on synthetic ledgers") {
  const double lambda = 0.5;
  const auto t = linspace(0.0, 40.0, 801);
  std::vector<double> decay(t.size()), flat(t.size(), 3.0);
  for (std::size_t i = 0; i < t.size(); ++i) decay[i] = std::exp(-lambda * t[i] / 4.0);
  const auto r = tauStarContraction(synthetic(t, decay), lambda);
  CHECK(r.tauStar == doctest::Approx(8.0));
  CHECK(r.contraction.worstRatio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.pass());
  const auto c = tauStarContraction(synthetic(t, flat), lambda);
  CHECK_FALSE(c.contraction.pass);
  CHECK(c.growthCap.pass);
  CHECK_FALSE(c.pass());
  const auto p = tauStarContraction(synthetic(linspace(0.0, 5.0, 11), std::vector<double>(11, 1.0)), lambda);
  CHECK(p.partial);
  CHECK(p.growthCap.pass);
  CHECK(p.pass());
}

TEST_CASE("five-point derivative is exact on quartics") {
  std::vector<double> x = {0.0, 0.3, 0.5, 1.1, 1.2, 2.0, 2.4};
  std::vector<double> f;
  auto poly = [](double s) { return 1.0 - 2.0 * s + 0.5 * s * s * s - 0.25 * s * s * s * s; };
  auto dpoly = [](double s) { return -2.0 + 1.5 * s * s - s * s * s; };
  for (double s : x) f.push_back(poly(s));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(fivePointDerivative(x, f, i) == doctest::Approx(dpoly(x[i])).epsilon(1e-12));
}

TEST_CASE("mean decay check") {
  SUBCASE("stationary constant") {
    BootstrapLedger l;
    l.nu = 0.1;
    l.L1 = l.L2 = 1.0;
    StateNorms n;
    n.phiBar = 5.0;
    for (int i = 0; i < 10; ++i) l.record(i * 0.1, n);
    const auto r = meanDecayCheck(l);
    CHECK(r.pass);
    CHECK(r.worstRatio < 1e-6);
  }
  SUBCASE("x-independent run") {
    SolverConfig c;
    c.grid = Grid2D(4 * kPi, kPi, 16, 32);
    c.nu = 0.05;
    c.profile = sinPowerProfile(2, kPi, 32);
    c.init.kind = InitSpec::Kind::Modes;
    c.init.modes = {{0, 1, Complex(0.3, 0.1)}, {0, 2, Complex(0.0, -0.1)}};
    c.dt = 0.001;
    c.tEnd = 0.5;
    RunAuditOptions o;
    o.lambdaOverride = 1.0;
    const auto a = auditRun(c, o);
    for (double g : a.ledger.gradNeqSq) CHECK(g == 0.0);
    CHECK(a.meanDecay.pass);
    CHECK(a.energy.pass);
  }
  SUBCASE("increasing mean fails") {
    BootstrapLedger l;
    l.nu = 0.1;
    l.L1 = l.L2 = 1.0;
    StateNorms n;
    for (int i = 0; i < 5; ++i) {
      n.phiBar = (i == 3) ? 1.0 : 0.0;
      l.record(i, n);
    }
    CHECK_FALSE(meanDecayCheck(l).pass);
  }
  CHECK_THROWS_AS(meanDecayCheck(BootstrapLedger{}), InvalidInput);
}

TEST_CASE("computeC1") {
  CHECK(computeC1(0.0, 0.7, 3.0).value == doctest::Approx(0.49));
  CHECK(computeC1(1.0, 0.0, 1.0).value == doctest::Approx(16.0 * std::exp(16.0)).epsilon(1e-14));
  double prev = 0.0;
  for (double a : {0.1, 0.2, 0.4, 0.8}) {
    const double v = computeC1(a, 0.3, 0.5).value;
    CHECK(v > prev);
    prev = v;
  }
  CHECK(computeC1(0.5, 0.4, 1.0).value < computeC1(0.5, 0.5, 1.0).value);
  CHECK(computeC1(0.5, 0.4, 1.0).value < computeC1(0.5, 0.4, 1.1).value);
  const auto s = computeC1(100.0, 1.0, 1.0);
  CHECK(s.saturated);
  CHECK(std::isfinite(s.value));
  CHECK_THROWS_AS(computeC1(1.0, 1.0, 0.0), InvalidInput);
}

TEST_CASE("empirical C is stable under dt halving and grid doubling") {
  auto cfg = [](int Nx, int Ny, double dt) {
    SolverConfig c;
    c.grid = Grid2D(4 * kPi, kPi, Nx, Ny);
    c.nu = 0.02;
    c.profile = sinPowerProfile(2, kPi, Ny);
    c.init.kind = InitSpec::Kind::Modes;
    c.init.modes = {{1, 0, Complex(0.3, 0.0)}, {1, 1, Complex(0.0, 0.2)}, {2, -1, Complex(0.1, 0.1)}};
    c.dt = dt;
    c.tEnd = 20.0;
    return c;
  };
  RunAuditOptions o;
  o.lambdaOverride = 0.1;
  const auto base = auditRun(cfg(32, 32, 0.02), o).empiricalC;
  const auto half = auditRun(cfg(32, 32, 0.01), o).empiricalC;
  const auto fine = auditRun(cfg(64, 64, 0.01), o).empiricalC;
  MESSAGE(std::setprecision(10) << "empirical C " << base.C << " " << half.C << " " << fine.C);
  REQUIRE(base.C > 0.0);
  REQUIRE(std::isfinite(base.C));
  CHECK(std::abs(half.C / base.C - 1.0) < 0.2);
  CHECK(std::abs(fine.C / base.C - 1.0) < 0.2);
  CHECK(computeC1(auditRun(cfg(32, 32, 0.02), o).ledger.normPhiNeq[0], 0.0, base.C).value >= base.maxLhs);
}

TEST_CASE("reports are pure functions of the ledger and CSV round-trips") {
  const auto t = linspace(0.0, 10.0, 51);
  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) v[i] = 1.0 + 0.1 * std::sin(t[i]);
  const auto l = synthetic(t, v, v);
  CHECK(toJson(auditDecay(l, 0.2, 4, 4)).dump() == toJson(auditDecay(l, 0.2, 4, 4)).dump());
  CHECK(toJson(tauStarContraction(l, 0.2)).dump() == toJson(tauStarContraction(l, 0.2)).dump());
  std::stringstream ss;
  writeLedgerCsv(ss, l, "manifest.json");
  const auto back = readLedgerCsv(ss);
  CHECK(back.times == l.times);
  CHECK(back.normPhiNeq == l.normPhiNeq);
  CHECK(back.dissipationIntegral == l.dissipationIntegral);
  std::stringstream bad("# manifest: x\nt,a,b\n1,2,3\n");
  CHECK_THROWS_AS(readLedgerCsv(bad), InvalidInput);
  std::stringstream noManifest("t,norm_phi_neq,diss_integral,norm_psi,psi_diss_integral,phi_bar,grad_neq_sq\n");
  CHECK_THROWS_AS(readLedgerCsv(noManifest), InvalidInput);
}

TEST_CASE("crossover sweep bookkeeping") {
  SolverConfig c;
  c.grid = Grid2D(4 * kPi, kPi, 16, 16);
  c.profile = sinPowerProfile(2, kPi, 16);
  c.init.amplitude = 0.1;
  c.dt = 0.02;
  c.tEnd = 2.0;
  RunAuditOptions o;
  o.lambdaOverride = 1e-4;  // tau* beyond the run: growth cap and decay only
  auto r = crossoverSweep(c, {1e-3, 1e-2, 1e-4}, o);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].nu == 1e-2);
  CHECK(r.rows[2].nu == 1e-4);
  REQUIRE(r.crossoverNu.has_value());
  CHECK(*r.crossoverNu == 1e-2);
  o.lambdaOverride = 50.0;
  r = crossoverSweep(c, {1e-3, 1e-2}, o);
  CHECK_FALSE(r.crossoverNu.has_value());
  CHECK(toJson(r)["crossover_nu"].is_null());
}

TEST_CASE("short nonlinear run satisfies the energy identity") {
  SolverConfig c;
  c.grid = Grid2D(4 * kPi, kPi, 32, 32);
  c.nu = 0.002;
  c.profile = sinPowerProfile(2, kPi, 32);
  c.seed = 2;
  c.init.maxK = 4;
  c.init.maxJ = 4;
  c.init.normalizeTo = 1.0;
  c.dt = 0.005;
  c.tEnd = 5.0;
  RunAuditOptions o;
  o.J = 32;
  const auto a = auditRun(c, o);
  CHECK(a.lambda > 0.0);
  CHECK(a.energy.pass);
  CHECK(a.meanDecay.pass);
  CHECK(a.dissipation.pass);
  const auto j = toJson(a);
  CHECK(j["audits"].size() == 4);
}
