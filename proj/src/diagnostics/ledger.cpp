#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "kshear/diagnostics.hpp"
#include "kshear/errors.hpp"

namespace kshear {

StateNorms stateNorms(const SpectralField2D& phi) {
  const Grid2D& g = phi.grid();
  const int H = g.halfNy();
  const auto c = phi.half();
  StateNorms n;
  double neq = 0, lapNeq = 0, gradNeq = 0, all = 0, lap = 0, grad = 0;
  for (int ix = 0; ix < g.Nx; ++ix) {
    const int k = phi.kOfRow(ix);
    const double kx = g.kappa(k);
    for (int j = 0; j < H; ++j) {
      const double w = (j == 0 || j == g.Ny / 2) ? 1.0 : 2.0;
      const double ky = g.eta(j);
      const double q2 = kx * kx + ky * ky;
      const double a = w * std::norm(c[static_cast<std::size_t>(ix) * H + j]);
      all += a;
      grad += q2 * a;
      lap += q2 * q2 * a;
      if (k != 0) {
        neq += a;
        gradNeq += q2 * a;
        lapNeq += q2 * q2 * a;
      }
    }
  }
  const double area = g.area();
  n.normPhiNeq = std::sqrt(area * neq);
  n.lapNeqSq = area * lapNeq;
  n.gradNeqSq = area * gradNeq;
  n.normPhiSq = area * all;
  n.lapSq = area * lap;
  n.gradSq = area * grad;

  double psi = 0, psiYY = 0;
  for (int j = 1; j < H; ++j) {
    const double w = (j == g.Ny / 2) ? 1.0 : 2.0;
    const double e2 = g.eta(j) * g.eta(j);
    const double a = w * std::norm(c[static_cast<std::size_t>(j)]);
    psi += e2 * a;
    psiYY += e2 * e2 * e2 * a;
  }
  n.normPsi = std::sqrt(g.L2 * psi);
  n.psiYYSq = g.L2 * psiYY;
  n.phiBar = c[0].real();

  const auto f = inverse(phi);
  const auto px = inverse(derivative(phi, Axis::X, 1));
  const auto py = inverse(derivative(phi, Axis::Y, 1));
  double cub = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) cub += (px[i] * px[i] + py[i] * py[i]) * f[i];
  n.cubic = cub * area / static_cast<double>(f.size());
  return n;
}

void BootstrapLedger::record(double t, const StateNorms& n) {
  if (!std::isfinite(t)) throw InvalidInput("ledger: non-finite time");
  if (!times.empty() && !(t > times.back())) throw InvalidInput("ledger: times must increase");
  double diss = 0.0, psiDiss = 0.0;
  if (!times.empty()) {
    const double h = t - times.back();
    diss = dissipationIntegral.back() + nu * 0.5 * h * (lapNeqSq.back() + n.lapNeqSq);
    psiDiss = psiDissipation.back() + nu * 0.5 * h * (psiYYSq.back() + n.psiYYSq);
  }
  times.push_back(t);
  normPhiNeq.push_back(n.normPhiNeq);
  dissipationIntegral.push_back(diss);
  normPsi.push_back(n.normPsi);
  psiDissipation.push_back(psiDiss);
  phiBar.push_back(n.phiBar);
  gradNeqSq.push_back(n.gradNeqSq);
  lapNeqSq.push_back(n.lapNeqSq);
  psiYYSq.push_back(n.psiYYSq);
  normPhiSq.push_back(n.normPhiSq);
  lapSq.push_back(n.lapSq);
  gradSq.push_back(n.gradSq);
  cubic.push_back(n.cubic);
}

namespace {

constexpr const char* kLedgerHeader = "t,norm_phi_neq,diss_integral,norm_psi,psi_diss_integral,phi_bar,grad_neq_sq";

}  // namespace

void writeLedgerCsv(std::ostream& os, const BootstrapLedger& l, const std::string& manifestRef) {
  os << "# manifest: " << manifestRef << "\n" << kLedgerHeader << "\n";
  char buf[512];
  for (std::size_t i = 0; i < l.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", l.times[i], l.normPhiNeq[i],
                  l.dissipationIntegral[i], l.normPsi[i], l.psiDissipation[i], l.phiBar[i], l.gradNeqSq[i]);
    os << buf;
  }
}

BootstrapLedger readLedgerCsv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# manifest: ", 0) != 0) {
    throw InvalidInput("ledger CSV: missing manifest reference line");
  }
  if (!std::getline(is, line) || line != kLedgerHeader) throw InvalidInput("ledger CSV: unexpected header");
  BootstrapLedger l;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) {
      std::size_t pos = 0;
      double x = 0.0;
      try {
        x = std::stod(cell, &pos);
      } catch (const std::exception&) {
        throw InvalidInput("ledger CSV: bad number '" + cell + "'");
      }
      if (pos != cell.size()) throw InvalidInput("ledger CSV: bad number '" + cell + "'");
      v.push_back(x);
    }
    if (v.size() != 7) throw InvalidInput("ledger CSV: expected 7 columns");
    l.times.push_back(v[0]);
    l.normPhiNeq.push_back(v[1]);
    l.dissipationIntegral.push_back(v[2]);
    l.normPsi.push_back(v[3]);
    l.psiDissipation.push_back(v[4]);
    l.phiBar.push_back(v[5]);
    l.gradNeqSq.push_back(v[6]);
  }
  return l;
}

}  // namespace kshear
