#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kshear/mode_operator.hpp"
#include "kshear/solver.hpp"

namespace kshear {

/// Instantaneous Parseval quantities of one state. psi = d_y <phi>, with
/// <phi> the x-average; psi norms are over T^1.
struct StateNorms {
  double normPhiNeq = 0.0;
  double lapNeqSq = 0.0;   ///< ||Lap phi_neq||^2
  double normPsi = 0.0;
  double psiYYSq = 0.0;    ///< ||d_y^2 psi||^2
  double phiBar = 0.0;
  double gradNeqSq = 0.0;  ///< int |grad phi_neq|^2
  double normPhiSq = 0.0;
  double lapSq = 0.0;
  double gradSq = 0.0;
  double cubic = 0.0;      ///< int |grad phi|^2 phi
};

StateNorms stateNorms(const SpectralField2D& phi);

struct BootstrapLedger {
  double nu = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;

  std::vector<double> times;
  std::vector<double> normPhiNeq;
  std::vector<double> dissipationIntegral;  ///< nu int_0^t ||Lap phi_neq||^2
  std::vector<double> normPsi;
  std::vector<double> psiDissipation;       ///< nu int_0^t ||d_y^2 psi||^2
  std::vector<double> phiBar;
  std::vector<double> gradNeqSq;

  // integrands and energy-identity terms
  std::vector<double> lapNeqSq;
  std::vector<double> psiYYSq;
  std::vector<double> normPhiSq;
  std::vector<double> lapSq;
  std::vector<double> gradSq;
  std::vector<double> cubic;

  std::size_t size() const { return times.size(); }

  /// Appends an entry; running integrals advance by the trapezoid rule.
  /// Throws InvalidInput if t does not exceed the last recorded time.
  void record(double t, const StateNorms& n);
  void record(const SolverState& s) { record(s.t, stateNorms(s.phi)); }
};

struct AuditReport {
  std::string id;
  double s = 0.0;
  double t = 0.0;
  double worstRatio = 0.0;
  bool pass = false;
  double tolerance = 0.0;
  bool partial = false;
  nlohmann::json parameters = nlohmann::json::object();
};

/// ||phi_neq(t)|| <= prefactor exp(-lambda (t-s)/rateDivisor) ||phi_neq(s)|| for all sampled s <= t.
AuditReport auditDecay(const BootstrapLedger& ledger, double lambda, double prefactor, double rateDivisor,
                       double tolerance = 1e-9);

/// nu int_s^t ||Lap phi_neq||^2 <= cap ||phi_neq(s)||^2 for all sampled s <= t.
AuditReport auditDissipation(const BootstrapLedger& ledger, double cap, double tolerance = 1e-9);

struct TauStarReport {
  double tauStar = 0.0;
  AuditReport contraction;  ///< ||phi_neq(s + tau*)|| <= e^-1 ||phi_neq(s)||
  AuditReport growthCap;    ///< ||phi_neq(t)|| <= sqrt(2) ||phi_neq(s)|| on [s, s + tau*]
  bool partial = false;     ///< trajectory shorter than tau*: growth cap only
  bool pass() const { return growthCap.pass && (partial || contraction.pass); }
};

TauStarReport tauStarContraction(const BootstrapLedger& ledger, double lambda, double tolerance = 1e-9);

/// Five-point differences of phiBar against -(nu/2L1L2) int|grad phi_neq|^2 - (nu/2L2) int psi^2.
/// worstRatio = (max mismatch / max |rhs|) / relTol, infinite if phiBar ever increases.
AuditReport meanDecayCheck(const BootstrapLedger& ledger, double relTol = 1e-5);

/// |d/dt (1/2)||phi||^2 + nu||Lap phi||^2 - nu||grad phi||^2 + (nu/2) int |grad phi|^2 phi|
/// against absTol * max(1, ||phi||^3) at every sample, derivative by five-point differences.
AuditReport energyIdentityCheck(const BootstrapLedger& ledger, double absTol = 1e-6);

/// Derivative at x[i] of the interpolant through five neighbouring samples
/// (centred where possible).
double fivePointDerivative(const std::vector<double>& x, const std::vector<double>& f, std::size_t i);

struct C1Value {
  double value = 0.0;
  bool saturated = false;
};

/// 16 C e^{16 C a^{8/3}} a^{8/3} + e^{16 C a^{8/3}} b^2 with a = ||phi_neq(0)||, b = ||psi(0)||.
C1Value computeC1(double normPhiNeq0, double normPsi0, double C);

struct EmpiricalC {
  double C = 0.0;       ///< smallest C with max_t(||psi||^2 + nu int ||d_y^2 psi||^2) <= C1(C); inf if none
  double c1 = 0.0;
  double maxLhs = 0.0;
};

EmpiricalC extractEmpiricalC(const BootstrapLedger& ledger);

struct RunAudit {
  double nu = 0.0;
  double lambda = 0.0;
  bool lambdaFailed = false;
  bool blewUp = false;
  double blowUpTime = 0.0;
  BootstrapLedger ledger;
  AuditReport decay;        ///< (B1)
  AuditReport dissipation;  ///< (B2)
  AuditReport decayH1;      ///< (H1)
  AuditReport dissipationH2;
  TauStarReport tauStar;
  AuditReport meanDecay;
  AuditReport energy;
  EmpiricalC empiricalC;
  std::vector<SolverState> samples;

  bool bootstrapPass() const { return !blewUp && decay.pass && dissipation.pass && tauStar.pass(); }
};

struct RunAuditOptions {
  int recordEvery = 1;
  int J = 64;
  double rateThreshold = 0.1353352832366127;  // e^-2
  /// Overrides the measured rate when > 0.
  double lambdaOverride = -1.0;
};

/// Slowest-mode decay rate used by the audits: measuredDecayRate of the full
/// operator at kappa = 2 pi / L1.
RateResult auditRate(const SolverConfig& config, const RunAuditOptions& options);

/// Runs the solver, records the ledger and evaluates every audit.
RunAudit auditRun(const SolverConfig& config, const RunAuditOptions& options = {});

struct CrossoverRow {
  double nu = 0.0;
  double lambda = 0.0;
  bool decayPass = false;
  bool dissipationPass = false;
  bool tauStarPass = false;
  bool blewUp = false;
  bool pass() const { return !blewUp && decayPass && dissipationPass && tauStarPass; }
};

struct CrossoverResult {
  std::vector<CrossoverRow> rows;       ///< ordered by decreasing nu
  std::optional<double> crossoverNu;    ///< largest nu below which every swept nu passes
};

CrossoverResult crossoverSweep(const SolverConfig& base, const std::vector<double>& nus,
                               const RunAuditOptions& options = {});

nlohmann::json toJson(const AuditReport& r);
nlohmann::json toJson(const TauStarReport& r);
nlohmann::json toJson(const RunAudit& r);
nlohmann::json toJson(const CrossoverResult& r);

/// Columns t, norm_phi_neq, diss_integral, norm_psi, psi_diss_integral, phi_bar, grad_neq_sq,
/// preceded by a "# manifest: <ref>" line.
void writeLedgerCsv(std::ostream& os, const BootstrapLedger& ledger, const std::string& manifestRef);
/// Reads the seven ledger columns back; throws InvalidInput on a schema mismatch.
BootstrapLedger readLedgerCsv(std::istream& is);

}  // namespace kshear
