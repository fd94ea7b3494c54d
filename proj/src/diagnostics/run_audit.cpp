#include <algorithm>
#include <cmath>
#include <numbers>

#include "kshear/diagnostics.hpp"
#include "kshear/errors.hpp"

namespace kshear {
namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

RateResult auditRate(const SolverConfig& config, const RunAuditOptions& options) {
  const double kappa = 2.0 * std::numbers::pi / config.grid.L1;
  const ModeOperator op = assemble(config.nu, kappa, config.profile, options.J, Variant::Full);
  const double hint = psi(op).psi;
  return measuredDecayRate(op, options.rateThreshold, hint);
}

RunAudit auditRun(const SolverConfig& config, const RunAuditOptions& options) {
  if (options.recordEvery < 1) throw InvalidInput("auditRun: recordEvery must be >= 1");
  RunAudit out;
  out.nu = config.nu;
  if (options.lambdaOverride > 0.0) {
    out.lambda = options.lambdaOverride;
  } else {
    const RateResult rate = auditRate(config, options);
    out.lambda = rate.rate;
    out.lambdaFailed = rate.failed;
  }
  out.ledger.nu = config.nu;
  out.ledger.L1 = config.grid.L1;
  out.ledger.L2 = config.grid.L2;
  const auto every = static_cast<std::uint64_t>(options.recordEvery);
  const Trajectory tr = run(config, [&](const SolverState& s) {
    if (s.step % every == 0) out.ledger.record(s);
  });
  if (tr.last.step % every != 0) out.ledger.record(tr.last);
  out.blewUp = tr.blewUp;
  out.blowUpTime = tr.blowUpTime;
  out.samples = tr.samples;

  const double lambda = out.lambda > 0.0 ? out.lambda : 1e-300;
  out.decay = auditDecay(out.ledger, lambda, 4.0, 4.0);
  out.decay.id = "B1";
  out.decayH1 = auditDecay(out.ledger, lambda, 8.0, 4.0);
  out.decayH1.id = "H1";
  out.dissipation = auditDissipation(out.ledger, 2.0);
  out.dissipation.id = "B2";
  out.dissipationH2 = auditDissipation(out.ledger, 4.0);
  out.dissipationH2.id = "H2";
  out.tauStar = tauStarContraction(out.ledger, lambda);
  if (out.ledger.size() >= 3) {
    out.meanDecay = meanDecayCheck(out.ledger);
    out.energy = energyIdentityCheck(out.ledger);
  }
  out.empiricalC = extractEmpiricalC(out.ledger);
  if (out.lambdaFailed) {
    out.decay.pass = out.decayH1.pass = false;
    out.tauStar.contraction.pass = out.tauStar.growthCap.pass = false;
  }
  return out;
}

CrossoverResult crossoverSweep(const SolverConfig& base, const std::vector<double>& nus,
                               const RunAuditOptions& options) {
  std::vector<double> sorted = nus;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  CrossoverResult out;
  for (double nu : sorted) {
    SolverConfig c = base;
    c.nu = nu;
    c.sampleTimes.clear();
    CrossoverRow row;
    row.nu = nu;
    try {
      const RunAudit a = auditRun(c, options);
      row.lambda = a.lambda;
      row.decayPass = a.decay.pass;
      row.dissipationPass = a.dissipation.pass;
      row.tauStarPass = a.tauStar.pass();
      row.blewUp = a.blewUp;
    } catch (const BlowUp&) {
      row.blewUp = true;
    }
    out.rows.push_back(row);
  }
  // largest nu such that it and every smaller swept nu pass
  for (auto it = out.rows.rbegin(); it != out.rows.rend(); ++it) {
    if (!it->pass()) break;
    out.crossoverNu = it->nu;
  }
  return out;
}

nlohmann::json toJson(const AuditReport& r) {
  return {{"id", r.id},       {"s", number(r.s)},     {"t", number(r.t)},
          {"worst_ratio", number(r.worstRatio)}, {"pass", r.pass}, {"tolerance", r.tolerance},
          {"partial", r.partial}, {"parameters", r.parameters}};
}

nlohmann::json toJson(const TauStarReport& r) {
  return {{"tau_star", number(r.tauStar)},
          {"partial", r.partial},
          {"pass", r.pass()},
          {"contraction", toJson(r.contraction)},
          {"growth_cap", toJson(r.growthCap)}};
}

nlohmann::json toJson(const RunAudit& r) {
  nlohmann::json j;
  j["nu"] = r.nu;
  j["lambda"] = number(r.lambda);
  j["lambda_failed"] = r.lambdaFailed;
  j["blew_up"] = r.blewUp;
  if (r.blewUp) j["blow_up_time"] = r.blowUpTime;
  j["samples"] = r.ledger.size();
  j["audits"] = {toJson(r.decay), toJson(r.dissipation), toJson(r.decayH1), toJson(r.dissipationH2)};
  j["tau_star"] = toJson(r.tauStar);
  j["mean_decay"] = toJson(r.meanDecay);
  j["energy_identity"] = toJson(r.energy);
  j["empirical_c"] = {{"C", number(r.empiricalC.C)}, {"C1", number(r.empiricalC.c1)},
                      {"max_lhs", number(r.empiricalC.maxLhs)}};
  j["bootstrap_pass"] = r.bootstrapPass();
  return j;
}

nlohmann::json toJson(const CrossoverResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"nu", row.nu},
                    {"lambda", number(row.lambda)},
                    {"decay_pass", row.decayPass},
                    {"dissipation_pass", row.dissipationPass},
                    {"tau_star_pass", row.tauStarPass},
                    {"blew_up", row.blewUp},
                    {"pass", row.pass()}});
  }
  nlohmann::json j{{"rows", rows}};
  j["crossover_nu"] = r.crossoverNu ? nlohmann::json(*r.crossoverNu) : nlohmann::json(nullptr);
  return j;
}

}  // namespace kshear
