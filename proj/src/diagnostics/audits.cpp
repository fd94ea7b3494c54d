#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

#include "kshear/diagnostics.hpp"
#include "kshear/errors.hpp"

namespace kshear {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void requireNonEmpty(const BootstrapLedger& l, const char* op) {
  if (l.size() == 0) throw InvalidInput(std::string(op) + ": empty ledger");
}

AuditReport finish(AuditReport r) {
  r.pass = r.worstRatio <= 1.0 + r.tolerance;
  return r;
}

// a / b with 0/0 = 0 and x/0 = inf.
double safeRatio(double a, double b) {
  if (b > 0.0) return a / b;
  return a > 0.0 ? kInf : 0.0;
}

double interpolate(const std::vector<double>& x, const std::vector<double>& f, double t) {
  auto it = std::lower_bound(x.begin(), x.end(), t);
  if (it == x.end()) return f.back();
  const auto i = static_cast<std::size_t>(it - x.begin());
  if (*it == t || i == 0) return f[i];
  const double w = (t - x[i - 1]) / (x[i] - x[i - 1]);
  return (1.0 - w) * f[i - 1] + w * f[i];
}

}  // namespace

AuditReport auditDecay(const BootstrapLedger& l, double lambda, double prefactor, double rateDivisor,
                       double tolerance) {
  requireNonEmpty(l, "auditDecay");
  if (!(lambda > 0.0)) throw InvalidInput("auditDecay: lambda must be positive");
  if (!(prefactor > 0.0) || !(rateDivisor > 0.0)) throw InvalidInput("auditDecay: bad constants");
  AuditReport r;
  r.id = "decay";
  r.tolerance = tolerance;
  r.parameters = {{"lambda", lambda}, {"prefactor", prefactor}, {"rate_divisor", rateDivisor}};
  // ratio(s,t) = G(t) / (P G(s)) with log G = log||phi_neq|| + lambda t / d; the
  // maximum over s <= t uses the running minimum of log G(s).
  double bestLog = -kInf;
  double minLog = kInf;
  std::size_t argMin = 0;
  r.worstRatio = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    const double a = l.normPhiNeq[i];
    const double lg = (a > 0.0 ? std::log(a) : -kInf) + lambda * l.times[i] / rateDivisor;
    if (lg < minLog || i == 0) {
      minLog = lg;
      argMin = i;
    }
    double cand;
    if (a == 0.0) {
      cand = -kInf;
    } else if (minLog == -kInf) {
      cand = kInf;
    } else {
      cand = lg - minLog;
    }
    if (i == 0 || cand > bestLog) {
      bestLog = cand;
      r.s = l.times[argMin];
      r.t = l.times[i];
    }
  }
  r.worstRatio = bestLog == -kInf ? 0.0 : std::exp(bestLog) / prefactor;
  return finish(r);
}

AuditReport auditDissipation(const BootstrapLedger& l, double cap, double tolerance) {
  requireNonEmpty(l, "auditDissipation");
  if (!(cap > 0.0)) throw InvalidInput("auditDissipation: cap must be positive");
  AuditReport r;
  r.id = "dissipation";
  r.tolerance = tolerance;
  r.parameters = {{"cap", cap}, {"nu", l.nu}};
  const std::size_t n = l.size();
  // the running integral is nondecreasing, so for fixed s the worst t is the last
  // sample at which the difference is largest
  std::vector<double> suffixMax(n);
  std::vector<std::size_t> suffixArg(n);
  for (std::size_t i = n; i-- > 0;) {
    if (i + 1 == n || l.dissipationIntegral[i] >= suffixMax[i + 1]) {
      suffixMax[i] = l.dissipationIntegral[i];
      suffixArg[i] = i;
    } else {
      suffixMax[i] = suffixMax[i + 1];
      suffixArg[i] = suffixArg[i + 1];
    }
  }
  r.worstRatio = -1.0;
  for (std::size_t s = 0; s < n; ++s) {
    const double d = std::max(0.0, suffixMax[s] - l.dissipationIntegral[s]);
    const double ratio = safeRatio(d, cap * l.normPhiNeq[s] * l.normPhiNeq[s]);
    if (ratio > r.worstRatio) {
      r.worstRatio = ratio;
      r.s = l.times[s];
      r.t = l.times[suffixArg[s]];
    }
  }
  return finish(r);
}

TauStarReport tauStarContraction(const BootstrapLedger& l, double lambda, double tolerance) {
  requireNonEmpty(l, "tauStarContraction");
  if (!(lambda > 0.0)) throw InvalidInput("tauStarContraction: lambda must be positive");
  TauStarReport out;
  out.tauStar = 4.0 / lambda;
  const double tau = out.tauStar;
  const double tEnd = l.times.back();
  const std::size_t n = l.size();

  AuditReport& c = out.contraction;
  c.id = "tau_star_contraction";
  c.tolerance = tolerance;
  c.parameters = {{"lambda", lambda}, {"tau_star", tau}, {"factor", std::exp(-1.0)}};
  c.worstRatio = 0.0;
  bool any = false;
  const double scale = 1.0 + 1e-12;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = l.times[i] + tau;
    if (target > tEnd * scale) break;
    const double v = interpolate(l.times, l.normPhiNeq, std::min(target, tEnd));
    const double ratio = safeRatio(v, std::exp(-1.0) * l.normPhiNeq[i]);
    if (!any || ratio > c.worstRatio) {
      c.worstRatio = ratio;
      c.s = l.times[i];
      c.t = target;
    }
    any = true;
  }
  out.partial = !any;
  c.partial = !any;
  if (any) {
    c = finish(c);
  } else {
    c.pass = false;
  }

  AuditReport& g = out.growthCap;
  g.id = "tau_star_growth_cap";
  g.tolerance = tolerance;
  g.parameters = {{"lambda", lambda}, {"tau_star", tau}, {"factor", std::sqrt(2.0)}};
  g.worstRatio = 0.0;
  std::size_t hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double end = l.times[i] + tau;
    hi = std::max(hi, i);
    while (hi + 1 < n && l.times[hi + 1] <= end) ++hi;
    double m = 0.0;
    std::size_t arg = i;
    for (std::size_t k = i; k <= hi; ++k) {
      if (l.normPhiNeq[k] > m) {
        m = l.normPhiNeq[k];
        arg = k;
      }
    }
    const double ratio = safeRatio(m, std::sqrt(2.0) * l.normPhiNeq[i]);
    if (ratio > g.worstRatio) {
      g.worstRatio = ratio;
      g.s = l.times[i];
      g.t = l.times[arg];
    }
  }
  g = finish(g);
  return out;
}

double fivePointDerivative(const std::vector<double>& x, const std::vector<double>& f, std::size_t i) {
  const std::size_t n = x.size();
  if (n < 3) throw InvalidInput("fivePointDerivative: need at least 3 samples");
  const std::size_t w = std::min<std::size_t>(5, n);
  std::size_t lo = i >= w / 2 ? i - w / 2 : 0;
  lo = std::min(lo, n - w);
  // derivative of the Lagrange interpolant at x[i]
  double d = 0.0;
  for (std::size_t a = lo; a < lo + w; ++a) {
    double la = 0.0;
    for (std::size_t b = lo; b < lo + w; ++b) {
      if (b == a) continue;
      double term = 1.0 / (x[a] - x[b]);
      for (std::size_t c = lo; c < lo + w; ++c) {
        if (c == a || c == b) continue;
        term *= (x[i] - x[c]) / (x[a] - x[c]);
      }
      la += term;
    }
    d += la * f[a];
  }
  return d;
}

AuditReport meanDecayCheck(const BootstrapLedger& l, double relTol) {
  if (l.size() < 3) throw InvalidInput("meanDecayCheck: need at least 3 samples");
  AuditReport r;
  r.id = "mean_decay";
  r.tolerance = 0.0;
  r.parameters = {{"relative_tolerance", relTol}, {"nu", l.nu}};
  const std::size_t n = l.size();
  std::vector<double> rhs(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rhs[i] = -l.nu / (2.0 * l.L1 * l.L2) * l.gradNeqSq[i] - l.nu / (2.0 * l.L2) * l.normPsi[i] * l.normPsi[i];
    scale = std::max(scale, std::abs(rhs[i]));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mismatch = std::abs(fivePointDerivative(l.times, l.phiBar, i) - rhs[i]);
    const double rel = scale > 0.0 ? mismatch / scale : mismatch;
    if (rel >= worst) {
      worst = rel;
      r.s = r.t = l.times[i];
    }
  }
  bool monotone = true;
  for (std::size_t i = 1; i < n; ++i) monotone = monotone && l.phiBar[i] <= l.phiBar[i - 1];
  r.parameters["max_relative_mismatch"] = worst;
  r.parameters["nonincreasing"] = monotone;
  r.worstRatio = monotone ? worst / relTol : kInf;
  return finish(r);
}

AuditReport energyIdentityCheck(const BootstrapLedger& l, double absTol) {
  if (l.size() < 3) throw InvalidInput("energyIdentityCheck: need at least 3 samples");
  if (l.normPhiSq.size() != l.size()) throw InvalidInput("energyIdentityCheck: ledger lacks energy terms");
  AuditReport r;
  r.id = "energy_identity";
  r.tolerance = 0.0;
  r.parameters = {{"absolute_tolerance", absTol}, {"nu", l.nu}};
  std::vector<double> half(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) half[i] = 0.5 * l.normPhiSq[i];
  double worst = 0.0, worstRes = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    const double res = fivePointDerivative(l.times, half, i) + l.nu * l.lapSq[i] - l.nu * l.gradSq[i] +
                       0.5 * l.nu * l.cubic[i];
    const double nrm = std::sqrt(l.normPhiSq[i]);
    const double ratio = std::abs(res) / (absTol * std::max(1.0, nrm * nrm * nrm));
    if (ratio >= worst) {
      worst = ratio;
      worstRes = res;
      r.s = r.t = l.times[i];
    }
  }
  r.parameters["worst_residual"] = worstRes;
  r.worstRatio = worst;
  return finish(r);
}

C1Value computeC1(double a, double b, double C) {
  if (!(C > 0.0)) throw InvalidInput("computeC1: C must be positive");
  if (a < 0.0 || b < 0.0) throw InvalidInput("computeC1: norms must be nonnegative");
  const double a83 = std::pow(a, 8.0 / 3.0);
  const double e = std::exp(16.0 * C * a83);
  const double v = 16.0 * C * e * a83 + e * b * b;
  if (!std::isfinite(v)) return {DBL_MAX, true};
  return {v, false};
}

EmpiricalC extractEmpiricalC(const BootstrapLedger& l) {
  requireNonEmpty(l, "extractEmpiricalC");
  EmpiricalC out;
  for (std::size_t i = 0; i < l.size(); ++i) {
    out.maxLhs = std::max(out.maxLhs, l.normPsi[i] * l.normPsi[i] + l.psiDissipation[i]);
  }
  const double a = l.normPhiNeq.front();
  const double b = l.normPsi.front();
  if (out.maxLhs <= b * b) {
    out.C = 0.0;
    out.c1 = b * b;
    return out;
  }
  if (a == 0.0) {
    out.C = kInf;
    out.c1 = b * b;
    return out;
  }
  double hi = 1e-12;
  while (true) {
    const auto v = computeC1(a, b, hi);
    if (v.saturated) {
      out.C = kInf;
      out.c1 = DBL_MAX;
      return out;
    }
    if (v.value >= out.maxLhs) break;
    hi *= 2.0;
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (computeC1(a, b, mid).value >= out.maxLhs ? hi : lo) = mid;
  }
  out.C = hi;
  out.c1 = computeC1(a, b, hi).value;
  return out;
}

}  // namespace kshear
