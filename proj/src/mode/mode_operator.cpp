#include "kshear/mode_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kshear/errors.hpp"

namespace kshear {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;
constexpr double kGolden = 0.6180339887498949;

// Relative spectral amplitude of u beyond |j| > J.
double tailBeyond(const Profile1D& p, int J) {
  double total = 0.0, tail = 0.0;
  for (int j = -p.Ny() / 2; j < p.Ny() / 2; ++j) {
    const double e = std::norm(p.coeff(j));
    total += e;
    if (std::abs(j) > J) tail += e;
  }
  return total > 0.0 ? std::sqrt(tail / total) : 0.0;
}

}  // namespace

std::string toString(Variant v) { return v == Variant::Full ? "full" : "hypoelliptic"; }

Variant parseVariant(const std::string& s) {
  if (s == "full") return Variant::Full;
  if (s == "hypoelliptic") return Variant::Hypoelliptic;
  throw InvalidInput("unknown operator variant '" + s + "'");
}

ModeOperator assemble(double nu, double kappa, const ShearProfile& profile, int J, Variant variant) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw InvalidInput("assemble: nu must be positive");
  if (kappa == 0.0 || !std::isfinite(kappa)) throw InvalidInput("assemble: kappa must be nonzero");
  if (J < 1) throw InvalidInput("assemble: J must be >= 1");
  const Profile1D& p = profile.samples;
  if (tailBeyond(p, J) > 1e-12) {
    int need = J;
    while (need < p.Ny() / 2 && tailBeyond(p, need) > 1e-12) ++need;
    throw UnresolvedProfile("assemble: profile not resolved at J = " + std::to_string(J), need);
  }

  ModeOperator op;
  op.nu_ = nu;
  op.kappa_ = kappa;
  op.J_ = J;
  op.variant_ = variant;
  op.profile_ = profile;

  const int n = 2 * J + 1;
  op.diag_.resize(n);
  for (int r = 0; r < n; ++r) {
    const double eta = kTwoPi * (r - J) / p.L2();
    const double q2 = (variant == Variant::Full ? kappa * kappa : 0.0) + eta * eta;
    op.diag_(r) = nu * q2 * q2;
  }

  // Coefficients below 1e-14 max|uhat| are treated as exact zeros.
  const int dmax = std::min(2 * J, p.Ny() / 2 - 1);
  double cmax = 0.0;
  for (int d = 0; d <= dmax; ++d) cmax = std::max(cmax, std::abs(p.coeff(d)));
  int b = 0;
  for (int d = 1; d <= dmax; ++d) {
    if (std::abs(p.coeff(d)) > 1e-14 * cmax) b = d;
  }
  op.bandwidth_ = b;
  op.uhat_.resize(static_cast<std::size_t>(2 * b + 1));
  for (int d = -b; d <= b; ++d) {
    const Complex c = p.coeff(d);
    op.uhat_[static_cast<std::size_t>(d + b)] = std::abs(c) > 1e-14 * cmax ? c : Complex(0.0);
  }
  // Hermitian by construction: uhat_{-d} = conj(uhat_d).
  op.uhat_[static_cast<std::size_t>(b)] = Complex(op.uhat_[static_cast<std::size_t>(b)].real(), 0.0);

  const auto u = resample(p, std::max(4096, p.Ny()));
  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  op.minU_ = *lo;
  op.maxU_ = *hi;
  return op;
}

Eigen::MatrixXcd ModeOperator::toeplitz() const {
  const int n = size();
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = std::max(0, r - bandwidth_); c <= std::min(n - 1, r + bandwidth_); ++c) {
      T(r, c) = uhat_[static_cast<std::size_t>(r - c + bandwidth_)];
    }
  }
  return T;
}

Eigen::MatrixXcd ModeOperator::matrix() const {
  Eigen::MatrixXcd M = Complex(0.0, kappa_) * toeplitz();
  M.diagonal() += diag_.cast<Complex>();
  return M;
}

PsiResult psi(const ModeOperator& op, double searchTol, const PsiOptions& options) {
  if (!(searchTol > 0.0)) throw InvalidInput("psi: searchTol must be positive");
  if (options.gridPoints < 3) throw InvalidInput("psi: need at least 3 grid points");
  const double k = op.kappa();
  const double pad = 2.0 * op.nu() * std::pow(k, 4) + 1.0;
  const double a = std::min(k * op.minU(), k * op.maxU()) - pad;
  const double b = std::max(k * op.minU(), k * op.maxU()) + pad;
  const int G = options.gridPoints;
  const double h = (b - a) / (G - 1);

  std::vector<double> lam(static_cast<std::size_t>(G)), sig(static_cast<std::size_t>(G));
  for (int i = 0; i < G; ++i) {
    lam[static_cast<std::size_t>(i)] = a + h * i;
    sig[static_cast<std::size_t>(i)] = resolventMinSV(op, lam[static_cast<std::size_t>(i)]);
  }
  const double gridBest = *std::min_element(sig.begin(), sig.end());

  PsiResult best{std::numeric_limits<double>::infinity(), 0.0};
  for (int i = 0; i < G; ++i) {
    const double s = sig[static_cast<std::size_t>(i)];
    if (s < best.psi) best = {s, lam[static_cast<std::size_t>(i)]};
    const bool leftOk = i == 0 || s <= sig[static_cast<std::size_t>(i - 1)];
    const bool rightOk = i == G - 1 || s <= sig[static_cast<std::size_t>(i + 1)];
    if (!leftOk || !rightOk) continue;
    // sigma_min is 1-Lipschitz in lambda, so this bracket cannot beat the best grid value.
    if (s - h > gridBest) continue;
    double lo = lam[static_cast<std::size_t>(std::max(0, i - 1))];
    double hi = lam[static_cast<std::size_t>(std::min(G - 1, i + 1))];
    double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
    double f1 = resolventMinSV(op, x1), f2 = resolventMinSV(op, x2);
    while (hi - lo > searchTol) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - kGolden * (hi - lo);
        f1 = resolventMinSV(op, x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + kGolden * (hi - lo);
        f2 = resolventMinSV(op, x2);
      }
    }
    if (f1 < best.psi) best = {f1, x1};
    if (f2 < best.psi) best = {f2, x2};
  }
  return best;
}

NormResult semigroupNorm(const ModeOperator& op, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidInput("semigroupNorm: t must be finite and >= 0");
  if (t == 0.0) return {1.0, false};
  const Eigen::MatrixXcd E = expm(-t * op.matrix());
  if (!E.allFinite()) return {0.0, true};
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(E);
  const double s = svd.singularValues()(0);
  if (!(s >= std::numeric_limits<double>::min())) return {0.0, true};
  return {s, false};
}

RateResult measuredDecayRate(const ModeOperator& op, double threshold, double psiHint) {
  if (!(threshold > 0.0) || !(threshold < 1.0)) {
    throw InvalidInput("measuredDecayRate: threshold must lie in (0, 1)");
  }
  constexpr double kTmax = 1e8;
  auto below = [&](double t) { return semigroupNorm(op, t).value <= threshold; };

  double hi = (psiHint > 0.0) ? (kHalfPi - std::log(threshold)) / psiHint : 1.0;
  hi = std::min(hi, kTmax);
  while (!below(hi)) {
    if (hi >= kTmax) return {0.0, kTmax, true};
    hi = std::min(2.0 * hi, kTmax);
  }
  double lo = 0.0;
  while (hi - lo > 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (below(mid)) hi = mid;
    else lo = mid;
  }
  return {-std::log(threshold) / hi, hi, false};
}

DecayMeasurement measure(double nu, double kappa, const ShearProfile& profile, int J, Variant variant,
                         const MeasureOptions& options) {
  DecayMeasurement m;
  m.variant = toString(variant);
  m.profile = profile.label;
  m.mEff = profile.declaredOrder;
  m.nu = nu;
  m.kappa = kappa;
  m.J = J;
  m.rateThreshold = options.threshold;
  const ModeOperator op = assemble(nu, kappa, profile, J, variant);
  const PsiResult pr = psi(op, options.searchTol, options.psiOptions);
  m.psi = pr.psi;
  m.argminLambda = pr.argminLambda;
  if (options.doublingCheck) {
    const PsiResult p2 = psi(assemble(nu, kappa, profile, 2 * J, variant), options.searchTol, options.psiOptions);
    m.jRelativeChange = std::abs(p2.psi - pr.psi) / std::max(std::abs(p2.psi), std::numeric_limits<double>::min());
    m.jConverged = m.jRelativeChange < options.doublingTol;
  }
  m.measuredRate = std::numeric_limits<double>::quiet_NaN();
  m.gpMargin = std::numeric_limits<double>::quiet_NaN();
  if (options.measureRate) {
    const RateResult r = measuredDecayRate(op, options.threshold, pr.psi);
    m.rateFailed = r.failed;
    if (!r.failed) {
      m.measuredRate = r.rate;
      m.gpMargin = std::exp(-r.crossingTime * pr.psi + kHalfPi) - options.threshold;
    }
  }
  return m;
}

ScalingFit fitScaling(const std::vector<DecayMeasurement>& data, FitQuantity quantity, FitVariable variable,
                      double minDecades) {
  if (data.size() < 4) throw InvalidInput("fitScaling: need at least 4 measurements");
  std::vector<double> xs, ys;
  for (const auto& d : data) {
    const double x = variable == FitVariable::Nu ? d.nu : std::abs(d.kappa);
    const double other = variable == FitVariable::Nu ? std::abs(d.kappa) : d.nu;
    const double other0 = variable == FitVariable::Nu ? std::abs(data.front().kappa) : data.front().nu;
    if (std::abs(other - other0) > 1e-12 * std::abs(other0)) {
      throw InvalidInput("fitScaling: the non-swept variable must be fixed");
    }
    const double y = quantity == FitQuantity::Psi ? d.psi : d.measuredRate;
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(y)) throw InvalidInput("fitScaling: data must be positive");
    xs.push_back(std::log(x));
    ys.push_back(std::log(y));
  }
  const auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
  if ((*xmax - *xmin) / std::log(10.0) < minDecades * (1.0 - 1e-12)) {
    throw InvalidInput("fitScaling: swept variable spans fewer than the required decades");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  ScalingFit fit;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.prefactor = std::exp(intercept);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double pred = std::exp(intercept + fit.exponent * xs[i]);
    const double y = std::exp(ys[i]);
    fit.residual = std::max(fit.residual, std::abs(pred - y) / y);
  }
  return fit;
}

}  // namespace kshear
