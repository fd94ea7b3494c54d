#include "kshear/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "kshear/errors.hpp"

namespace kshear {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxOrder = 12;

double maxAbs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double circularDistance(double a, double b, double L) {
  const double d = std::fmod(std::abs(a - b), L);
  return std::min(d, L - d);
}

}  // namespace

ShearProfile sinPowerProfile(int m, double L2, int Ny) {
  if (m < 1) throw InvalidInput("sinPowerProfile: m must be >= 1");
  std::vector<double> u(static_cast<std::size_t>(Ny));
  for (int i = 0; i < Ny; ++i) u[static_cast<std::size_t>(i)] = std::pow(std::sin(kTwoPi * i / Ny), m);
  return ShearProfile{forward(L2, u), std::max(2, m), "sin^" + std::to_string(m)};
}

ShearProfile constantProfile(double value, double L2, int Ny) {
  std::vector<double> u(static_cast<std::size_t>(Ny), value);
  std::ostringstream label;
  label << "const(" << value << ")";
  return ShearProfile{forward(L2, u), 2, label.str()};
}

ShearProfile profileFromSamples(const std::vector<double>& u, double L2, int Ny, int declaredOrder,
                                std::string label) {
  if (u.size() < 2 || u.size() % 2 != 0) {
    throw InvalidInput("profileFromSamples: need an even number of samples");
  }
  for (double v : u) {
    if (!std::isfinite(v)) throw InvalidInput("profileFromSamples: non-finite sample");
  }
  return ShearProfile{resize(forward(L2, u), Ny), declaredOrder, std::move(label)};
}

ShearProfile loadProfileCsv(const std::string& path, double L2, int Ny, int declaredOrder) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("loadProfileCsv: cannot open " + path);
  std::vector<double> ys, us;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double y, u;
    if (!(row >> y >> u)) {
      if (ys.empty()) continue;  // header
      throw InvalidInput("loadProfileCsv: malformed row '" + line + "'");
    }
    ys.push_back(y);
    us.push_back(u);
  }
  const std::size_t M = ys.size();
  if (M < 2 || M % 2 != 0) throw InvalidInput("loadProfileCsv: need an even number of rows");
  for (std::size_t i = 0; i < M; ++i) {
    if (std::abs(ys[i] - L2 * static_cast<double>(i) / M) > 1e-9 * L2) {
      throw InvalidInput("loadProfileCsv: y column is not the equispaced grid i*L2/M");
    }
  }
  return profileFromSamples(us, L2, Ny, declaredOrder, path);
}

double tailEnergyFraction(const Profile1D& profile) {
  const int Ny = profile.Ny();
  double total = 0.0, tail = 0.0;
  for (int j = -Ny / 2; j < Ny / 2; ++j) {
    const double e = std::norm(profile.coeff(j));
    total += e;
    if (std::abs(j) > Ny / 4) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

std::vector<CriticalPoint> criticalPoints(const ShearProfile& profile, double tol) {
  const Profile1D& p = profile.samples;
  const double L2 = p.L2();
  const int Ny = p.Ny();
  const double tail = tailEnergyFraction(p);
  if (tail > tol) {
    throw UnresolvedProfile("criticalPoints: spectral tail fraction " + std::to_string(tail) +
                                " exceeds tolerance",
                            2 * Ny);
  }

  const double umax = std::max(maxAbs(profile.values()), std::numeric_limits<double>::min());
  std::vector<double> thresh(kMaxOrder + 2);
  for (int q = 0; q < kMaxOrder + 2; ++q) {
    double roundoff = 0.0;
    for (int j = 0; j <= Ny / 2; ++j) roundoff += 2.0 * std::abs(p.half()[static_cast<std::size_t>(j)]) * std::pow(std::abs(p.eta(j)), q);
    thresh[static_cast<std::size_t>(q)] = std::max(tol * umax * std::pow(kTwoPi / L2, q),
                                                   64.0 * std::numeric_limits<double>::epsilon() * roundoff);
  }
  auto d = [&](double y, int q) { return evaluate(p, y, q); };
  auto small = [&](double y, int q) { return std::abs(d(y, q)) <= thresh[static_cast<std::size_t>(q)]; };

  const int M = std::max(8192, 16 * Ny);
  const double h = L2 / M;
  const auto du = resample(derivative(p, 1), M);
  if (maxAbs(du) <= thresh[1]) throw InvalidInput("criticalPoints: u' vanishes identically");

  std::vector<CriticalPoint> found;
  for (int i = 0; i < M; ++i) {
    const double a = std::abs(du[static_cast<std::size_t>((i + M - 1) % M)]);
    const double b = std::abs(du[static_cast<std::size_t>(i)]);
    const double c = std::abs(du[static_cast<std::size_t>((i + 1) % M)]);
    if (!(b <= a && b <= c)) continue;
    // Keep the highest q whose bracketed root of u^(q) has u', ..., u^(q)
    // all vanishing; that root is simple, so its location is accurate.
    CriticalPoint best{0.0, 0};
    for (int q = 1; q < kMaxOrder; ++q) {
      double lo = (i - 2) * h, hi = (i + 2) * h;
      double flo = d(lo, q), fhi = d(hi, q);
      // Only sign changes that stand out of the rounding floor count.
      if ((flo > 0.0) == (fhi > 0.0) || small(lo, q) || small(hi, q)) continue;
      for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * L2; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = d(mid, q);
        if ((fm > 0.0) == (flo > 0.0) && fm != 0.0) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
          fhi = fm;
        }
      }
      const double y = 0.5 * (lo + hi);
      if (!small(y, 1)) break;
      bool vanish = true;
      for (int r = 2; r <= q && vanish; ++r) vanish = small(y, r);
      if (vanish && !small(y, q + 1)) best = {y, q + 1};
    }
    if (best.order > 0) {
      double yw = std::fmod(best.y, L2);
      if (yw < 0.0) yw += L2;
      if (yw >= L2) yw -= L2;
      found.push_back({yw, best.order});
    }
  }

  std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.y < y.y; });
  std::vector<CriticalPoint> out;
  for (const auto& cp : found) {
    bool dup = false;
    for (const auto& o : out) dup = dup || circularDistance(o.y, cp.y, L2) < 8.0 * h;
    if (!dup) out.push_back(cp);
  }
  return out;
}

}  // namespace kshear
