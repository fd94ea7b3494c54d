#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <limits>
#include <numeric>

#include "kshear/errors.hpp"
#include "kshear/profiles.hpp"

namespace kshear {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Arc {
  double start;
  double end;
};

// Fine samples split into monotone pieces, so that each sublevel set
// {|u - lambda| <= h} is at most one index interval per piece.
class SublevelSets {
public:
  SublevelSets(std::vector<double> u, double L2) : L2_(L2), dy_(L2 / static_cast<double>(u.size())) {
    const int M = static_cast<int>(u.size());
    offset_ = static_cast<int>(std::max_element(u.begin(), u.end()) - u.begin());
    u_.resize(u.size());
    for (int i = 0; i < M; ++i) u_[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>((i + offset_) % M)];
    int s = 0, dir = 0;
    for (int i = 0; i + 1 < M; ++i) {
      const double d = u_[static_cast<std::size_t>(i + 1)] - u_[static_cast<std::size_t>(i)];
      const int sd = (d > 0.0) - (d < 0.0);
      if (sd == 0) continue;
      if (dir == 0) dir = sd;
      else if (sd != dir) {
        pieces_.push_back({s, i, dir});
        s = i;
        dir = sd;
      }
    }
    pieces_.push_back({s, M - 1, dir == 0 ? 1 : dir});
  }

  int size() const { return static_cast<int>(u_.size()); }
  double maxDeviation(double lambda) const {
    double m = 0.0;
    for (double v : u_) m = std::max(m, std::abs(v - lambda));
    return m;
  }

  /// Arcs (in y) conservatively containing {i : |u_i - lambda| <= h};
  /// whole is set when every sample qualifies.
  void arcs(double lambda, double h, std::vector<Arc>& out, bool& whole) const {
    idx_.clear();
    for (const auto& p : pieces_) {
      auto g = [&](int i) { return p.dir * (u_[static_cast<std::size_t>(i)] - lambda); };
      auto w = [&](int i) { return std::abs(u_[static_cast<std::size_t>(i)] - lambda); };
      int lo = p.s, hi = p.e + 1;  // first i with g >= 0
      while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (g(mid) >= 0.0) hi = mid;
        else lo = mid + 1;
      }
      const int pivot = lo;
      // [s, pivot) has w nonincreasing; [pivot, e] has w nondecreasing.
      int a = p.s, b = pivot;
      while (a < b) {
        const int mid = (a + b) / 2;
        if (w(mid) <= h) b = mid;
        else a = mid + 1;
      }
      const int left = a;
      a = pivot;
      b = p.e + 1;
      while (a < b) {
        const int mid = (a + b) / 2;
        if (w(mid) <= h) a = mid + 1;
        else b = mid;
      }
      const int right = a - 1;
      if (left <= right) idx_.push_back({left, right});
    }
    std::sort(idx_.begin(), idx_.end());
    merged_.clear();
    for (const auto& r : idx_) {
      if (!merged_.empty() && r.first <= merged_.back().second + 1) {
        merged_.back().second = std::max(merged_.back().second, r.second);
      } else {
        merged_.push_back(r);
      }
    }
    const int M = size();
    if (merged_.size() > 1 && merged_.front().first == 0 && merged_.back().second == M - 1) {
      merged_.front().first = merged_.back().first - M;
      merged_.pop_back();
    }
    out.clear();
    whole = merged_.size() == 1 && merged_.front().second - merged_.front().first + 1 >= M;
    if (whole) {
      out.push_back({0.0, L2_});
      return;
    }
    std::sort(merged_.begin(), merged_.end());
    for (const auto& [a, b] : merged_) {
      // The true set may extend up to the neighbouring excluded samples.
      out.push_back({(a - 1 + offset_) * dy_, (b + 1 + offset_) * dy_});
    }
  }

private:
  struct Piece {
    int s, e, dir;
  };
  double L2_;
  double dy_;
  int offset_ = 0;
  std::vector<double> u_;
  std::vector<Piece> pieces_;
  mutable std::vector<std::pair<int, int>> idx_, merged_;
};

// Minimal circular covering of sorted arcs by intervals of length 2*delta.
bool coverable(const std::vector<Arc>& arcs, bool whole, double L2, double delta, int N,
               std::vector<double>* centers) {
  if (centers) centers->clear();
  if (arcs.empty()) return true;
  const double w = 2.0 * delta;
  if (whole) {
    const int need = static_cast<int>(std::ceil(L2 / w - 1e-12));
    if (need > N) return false;
    if (centers) {
      for (int i = 0; i < need; ++i) centers->push_back((i + 0.5) * L2 / need);
    }
    return true;
  }
  const std::size_t R = arcs.size();
  std::vector<double> local;
  for (std::size_t t = 0; t < R; ++t) {
    const double origin = arcs[t].start;
    int count = 0;
    double coverEnd = -kInf;
    double ballStart = 0.0, reached = 0.0;
    local.clear();
    for (std::size_t n = 0; n < R && count <= N; ++n) {
      const std::size_t i = (t + n) % R;
      double s = arcs[i].start, e = arcs[i].end;
      if (i < t) {
        s += L2;
        e += L2;
      }
      e = std::min(e, origin + L2);
      while (e > coverEnd && count <= N) {
        if (count > 0) local.push_back(0.5 * (ballStart + reached));
        ballStart = std::max(s, coverEnd);
        coverEnd = ballStart + w;
        ++count;
        reached = std::min(e, coverEnd);
      }
      reached = std::max(reached, std::min(e, coverEnd));
    }
    if (count <= N) {
      if (centers) {
        local.push_back(0.5 * (ballStart + reached));
        for (double c : local) centers->push_back(std::fmod(std::fmod(c, L2) + L2, L2));
      }
      return true;
    }
  }
  return false;
}

double logLogSlope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace

std::vector<double> defaultLambdaGrid(const ShearProfile& profile, int points) {
  if (points < 2) throw InvalidInput("defaultLambdaGrid: need at least 2 points");
  const auto u = resample(profile.samples, std::max(profile.Ny(), 4096));
  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = (*lo - 1.0) + (*hi - *lo + 2.0) * i / (points - 1);
  }
  // The infimum over lambda sits at the critical values; a uniform grid can miss them.
  grid.push_back(*lo);
  grid.push_back(*hi);
  try {
    for (const auto& cp : criticalPoints(profile)) grid.push_back(evaluate(profile.samples, cp.y));
  } catch (const std::exception&) {
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<double> defaultDeltaGrid(double delta0, int points) {
  if (!(delta0 > 0.0) || points < 1) throw InvalidInput("defaultDeltaGrid: bad arguments");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = delta0 / 100.0 * std::pow(100.0, (i + 0.5) / points);
  }
  return grid;
}

double defaultDelta0(double L2) { return L2 / 6.0; }

AssumptionAudit auditAssumption(const ShearProfile& profile, int m, int N, double delta0,
                                const std::vector<double>& lambdaGrid,
                                const std::vector<double>& deltaGrid,
                                const AuditOptions& options) {
  const double L2 = profile.L2();
  if (m < 1 || N < 1) throw InvalidInput("auditAssumption: m and N must be positive");
  if (!(delta0 > 0.0) || delta0 >= L2) throw InvalidInput("auditAssumption: delta0 must lie in (0, L2)");
  if (lambdaGrid.empty() || deltaGrid.empty()) throw InvalidInput("auditAssumption: empty grid");
  for (double d : deltaGrid) {
    if (!(d > 0.0) || d >= delta0) throw InvalidInput("auditAssumption: delta grid must lie in (0, delta0)");
  }
  const int M = options.finePoints;
  if (M % 2 != 0 || M < profile.Ny()) throw InvalidInput("auditAssumption: finePoints must be even and >= Ny");
  const double dy = L2 / M;
  const double dmin = *std::min_element(deltaGrid.begin(), deltaGrid.end());
  if (dmin < options.minCellsPerDelta * dy) {
    int need = static_cast<int>(std::ceil(options.minCellsPerDelta * L2 / dmin));
    need += need % 2;
    throw RefinementRequired("auditAssumption: smallest delta spans fewer than " +
                                 std::to_string(options.minCellsPerDelta) + " fine cells",
                             need);
  }

  AssumptionAudit audit;
  audit.m = m;
  audit.N = N;
  audit.delta0 = delta0;
  audit.lambdaGrid = lambdaGrid;
  audit.deltaGrid = deltaGrid;
  audit.cMinByDelta.assign(deltaGrid.size(), kInf);
  audit.c1Estimate = kInf;
  audit.cells.reserve(lambdaGrid.size() * deltaGrid.size());

  const SublevelSets sets(resample(profile.samples, M), L2);
  std::vector<Arc> arcs;
  bool whole = false;
  auto test = [&](double lambda, double h, double delta, std::vector<double>* centers) {
    sets.arcs(lambda, h, arcs, whole);
    return coverable(arcs, whole, L2, delta, N, centers);
  };
  auto bits = [](double x) { return std::bit_cast<std::int64_t>(x); };
  auto fromBits = [](std::int64_t b) { return std::bit_cast<double>(b); };

  for (double lambda : lambdaGrid) {
    const double wmax = sets.maxDeviation(lambda);
    for (std::size_t di = 0; di < deltaGrid.size(); ++di) {
      const double delta = deltaGrid[di];
      AuditCell cell{lambda, delta, kInf, {}};
      if (!test(lambda, wmax, delta, &cell.centers)) {
        double hstar = 0.0;
        if (test(lambda, 0.0, delta, nullptr)) {
          // Smallest double h with a non-coverable sublevel set; it is one of the samples.
          std::int64_t lo = bits(0.0), hi = bits(wmax);
          while (hi - lo > 1) {
            const std::int64_t mid = lo + (hi - lo) / 2;
            if (test(lambda, fromBits(mid), delta, nullptr)) lo = mid;
            else hi = mid;
          }
          hstar = fromBits(hi);
          test(lambda, fromBits(lo), delta, &cell.centers);
        } else {
          cell.centers.clear();
        }
        cell.c = hstar / std::pow(delta / L2, m);
      }
      if (cell.c < audit.cMinByDelta[di]) audit.cMinByDelta[di] = cell.c;
      if (cell.c < audit.c1Estimate) {
        audit.c1Estimate = cell.c;
        audit.worstLambda = lambda;
        audit.worstDelta = delta;
      }
      audit.cells.push_back(std::move(cell));
    }
  }

  std::vector<std::size_t> idx(deltaGrid.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return deltaGrid[a] < deltaGrid[b]; });

  audit.largestPassingDelta0 = 0.0;
  for (auto i : idx) {
    if (!(audit.cMinByDelta[i] > 0.0)) break;
    audit.largestPassingDelta0 = deltaGrid[i];
  }

  std::vector<double> xs, ys;
  bool zero = false;
  for (std::size_t n = 0; n < std::max<std::size_t>(idx.size() / 2, 2) && n < idx.size(); ++n) {
    const double c = audit.cMinByDelta[idx[n]];
    if (c == 0.0) zero = true;
    if (c > 0.0 && std::isfinite(c)) {
      xs.push_back(deltaGrid[idx[n]]);
      ys.push_back(c);
    }
  }
  audit.smallDeltaSlope = zero ? kInf : (xs.size() >= 2 ? logLogSlope(xs, ys) : 0.0);
  audit.pass = audit.c1Estimate > 0.0 && audit.smallDeltaSlope <= options.maxSlope;
  return audit;
}

nlohmann::json toJson(const AssumptionAudit& audit, bool includeCenters) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(v > 0 ? "inf" : "-inf"); };
  nlohmann::json j;
  j["m"] = audit.m;
  j["N"] = audit.N;
  j["delta0"] = audit.delta0;
  j["lambda_grid"] = audit.lambdaGrid;
  j["delta_grid"] = audit.deltaGrid;
  nlohmann::json cmin = nlohmann::json::array();
  for (double c : audit.cMinByDelta) cmin.push_back(num(c));
  j["c_min_by_delta"] = cmin;
  j["c1_estimate"] = num(audit.c1Estimate);
  j["worst_lambda"] = audit.worstLambda;
  j["worst_delta"] = audit.worstDelta;
  j["small_delta_slope"] = num(audit.smallDeltaSlope);
  j["largest_passing_delta0"] = audit.largestPassingDelta0;
  j["pass"] = audit.pass;
  if (includeCenters) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : audit.cells) {
      cells.push_back({{"lambda", c.lambda}, {"delta", c.delta}, {"c", num(c.c)}, {"centers", c.centers}});
    }
    j["cells"] = cells;
  }
  return j;
}

}  // namespace kshear
