#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <lapacke.h>

#include "kshear/errors.hpp"
#include "kshear/mode_operator.hpp"

namespace kshear {
namespace {

// std::complex<double> and C99 double _Complex share layout.
lapack_complex_double* lp(Complex* p) { return reinterpret_cast<lapack_complex_double*>(p); }
const lapack_complex_double* lp(const Complex* p) { return reinterpret_cast<const lapack_complex_double*>(p); }

// Banded LU of A = H - i lambda I in LAPACK general-band storage.
class BandedLU {
public:
  BandedLU(const ModeOperator& op, double lambda)
      : n_(op.size()), kl_(op.bandwidth()), ku_(op.bandwidth()), ldab_(2 * kl_ + ku_ + 1),
        ab_(static_cast<std::size_t>(ldab_) * n_), ipiv_(static_cast<std::size_t>(n_)) {
    const auto& d = op.diagonal();
    const auto& uh = op.uhat();
    const int b = op.bandwidth();
    const Complex ik(0.0, op.kappa());
    for (int c = 0; c < n_; ++c) {
      for (int r = std::max(0, c - ku_); r <= std::min(n_ - 1, c + kl_); ++r) {
        Complex v = ik * uh[static_cast<std::size_t>(r - c + b)];
        if (r == c) v += Complex(d(r), -lambda);
        ab_[static_cast<std::size_t>(kl_ + ku_ + r - c) + static_cast<std::size_t>(c) * ldab_] = v;
      }
    }
    const lapack_int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_, lp(ab_.data()), ldab_, ipiv_.data());
    if (info < 0) throw std::logic_error("zgbtrf: invalid argument");
    singular_ = info > 0;
  }

  bool singular() const { return singular_; }

  void solve(char trans, Eigen::VectorXcd& x) const {
    LAPACKE_zgbtrs(LAPACK_COL_MAJOR, trans, n_, kl_, ku_, 1, lp(ab_.data()), ldab_, ipiv_.data(),
                   lp(x.data()), n_);
  }

private:
  lapack_int n_, kl_, ku_, ldab_;
  std::vector<Complex> ab_;
  std::vector<lapack_int> ipiv_;
  bool singular_ = false;
};

// Largest eigenvalue of (A^H A)^{-1} by Lanczos with full reorthogonalization.
double largestInverseGramEigenvalue(const BandedLU& lu, int n) {
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> dist;
  Eigen::VectorXcd q(n);
  for (int i = 0; i < n; ++i) q(i) = Complex(dist(rng), dist(rng));
  q.normalize();

  Eigen::MatrixXcd Q(n, n + 1);
  std::vector<double> alpha, beta;
  Q.col(0) = q;
  double theta = 0.0;
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXcd w = Q.col(k);
    lu.solve('C', w);
    lu.solve('N', w);
    const double a = Q.col(k).dot(w).real();
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXcd h = Q.leftCols(k + 1).adjoint() * w;
      w -= Q.leftCols(k + 1) * h;
    }
    const double bk = w.norm();

    Eigen::VectorXd dg = Eigen::Map<Eigen::VectorXd>(alpha.data(), k + 1);
    Eigen::VectorXd sub(k);
    for (int i = 0; i < k; ++i) sub(i) = beta[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(dg, sub, Eigen::ComputeEigenvectors);
    theta = es.eigenvalues()(k);
    const double resid = bk * std::abs(es.eigenvectors()(k, k));
    if (!std::isfinite(theta)) return theta;
    if (resid <= 1e-14 * theta || bk <= 1e-300) break;
    beta.push_back(bk);
    Q.col(k + 1) = w / bk;
  }
  return theta;
}

}  // namespace

double resolventMinSV(const ModeOperator& op, double lambda) {
  if (!std::isfinite(lambda)) throw InvalidInput("resolventMinSV: lambda must be finite");
  const BandedLU lu(op, lambda);
  if (lu.singular()) return 0.0;
  const double theta = largestInverseGramEigenvalue(lu, op.size());
  if (!(theta > 0.0) || !std::isfinite(theta)) return 0.0;
  return 1.0 / std::sqrt(theta);
}

}  // namespace kshear
