#include "qwork/krylov.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace qwork {

namespace {

constexpr double kBreakdown = 1e-13;

// Full Gram-Schmidt against V[0..k), applied twice.
void reorthogonalize(const std::vector<Eigen::VectorXcd>& V, int k, Eigen::VectorXcd& w) {
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < k; ++i) w -= V[i].dot(w) * V[i];
  }
}

}  // namespace

Eigen::VectorXcd tridiagonal_expm_e1(const Eigen::VectorXd& diag,
                                     const Eigen::VectorXd& offdiag, double h) {
  const Eigen::Index k = diag.size();
  Eigen::VectorXcd out(k);
  if (k == 1) {
    out(0) = std::polar(1.0, -diag(0) * h);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, offdiag.head(k - 1), Eigen::ComputeEigenvectors);
  const Eigen::MatrixXd& Q = es.eigenvectors();
  const Eigen::VectorXd& lam = es.eigenvalues();
  Eigen::VectorXcd c(k);
  for (Eigen::Index j = 0; j < k; ++j) c(j) = std::polar(Q(0, j), -lam(j) * h);
  out = Q.cast<std::complex<double>>() * c;
  return out;
}

KrylovPropagator::KrylovPropagator(KrylovOptions opts) : opts_(opts) {
  if (opts_.max_dim < 2) throw std::invalid_argument("KrylovPropagator: max_dim must be >= 2");
  if (!(opts_.tol > 0.0)) throw std::invalid_argument("KrylovPropagator: tol must be positive");
}

void KrylovPropagator::advance(const LinearMap& H, Eigen::VectorXcd& psi, double dt,
                               double max_step) {
  if (dt == 0.0) return;
  max_step = std::abs(max_step);
  if (!(max_step > 0.0)) throw std::invalid_argument("KrylovPropagator: max_step must be positive");
  const double sign = dt > 0 ? 1.0 : -1.0;
  double remaining = std::abs(dt);
  if (h_next_ <= 0.0) h_next_ = max_step;
  while (remaining > 0.0) {
    double h = std::min({h_next_, max_step, remaining});
    // Avoid a sliver step at the end.
    if (remaining - h < 1e-12 * std::abs(dt)) h = remaining;
    const double taken = substep(H, psi, sign * h);
    remaining -= std::abs(taken);
    if (remaining < 1e-14 * std::abs(dt)) remaining = 0.0;
  }
}

double KrylovPropagator::substep(const LinearMap& H, Eigen::VectorXcd& psi, double h) {
  const int m = opts_.max_dim;
  const double beta0 = psi.norm();
  if (beta0 == 0.0) return h;
  if (static_cast<int>(V_.size()) < m + 1) V_.resize(m + 1);

  Eigen::VectorXd alpha(m), beta(m);
  V_[0] = psi / beta0;
  int k = 0;
  bool exact = false;
  bool converged = false;
  Eigen::VectorXcd y;
  double hh = h;

  for (int j = 0; j < m; ++j) {
    H(V_[j], w_);
    ++stats_.matvecs;
    alpha(j) = V_[j].dot(w_).real();
    w_ -= alpha(j) * V_[j];
    if (j > 0) w_ -= beta(j - 1) * V_[j - 1];
    reorthogonalize(V_, j + 1, w_);
    beta(j) = w_.norm();
    k = j + 1;

    const double scale = std::max(std::abs(alpha(j)), 1.0);
    if (beta(j) < kBreakdown * scale) {
      exact = true;
      y = tridiagonal_expm_e1(alpha.head(k), beta.head(k), hh);
      break;
    }
    y = tridiagonal_expm_e1(alpha.head(k), beta.head(k), hh);
    const double err = beta0 * beta(j) * std::abs(y(k - 1));
    if (err < opts_.tol) {
      converged = true;
      break;
    }
    if (j + 1 < m) V_[j + 1] = w_ / beta(j);
  }

  if (!exact && !converged) {
    int halvings = 0;
    for (;;) {
      hh *= 0.5;
      ++halvings;
      ++stats_.halvings;
      if (halvings > opts_.max_halvings) {
        throw PropagationError("Krylov substep did not converge after " +
                               std::to_string(halvings) + " halvings");
      }
      y = tridiagonal_expm_e1(alpha.head(k), beta.head(k), hh);
      const double err = beta0 * beta(k - 1) * std::abs(y(k - 1));
      if (err < opts_.tol) break;
    }
    h_next_ = std::abs(hh);
  } else {
    // Converged with room to spare: let the next substep grow.
    h_next_ = (k < m) ? std::abs(hh) * 1.5 : std::abs(hh);
  }

  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
  for (int i = 0; i < k; ++i) out += y(i) * V_[i];
  psi = beta0 * out;
  ++stats_.substeps;
  return hh;
}

std::pair<double, double> lanczos_extremes(const LinearMap& H, std::size_t dim, int steps) {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * std::cos(0.7 * double(i) + 0.3);
  v /= v.norm();
  const int m = static_cast<int>(std::min<std::size_t>(steps, dim));
  std::vector<Eigen::VectorXcd> V(m);
  Eigen::VectorXd a(m), b(m);
  Eigen::VectorXcd w;
  V[0] = v;
  int k = 0;
  for (int j = 0; j < m; ++j) {
    H(V[j], w);
    a(j) = V[j].dot(w).real();
    w -= a(j) * V[j];
    if (j > 0) w -= b(j - 1) * V[j - 1];
    reorthogonalize(V, j + 1, w);
    b(j) = w.norm();
    k = j + 1;
    if (b(j) < kBreakdown * std::max(1.0, std::abs(a(j)))) break;
    if (j + 1 < m) V[j + 1] = w / b(j);
  }
  if (k == 1) return {a(0), a(0)};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(a.head(k), b.head(k - 1), Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(0), es.eigenvalues()(k - 1)};
}

}  // namespace qwork
