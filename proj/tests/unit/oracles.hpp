#pragma once

// Independent reference constructions used only by the tests.

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

inline Eigen::MatrixXd ladder(int n_max) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) b(n - 1, n) = std::sqrt(double(n));
  return b;
}

inline Eigen::MatrixXd position(int n_max, double ell) {
  const Eigen::MatrixXd b = ladder(n_max);
  return ell / std::sqrt(2.0) * (b + b.transpose());
}

// tanh(A) = (exp(2A) - I)(exp(2A) + I)^{-1}
inline Eigen::MatrixXd tanh_expm(const Eigen::MatrixXd& A) {
  const Eigen::MatrixXd e = (2.0 * A).exp();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  return (e - I) * (e + I).inverse();
}

inline Eigen::VectorXcd expm_apply(const Eigen::MatrixXd& H, const Eigen::VectorXcd& v, double t) {
  Eigen::MatrixXcd M = (std::complex<double>(0.0, -t) * H.cast<std::complex<double>>()).exp();
  return M * v;
}

inline Eigen::VectorXd sorted(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  return v;
}

inline Eigen::VectorXcd random_state(Eigen::Index n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = {g(gen), g(gen)};
  return v / v.norm();
}

inline Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g(gen);
  return m;
}

}  // namespace oracle
