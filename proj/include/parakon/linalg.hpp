#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

namespace parakon {

// Space dimensions handled by the toolkit never exceed 4, so points and
// matrices live on the stack.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

using Rng = std::mt19937_64;

inline Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

/// Eigenvalues of a symmetric matrix in increasing order.
inline Vec symmetric_eigenvalues(const Mat& X) {
  if (X.rows() == 1) return X.col(0);
  Eigen::SelfAdjointEigenSolver<Mat> solver(X, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

inline double min_eigenvalue(const Eigen::MatrixXd& X) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(X, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Symmetric matrix with entries uniform in [-bound, bound].
inline Mat random_symmetric(int n, double bound, Rng& rng) {
  Mat X(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      X(i, j) = uniform(rng, -bound, bound);
      X(j, i) = X(i, j);
    }
  }
  return X;
}

/// B Bᵀ with B entries uniform in [-bound, bound]; always positive semidefinite.
inline Mat random_psd(int n, double bound, Rng& rng) {
  Mat B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = uniform(rng, -bound, bound);
  return B * B.transpose();
}

inline Vec random_unit(int n, Rng& rng) {
  std::normal_distribution<double> normal;
  Vec e(n);
  do {
    for (int i = 0; i < n; ++i) e(i) = normal(rng);
  } while (e.norm() < 1e-8);
  return e / e.norm();
}

inline std::string to_string(const Vec& v) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << v(i);
  os << ')';
  return os.str();
}

inline std::string to_string(const Mat& X) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    os << (i ? "; " : "");
    for (Eigen::Index j = 0; j < X.cols(); ++j) os << (j ? " " : "") << X(i, j);
  }
  os << ']';
  return os.str();
}

}  // namespace parakon
