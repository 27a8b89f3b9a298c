#include "stnlmc/linsolve.hpp"

#include <umfpack.h>

#include <algorithm>
#include <cmath>

namespace stnlmc {

namespace {

void default_control(double* control) {
  umfpack_di_defaults(control);
  control[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
  control[UMFPACK_IRSTEP] = 0;
}

}  // namespace

Factorization::Factorization(const SparseMatrix& Ain) {
  if (Ain.rows() != Ain.cols()) throw std::invalid_argument("factorize: matrix is not square");
  SparseMatrix A = Ain;
  A.makeCompressed();
  n_ = static_cast<int>(A.rows());
  Ap_.assign(A.outerIndexPtr(), A.outerIndexPtr() + n_ + 1);
  Ai_.assign(A.innerIndexPtr(), A.innerIndexPtr() + A.nonZeros());
  Ax_.assign(A.valuePtr(), A.valuePtr() + A.nonZeros());
  for (double v : Ax_) {
    if (!std::isfinite(v)) throw std::invalid_argument("factorize: non-finite entry");
    maxAbs_ = std::max(maxAbs_, std::abs(v));
  }
  if (n_ == 0) return;
  if (maxAbs_ == 0.0) throw SingularMatrixError("factorize: zero matrix", 0);

  double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
  default_control(control);
  void* symbolic = nullptr;
  int status = umfpack_di_symbolic(n_, n_, Ap_.data(), Ai_.data(), Ax_.data(), &symbolic, control, info);
  if (status != UMFPACK_OK) {
    if (symbolic) umfpack_di_free_symbolic(&symbolic);
    throw std::runtime_error("factorize: symbolic analysis failed, status " + std::to_string(status));
  }
  status = umfpack_di_numeric(Ap_.data(), Ai_.data(), Ax_.data(), symbolic, &numeric_, control, info);
  umfpack_di_free_symbolic(&symbolic);
  if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix) {
    if (numeric_) umfpack_di_free_numeric(&numeric_);
    throw std::runtime_error("factorize: numeric factorization failed, status " + std::to_string(status));
  }

  // Pivot check on the scaled matrix R A that UMFPACK factors.
  std::vector<double> udiag(n_), rs(n_);
  int doRecip = 0;
  umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
                         udiag.data(), &doRecip, rs.data(), numeric_);
  double scaledMax = 0.0;
  for (int c = 0; c < n_; ++c)
    for (int p = Ap_[c]; p < Ap_[c + 1]; ++p) {
      const double r = doRecip ? rs[Ai_[p]] : 1.0 / rs[Ai_[p]];
      scaledMax = std::max(scaledMax, std::abs(Ax_[p] * r));
    }
  for (int k = 0; k < n_; ++k) {
    if (!(std::abs(udiag[k]) >= 1e-14 * scaledMax)) {
      umfpack_di_free_numeric(&numeric_);
      throw SingularMatrixError("factorize: numerically singular matrix at pivot " + std::to_string(k), k);
    }
  }
}

Factorization::~Factorization() {
  if (numeric_) umfpack_di_free_numeric(&numeric_);
}

void Factorization::solve(const double* b, double* x, bool transpose) const {
  if (n_ == 0) return;
  double control[UMFPACK_CONTROL], info[UMFPACK_INFO];
  default_control(control);
  const int status = umfpack_di_solve(transpose ? UMFPACK_At : UMFPACK_A, Ap_.data(), Ai_.data(),
                                      Ax_.data(), x, b, numeric_, control, info);
  if (status != UMFPACK_OK) throw std::runtime_error("solve: UMFPACK status " + std::to_string(status));
}

Eigen::VectorXd Factorization::solve(const Eigen::VectorXd& b, bool transpose) const {
  if (b.size() != n_) throw std::invalid_argument("solve: dimension mismatch");
  Eigen::VectorXd x(n_);
  solve(b.data(), x.data(), transpose);
  return x;
}

Eigen::MatrixXd Factorization::solve_many(const Eigen::MatrixXd& B, bool transpose) const {
  if (B.rows() != n_) throw std::invalid_argument("solve_many: dimension mismatch");
  Eigen::MatrixXd X(n_, B.cols());
  for (Eigen::Index c = 0; c < B.cols(); ++c) solve(B.col(c).data(), X.col(c).data(), transpose);
  return X;
}

std::unique_ptr<Factorization> factorize(const SparseMatrix& A) {
  return std::make_unique<Factorization>(A);
}

double residual_inf(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b,
                    bool transpose) {
  const Eigen::VectorXd r = (transpose ? Eigen::VectorXd(A.transpose() * x) : Eigen::VectorXd(A * x)) - b;
  return r.lpNorm<Eigen::Infinity>();
}

bool residual_within_bound(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b,
                           bool transpose) {
  double normA = 0.0;
  const SparseMatrix At = A.transpose();
  const SparseMatrix& rowsOf = transpose ? A : At;  // columns of rowsOf are rows of the operator
  for (int k = 0; k < rowsOf.outerSize(); ++k) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(rowsOf, k); it; ++it) s += std::abs(it.value());
    normA = std::max(normA, s);
  }
  const double bound = 1e-10 * (normA * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>());
  return residual_inf(A, x, b, transpose) <= bound;
}

}  // namespace stnlmc
