#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <stdexcept>
#include <string>

namespace stnlmc {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

class SingularMatrixError : public std::runtime_error {
public:
  SingularMatrixError(const std::string& what, int pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  int pivot() const { return pivot_; }

private:
  int pivot_;
};

// Sparse LU factorization with pivoting (UMFPACK). Immutable after construction;
// concurrent solves on one object are allowed.
class Factorization {
public:
  explicit Factorization(const SparseMatrix& A);
  ~Factorization();
  Factorization(const Factorization&) = delete;
  Factorization& operator=(const Factorization&) = delete;

  int size() const { return n_; }
  double max_abs_entry() const { return maxAbs_; }

  // Solves A x = b, or A^T x = b when transpose is set.
  void solve(const double* b, double* x, bool transpose = false) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& b, bool transpose = false) const;
  Eigen::MatrixXd solve_many(const Eigen::MatrixXd& B, bool transpose = false) const;

private:
  int n_ = 0;
  double maxAbs_ = 0.0;
  std::vector<int> Ap_, Ai_;
  std::vector<double> Ax_;
  void* numeric_ = nullptr;
};

std::unique_ptr<Factorization> factorize(const SparseMatrix& A);

// Max-norm residual and the scale 1e-10 (|A| |x| + |b|) used as the acceptance bound.
double residual_inf(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b,
                    bool transpose = false);
bool residual_within_bound(const SparseMatrix& A, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& b, bool transpose = false);

}  // namespace stnlmc
