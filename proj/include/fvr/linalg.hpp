#pragma once

// Sparse CSR storage, direct sparse solve, and small dense utilities
// (smallest singular value, Cholesky).  The heavy lifting is delegated to
// Eigen behind these contracts.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fvr {

using DenseMatrix = Eigen::MatrixXd;

struct Triplet {
  int row, col;
  double value;
};

struct SparseMatrixCSR {
  int n_rows = 0, n_cols = 0;
  std::vector<int> offsets;  // size n_rows+1, monotone
  std::vector<int> cols;     // sorted and unique within each row
  std::vector<double> vals;

  static SparseMatrixCSR from_triplets(int rows, int cols_, std::vector<Triplet> ts) {
    std::sort(ts.begin(), ts.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrixCSR m;
    m.n_rows = rows;
    m.n_cols = cols_;
    m.offsets.assign(rows + 1, 0);
    for (std::size_t i = 0; i < ts.size();) {
      std::size_t j = i;
      double s = 0.0;
      while (j < ts.size() && ts[j].row == ts[i].row && ts[j].col == ts[i].col) s += ts[j++].value;
      m.cols.push_back(ts[i].col);
      m.vals.push_back(s);
      ++m.offsets[ts[i].row + 1];
      i = j;
    }
    for (int i = 0; i < rows; ++i) m.offsets[i + 1] += m.offsets[i];
    return m;
  }

  double operator()(int i, int j) const {
    for (int p = offsets[i]; p < offsets[i + 1]; ++p)
      if (cols[p] == j) return vals[p];
    return 0.0;
  }

  std::vector<double> multiply(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != n_cols)
      throw std::invalid_argument("SparseMatrixCSR::multiply: dimension mismatch");
    std::vector<double> y(n_rows, 0.0);
    for (int i = 0; i < n_rows; ++i) {
      double s = 0.0;
      for (int p = offsets[i]; p < offsets[i + 1]; ++p) s += vals[p] * x[cols[p]];
      y[i] = s;
    }
    return y;
  }

  DenseMatrix to_dense() const {
    DenseMatrix d = DenseMatrix::Zero(n_rows, n_cols);
    for (int i = 0; i < n_rows; ++i)
      for (int p = offsets[i]; p < offsets[i + 1]; ++p) d(i, cols[p]) = vals[p];
    return d;
  }
};

/// Direct sparse LU solve; guarantees relative residual <= 1e-10.
inline std::vector<double> solve_direct(const SparseMatrixCSR& A, const std::vector<double>& b) {
  if (A.n_rows != A.n_cols) throw std::invalid_argument("solve_direct: matrix not square");
  if (static_cast<int>(b.size()) != A.n_rows)
    throw std::invalid_argument("solve_direct: rhs length mismatch");
  if (A.n_rows == 0) return {};

  Eigen::SparseMatrix<double> M(A.n_rows, A.n_cols);
  {
    std::vector<Eigen::Triplet<double>> ts;
    ts.reserve(A.vals.size());
    for (int i = 0; i < A.n_rows; ++i)
      for (int p = A.offsets[i]; p < A.offsets[i + 1]; ++p)
        ts.emplace_back(i, A.cols[p], A.vals[p]);
    M.setFromTriplets(ts.begin(), ts.end());
  }
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(M);
  lu.factorize(M);
  if (lu.info() != Eigen::Success) throw std::runtime_error("solve_direct: singular system");
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
  Eigen::VectorXd x = lu.solve(rhs);
  double bn = rhs.norm();
  if (bn > 0.0) {
    double res = (M * x - rhs).norm() / bn;
    if (!(res <= 1e-10)) throw std::runtime_error("solve_direct: residual too large (singular or ill-conditioned system)");
  }
  return std::vector<double>(x.data(), x.data() + x.size());
}

/// Smallest singular value of a dense matrix (desk scale, dims <= 2000).
inline double smallest_singular_value(const DenseMatrix& M) {
  if (M.rows() > 2000 || M.cols() > 2000)
    throw std::invalid_argument("smallest_singular_value: matrix too large");
  Eigen::BDCSVD<DenseMatrix> svd(M);
  const auto& s = svd.singularValues();
  return s.size() > 0 ? s(s.size() - 1) : 0.0;
}

/// Lower-triangular L with L L^T = S; throws if S is not SPD.
inline DenseMatrix cholesky_factor(const DenseMatrix& S) {
  if (S.rows() != S.cols()) throw std::invalid_argument("cholesky_factor: matrix not square");
  const int n = static_cast<int>(S.rows());
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(S(i, j)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      if (std::abs(S(i, j) - S(j, i)) > 1e-12 * std::max(scale, 1.0))
        throw std::invalid_argument("cholesky_factor: matrix not symmetric");
  DenseMatrix L = DenseMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = S(j, j);
    for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > 0.0)) throw std::runtime_error("cholesky_factor: matrix not positive definite");
    L(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = S(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  return L;
}

}  // namespace fvr
