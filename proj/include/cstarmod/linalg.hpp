#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace cstarmod {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

// Relative tolerances used by every positivity / rank / equality decision.
// All decisions are scaled against max(1, operator norm) of the operand.
struct Tolerance {
  double eps_psd = 1e-9;    // eigenvalue floor for PSD tests
  double eps_rank = 1e-10;  // singular-value / eigenvalue cutoff for rank
  double eps_eq = 1e-8;     // residual bound for equality checks

  void validate() const {
    auto ok = [](double e) { return e > 0.0 && e < 1.0; };
    if (!ok(eps_psd) || !ok(eps_rank) || !ok(eps_eq))
      throw std::invalid_argument("Tolerance: all entries must lie in (0,1)");
  }
};

inline CMatrix adjoint(const CMatrix& m) { return m.adjoint(); }

// Largest singular value, computed from the smaller of the two Gram matrices.
inline double op_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  CMatrix g = m.cols() > m.rows() ? CMatrix(m * m.adjoint())
                                  : CMatrix(m.adjoint() * m);
  g = (g + g.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

inline double diff_norm(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("diff_norm: shape mismatch");
  return op_norm(a - b);
}

// Smallest eigenvalue of the Hermitian part (m + m*)/2.
inline double min_eig_hermitian(const CMatrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("min_eig_hermitian: matrix must be square");
  if (m.rows() == 0) return 0.0;
  CMatrix h = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline bool is_hermitian(const CMatrix& m, const Tolerance& tol) {
  if (m.rows() != m.cols()) return false;
  if (m.rows() == 0) return true;
  double scale = std::max(1.0, op_norm(m));
  return op_norm(m - m.adjoint()) <= tol.eps_eq * scale;
}

// PSD test: Hermitian within eps_eq * max(1,||m||) and the Hermitian part has
// min eigenvalue >= -eps_psd * max(1,||m||).
inline bool is_psd(const CMatrix& m, const Tolerance& tol = {}) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("is_psd: matrix must be square");
  if (m.rows() == 0) return true;
  double scale = std::max(1.0, op_norm(m));
  if (op_norm(m - m.adjoint()) > tol.eps_eq * scale) return false;
  return min_eig_hermitian(m) >= -tol.eps_psd * scale;
}

struct PsdFactor {
  CMatrix factor;  // rank x n, adjoint(factor) * factor == input Gram
  Index rank = 0;
};

// Rank-revealing factorization G = F* F of a PSD matrix via Hermitian
// eigendecomposition. Rank counts eigenvalues > eps_rank * lambda_max, so
// singular Gram matrices (GNS null spaces) factor cleanly.
inline PsdFactor psd_factor(const CMatrix& gram, const Tolerance& tol = {}) {
  if (gram.rows() != gram.cols())
    throw std::invalid_argument("psd_factor: matrix must be square");
  if (!is_psd(gram, tol))
    throw std::invalid_argument("psd_factor: input is not PSD within tolerance");
  const Index n = gram.rows();
  if (n == 0) return {CMatrix(0, 0), 0};

  CMatrix h = (gram + gram.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const Eigen::VectorXd& vals = es.eigenvalues();  // ascending
  const double vmax = vals(n - 1);
  Index rank = 0;
  if (vmax > 0.0) {
    const double cut = tol.eps_rank * vmax;
    for (Index i = 0; i < n; ++i)
      if (vals(i) > cut) ++rank;
  }
  CMatrix f(rank, n);
  for (Index r = 0; r < rank; ++r) {
    const Index i = n - 1 - r;  // descending eigenvalue order
    f.row(r) = std::sqrt(std::max(0.0, vals(i))) * es.eigenvectors().col(i).adjoint();
  }
  return {f, rank};
}

// Least-squares minimizer of ||A X - B||_F via SVD pseudo-inverse with the
// relative singular-value cutoff eps_rank. JacobiSVD throughout: BDCSVD
// miscomputes complex SVDs with clustered singular values (Eigen 3.4).
inline CMatrix lsq_solve(const CMatrix& a, const CMatrix& b, const Tolerance& tol = {}) {
  if (a.rows() != b.rows())
    throw std::invalid_argument("lsq_solve: row count mismatch");
  if (a.cols() == 0 || b.cols() == 0 || a.rows() == 0)
    return CMatrix::Zero(a.cols(), b.cols());
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(tol.eps_rank);
  return svd.solve(b);
}

inline Index numerical_rank(const CMatrix& a, const Tolerance& tol = {}) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  svd.setThreshold(tol.eps_rank);
  return svd.rank();
}

inline CMatrix pseudo_inverse(const CMatrix& a, const Tolerance& tol = {}) {
  return lsq_solve(a, CMatrix::Identity(a.rows(), a.rows()), tol);
}

// Solve X * A = B in the least-squares sense (adjoint of lsq_solve).
inline CMatrix lsq_solve_left(const CMatrix& a, const CMatrix& b, const Tolerance& tol = {}) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("lsq_solve_left: column count mismatch");
  return lsq_solve(a.adjoint(), b.adjoint(), tol).adjoint();
}

enum class IsometryClass { none, contraction, partial_isometry, coisometry, isometry, unitary };

inline std::string to_string(IsometryClass c) {
  switch (c) {
    case IsometryClass::unitary: return "unitary";
    case IsometryClass::isometry: return "isometry";
    case IsometryClass::coisometry: return "coisometry";
    case IsometryClass::partial_isometry: return "partial_isometry";
    case IsometryClass::contraction: return "contraction";
    default: return "none";
  }
}

// Strongest applicable label, `unitary` dominating, checked at tolerance:
// M*M = I, MM* = I, (M*M)^2 = M*M, ||M|| <= 1 + eps_eq.
inline IsometryClass classify_isometry(const CMatrix& m, const Tolerance& tol = {}) {
  const double nrm = op_norm(m);
  const double scale = std::max(1.0, nrm * nrm);
  CMatrix mtm = m.adjoint() * m;
  CMatrix mmt = m * m.adjoint();
  const bool isometry =
      op_norm(mtm - CMatrix::Identity(m.cols(), m.cols())) <= tol.eps_eq * scale;
  const bool coisometry =
      op_norm(mmt - CMatrix::Identity(m.rows(), m.rows())) <= tol.eps_eq * scale;
  if (isometry && coisometry) return IsometryClass::unitary;
  if (isometry) return IsometryClass::isometry;
  if (coisometry) return IsometryClass::coisometry;
  if (op_norm(mtm * mtm - mtm) <= tol.eps_eq * std::max(1.0, scale * scale))
    return IsometryClass::partial_isometry;
  if (nrm <= 1.0 + tol.eps_eq) return IsometryClass::contraction;
  return IsometryClass::none;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace cstarmod
