#pragma once

#include <string>
#include <vector>

#include "cstarmod/cp_maps.hpp"

namespace cstarmod {

// Operator-valued kernel on a finite point set; gram(i,j) is a dim_H square
// block and the kernel is formally Hermitian: gram(i,j) = gram(j,i)*.
struct FiniteKernel {
  std::vector<std::string> points;
  Index dim_H = 0;
  std::vector<std::vector<CMatrix>> gram;

  Index size() const { return static_cast<Index>(points.size()); }

  CMatrix full_gram() const {
    const Index n = size();
    CMatrix g(n * dim_H, n * dim_H);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) g.block(i * dim_H, j * dim_H, dim_H, dim_H) = gram[i][j];
    return g;
  }

  void validate() const {
    const Index n = size();
    if (static_cast<Index>(gram.size()) != n)
      throw std::invalid_argument("FiniteKernel: gram row count mismatch");
    for (const auto& row : gram) {
      if (static_cast<Index>(row.size()) != n)
        throw std::invalid_argument("FiniteKernel: ragged gram");
      for (const CMatrix& blk : row)
        if (blk.rows() != dim_H || blk.cols() != dim_H)
          throw std::invalid_argument("FiniteKernel: block shape mismatch");
    }
  }
};

inline bool is_positive_definite(const FiniteKernel& k, const Tolerance& tol = {}) {
  return is_psd(k.full_gram(), tol);
}

// Kolmogorov decomposition: k(x,y) = nu(x)* nu(y), nu(x): C^dim_H -> C^dim_K.
struct KolmogorovPair {
  Index dim_K = 0;
  std::vector<CMatrix> nu;  // one dim_K x dim_H operator per point
  bool minimal = false;     // columns of all nu(x) span C^dim_K
};

inline CMatrix stacked_nu(const KolmogorovPair& p) {
  const Index n = static_cast<Index>(p.nu.size());
  const Index h = n == 0 ? 0 : p.nu[0].cols();
  CMatrix s(p.dim_K, n * h);
  for (Index i = 0; i < n; ++i) s.middleCols(i * h, h) = p.nu[i];
  return s;
}

inline double kolmogorov_residual(const FiniteKernel& k, const KolmogorovPair& p) {
  double r = 0.0;
  for (Index i = 0; i < k.size(); ++i)
    for (Index j = 0; j < k.size(); ++j)
      r = std::max(r, diff_norm(k.gram[i][j], CMatrix(p.nu[i].adjoint() * p.nu[j])));
  return r;
}

inline bool check_minimal(const KolmogorovPair& p, const Tolerance& tol = {}) {
  return numerical_rank(stacked_nu(p), tol) == p.dim_K;
}

// Minimal decomposition from the rank-revealing PSD factor of the full Gram:
// nu(x_i) is the i-th column block of the factor.
inline KolmogorovPair minimal_kolmogorov(const FiniteKernel& k, const Tolerance& tol = {}) {
  if (!is_positive_definite(k, tol))
    throw std::invalid_argument("minimal_kolmogorov: kernel is not positive definite");
  PsdFactor pf = psd_factor(k.full_gram(), tol);
  KolmogorovPair p;
  p.dim_K = pf.rank;
  for (Index i = 0; i < k.size(); ++i)
    p.nu.push_back(pf.factor.middleCols(i * k.dim_H, k.dim_H));
  p.minimal = true;
  return p;
}

// Unique isometry V with V nu(x) = upsilon(x); unitary when `other` is also
// minimal. Both pairs must decompose the same kernel.
inline CMatrix equivalence_isometry(const KolmogorovPair& minimal, const KolmogorovPair& other,
                                    const Tolerance& tol = {}) {
  if (minimal.nu.size() != other.nu.size())
    throw std::invalid_argument("equivalence_isometry: point count mismatch");
  double scale = 1.0, disagree = 0.0;
  for (std::size_t i = 0; i < minimal.nu.size(); ++i)
    for (std::size_t j = 0; j < minimal.nu.size(); ++j) {
      CMatrix a = minimal.nu[i].adjoint() * minimal.nu[j];
      CMatrix b = other.nu[i].adjoint() * other.nu[j];
      disagree = std::max(disagree, diff_norm(a, b));
      scale = std::max(scale, op_norm(a));
    }
  if (disagree > tol.eps_eq * scale)
    throw std::invalid_argument("equivalence_isometry: pairs decompose different kernels");
  return lsq_solve_left(stacked_nu(minimal), stacked_nu(other), tol);
}

// Kernel Lambda_Phi(x,y) = Phi(x)* Phi(y) induced by point operators.
inline FiniteKernel kernel_from_map(const std::vector<CMatrix>& point_ops) {
  FiniteKernel k;
  const Index n = static_cast<Index>(point_ops.size());
  k.dim_H = n == 0 ? 0 : point_ops[0].cols();
  for (Index i = 0; i < n; ++i) {
    k.points.push_back("x" + std::to_string(i));
    std::vector<CMatrix> row;
    for (Index j = 0; j < n; ++j) row.push_back(point_ops[i].adjoint() * point_ops[j]);
    k.gram.push_back(std::move(row));
  }
  return k;
}

// Kernel phi~(x,y) = phi(<x,y>) induced by a CP map on sample points of a
// Hilbert module over its domain.
inline FiniteKernel kernel_from_cp(const OperatorMap& phi,
                                   const std::vector<ModuleElement>& sample) {
  FiniteKernel k;
  k.dim_H = phi.dim_H;
  const Index n = static_cast<Index>(sample.size());
  for (Index i = 0; i < n; ++i) {
    if (!(sample[i].module.algebra == phi.domain))
      throw std::invalid_argument("kernel_from_cp: algebra mismatch");
    k.points.push_back("x" + std::to_string(i));
    std::vector<CMatrix> row;
    for (Index j = 0; j < n; ++j)
      row.push_back(phi.eval(inner_product(sample[i], sample[j])));
    k.gram.push_back(std::move(row));
  }
  return k;
}

}  // namespace cstarmod
