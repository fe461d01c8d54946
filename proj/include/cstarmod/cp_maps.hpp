#pragma once

#include <optional>
#include <vector>

#include "cstarmod/algebra.hpp"
#include "cstarmod/errors.hpp"
#include "cstarmod/module_map.hpp"
#include "cstarmod/rng.hpp"

namespace cstarmod {

// Linear map phi: A -> B(C^dim_H, C^dim_K), stored by basis images.
// Square-valued maps (dim_K == dim_H) cover phi, psi, rho, sigma and
// *-representations pi.
struct OperatorMap {
  BlockAlgebra domain;
  Index dim_H = 0;
  Index dim_K = 0;
  std::vector<CMatrix> images;  // one dim_K x dim_H matrix per basis unit

  bool square() const { return dim_K == dim_H; }

  static OperatorMap zero(const BlockAlgebra& a, Index dim_H, Index dim_K) {
    OperatorMap f{a, dim_H, dim_K, {}};
    f.images.assign(a.linear_dim(), CMatrix::Zero(dim_K, dim_H));
    return f;
  }

  // The defining representation a -> block_diag(a_1,...,a_K).
  static OperatorMap defining_rep(const BlockAlgebra& a) {
    OperatorMap f{a, a.total_dim(), a.total_dim(), {}};
    f.images.reserve(a.linear_dim());
    for (Index b = 0; b < a.linear_dim(); ++b)
      f.images.push_back(AlgebraElement::basis(a, b).to_matrix());
    return f;
  }

  CMatrix eval(const AlgebraElement& a) const {
    if (!(a.algebra == domain))
      throw std::invalid_argument("OperatorMap: domain mismatch");
    CMatrix r = CMatrix::Zero(dim_K, dim_H);
    CVector c = a.coeffs();
    for (Index b = 0; b < domain.linear_dim(); ++b)
      if (c(b) != 0.0) r += c(b) * images[b];
    return r;
  }

  CMatrix eval_unit(Index b) const { return images.at(b); }

  void validate() const {
    domain.validate();
    if (static_cast<Index>(images.size()) != domain.linear_dim())
      throw std::invalid_argument("OperatorMap: wrong number of basis images");
    for (const CMatrix& im : images)
      if (im.rows() != dim_K || im.cols() != dim_H)
        throw std::invalid_argument("OperatorMap: image shape mismatch");
  }
};

// One Choi matrix per algebra block: C_k = sum_ij E_ij (x) phi(unit(k,i,j)).
inline std::vector<CMatrix> choi_blocks(const OperatorMap& phi) {
  if (!phi.square())
    throw std::invalid_argument("choi_blocks: map must be square-valued");
  std::vector<CMatrix> blocks;
  for (Index k = 0; k < phi.domain.num_blocks(); ++k) {
    const Index n = phi.domain.block_sizes[k];
    CMatrix c = CMatrix::Zero(n * phi.dim_H, n * phi.dim_H);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        c.block(i * phi.dim_H, j * phi.dim_H, phi.dim_H, phi.dim_H) =
            phi.images[phi.domain.unit_flat(k, i, j)];
    blocks.push_back(std::move(c));
  }
  return blocks;
}

// Complete positivity decided blockwise: the blocks are orthogonal ideals,
// so phi is CP iff every block Choi matrix is PSD.
inline bool is_completely_positive(const OperatorMap& phi, const Tolerance& tol = {}) {
  if (!phi.square()) return false;
  for (const CMatrix& c : choi_blocks(phi))
    if (!is_psd(c, tol)) return false;
  return true;
}

inline double star_linearity_residual(const OperatorMap& f) {
  double r = 0.0;
  for (Index b = 0; b < f.domain.linear_dim(); ++b) {
    auto u = f.domain.unit_index(b);
    const Index bs = f.domain.unit_flat(u.block, u.col, u.row);  // unit adjoint
    r = std::max(r, diff_norm(f.images[bs], f.images[b].adjoint()));
  }
  return r;
}

inline double multiplicativity_residual(const OperatorMap& f) {
  if (!f.square()) throw std::invalid_argument("multiplicativity_residual: map must be square");
  double r = 0.0;
  for (Index b = 0; b < f.domain.linear_dim(); ++b) {
    auto u = f.domain.unit_index(b);
    for (Index b2 = 0; b2 < f.domain.linear_dim(); ++b2) {
      auto v = f.domain.unit_index(b2);
      CMatrix prod;  // unit(k,i,j) * unit(k',i',j') = delta delta unit(k,i,j')
      if (u.block == v.block && u.col == v.row)
        prod = f.images[f.domain.unit_flat(u.block, u.row, v.col)];
      else
        prod = CMatrix::Zero(f.dim_K, f.dim_H);
      r = std::max(r, diff_norm(prod, f.images[b] * f.images[b2]));
    }
  }
  return r;
}

// *-representation test: square, *-preserving and multiplicative on basis
// pairs (sufficient by bilinearity).
inline bool is_star_representation(const OperatorMap& pi, const Tolerance& tol = {}) {
  if (!pi.square()) return false;
  double scale = 1.0;
  for (const CMatrix& im : pi.images) scale = std::max(scale, op_norm(im));
  return star_linearity_residual(pi) <= tol.eps_eq * scale &&
         multiplicativity_residual(pi) <= tol.eps_eq * scale * scale;
}

// Entrywise amplification phi_n on M_n(A); image of the amplified unit
// (k, (p,i), (q,j)) is E_pq (x) phi(unit(k,i,j)).
inline OperatorMap amplify_map(const OperatorMap& phi, Index n) {
  if (n < 1) throw std::invalid_argument("amplify_map: n must be >= 1");
  const BlockAlgebra amp = amplify_algebra(phi.domain, n);
  OperatorMap r{amp, n * phi.dim_H, n * phi.dim_K, {}};
  r.images.reserve(amp.linear_dim());
  for (Index b = 0; b < amp.linear_dim(); ++b) {
    auto u = amp.unit_index(b);
    const Index nk = phi.domain.block_sizes[u.block];
    const Index p = u.row / nk, i = u.row % nk;
    const Index q = u.col / nk, j = u.col % nk;
    CMatrix epq = CMatrix::Zero(n, n);
    epq(p, q) = 1.0;
    r.images.push_back(kron(epq, phi.images[phi.domain.unit_flat(u.block, i, j)]));
  }
  return r;
}

// For CP maps the cb norm is attained at the unit: ||phi||_cb = ||phi(1)||.
inline double cb_norm_cp(const OperatorMap& phi, const Tolerance& tol = {}) {
  if (!is_completely_positive(phi, tol))
    throw std::invalid_argument("cb_norm_cp: map is not completely positive");
  return op_norm(phi.eval(AlgebraElement::unit(phi.domain)));
}

// Certified lower bound for ||phi||_cb: max of ||phi_n(x)||/||x|| over the
// canonical basis, the unit, and random samples at levels n <= levels.
inline double cb_lower_bound(const OperatorMap& phi, Index levels, Rng& rng,
                             Index trials_per_level = 8) {
  double best = 0.0;
  for (Index b = 0; b < phi.domain.linear_dim(); ++b)
    best = std::max(best, op_norm(phi.images[b]));  // units have norm 1
  best = std::max(best, op_norm(phi.eval(AlgebraElement::unit(phi.domain))));
  for (Index n = 1; n <= levels; ++n) {
    OperatorMap amp = n == 1 ? phi : amplify_map(phi, n);
    for (Index t = 0; t < trials_per_level; ++t) {
      AlgebraElement x{amp.domain, {}};
      for (Index sz : amp.domain.block_sizes) x.blocks.push_back(random_matrix(rng, sz, sz));
      const double nx = x.norm();
      if (nx <= 0) continue;
      best = std::max(best, op_norm(amp.eval(x)) / nx);
    }
  }
  return best;
}

// Same bound for a module map; ||x|| = ||<x,x>||^(1/2).
inline double cb_lower_bound(const ModuleMap& f, Index levels, Rng& rng,
                             Index trials_per_level = 8) {
  double best = 0.0;
  for (Index e = 0; e < f.module.dim_E(); ++e)
    best = std::max(best, op_norm(f.images[e]));  // basis elements have norm 1
  for (Index n = 1; n <= levels; ++n) {
    ModuleMap amp = n == 1 ? f : amplify_module_map(f, n);
    for (Index t = 0; t < trials_per_level; ++t) {
      ModuleElement x{amp.module, {}};
      for (Index c = 0; c < amp.module.m; ++c) {
        AlgebraElement a{amp.module.algebra, {}};
        for (Index sz : amp.module.algebra.block_sizes)
          a.blocks.push_back(random_matrix(rng, sz, sz));
        x.coords.push_back(std::move(a));
      }
      const double nx = module_norm(x);
      if (nx <= 0) continue;
      best = std::max(best, op_norm(amp.eval(x)) / nx);
    }
  }
  return best;
}

// Minimal Stinespring dilation (pi, V, dim_K) with phi(a) = V* pi(a) V.
struct StinespringTriple {
  OperatorMap pi;
  CMatrix V;  // dim_K x dim_H
  Index dim_K = 0;
};

struct StinespringReport {
  double contract_residual = 0.0;   // max_b ||phi(b) - V* pi(b) V||
  double mult_residual = 0.0;       // pi multiplicative
  double star_residual = 0.0;       // pi *-preserving
  double unit_residual = 0.0;       // ||V*V - phi(1)||
  Index minimality_rank = 0;        // rank of span {pi(a) V h}
  Index dim_K = 0;
  bool ok = false;
};

inline StinespringReport verify_stinespring(const OperatorMap& phi,
                                            const StinespringTriple& st,
                                            const Tolerance& tol = {}) {
  StinespringReport rep;
  rep.dim_K = st.dim_K;
  for (Index b = 0; b < phi.domain.linear_dim(); ++b)
    rep.contract_residual = std::max(
        rep.contract_residual,
        diff_norm(phi.images[b], CMatrix(st.V.adjoint() * st.pi.images[b] * st.V)));
  rep.mult_residual = st.dim_K == 0 ? 0.0 : multiplicativity_residual(st.pi);
  rep.star_residual = st.dim_K == 0 ? 0.0 : star_linearity_residual(st.pi);
  rep.unit_residual =
      diff_norm(CMatrix(st.V.adjoint() * st.V), phi.eval(AlgebraElement::unit(phi.domain)));
  CMatrix span(st.dim_K, phi.domain.linear_dim() * phi.dim_H);
  for (Index b = 0; b < phi.domain.linear_dim(); ++b)
    span.middleCols(b * phi.dim_H, phi.dim_H) = st.pi.images[b] * st.V;
  rep.minimality_rank = numerical_rank(span, tol);
  const double scale =
      1.0 + op_norm(phi.eval(AlgebraElement::unit(phi.domain)));
  rep.ok = rep.contract_residual <= tol.eps_eq * scale &&
           rep.mult_residual <= tol.eps_eq * scale &&
           rep.star_residual <= tol.eps_eq * scale &&
           rep.unit_residual <= tol.eps_eq * scale && rep.minimality_rank == st.dim_K;
  return rep;
}

// GNS construction on A (x) C^dim_H with Gram G[(a,h),(b,k)] = phi(a*b)(h,k).
// The PSD factor F is the quotient map; pi acts by left multiplication and
// V h = [1 (x) h]. V*V = phi(1); phi need not be unital.
inline StinespringTriple minimal_stinespring(const OperatorMap& phi, const Tolerance& tol = {}) {
  if (!is_completely_positive(phi, tol))
    throw std::invalid_argument("minimal_stinespring: map is not completely positive");
  const BlockAlgebra& alg = phi.domain;
  const Index da = alg.linear_dim(), h = phi.dim_H, N = da * h;

  CMatrix gram = CMatrix::Zero(N, N);
  for (Index b1 = 0; b1 < da; ++b1) {
    auto u = alg.unit_index(b1);
    for (Index b2 = 0; b2 < da; ++b2) {
      auto v = alg.unit_index(b2);
      // unit(k,i,j)* unit(k',i',j') = delta_kk' delta_ii' unit(k,j,j')
      if (u.block != v.block || u.row != v.row) continue;
      gram.block(b1 * h, b2 * h, h, h) =
          phi.images[alg.unit_flat(u.block, u.col, v.col)];
    }
  }

  PsdFactor pf;
  try {
    pf = psd_factor(gram, tol);
  } catch (const std::invalid_argument&) {
    throw NumericalBreakdown("minimal_stinespring: GNS Gram is not PSD within tolerance");
  }
  const Index dim_K = pf.rank;
  const CMatrix& F = pf.factor;  // dim_K x N

  // pi(a) F = F (L_a (x) I_H); all basis images solved against one SVD of F*.
  OperatorMap pi = OperatorMap::zero(alg, dim_K, dim_K);
  if (dim_K > 0) {
    CMatrix rhs(N, da * dim_K);
    for (Index b = 0; b < da; ++b) {
      auto u = alg.unit_index(b);
      const Index nk = alg.block_sizes[u.block];
      CMatrix lmul = CMatrix::Zero(da, da);  // left multiplication by unit b on A
      for (Index s = 0; s < nk; ++s)
        lmul(alg.unit_flat(u.block, u.row, s), alg.unit_flat(u.block, u.col, s)) = 1.0;
      rhs.middleCols(b * dim_K, dim_K) = (F * kron(lmul, CMatrix::Identity(h, h))).adjoint();
    }
    CMatrix sols = lsq_solve(F.adjoint(), rhs, tol);
    for (Index b = 0; b < da; ++b)
      pi.images[b] = sols.middleCols(b * dim_K, dim_K).adjoint();
  }

  CMatrix embed_unit = CMatrix::Zero(N, h);  // coefficients of 1 (x) h
  CVector unit_coeffs = AlgebraElement::unit(alg).coeffs();
  for (Index b = 0; b < da; ++b)
    for (Index hh = 0; hh < h; ++hh) embed_unit(b * h + hh, hh) = unit_coeffs(b);
  CMatrix V = F * embed_unit;

  return {std::move(pi), std::move(V), dim_K};
}

// Corner decomposition of a *-representation of L(E):
// P2 = pi(diag(1_K(E),0)), P1 = pi(diag(0,1_A)); sigma, rho, Gamma0 are the
// compressions to the corner ranges, expressed in orthonormal frames F2, F1.
struct CornerDecomposition {
  CMatrix P1, P2;       // orthogonal projections on the representation space
  CMatrix F1, F2;       // coisometric frames: F_i F_i* = I, F_i* F_i = P_i
  OperatorMap rho;      // on A, dimension rank(P1)
  OperatorMap sigma;    // on K(E), dimension rank(P2)
  ModuleMap gamma0;     // E -> B(range P1, range P2)
  bool unital = true;   // pi(1_L(E)) == I on the representation space
};

inline CornerDecomposition corner_decompose(const OperatorMap& pi_link,
                                            const HilbertModule& mod,
                                            const Tolerance& tol = {}) {
  if (!(pi_link.domain == linking_algebra(mod)))
    throw std::invalid_argument("corner_decompose: domain is not L(E)");
  if (!is_star_representation(pi_link, tol))
    throw std::invalid_argument("corner_decompose: input is not a *-representation");
  const BlockAlgebra alg = mod.algebra;

  const auto zE = ModuleElement::zero(mod);
  const auto zA = AlgebraElement::zero(alg);
  const auto zK = AlgebraElement::zero(compacts(mod));
  CMatrix P2 = pi_link.eval(
      linking_as_element(embed_linking(AlgebraElement::unit(compacts(mod)), zE, zE, zA)));
  CMatrix P1 = pi_link.eval(
      linking_as_element(embed_linking(zK, zE, zE, AlgebraElement::unit(alg))));

  CornerDecomposition cd;
  cd.P1 = P1;
  cd.P2 = P2;
  cd.F1 = psd_factor(P1, tol).factor;
  cd.F2 = psd_factor(P2, tol).factor;
  const Index d1 = cd.F1.rows(), d2 = cd.F2.rows();
  cd.unital = diff_norm(CMatrix(P1 + P2),
                        CMatrix::Identity(pi_link.dim_K, pi_link.dim_K)) <= tol.eps_eq;

  cd.rho = OperatorMap::zero(alg, d1, d1);
  for (Index b = 0; b < alg.linear_dim(); ++b)
    cd.rho.images[b] =
        cd.F1 *
        pi_link.eval(linking_as_element(embed_linking(zK, zE, zE, AlgebraElement::basis(alg, b)))) *
        cd.F1.adjoint();

  const BlockAlgebra kalg = compacts(mod);
  cd.sigma = OperatorMap::zero(kalg, d2, d2);
  for (Index b = 0; b < kalg.linear_dim(); ++b)
    cd.sigma.images[b] =
        cd.F2 *
        pi_link.eval(linking_as_element(embed_linking(AlgebraElement::basis(kalg, b), zE, zE, zA))) *
        cd.F2.adjoint();

  cd.gamma0 = ModuleMap::zero(mod, d1, d2);
  for (Index e = 0; e < mod.dim_E(); ++e)
    cd.gamma0.images[e] =
        cd.F2 *
        pi_link.eval(linking_as_element(embed_linking(zK, ModuleElement::basis(mod, e), zE, zA))) *
        cd.F1.adjoint();

  return cd;
}

// Max residual of reassembling pi_link from the corners over the basis of L(E).
inline double corner_reassembly_residual(const OperatorMap& pi_link, const HilbertModule& mod,
                                         const CornerDecomposition& cd) {
  double r = 0.0;
  for (Index b = 0; b < pi_link.domain.linear_dim(); ++b) {
    auto part = linking_basis_part(mod, b);
    CMatrix expect;
    switch (part.role) {
      case LinkingBasisPart::Role::compact:
        expect = cd.F2.adjoint() * cd.sigma.images[part.compact_unit] * cd.F2;
        break;
      case LinkingBasisPart::Role::module:
        expect = cd.F2.adjoint() * cd.gamma0.images[part.module_basis] * cd.F1;
        break;
      case LinkingBasisPart::Role::module_adjoint:
        expect = (cd.F2.adjoint() * cd.gamma0.images[part.module_basis] * cd.F1).adjoint();
        break;
      case LinkingBasisPart::Role::algebra:
        expect = cd.F1.adjoint() * cd.rho.images[part.algebra_unit] * cd.F1;
        break;
    }
    r = std::max(r, diff_norm(pi_link.images[b], expect));
  }
  return r;
}

}  // namespace cstarmod
