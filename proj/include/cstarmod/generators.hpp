#pragma once

#include <vector>

#include "cstarmod/cb_factor.hpp"
#include "cstarmod/kernels.hpp"
#include "cstarmod/phi_maps.hpp"
#include "cstarmod/rng.hpp"

namespace cstarmod {

// Size caps for deterministic instance generation. Block count is always 1 or
// 2; sizes are drawn in [1, max_block], module rank in [1, max_m].
struct SizeCaps {
  Index max_block = 2;
  Index max_m = 2;
  Index max_dim_h = 3;
};

inline BlockAlgebra random_algebra(Rng& rng, const SizeCaps& caps) {
  BlockAlgebra a;
  const Index nblocks = rng.uniform_index(1, 2);
  for (Index k = 0; k < nblocks; ++k)
    a.block_sizes.push_back(rng.uniform_index(1, caps.max_block));
  return a;
}

inline AlgebraElement random_element(Rng& rng, const BlockAlgebra& a) {
  AlgebraElement e{a, {}};
  for (Index n : a.block_sizes) e.blocks.push_back(random_matrix(rng, n, n));
  return e;
}

inline ModuleElement random_module_element(Rng& rng, const HilbertModule& mod) {
  ModuleElement x{mod, {}};
  for (Index i = 0; i < mod.m; ++i) x.coords.push_back(random_element(rng, mod.algebra));
  return x;
}

// Guaranteed-CP map a -> sum_j K_j* a K_j with Gaussian Kraus operators acting
// through the defining representation.
inline OperatorMap random_cp_map(Rng& rng, const BlockAlgebra& a, Index dim_H,
                                 Index num_kraus = 0) {
  if (num_kraus <= 0) num_kraus = rng.uniform_index(1, 2);
  std::vector<CMatrix> kraus;
  for (Index j = 0; j < num_kraus; ++j)
    kraus.push_back(random_matrix(rng, a.total_dim(), dim_H));
  OperatorMap f = OperatorMap::zero(a, dim_H, dim_H);
  for (Index b = 0; b < a.linear_dim(); ++b) {
    CMatrix concrete = AlgebraElement::basis(a, b).to_matrix();
    for (const CMatrix& k : kraus) f.images[b] += k.adjoint() * concrete * k;
  }
  return f;
}

// General linear operator map with Gaussian images (usually not CP).
inline OperatorMap random_linear_operator_map(Rng& rng, const BlockAlgebra& a, Index dim_H,
                                              Index dim_K) {
  OperatorMap f = OperatorMap::zero(a, dim_H, dim_K);
  for (Index b = 0; b < a.linear_dim(); ++b) f.images[b] = random_matrix(rng, dim_K, dim_H);
  return f;
}

// General linear module map with Gaussian basis images.
inline ModuleMap random_module_map(Rng& rng, const HilbertModule& mod, Index dim_H,
                                   Index dim_out) {
  ModuleMap f = ModuleMap::zero(mod, dim_H, dim_out);
  for (Index e = 0; e < mod.dim_E(); ++e) f.images[e] = random_matrix(rng, dim_out, dim_H);
  return f;
}

// Random *-representation of A: block k acts with multiplicity mult_k, the
// whole thing conjugated by a random unitary. Unital on its space.
inline OperatorMap random_representation(Rng& rng, const BlockAlgebra& a, Index max_mult = 2) {
  std::vector<Index> mults;
  Index total = 0;
  for (Index k = 0; k < a.num_blocks(); ++k) {
    Index mu = rng.uniform_index(0, max_mult);
    mults.push_back(mu);
    total += mu * a.block_sizes[k];
  }
  if (total == 0) {  // avoid the zero representation by default
    mults[0] = 1;
    total = a.block_sizes[0];
  }
  CMatrix u = random_unitary(rng, total);
  OperatorMap f = OperatorMap::zero(a, total, total);
  for (Index b = 0; b < a.linear_dim(); ++b) {
    auto idx = a.unit_index(b);
    CMatrix d = CMatrix::Zero(total, total);
    Index off = 0;
    for (Index k = 0; k < a.num_blocks(); ++k) {
      const Index n = a.block_sizes[k];
      for (Index r = 0; r < mults[k]; ++r) {
        if (k == idx.block) d(off + idx.row, off + idx.col) = 1.0;
        off += n;
      }
    }
    f.images[b] = u * d * u.adjoint();
  }
  return f;
}

// Guaranteed-PD kernel built as Lambda_Phi of random point operators.
inline FiniteKernel random_kernel(Rng& rng, Index num_points, Index dim_H) {
  const Index dim_k = rng.uniform_index(1, num_points * dim_H);
  std::vector<CMatrix> ops;
  for (Index i = 0; i < num_points; ++i) ops.push_back(random_matrix(rng, dim_k, dim_H));
  return kernel_from_map(ops);
}

// A (phi, E, Phi) triple with Phi = U Phi_phi a non-degenerate phi-map.
struct PhiMapInstance {
  OperatorMap phi;
  HilbertModule module;
  ModuleMap Phi;
};

inline PhiMapInstance random_phi_map_instance(Rng& rng, const SizeCaps& caps,
                                              const Tolerance& tol = {}) {
  BlockAlgebra a = random_algebra(rng, caps);
  HilbertModule mod{a, rng.uniform_index(1, caps.max_m)};
  OperatorMap phi = random_cp_map(rng, a, rng.uniform_index(1, caps.max_dim_h));
  CanonicalPhiData cphi = construct_canonical_phi(phi, mod, tol);
  CMatrix u = random_unitary(rng, cphi.dim_Hphi);
  ModuleMap f = cphi.phi_map;
  f.dim_out = cphi.dim_Hphi;
  for (CMatrix& im : f.images) im = u * im;
  return {std::move(phi), mod, std::move(f)};
}

}  // namespace cstarmod
