#pragma once

#include <vector>

#include "cstarmod/algebra.hpp"

namespace cstarmod {

// C-linear map Phi: E -> B(H, H'), stored by its images on the canonical
// complex basis of E. dim_H is the domain Hilbert space, dim_out the target.
struct ModuleMap {
  HilbertModule module;
  Index dim_H = 0;
  Index dim_out = 0;
  std::vector<CMatrix> images;  // one dim_out x dim_H matrix per basis element

  static ModuleMap zero(const HilbertModule& mod, Index dim_H, Index dim_out) {
    ModuleMap f{mod, dim_H, dim_out, {}};
    f.images.assign(mod.dim_E(), CMatrix::Zero(dim_out, dim_H));
    return f;
  }

  CMatrix eval(const ModuleElement& x) const {
    if (!(x.module == module))
      throw std::invalid_argument("ModuleMap: module mismatch");
    CMatrix r = CMatrix::Zero(dim_out, dim_H);
    CVector c = x.coeffs();
    for (Index e = 0; e < module.dim_E(); ++e)
      if (c(e) != 0.0) r += c(e) * images[e];
    return r;
  }

  void validate() const {
    module.validate();
    if (static_cast<Index>(images.size()) != module.dim_E())
      throw std::invalid_argument("ModuleMap: wrong number of basis images");
    for (const CMatrix& im : images)
      if (im.rows() != dim_out || im.cols() != dim_H)
        throw std::invalid_argument("ModuleMap: image shape mismatch");
  }
};

// [Phi(b_0) Phi(b_1) ...]: dim_out x (dim_E * dim_H); column (e, h) at
// index e*dim_H + h is Phi(b_e) e_h.
inline CMatrix stacked_images(const ModuleMap& f) {
  CMatrix s(f.dim_out, f.module.dim_E() * f.dim_H);
  for (Index e = 0; e < f.module.dim_E(); ++e)
    s.middleCols(e * f.dim_H, f.dim_H) = f.images[e];
  return s;
}

// Gram of Phi on E (x) C^dim_H: G[(e,h),(e',h')] = (Phi(b_e)* Phi(b_e'))(h,h').
inline CMatrix map_gram(const ModuleMap& f) {
  CMatrix s = stacked_images(f);
  return s.adjoint() * s;
}

// Entrywise amplification Phi_n: M_n(E) -> M_n(B(H,H')) as a ModuleMap over
// the amplified module, image of basis (c, k, (p,i), (q,j)) = E_pq (x) Phi(b).
inline ModuleMap amplify_module_map(const ModuleMap& f, Index n) {
  if (n < 1) throw std::invalid_argument("amplify_module_map: n must be >= 1");
  const BlockAlgebra& alg = f.module.algebra;
  HilbertModule amp{amplify_algebra(alg, n), f.module.m};
  ModuleMap r{amp, n * f.dim_H, n * f.dim_out, {}};
  r.images.reserve(amp.dim_E());
  const BlockAlgebra amp_alg = amp.algebra;
  for (Index e = 0; e < amp.dim_E(); ++e) {
    auto bi = amp.basis_index(e);
    auto u = amp_alg.unit_index(bi.unit);
    const Index nk = alg.block_sizes[u.block];
    const Index p = u.row / nk, i = u.row % nk;
    const Index q = u.col / nk, j = u.col % nk;
    const Index base = bi.coord * alg.linear_dim() + alg.unit_flat(u.block, i, j);
    CMatrix epq = CMatrix::Zero(n, n);
    epq(p, q) = 1.0;
    r.images.push_back(kron(epq, f.images[base]));
  }
  return r;
}

}  // namespace cstarmod
