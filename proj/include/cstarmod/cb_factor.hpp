#pragma once

#include <vector>

#include "cstarmod/phi_maps.hpp"

namespace cstarmod {

// Smallest multiple psi = c * tau(.) I_H of the faithful trace functional that
// completely dominates Phi: c = lambda_max of the trace-whitened Gram of Phi.
// Constructive stand-in for a completely bounded extension; the produced psi
// satisfies the completely-semi-psi inequality by the defect-Gram criterion.
struct DominatingCp {
  OperatorMap psi;
  double c = 0.0;
};

inline DominatingCp dominating_cp(const ModuleMap& f) {
  const HilbertModule& mod = f.module;
  const BlockAlgebra& alg = mod.algebra;
  const Index de = mod.dim_E(), h = f.dim_H;

  // trace Gram T[e,e'] = tau(<b_e, b_e'>), positive definite since tau is faithful
  CMatrix tg = CMatrix::Zero(de, de);
  for (Index e1 = 0; e1 < de; ++e1)
    for (Index e2 = 0; e2 < de; ++e2) {
      ModuleElement x = ModuleElement::basis(mod, e1);
      ModuleElement y = ModuleElement::basis(mod, e2);
      tg(e1, e2) = trace(inner_product(x, y));
    }

  Eigen::SelfAdjointEigenSolver<CMatrix> es((tg + tg.adjoint()) / 2.0);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NumericalBreakdown("dominating_cp: trace Gram is not positive definite");
  CMatrix whiten = es.eigenvectors() *
                   es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                   es.eigenvectors().adjoint();  // T^(-1/2)

  CMatrix gphi = map_gram(f);
  CMatrix wh = kron(whiten, CMatrix::Identity(h, h));
  CMatrix whitened = wh * gphi * wh;
  const double c = std::max(0.0, min_eig_hermitian(CMatrix(-whitened)) * -1.0);

  OperatorMap psi = OperatorMap::zero(alg, h, h);
  for (Index b = 0; b < alg.linear_dim(); ++b) {
    auto u = alg.unit_index(b);
    if (u.row == u.col) psi.images[b] = c * CMatrix::Identity(h, h);
  }
  return {std::move(psi), c};
}

// Dilation certificate: Phi(.) = W* Psi(.) V for the canonical representation
// Psi = Psi_pi of the minimal Stinespring (pi, V) of the dominating CP map.
struct DilationCertificate {
  OperatorMap psi;        // the dominating CP map
  StinespringTriple stine;
  CanonicalRepData rep;
  CMatrix W;              // dim_out -> K_pi contraction
  double residual = 0.0;  // max_b ||Phi(b) - W* Psi(b) V||
};

inline double dilation_residual(const ModuleMap& f, const DilationCertificate& cert) {
  double r = 0.0;
  for (Index e = 0; e < f.module.dim_E(); ++e)
    r = std::max(r, diff_norm(f.images[e], CMatrix(cert.W.adjoint() *
                                                   cert.rep.rep_map.images[e] * cert.stine.V)));
  return r;
}

inline DilationCertificate dilate(const ModuleMap& f, const Tolerance& tol = {}) {
  DominatingCp dom = dominating_cp(f);
  StinespringTriple st = minimal_stinespring(dom.psi, tol);
  CanonicalPhiData cphi = construct_canonical_phi(dom.psi, f.module, tol);
  CanonicalRepData crep = construct_canonical_rep(st.pi, f.module, tol);
  PhiFactorization fac = factor_semi_phi_map(f, dom.psi, cphi, crep, st.V, tol);
  DilationCertificate cert{std::move(dom.psi), std::move(st), std::move(crep), fac.W, 0.0};
  cert.residual = dilation_residual(f, cert);
  return cert;
}

// Theorem 2.1 (ii): Phi = S Gamma with Gamma a phi-map. Gamma(x) = Psi(x) V,
// phi(a) = V* pi(a) V, S = W*; cb_upper = ||S|| ||phi(1)||^(1/2).
struct FactorizationCertificate {
  OperatorMap phi;     // CP map on A
  ModuleMap Gamma;     // phi-map E -> B(H, K_pi)
  CMatrix S;           // K_pi -> dim_out
  double residual = 0.0;
  double cb_upper = 0.0;
};

inline double factorization_residual(const ModuleMap& f, const FactorizationCertificate& cert) {
  double r = 0.0;
  for (Index e = 0; e < f.module.dim_E(); ++e)
    r = std::max(r, diff_norm(f.images[e], CMatrix(cert.S * cert.Gamma.images[e])));
  return r;
}

inline FactorizationCertificate factor_cb(const ModuleMap& f, const Tolerance& tol = {}) {
  DilationCertificate dil = dilate(f, tol);
  FactorizationCertificate cert;
  cert.phi = OperatorMap::zero(f.module.algebra, f.dim_H, f.dim_H);
  for (Index b = 0; b < f.module.algebra.linear_dim(); ++b)
    cert.phi.images[b] = dil.stine.V.adjoint() * dil.stine.pi.images[b] * dil.stine.V;
  cert.Gamma = ModuleMap::zero(f.module, f.dim_H, dil.rep.dim_Kpi);
  for (Index e = 0; e < f.module.dim_E(); ++e)
    cert.Gamma.images[e] = dil.rep.rep_map.images[e] * dil.stine.V;
  cert.S = dil.W.adjoint();
  cert.residual = factorization_residual(f, cert);
  cert.cb_upper = op_norm(cert.S) * std::sqrt(cb_norm_cp(cert.phi, tol));
  return cert;
}

struct FactorizationReport {
  double residual = 0.0;       // ||Phi(b) - S Gamma(b)||
  double gamma_residual = 0.0; // phi-map identity for Gamma
  double cb_upper_gap = 0.0;   // |cb_upper - ||S|| ||phi(1)||^(1/2)|
  bool phi_cp = false;
  bool ok = false;
};

inline FactorizationReport verify_factorization(const ModuleMap& f,
                                                const FactorizationCertificate& cert,
                                                const Tolerance& tol = {}) {
  FactorizationReport rep;
  rep.residual = factorization_residual(f, cert);
  rep.gamma_residual = phi_map_residual(cert.Gamma, cert.phi);
  rep.phi_cp = is_completely_positive(cert.phi, tol);
  rep.cb_upper_gap = rep.phi_cp
      ? std::abs(cert.cb_upper - op_norm(cert.S) * std::sqrt(cb_norm_cp(cert.phi, tol)))
      : 1.0;
  double scale = 1.0;
  for (const CMatrix& im : f.images) scale = std::max(scale, op_norm(im));
  rep.ok = rep.phi_cp && rep.residual <= tol.eps_eq * scale &&
           rep.gamma_residual <= tol.eps_eq * std::max(1.0, op_norm(phi_gram(cert.phi, f.module))) &&
           rep.cb_upper_gap <= tol.eps_eq * std::max(1.0, cert.cb_upper);
  return rep;
}

struct CbBoundReport {
  double cb_upper = 0.0;
  double lower_bound = 0.0;
  double worst_excess = 0.0;  // max over samples of ||Phi_n(x)|| - cb_upper ||x||
  bool certificate_ok = false;
  bool ok = false;
};

// Theorem 2.1 (ii) => (i) bound check: ||Phi_n(x)|| <= cb_upper ||x|| on random
// amplified elements up to `levels`, plus lower_bound <= cb_upper.
inline CbBoundReport verify_cb_bound(const FactorizationCertificate& cert, const ModuleMap& f,
                                     Index levels, Rng& rng, const Tolerance& tol = {},
                                     Index trials_per_level = 10) {
  CbBoundReport rep;
  rep.cb_upper = cert.cb_upper;
  rep.certificate_ok = verify_factorization(f, cert, tol).ok;
  rep.worst_excess = 0.0;
  for (Index n = 1; n <= levels; ++n) {
    ModuleMap fn = n == 1 ? f : amplify_module_map(f, n);
    for (Index t = 0; t < trials_per_level; ++t) {
      ModuleElement x{fn.module, {}};
      for (Index c = 0; c < fn.module.m; ++c) {
        AlgebraElement a{fn.module.algebra, {}};
        for (Index sz : fn.module.algebra.block_sizes)
          a.blocks.push_back(random_matrix(rng, sz, sz));
        x.coords.push_back(std::move(a));
      }
      rep.worst_excess = std::max(
          rep.worst_excess, op_norm(fn.eval(x)) - cert.cb_upper * module_norm(x));
    }
  }
  rep.lower_bound = cb_lower_bound(f, levels, rng);
  const double slack = tol.eps_eq * std::max(1.0, cert.cb_upper);
  rep.ok = rep.certificate_ok && rep.worst_excess <= slack &&
           rep.lower_bound <= cert.cb_upper + slack;
  return rep;
}

// CP extension certificate: phi1 on K(E), phi2 on A with the block map
// [[phi1, Phi],[Phi*, phi2]] on L(E) completely positive.
struct CPExtensionCertificate {
  OperatorMap phi1;  // on K(E), acting on C^dim_out
  OperatorMap phi2;  // on A, acting on C^dim_H
  double choi_min_eig = 0.0;
};

// The block map [[phi1, Phi],[Phi*, phi2]] evaluated on the basis of L(E),
// acting on C^(dim_out + dim_H).
inline OperatorMap linking_block_map(const ModuleMap& f, const OperatorMap& phi1,
                                     const OperatorMap& phi2) {
  const HilbertModule& mod = f.module;
  const Index dk = f.dim_out, dh = f.dim_H, d = dk + dh;
  OperatorMap block = OperatorMap::zero(linking_algebra(mod), d, d);
  for (Index b = 0; b < block.domain.linear_dim(); ++b) {
    auto part = linking_basis_part(mod, b);
    CMatrix im = CMatrix::Zero(d, d);
    switch (part.role) {
      case LinkingBasisPart::Role::compact:
        im.topLeftCorner(dk, dk) = phi1.images[part.compact_unit];
        break;
      case LinkingBasisPart::Role::module:
        im.topRightCorner(dk, dh) = f.images[part.module_basis];
        break;
      case LinkingBasisPart::Role::module_adjoint:
        im.bottomLeftCorner(dh, dk) = f.images[part.module_basis].adjoint();
        break;
      case LinkingBasisPart::Role::algebra:
        im.bottomRightCorner(dh, dh) = phi2.images[part.algebra_unit];
        break;
    }
    block.images[b] = std::move(im);
  }
  return block;
}

inline double choi_min_eigenvalue(const OperatorMap& f) {
  double m = 0.0;
  bool first = true;
  for (const CMatrix& c : choi_blocks(f)) {
    const double e = min_eig_hermitian(c);
    m = first ? e : std::min(m, e);
    first = false;
  }
  return m;
}

// Corollary 2.4 (iv) => (v): sigma is the representation of K(E) induced on
// the dilation space by Psi via sigma(theta_{x,y}) = Psi(x) Psi(y)*; then
// phi1 = W* sigma(.) W and phi2 = V* pi(.) V compress the linking
// representation [[sigma, Psi],[Psi*, pi]] by diag(W, V).
inline CPExtensionCertificate cp_extend(const ModuleMap& f, const DilationCertificate& dil,
                                        const Tolerance& tol = {}) {
  const HilbertModule& mod = f.module;
  const BlockAlgebra& alg = mod.algebra;
  const BlockAlgebra kalg = compacts(mod);
  const ModuleMap& psi_map = dil.rep.rep_map;

  OperatorMap sigma = OperatorMap::zero(kalg, dil.rep.dim_Kpi, dil.rep.dim_Kpi);
  for (Index b = 0; b < kalg.linear_dim(); ++b) {
    auto u = kalg.unit_index(b);
    const Index nk = alg.block_sizes[u.block];
    const Index p = u.row / nk, i = u.row % nk;
    const Index q = u.col / nk, j = u.col % nk;
    // unit = theta_{x,y} with x = e_p (x) unit(k,i,0), y = e_q (x) unit(k,j,0)
    const Index da = alg.linear_dim();
    const Index xe = p * da + alg.unit_flat(u.block, i, 0);
    const Index ye = q * da + alg.unit_flat(u.block, j, 0);
    sigma.images[b] = psi_map.images[xe] * psi_map.images[ye].adjoint();
  }

  CMatrix w = dil.W;
  if (!is_star_representation(sigma, tol)) {
    // degenerate Psi: compress everything to the essential subspace [Psi(E) range V]
    CMatrix span(dil.rep.dim_Kpi, mod.dim_E() * dil.stine.V.cols());
    for (Index e = 0; e < mod.dim_E(); ++e)
      span.middleCols(e * dil.stine.V.cols(), dil.stine.V.cols()) =
          psi_map.images[e] * dil.stine.V;
    PsdFactor ess = psd_factor(CMatrix(span * span.adjoint()), tol);
    CMatrix frame = ess.factor;  // orthogonal rows spanning the essential subspace
    for (Index r = 0; r < frame.rows(); ++r) frame.row(r).normalize();
    for (Index b = 0; b < kalg.linear_dim(); ++b)
      sigma.images[b] = frame * sigma.images[b] * frame.adjoint();
    sigma.dim_H = sigma.dim_K = frame.rows();
    w = frame * dil.W;
    if (!is_star_representation(sigma, tol))
      throw NumericalBreakdown("cp_extend: induced compact representation is not a *-homomorphism");
  }

  CPExtensionCertificate cert;
  cert.phi1 = OperatorMap::zero(kalg, f.dim_out, f.dim_out);
  for (Index b = 0; b < kalg.linear_dim(); ++b)
    cert.phi1.images[b] = w.adjoint() * sigma.images[b] * w;
  cert.phi2 = OperatorMap::zero(alg, f.dim_H, f.dim_H);
  for (Index b = 0; b < alg.linear_dim(); ++b)
    cert.phi2.images[b] = dil.stine.V.adjoint() * dil.stine.pi.images[b] * dil.stine.V;
  cert.choi_min_eig = choi_min_eigenvalue(linking_block_map(f, cert.phi1, cert.phi2));
  return cert;
}

struct CPExtensionReport {
  double choi_min_eig = 0.0;
  double corner_residual = 0.0;  // (1,2) corner of the block map vs Phi
  bool phi1_cp = false;
  bool phi2_cp = false;
  bool ok = false;
};

inline CPExtensionReport verify_cp_extension(const ModuleMap& f,
                                             const CPExtensionCertificate& cert,
                                             const Tolerance& tol = {}) {
  CPExtensionReport rep;
  OperatorMap block = linking_block_map(f, cert.phi1, cert.phi2);
  rep.choi_min_eig = choi_min_eigenvalue(block);
  const HilbertModule& mod = f.module;
  const auto zE = ModuleElement::zero(mod);
  const auto zA = AlgebraElement::zero(mod.algebra);
  const auto zK = AlgebraElement::zero(compacts(mod));
  for (Index e = 0; e < mod.dim_E(); ++e) {
    CMatrix im = block.eval(
        linking_as_element(embed_linking(zK, ModuleElement::basis(mod, e), zE, zA)));
    rep.corner_residual = std::max(
        rep.corner_residual, diff_norm(CMatrix(im.topRightCorner(f.dim_out, f.dim_H)),
                                       f.images[e]));
  }
  rep.phi1_cp = is_completely_positive(cert.phi1, tol);
  rep.phi2_cp = is_completely_positive(cert.phi2, tol);
  double scale = 1.0;
  for (const CMatrix& im : f.images) scale = std::max(scale, op_norm(im));
  rep.ok = rep.phi1_cp && rep.phi2_cp && rep.corner_residual <= tol.eps_eq * scale &&
           rep.choi_min_eig >= -tol.eps_psd * std::max(1.0, scale * scale);
  return rep;
}

// Corollary 2.5: any linear psi: A -> B(H) is the off-diagonal corner of a CP
// map on M_2(A) = L(A), obtained by running the pipeline with E = A.
inline ModuleMap module_map_from_operator_map(const OperatorMap& psi) {
  if (!psi.square())
    throw std::invalid_argument("module_map_from_operator_map: map must be square-valued");
  HilbertModule mod{psi.domain, 1};
  ModuleMap f{mod, psi.dim_H, psi.dim_K, psi.images};
  return f;
}

inline CPExtensionCertificate corollary_2_5(const OperatorMap& psi, const Tolerance& tol = {}) {
  ModuleMap f = module_map_from_operator_map(psi);
  DilationCertificate dil = dilate(f, tol);
  return cp_extend(f, dil, tol);
}

}  // namespace cstarmod
