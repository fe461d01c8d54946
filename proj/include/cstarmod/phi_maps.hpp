#pragma once

#include <optional>
#include <vector>

#include "cstarmod/cp_maps.hpp"
#include "cstarmod/kernels.hpp"
#include "cstarmod/module_map.hpp"

namespace cstarmod {

// Gram of the kernel (x,y) -> phi(<x,y>) on the complex basis of E (x) C^dim_H:
// G[(e,h),(e',h')] = phi(<b_e, b_e'>)(h,h'). PSD exactly when phi is CP.
inline CMatrix phi_gram(const OperatorMap& phi, const HilbertModule& mod) {
  if (!(mod.algebra == phi.domain))
    throw std::invalid_argument("phi_gram: module algebra does not match map domain");
  const Index de = mod.dim_E(), h = phi.dim_H;
  const BlockAlgebra& alg = mod.algebra;
  CMatrix g = CMatrix::Zero(de * h, de * h);
  for (Index e1 = 0; e1 < de; ++e1) {
    auto x = mod.basis_index(e1);
    auto u = alg.unit_index(x.unit);
    for (Index e2 = 0; e2 < de; ++e2) {
      auto y = mod.basis_index(e2);
      auto v = alg.unit_index(y.unit);
      // <b_(c,u), b_(c',u')> = delta_cc' u* u' = delta_cc' delta_kk' delta_ii' unit(k,j,j')
      if (x.coord != y.coord || u.block != v.block || u.row != v.row) continue;
      g.block(e1 * h, e2 * h, h, h) = phi.images[alg.unit_flat(u.block, u.col, v.col)];
    }
  }
  return g;
}

// [Phi(E)H] = target space: the stacked basis images have full row rank.
inline bool is_nondegenerate(const ModuleMap& f, const Tolerance& tol = {}) {
  return numerical_rank(stacked_images(f), tol) == f.dim_out;
}

inline double phi_map_residual(const ModuleMap& f, const OperatorMap& phi) {
  return op_norm(map_gram(f) - phi_gram(phi, f.module));
}

// Phi(x)* Phi(y) = phi(<x,y>); checking on basis pairs suffices because both
// sides are sesquilinear.
inline bool is_phi_map(const ModuleMap& f, const OperatorMap& phi, const Tolerance& tol = {}) {
  if (f.dim_H != phi.dim_H || !phi.square()) return false;
  const double scale = std::max(1.0, op_norm(phi_gram(phi, f.module)));
  return phi_map_residual(f, phi) <= tol.eps_eq * scale;
}

inline bool is_representation(const ModuleMap& f, const OperatorMap& pi,
                              const Tolerance& tol = {}) {
  return is_star_representation(pi, tol) && is_phi_map(f, pi, tol);
}

// Defect Gram of the semi-phi inequality; PSD of this single matrix is
// equivalent to Phi_n(x)* Phi_n(x) <= phi_n(<x,x>) at every level n.
inline CMatrix semi_phi_defect_gram(const ModuleMap& f, const OperatorMap& phi) {
  return phi_gram(phi, f.module) - map_gram(f);
}

inline bool is_completely_semi_phi_map(const ModuleMap& f, const OperatorMap& phi,
                                       const Tolerance& tol = {}) {
  if (f.dim_H != phi.dim_H || !phi.square()) return false;
  return is_psd(semi_phi_defect_gram(f, phi), tol);
}

// Canonical phi-map of Lemma 2.2 built by GNS on E (x) C^dim_H; gram_factor is
// the quotient map, Phi_phi(b_e) its (e)-th column block.
struct CanonicalPhiData {
  ModuleMap phi_map;     // Phi_phi : E -> B(H, H_phi)
  Index dim_Hphi = 0;
  CMatrix gram_factor;   // dim_Hphi x (dim_E * dim_H)
};

// Canonical pi-representation Psi_pi on E (x) C^dim_K for the Stinespring pi.
struct CanonicalRepData {
  ModuleMap rep_map;     // Psi_pi : E -> B(K, K_pi)
  Index dim_Kpi = 0;
  CMatrix gram_factor;
  OperatorMap pi;        // the representation it factors through
};

namespace detail {

inline std::pair<ModuleMap, CMatrix> gns_module_map(const OperatorMap& phi,
                                                    const HilbertModule& mod,
                                                    const Tolerance& tol,
                                                    const char* who) {
  CMatrix gram = phi_gram(phi, mod);
  PsdFactor pf;
  try {
    pf = psd_factor(gram, tol);
  } catch (const std::invalid_argument&) {
    throw NumericalBreakdown(std::string(who) + ": GNS Gram is not PSD within tolerance");
  }
  ModuleMap f{mod, phi.dim_H, pf.rank, {}};
  for (Index e = 0; e < mod.dim_E(); ++e)
    f.images.push_back(pf.factor.middleCols(e * phi.dim_H, phi.dim_H));
  return {std::move(f), std::move(pf.factor)};
}

}  // namespace detail

inline CanonicalPhiData construct_canonical_phi(const OperatorMap& phi, const HilbertModule& mod,
                                                const Tolerance& tol = {}) {
  if (!is_completely_positive(phi, tol))
    throw std::invalid_argument("construct_canonical_phi: map is not completely positive");
  auto [f, factor] = detail::gns_module_map(phi, mod, tol, "construct_canonical_phi");
  return {std::move(f), factor.rows(), std::move(factor)};
}

inline CanonicalRepData construct_canonical_rep(const OperatorMap& pi, const HilbertModule& mod,
                                                const Tolerance& tol = {}) {
  if (!is_star_representation(pi, tol))
    throw std::invalid_argument("construct_canonical_rep: map is not a *-representation");
  auto [f, factor] = detail::gns_module_map(pi, mod, tol, "construct_canonical_rep");
  CanonicalRepData data{std::move(f), factor.rows(), std::move(factor), pi};

  // Psi_pi(x a) = Psi_pi(x) pi(a), automatic for pi-maps; assert it held up
  // numerically before handing the data out.
  const BlockAlgebra& alg = mod.algebra;
  double resid = 0.0;
  for (Index e = 0; e < mod.dim_E(); ++e)
    for (Index b = 0; b < alg.linear_dim(); ++b) {
      ModuleElement xa = module_action(ModuleElement::basis(mod, e),
                                       AlgebraElement::basis(alg, b));
      resid = std::max(resid,
                       diff_norm(data.rep_map.eval(xa),
                                 CMatrix(data.rep_map.images[e] * pi.images[b])));
    }
  double scale = 1.0;
  for (const CMatrix& im : data.rep_map.images) scale = std::max(scale, op_norm(im));
  if (resid > tol.eps_eq * scale)
    throw NumericalBreakdown("construct_canonical_rep: module-action compatibility failed");
  return data;
}

// Connecting unitary W_phi of Lemma 2.2: W_phi Phi_phi(x) h = Psi_pi(x) V h on
// the spanning vectors; unitary because (pi, V) is minimal.
inline CMatrix connecting_unitary(const CanonicalPhiData& cphi, const CanonicalRepData& crep,
                                  const CMatrix& V, const Tolerance& tol = {}) {
  const OperatorMap& pi = crep.pi;
  CMatrix span(crep.pi.dim_K, pi.domain.linear_dim() * V.cols());
  for (Index b = 0; b < pi.domain.linear_dim(); ++b)
    span.middleCols(b * V.cols(), V.cols()) = pi.images[b] * V;
  if (numerical_rank(span, tol) != pi.dim_K)
    throw std::invalid_argument("connecting_unitary: Stinespring input is not minimal");

  const ModuleMap& psi = crep.rep_map;
  CMatrix lhs = cphi.gram_factor;  // stacked Phi_phi(b_e)
  CMatrix rhs(crep.dim_Kpi, lhs.cols());
  const Index h = cphi.phi_map.dim_H;
  for (Index e = 0; e < cphi.phi_map.module.dim_E(); ++e)
    rhs.middleCols(e * h, h) = psi.images[e] * V;
  return lsq_solve_left(lhs, rhs, tol);
}

// Factorization certificates of Theorem 2.3. Residuals are max over the basis
// of E in operator norm.
struct PhiFactorization {
  CMatrix S;  // intertwiner from the canonical object to Phi
  CMatrix W;  // H' -> K_pi with Phi(.) = W* Psi_pi(.) V
  IsometryClass s_class = IsometryClass::none;
  IsometryClass w_class = IsometryClass::none;
  double intertwine_residual = 0.0;  // ||S Phi_phi(b) - Phi(b)||
  double dilation_residual = 0.0;    // ||Phi(b) - W* Psi_pi(b) V||
};

namespace detail {

inline CMatrix solve_intertwiner(const CMatrix& from_stacked, const ModuleMap& to,
                                 const Tolerance& tol) {
  return lsq_solve_left(from_stacked, stacked_images(to), tol);
}

inline double stacked_residual(const CMatrix& s, const CMatrix& from_stacked,
                               const ModuleMap& to) {
  return op_norm(s * from_stacked - stacked_images(to));
}

}  // namespace detail

// Theorem 2.3 (i): Phi a phi-map gives an isometry S_Phi with S_Phi Phi_phi
// = Phi and a coisometry W = W_phi S_Phi* with Phi(.) = W* Psi_pi(.) V; both
// unitary exactly when Phi is non-degenerate.
inline PhiFactorization factor_phi_map(const ModuleMap& f, const OperatorMap& phi,
                                       const CanonicalPhiData& cphi,
                                       const CanonicalRepData& crep, const CMatrix& V,
                                       const Tolerance& tol = {}) {
  if (!is_phi_map(f, phi, tol))
    throw std::invalid_argument("factor_phi_map: input fails the phi-map identity");
  PhiFactorization out;
  out.S = detail::solve_intertwiner(cphi.gram_factor, f, tol);
  CMatrix w_phi = connecting_unitary(cphi, crep, V, tol);
  out.W = w_phi * out.S.adjoint();
  out.s_class = classify_isometry(out.S, tol);
  out.w_class = classify_isometry(out.W, tol);
  out.intertwine_residual = detail::stacked_residual(out.S, cphi.gram_factor, f);
  for (Index e = 0; e < f.module.dim_E(); ++e)
    out.dilation_residual =
        std::max(out.dilation_residual,
                 diff_norm(f.images[e], CMatrix(out.W.adjoint() * crep.rep_map.images[e] * V)));
  return out;
}

// Theorem 2.3 (ii): Phi completely semi-phi gives a contraction S with
// S Phi_phi = Phi (surjective iff Phi non-degenerate) and a contraction
// W = W_phi S* with the same dilation identity.
inline PhiFactorization factor_semi_phi_map(const ModuleMap& f, const OperatorMap& phi,
                                            const CanonicalPhiData& cphi,
                                            const CanonicalRepData& crep, const CMatrix& V,
                                            const Tolerance& tol = {}) {
  if (!is_completely_semi_phi_map(f, phi, tol))
    throw std::invalid_argument("factor_semi_phi_map: defect Gram is not PSD");
  PhiFactorization out;
  out.S = detail::solve_intertwiner(cphi.gram_factor, f, tol);
  CMatrix w_phi = connecting_unitary(cphi, crep, V, tol);
  out.W = w_phi * out.S.adjoint();
  out.s_class = classify_isometry(out.S, tol);
  out.w_class = classify_isometry(out.W, tol);
  out.intertwine_residual = detail::stacked_residual(out.S, cphi.gram_factor, f);
  for (Index e = 0; e < f.module.dim_E(); ++e)
    out.dilation_residual =
        std::max(out.dilation_residual,
                 diff_norm(f.images[e], CMatrix(out.W.adjoint() * crep.rep_map.images[e] * V)));
  return out;
}

struct RepFactorization {
  CMatrix S;  // K_pi -> K' with S Psi_pi = Psi
  IsometryClass s_class = IsometryClass::none;
  double residual = 0.0;
};

// Theorem 2.3 (iii): Psi a pi-representation gives an isometry S_Psi with
// Psi(.) = S_Psi Psi_pi(.), unitary exactly when Psi is non-degenerate.
inline RepFactorization factor_representation(const ModuleMap& f, const OperatorMap& pi,
                                              const CanonicalRepData& crep,
                                              const Tolerance& tol = {}) {
  if (!is_representation(f, pi, tol))
    throw std::invalid_argument("factor_representation: input is not a pi-representation");
  RepFactorization out;
  out.S = detail::solve_intertwiner(crep.gram_factor, f, tol);
  out.s_class = classify_isometry(out.S, tol);
  out.residual = detail::stacked_residual(out.S, crep.gram_factor, f);
  return out;
}

// Theorem 2.3 (iv): the partial isometry W = S_Psi W_phi S_Phi* relating a
// phi-map and a pi-representation over the same module; unitary when both are
// non-degenerate.
inline CMatrix relate_phi_and_rep(const ModuleMap& f, const OperatorMap& phi, const ModuleMap& g,
                                  const OperatorMap& pi, const CMatrix& V,
                                  const Tolerance& tol = {}) {
  if (!is_phi_map(f, phi, tol))
    throw std::invalid_argument("relate_phi_and_rep: first map fails the phi-map identity");
  if (!is_representation(g, pi, tol))
    throw std::invalid_argument("relate_phi_and_rep: second map is not a pi-representation");
  CanonicalPhiData cphi = construct_canonical_phi(phi, f.module, tol);
  CanonicalRepData crep = construct_canonical_rep(pi, f.module, tol);
  CMatrix w_phi = connecting_unitary(cphi, crep, V, tol);
  CMatrix s_phi = detail::solve_intertwiner(cphi.gram_factor, f, tol);
  CMatrix s_psi = detail::solve_intertwiner(crep.gram_factor, g, tol);
  return s_psi * w_phi * s_phi.adjoint();
}

// Search for a level-n witness of a failed semi-phi inequality: Schmidt
// truncations of the most negative eigenvectors of the defect Gram, placed in
// the first row of an M_n(E) element.
struct SemiPhiViolation {
  Index level = 0;
  ModuleElement witness;        // element of M_n(E) over the amplified module
  CVector direction;            // vector in C^(n*dim_H) with <v, D_n v> < 0
  double value = 0.0;           // the negative quadratic form value
};

inline std::optional<SemiPhiViolation> find_semi_phi_violation(const ModuleMap& f,
                                                               const OperatorMap& phi,
                                                               Index max_level,
                                                               const Tolerance& tol = {}) {
  CMatrix defect = semi_phi_defect_gram(f, phi);
  defect = (defect + defect.adjoint()) / 2.0;
  const Index de = f.module.dim_E(), h = f.dim_H;
  if (defect.rows() == 0) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(defect);
  const double scale = std::max(1.0, op_norm(defect));

  std::optional<SemiPhiViolation> best;
  const Index tries = std::min<Index>(4, es.eigenvalues().size());
  for (Index t = 0; t < tries; ++t) {
    if (es.eigenvalues()(t) >= -tol.eps_psd * scale) break;  // ascending order
    CVector v = es.eigenvectors().col(t);
    CMatrix vmat(de, h);  // v = sum_r x_r (x) h_r via SVD of this reshape
    for (Index e = 0; e < de; ++e)
      for (Index k = 0; k < h; ++k) vmat(e, k) = v(e * h + k);
    Eigen::JacobiSVD<CMatrix> svd(vmat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index terms = svd.nonzeroSingularValues();

    for (Index n = 1; n <= max_level; ++n) {
      const Index used = std::min(n, terms);
      // amplified element with first-row entries x_1..x_used
      std::vector<std::vector<ModuleElement>> cells(
          n, std::vector<ModuleElement>(n, ModuleElement::zero(f.module)));
      CVector dir = CVector::Zero(n * h);
      for (Index r = 0; r < used; ++r) {
        CVector xc = svd.singularValues()(r) * svd.matrixU().col(r);
        cells[0][r] = ModuleElement::from_coeffs(f.module, xc);
        dir.segment(r * h, h) = svd.matrixV().col(r).conjugate();
      }
      ModuleElement x = amplify_module(cells);
      OperatorMap phin = amplify_map(phi, n);
      ModuleMap fn = amplify_module_map(f, n);
      CMatrix lhs_f = fn.eval(x);
      CMatrix level_defect = phin.eval(inner_product(x, x)) - lhs_f.adjoint() * lhs_f;
      const double val = (dir.adjoint() * level_defect * dir)(0, 0).real();
      if (val < -tol.eps_psd * scale) {
        SemiPhiViolation viol{n, std::move(x), std::move(dir), val};
        if (!best || viol.value < best->value) best = std::move(viol);
        break;  // smallest violating level for this eigenvector
      }
    }
  }
  return best;
}

}  // namespace cstarmod
