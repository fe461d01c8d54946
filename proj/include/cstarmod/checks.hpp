#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cstarmod/json_io.hpp"

namespace cstarmod {

struct RunConfig {
  std::uint64_t seed = 0;
  Tolerance tol;
  Index levels = 3;
  Index trials = 50;
  SizeCaps caps;
};

inline Json to_json(const RunConfig& cfg) {
  return Json{{"seed", cfg.seed},          {"tol", to_json(cfg.tol)},
              {"levels", cfg.levels},      {"trials", cfg.trials},
              {"max_block", cfg.caps.max_block}, {"max_m", cfg.caps.max_m},
              {"max_dimh", cfg.caps.max_dim_h}};
}

struct CheckResult {
  std::string id;
  bool pass = true;
  double worst = 0.0;  // worst residual / margin observed
  std::string note;
  Json offending;  // serialized instance behind the first failure

  void fail(double value, const Json& instance, const std::string& why) {
    if (pass) offending = instance;
    pass = false;
    worst = std::max(worst, value);
    if (note.empty()) note = why;
  }
  void observe(double value) { worst = std::max(worst, value); }
};

namespace checks {

inline std::uint64_t stream_of(const char* id) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const char* p = id; *p; ++p) h = (h ^ static_cast<unsigned char>(*p)) * 1099511628211ULL;
  return h;
}

inline Rng check_rng(const RunConfig& cfg, const char* id) {
  return Rng(cfg.seed).split(stream_of(id));
}

// --- linalg-core -------------------------------------------------------------

inline CheckResult psd_factor_roundtrip(const RunConfig& cfg) {
  CheckResult res{"linalg/psd-factor-roundtrip"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < 2 * cfg.trials; ++t) {
    Index n = rng.uniform_index(1, 8);
    CMatrix g = random_psd(rng, n, rng.uniform_index(0, n));
    auto pf = psd_factor(g, cfg.tol);
    double r = diff_norm(CMatrix(pf.factor.adjoint() * pf.factor), g);
    res.observe(r);
    if (r > cfg.tol.eps_eq * std::max(1.0, op_norm(g)) || pf.rank != numerical_rank(g, cfg.tol))
      res.fail(r, to_json(g), "psd_factor reconstruction or rank mismatch");
  }
  return res;
}

inline CheckResult opnorm_cstar_identity(const RunConfig& cfg) {
  CheckResult res{"linalg/opnorm-cstar-identity"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < 2 * cfg.trials; ++t) {
    CMatrix m = random_matrix(rng, rng.uniform_index(1, 8), rng.uniform_index(1, 8));
    double n = op_norm(m), nn = op_norm(CMatrix(m.adjoint() * m));
    double rel = std::abs(nn - n * n) / std::max(1.0, n * n);
    res.observe(rel);
    if (rel > 1e-10) res.fail(rel, to_json(m), "||M*M|| != ||M||^2");
  }
  return res;
}

inline CheckResult isometry_classification(const RunConfig& cfg) {
  CheckResult res{"linalg/isometry-classification"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < cfg.trials; ++t) {
    Index n = rng.uniform_index(1, 6);
    CMatrix u = random_unitary(rng, n);
    CMatrix p = CMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      if (rng.uniform() < 0.6) p(i, i) = 1.0;
    CMatrix m = u * p;
    auto cls = classify_isometry(m, cfg.tol);
    bool isom = diff_norm(CMatrix(m.adjoint() * m), CMatrix::Identity(n, n)) < 1e-10;
    bool coisom = diff_norm(CMatrix(m * m.adjoint()), CMatrix::Identity(n, n)) < 1e-10;
    CMatrix mtm = m.adjoint() * m;
    bool partial = diff_norm(CMatrix(mtm * mtm), mtm) < 1e-10;
    IsometryClass expect = isom && coisom ? IsometryClass::unitary
                           : isom         ? IsometryClass::isometry
                           : coisom       ? IsometryClass::coisometry
                           : partial      ? IsometryClass::partial_isometry
                                          : IsometryClass::contraction;
    if (cls != expect) res.fail(1.0, to_json(m), "classification disagrees with brute force");
  }
  return res;
}

// --- cstar-algebra -----------------------------------------------------------

inline CheckResult cauchy_schwarz(const RunConfig& cfg) {
  CheckResult res{"algebra/cauchy-schwarz"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < 4 * cfg.trials; ++t) {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    HilbertModule mod{a, rng.uniform_index(1, cfg.caps.max_m)};
    ModuleElement x = random_module_element(rng, mod);
    ModuleElement y = random_module_element(rng, mod);
    double lhs = inner_product(x, y).norm();
    double rhs = std::sqrt(inner_product(x, x).norm() * inner_product(y, y).norm());
    double excess = lhs - rhs;
    res.observe(excess);
    if (excess > 1e-10 * std::max(1.0, rhs))
      res.fail(excess, Json{{"x", to_json(x.coeffs())}, {"y", to_json(y.coeffs())}},
               "Cauchy-Schwarz violated");
  }
  return res;
}

inline CheckResult linking_star_homomorphism(const RunConfig& cfg) {
  CheckResult res{"algebra/linking-star-homomorphism"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < 2 * cfg.trials; ++t) {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    HilbertModule mod{a, rng.uniform_index(1, cfg.caps.max_m)};
    auto rand_link = [&] {
      return embed_linking(random_element(rng, compacts(mod)), random_module_element(rng, mod),
                           random_module_element(rng, mod), random_element(rng, a));
    };
    LinkingElement x = rand_link(), y = rand_link();
    double r1 = diff_norm(CMatrix(linking_to_matrix(x) * linking_to_matrix(y)),
                          linking_to_matrix(x * y));
    double r2 = std::abs(op_norm(linking_to_matrix(x * y)) - linking_as_element(x * y).norm());
    double r3 = diff_norm(linking_to_matrix(adjoint(x)), CMatrix(linking_to_matrix(x).adjoint()));
    double r = std::max({r1, r2, r3});
    res.observe(r);
    if (r > 1e-9 * std::max(1.0, op_norm(linking_to_matrix(x)) * op_norm(linking_to_matrix(y))))
      res.fail(r, to_json(linking_to_matrix(x)), "linking embedding not *-isometric");
  }
  return res;
}

inline CheckResult inner_product_faithful(const RunConfig& cfg) {
  CheckResult res{"algebra/inner-product-faithful"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < 2 * cfg.trials; ++t) {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    HilbertModule mod{a, rng.uniform_index(1, cfg.caps.max_m)};
    ModuleElement x = random_module_element(rng, mod);
    double total = inner_product(x, x).norm();
    for (Index i = 0; i < mod.m; ++i) {
      double ci = x.coords[i].norm();
      double excess = ci * ci - total;
      res.observe(excess);
      if (excess > 1e-10 * std::max(1.0, total))
        res.fail(excess, to_json(x.coeffs()), "<x,x> does not dominate a coordinate");
    }
  }
  return res;
}

// --- cp-maps -----------------------------------------------------------------

inline CheckResult stinespring_contract(const RunConfig& cfg) {
  CheckResult res{"cp-maps/stinespring-contract"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < cfg.trials; ++t) {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    OperatorMap phi = random_cp_map(rng, a, rng.uniform_index(1, cfg.caps.max_dim_h));
    StinespringTriple st = minimal_stinespring(phi, cfg.tol);
    auto rep = verify_stinespring(phi, st, cfg.tol);
    const double bound = 1e-9 * (1.0 + op_norm(phi.eval(AlgebraElement::unit(a))));
    res.observe(rep.contract_residual);
    if (rep.contract_residual > bound || rep.minimality_rank != st.dim_K ||
        rep.mult_residual > 1e-8 || rep.star_residual > 1e-8 || rep.unit_residual > bound)
      res.fail(rep.contract_residual, to_json(phi), "Stinespring contract failed");
  }
  return res;
}

inline CheckResult cb_lower_vs_cp_norm(const RunConfig& cfg) {
  CheckResult res{"cp-maps/cb-lower-vs-cp-norm"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < cfg.trials / 2 + 1; ++t) {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    OperatorMap phi = random_cp_map(rng, a, rng.uniform_index(1, cfg.caps.max_dim_h));
    double lower = cb_lower_bound(phi, cfg.levels, rng);
    double exact = cb_norm_cp(phi, cfg.tol);
    double excess = lower - exact;
    res.observe(excess);
    if (excess > 1e-6) res.fail(excess, to_json(phi), "cb lower bound exceeds ||phi(1)||");
  }
  return res;
}

inline CheckResult corner_reassembly(const RunConfig& cfg) {
  CheckResult res{"cp-maps/corner-reassembly"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < cfg.trials / 2 + 1; ++t) {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    HilbertModule mod{a, rng.uniform_index(1, cfg.caps.max_m)};
    BlockAlgebra link = linking_algebra(mod);
    // defining representation with multiplicity 1 or 2, unitarily conjugated
    const Index copies = rng.uniform_index(1, 2);
    const Index d = copies * link.total_dim();
    CMatrix u = random_unitary(rng, d);
    OperatorMap pi_link = OperatorMap::zero(link, d, d);
    for (Index b = 0; b < link.linear_dim(); ++b) {
      CMatrix concrete = AlgebraElement::basis(link, b).to_matrix();
      CMatrix blockdiag = CMatrix::Zero(d, d);
      for (Index cpy = 0; cpy < copies; ++cpy)
        blockdiag.block(cpy * link.total_dim(), cpy * link.total_dim(), link.total_dim(),
                        link.total_dim()) = concrete;
      pi_link.images[b] = u * blockdiag * u.adjoint();
    }
    CornerDecomposition cd = corner_decompose(pi_link, mod, cfg.tol);
    double r = corner_reassembly_residual(pi_link, mod, cd);
    res.observe(r);
    if (r > 1e-9) res.fail(r, to_json(pi_link), "corner reassembly residual too large");
  }
  return res;
}

// --- kernels -------------------------------------------------------------

inline CheckResult kolmogorov_roundtrip(const RunConfig& cfg) {
  CheckResult res{"kernels/kolmogorov-roundtrip"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < 2 * cfg.trials; ++t) {
    FiniteKernel k = random_kernel(rng, rng.uniform_index(1, 5), rng.uniform_index(1, 3));
    KolmogorovPair p = minimal_kolmogorov(k, cfg.tol);
    double r = kolmogorov_residual(k, p) / std::max(1.0, op_norm(k.full_gram()));
    res.observe(r);
    if (r > 1e-9 || !check_minimal(p, cfg.tol))
      res.fail(r, to_json(k), "Kolmogorov round trip failed");
  }
  return res;
}

inline CheckResult kolmogorov_equivalence(const RunConfig& cfg) {
  CheckResult res{"kernels/equivalence-unitary"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < cfg.trials; ++t) {
    FiniteKernel k = random_kernel(rng, rng.uniform_index(2, 5), rng.uniform_index(1, 3));
    KolmogorovPair p = minimal_kolmogorov(k, cfg.tol);
    CMatrix u = random_unitary(rng, p.dim_K);
    KolmogorovPair q{p.dim_K, {}, true};
    for (const CMatrix& nu : p.nu) q.nu.push_back(u * nu);
    CMatrix v = equivalence_isometry(p, q, cfg.tol);
    double r = diff_norm(v, u);
    res.observe(r);
    if (classify_isometry(v, cfg.tol) != IsometryClass::unitary || r > 1e-8)
      res.fail(r, to_json(k), "equivalence isometry not the expected unitary");
  }
  return res;
}

inline CheckResult cp_kernel_pd(const RunConfig& cfg) {
  CheckResult res{"kernels/cp-kernel-pd"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < cfg.trials; ++t) {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    HilbertModule mod{a, rng.uniform_index(1, cfg.caps.max_m)};
    OperatorMap phi = random_cp_map(rng, a, rng.uniform_index(1, cfg.caps.max_dim_h));
    std::vector<ModuleElement> sample;
    for (Index i = 0; i < 4; ++i) sample.push_back(random_module_element(rng, mod));
    if (!is_positive_definite(kernel_from_cp(phi, sample), cfg.tol))
      res.fail(1.0, to_json(phi), "CP-induced kernel not PD");
  }
  // non-CP Hermitian-preserving map: a violating sample among canonical bases
  BlockAlgebra m2{{2}};
  OperatorMap transpose = OperatorMap::zero(m2, 2, 2);
  for (Index b = 0; b < 4; ++b) {
    auto u = m2.unit_index(b);
    CMatrix img = CMatrix::Zero(2, 2);
    img(u.col, u.row) = 1.0;
    transpose.images[b] = img;
  }
  HilbertModule ea{m2, 1};
  std::vector<ModuleElement> basis_sample;
  for (Index e = 0; e < ea.dim_E(); ++e) basis_sample.push_back(ModuleElement::basis(ea, e));
  if (is_positive_definite(kernel_from_cp(transpose, basis_sample), cfg.tol))
    res.fail(1.0, to_json(transpose), "no violating sample found for the transpose map");
  return res;
}

// --- phi-maps ------------------------------------------------------------

inline CheckResult phi_map_basis_sufficiency(const RunConfig& cfg) {
  CheckResult res{"phi-maps/phi-map-basis-sufficiency"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < cfg.trials / 2 + 1; ++t) {
    PhiMapInstance inst = random_phi_map_instance(rng, cfg.caps, cfg.tol);
    double scale = std::max(1.0, op_norm(phi_gram(inst.phi, inst.module)));
    for (Index p = 0; p < 4; ++p) {
      ModuleElement x = random_module_element(rng, inst.module);
      ModuleElement y = random_module_element(rng, inst.module);
      double r = diff_norm(CMatrix(inst.Phi.eval(x).adjoint() * inst.Phi.eval(y)),
                           inst.phi.eval(inner_product(x, y))) /
                 (scale * (1.0 + module_norm(x) * module_norm(y)));
      res.observe(r);
      if (r > 1e-8) res.fail(r, to_json(inst.Phi), "basis identity did not extend");
    }
  }
  return res;
}

inline CheckResult semi_phi_level_equivalence(const RunConfig& cfg) {
  CheckResult res{"phi-maps/semi-phi-level-equivalence"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < cfg.trials; ++t) {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    HilbertModule mod{a, rng.uniform_index(1, cfg.caps.max_m)};
    OperatorMap phi = random_cp_map(rng, a, rng.uniform_index(1, cfg.caps.max_dim_h));
    ModuleMap f = ModuleMap::zero(mod, phi.dim_H, 1);
    if (t % 5 == 0) {
      CanonicalPhiData cphi = construct_canonical_phi(phi, mod, cfg.tol);
      f = cphi.phi_map;
      for (CMatrix& im : f.images) im *= 1.5 + rng.uniform();
    } else {
      f = random_module_map(rng, mod, phi.dim_H, rng.uniform_index(1, 3));
    }
    const bool verdict = is_completely_semi_phi_map(f, phi, cfg.tol);
    const double scale = std::max(1.0, op_norm(phi_gram(phi, mod)));
    bool bad = false;
    for (Index n = 1; n <= std::min<Index>(cfg.levels, 3) && !bad; ++n) {
      OperatorMap phin = amplify_map(phi, n);
      ModuleMap fn = amplify_module_map(f, n);
      for (Index s = 0; s < 20 && !bad; ++s) {
        ModuleElement x{fn.module, {}};
        for (Index c = 0; c < fn.module.m; ++c) {
          AlgebraElement el{fn.module.algebra, {}};
          for (Index sz : fn.module.algebra.block_sizes)
            el.blocks.push_back(random_matrix(rng, sz, sz));
          x.coords.push_back(std::move(el));
        }
        CMatrix fx = fn.eval(x);
        CMatrix defect = phin.eval(inner_product(x, x)) - fx.adjoint() * fx;
        double me = min_eig_hermitian((defect + defect.adjoint()) / 2.0);
        if (verdict && me < -1e-8 * scale * (1 + module_norm(x) * module_norm(x))) bad = true;
      }
    }
    if (bad) res.fail(1.0, to_json(f), "Gram verdict true but a level check failed");
    if (!verdict) {
      auto viol = find_semi_phi_violation(f, phi, std::min<Index>(cfg.levels, 3), cfg.tol);
      if (!viol)
        res.fail(1.0, to_json(f), "Gram verdict false but no violating element exhibited");
    }
  }
  return res;
}

inline CheckResult phi_map_uniqueness(const RunConfig& cfg) {
  CheckResult res{"phi-maps/uniqueness"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < cfg.trials / 2 + 1; ++t) {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    HilbertModule mod{a, rng.uniform_index(1, cfg.caps.max_m)};
    OperatorMap phi = random_cp_map(rng, a, rng.uniform_index(1, cfg.caps.max_dim_h));
    CanonicalPhiData cphi = construct_canonical_phi(phi, mod, cfg.tol);
    StinespringTriple st = minimal_stinespring(phi, cfg.tol);
    CanonicalRepData crep = construct_canonical_rep(st.pi, mod, cfg.tol);
    ModuleMap f1 = cphi.phi_map, f2 = cphi.phi_map;
    CMatrix u1 = random_unitary(rng, cphi.dim_Hphi), u2 = random_unitary(rng, cphi.dim_Hphi);
    for (CMatrix& im : f1.images) im = u1 * im;
    for (CMatrix& im : f2.images) im = u2 * im;
    PhiFactorization fac1 = factor_phi_map(f1, phi, cphi, crep, st.V, cfg.tol);
    PhiFactorization fac2 = factor_phi_map(f2, phi, cphi, crep, st.V, cfg.tol);
    CMatrix connect = fac2.S * fac1.S.adjoint();
    double r = 0.0;
    for (Index e = 0; e < mod.dim_E(); ++e)
      r = std::max(r, diff_norm(CMatrix(connect * f1.images[e]), f2.images[e]));
    res.observe(r);
    if (classify_isometry(connect, cfg.tol) != IsometryClass::unitary || r > 1e-8)
      res.fail(r, to_json(phi), "connecting operator not unitary or mapping residual too large");
  }
  return res;
}

inline CheckResult lemma22_norm_identity(const RunConfig& cfg) {
  CheckResult res{"phi-maps/norm-identity"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < cfg.trials / 2 + 1; ++t) {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    HilbertModule mod{a, rng.uniform_index(1, cfg.caps.max_m)};
    OperatorMap phi = random_cp_map(rng, a, rng.uniform_index(1, cfg.caps.max_dim_h));
    CanonicalPhiData cphi = construct_canonical_phi(phi, mod, cfg.tol);
    StinespringTriple st = minimal_stinespring(phi, cfg.tol);
    CanonicalRepData crep = construct_canonical_rep(st.pi, mod, cfg.tol);
    CMatrix w = connecting_unitary(cphi, crep, st.V, cfg.tol);
    if (classify_isometry(w, cfg.tol) != IsometryClass::unitary)
      res.fail(1.0, to_json(phi), "W_phi not unitary");
    for (Index c = 0; c < 10; ++c) {
      const Index terms = rng.uniform_index(1, 3);
      CVector lhs = CVector::Zero(cphi.dim_Hphi), rhs = CVector::Zero(crep.dim_Kpi);
      double scale = 0.0;
      for (Index i = 0; i < terms; ++i) {
        ModuleElement x = random_module_element(rng, mod);
        CVector h = random_matrix(rng, phi.dim_H, 1).col(0);
        lhs += cphi.phi_map.eval(x) * h;
        rhs += crep.rep_map.eval(x) * (st.V * h);
        scale += module_norm(x) * h.norm();
      }
      double r = std::abs(lhs.norm() - rhs.norm()) / (1.0 + scale);
      res.observe(r);
      if (r > 1e-9) res.fail(r, to_json(phi), "Lemma 2.2 norm identity failed");
    }
  }
  return res;
}

inline CheckResult module_action_compatibility(const RunConfig& cfg) {
  CheckResult res{"phi-maps/module-action-compatibility"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < cfg.trials / 2 + 1; ++t) {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    HilbertModule mod{a, rng.uniform_index(1, cfg.caps.max_m)};
    OperatorMap pi = random_representation(rng, a);
    CanonicalRepData crep = construct_canonical_rep(pi, mod, cfg.tol);
    for (Index s = 0; s < 5; ++s) {
      ModuleElement x = random_module_element(rng, mod);
      AlgebraElement el = random_element(rng, a);
      double r = diff_norm(crep.rep_map.eval(module_action(x, el)),
                           CMatrix(crep.rep_map.eval(x) * pi.eval(el))) /
                 (1.0 + module_norm(x) * el.norm());
      res.observe(r);
      if (r > 1e-9) res.fail(r, to_json(pi), "Psi_pi(x a) != Psi_pi(x) pi(a)");
    }
  }
  return res;
}

inline CheckResult canonical_phi_linearity(const RunConfig& cfg) {
  CheckResult res{"phi-maps/linearity"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < cfg.trials / 2 + 1; ++t) {
    PhiMapInstance inst = random_phi_map_instance(rng, cfg.caps, cfg.tol);
    for (Index s = 0; s < 5; ++s) {
      ModuleElement x = random_module_element(rng, inst.module);
      ModuleElement y = random_module_element(rng, inst.module);
      Complex alpha = rng.cnormal(), beta = rng.cnormal();
      double r = diff_norm(inst.Phi.eval(alpha * x + beta * y),
                           CMatrix(alpha * inst.Phi.eval(x) + beta * inst.Phi.eval(y))) /
                 (1.0 + module_norm(x) + module_norm(y));
      res.observe(r);
      if (r > 1e-10) res.fail(r, to_json(inst.Phi), "canonical phi-map not linear");
    }
  }
  return res;
}

// --- cb-factor -------------------------------------------------------------

inline CheckResult cb_equivalence_loop(const RunConfig& cfg) {
  CheckResult res{"cb-factor/equivalence-loop"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < cfg.trials; ++t) {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    HilbertModule mod{a, rng.uniform_index(1, cfg.caps.max_m)};
    ModuleMap f = random_module_map(rng, mod, rng.uniform_index(1, cfg.caps.max_dim_h),
                                    rng.uniform_index(1, cfg.caps.max_dim_h));
    double scale = 0.0;
    for (const CMatrix& im : f.images) scale = std::max(scale, op_norm(im));
    DominatingCp dom = dominating_cp(f);
    if (!is_completely_semi_phi_map(f, dom.psi, cfg.tol))
      res.fail(1.0, to_json(f), "dominating psi does not dominate");
    DilationCertificate dil = dilate(f, cfg.tol);
    res.observe(dil.residual / (1 + scale));
    if (dil.residual > 1e-8 * (1 + scale)) res.fail(dil.residual, to_json(f), "dilation residual");
    CPExtensionCertificate ext = cp_extend(f, dil, cfg.tol);
    if (ext.choi_min_eig < -1e-9 * std::max(1.0, scale * scale))
      res.fail(-ext.choi_min_eig, to_json(f), "CP extension Choi not PSD");
    FactorizationCertificate fac = factor_cb(f, cfg.tol);
    if (fac.residual > 1e-8 * (1 + scale))
      res.fail(fac.residual, to_json(f), "factorization residual");
    if (!is_phi_map(fac.Gamma, fac.phi, cfg.tol))
      res.fail(1.0, to_json(f), "Gamma is not a phi-map");
    double lower = cb_lower_bound(f, std::min<Index>(cfg.levels, 2), rng);
    if (lower > fac.cb_upper + cfg.tol.eps_eq * std::max(1.0, fac.cb_upper))
      res.fail(lower - fac.cb_upper, to_json(f), "cb lower bound exceeds certificate upper bound");
  }
  return res;
}

inline CheckResult cp_extension_corner(const RunConfig& cfg) {
  CheckResult res{"cb-factor/cp-extension-corner"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < cfg.trials / 2 + 1; ++t) {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    HilbertModule mod{a, rng.uniform_index(1, cfg.caps.max_m)};
    ModuleMap f = random_module_map(rng, mod, rng.uniform_index(1, cfg.caps.max_dim_h),
                                    rng.uniform_index(1, cfg.caps.max_dim_h));
    DilationCertificate dil = dilate(f, cfg.tol);
    CPExtensionCertificate ext = cp_extend(f, dil, cfg.tol);
    auto rep = verify_cp_extension(f, ext, cfg.tol);
    res.observe(rep.corner_residual);
    if (rep.corner_residual > 1e-9) res.fail(rep.corner_residual, to_json(f), "corner mismatch");
    if (!rep.phi1_cp || !rep.phi2_cp) res.fail(1.0, to_json(f), "corner maps not CP");
  }
  return res;
}

// --- certificates: re-validation and falsification sensitivity ------------

inline CheckResult certificates_revalidate(const RunConfig& cfg) {
  CheckResult res{"certificates/revalidate"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < cfg.trials / 5 + 1; ++t) {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    OperatorMap phi = random_cp_map(rng, a, rng.uniform_index(1, cfg.caps.max_dim_h));
    StinespringTriple st = minimal_stinespring(phi, cfg.tol);
    if (!verify_stinespring(phi, st, cfg.tol).ok)
      res.fail(1.0, to_json(phi), "fresh Stinespring certificate failed re-validation");

    FiniteKernel k = random_kernel(rng, rng.uniform_index(2, 5), rng.uniform_index(1, 3));
    KolmogorovPair p = minimal_kolmogorov(k, cfg.tol);
    if (kolmogorov_residual(k, p) > cfg.tol.eps_eq * std::max(1.0, op_norm(k.full_gram())))
      res.fail(1.0, to_json(k), "fresh Kolmogorov certificate failed re-validation");

    HilbertModule mod{a, rng.uniform_index(1, cfg.caps.max_m)};
    ModuleMap f = random_module_map(rng, mod, phi.dim_H, rng.uniform_index(1, 3));
    FactorizationCertificate fac = factor_cb(f, cfg.tol);
    if (!verify_factorization(f, fac, cfg.tol).ok)
      res.fail(1.0, to_json(f), "fresh factorization certificate failed re-validation");
  }
  return res;
}

inline CheckResult falsification_sensitivity(const RunConfig& cfg) {
  CheckResult res{"certificates/falsification"};
  Rng rng = check_rng(cfg, res.id.c_str());
  for (Index t = 0; t < cfg.trials / 3 + 1; ++t) {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    switch (t % 3) {
      case 0: {
        OperatorMap phi = random_cp_map(rng, a, rng.uniform_index(1, cfg.caps.max_dim_h));
        StinespringTriple st = minimal_stinespring(phi, cfg.tol);
        if (st.dim_K == 0 || op_norm(st.V) == 0.0) break;
        st.V += 1e-3 * op_norm(st.V) * random_matrix(rng, st.V.rows(), st.V.cols());
        if (verify_stinespring(phi, st, cfg.tol).ok)
          res.fail(1.0, to_json(phi), "perturbed Stinespring certificate still verifies");
        break;
      }
      case 1: {
        FiniteKernel k = random_kernel(rng, rng.uniform_index(2, 4), rng.uniform_index(1, 3));
        KolmogorovPair p = minimal_kolmogorov(k, cfg.tol);
        if (p.dim_K == 0) break;
        p.nu[0] += 1e-3 * op_norm(p.nu[0]) * random_matrix(rng, p.dim_K, k.dim_H);
        if (kolmogorov_residual(k, p) <= cfg.tol.eps_eq * std::max(1.0, op_norm(k.full_gram())))
          res.fail(1.0, to_json(k), "perturbed Kolmogorov certificate still verifies");
        break;
      }
      default: {
        HilbertModule mod{a, rng.uniform_index(1, cfg.caps.max_m)};
        ModuleMap f = random_module_map(rng, mod, rng.uniform_index(1, cfg.caps.max_dim_h),
                                        rng.uniform_index(1, 3));
        FactorizationCertificate fac = factor_cb(f, cfg.tol);
        if (op_norm(fac.S) == 0.0) break;
        fac.S += 1e-3 * op_norm(fac.S) * random_matrix(rng, fac.S.rows(), fac.S.cols());
        if (verify_factorization(f, fac, cfg.tol).ok)
          res.fail(1.0, to_json(f), "perturbed factorization certificate still verifies");
        break;
      }
    }
  }
  return res;
}

}  // namespace checks

using CheckFn = CheckResult (*)(const RunConfig&);

struct CheckSpec {
  const char* id;
  CheckFn fn;
};

inline const std::vector<CheckSpec>& all_checks() {
  static const std::vector<CheckSpec> specs = {
      {"linalg/psd-factor-roundtrip", checks::psd_factor_roundtrip},
      {"linalg/opnorm-cstar-identity", checks::opnorm_cstar_identity},
      {"linalg/isometry-classification", checks::isometry_classification},
      {"algebra/cauchy-schwarz", checks::cauchy_schwarz},
      {"algebra/linking-star-homomorphism", checks::linking_star_homomorphism},
      {"algebra/inner-product-faithful", checks::inner_product_faithful},
      {"cp-maps/stinespring-contract", checks::stinespring_contract},
      {"cp-maps/cb-lower-vs-cp-norm", checks::cb_lower_vs_cp_norm},
      {"cp-maps/corner-reassembly", checks::corner_reassembly},
      {"kernels/kolmogorov-roundtrip", checks::kolmogorov_roundtrip},
      {"kernels/equivalence-unitary", checks::kolmogorov_equivalence},
      {"kernels/cp-kernel-pd", checks::cp_kernel_pd},
      {"phi-maps/phi-map-basis-sufficiency", checks::phi_map_basis_sufficiency},
      {"phi-maps/semi-phi-level-equivalence", checks::semi_phi_level_equivalence},
      {"phi-maps/uniqueness", checks::phi_map_uniqueness},
      {"phi-maps/norm-identity", checks::lemma22_norm_identity},
      {"phi-maps/module-action-compatibility", checks::module_action_compatibility},
      {"phi-maps/linearity", checks::canonical_phi_linearity},
      {"cb-factor/equivalence-loop", checks::cb_equivalence_loop},
      {"cb-factor/cp-extension-corner", checks::cp_extension_corner},
      {"certificates/revalidate", checks::certificates_revalidate},
      {"certificates/falsification", checks::falsification_sensitivity},
  };
  return specs;
}

}  // namespace cstarmod
