// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Criteria budgets (sample counts, tolerances, runtime caps) are fixed here.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "cstarmod/cb_factor.hpp"
#include "cstarmod/generators.hpp"

using namespace cstarmod;

namespace {

const Tolerance tol{};
int failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void report(int num, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %d. %s: %s\n", pass ? "PASS" : "FAIL", num, name, detail.c_str());
  if (!pass) ++failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// 1. Stinespring contract on 50 random CP maps (blocks <= 2, sizes <= 3,
//    dim_H <= 4); residual <= 1e-9 (1 + ||phi(1)||); exact minimality; < 10 s.
void criterion_1() {
  Timer timer;
  Rng rng(1001);
  double worst = 0.0;
  int minimal_ok = 0;
  const int n = 50;
  for (int t = 0; t < n; ++t) {
    BlockAlgebra a = random_algebra(rng, SizeCaps{3, 1, 4});
    OperatorMap phi = random_cp_map(rng, a, rng.uniform_index(1, 4));
    StinespringTriple st = minimal_stinespring(phi, tol);
    StinespringReport rep = verify_stinespring(phi, st, tol);
    const double bound = 1e-9 * (1.0 + op_norm(phi.eval(AlgebraElement::unit(a))));
    worst = std::max(worst, rep.contract_residual / bound);
    if (rep.minimality_rank == st.dim_K) ++minimal_ok;
  }
  const double secs = timer.seconds();
  report(1, "stinespring-contract", worst <= 1.0 && minimal_ok == n && secs < 10.0,
         fmt("worst residual/bound %.2e, minimality %d/%d, %.2fs (< 10s)", worst, minimal_ok, n,
             secs));
}

// 2. Kolmogorov round trip (residual <= 1e-9) and uniqueness between two
//    independently computed minimal decompositions, 100 kernels; < 5 s.
void criterion_2() {
  Timer timer;
  Rng rng(1002);
  double worst = 0.0;
  int unitary_ok = 0;
  const int n = 100;
  for (int t = 0; t < n; ++t) {
    FiniteKernel k = random_kernel(rng, rng.uniform_index(1, 5), rng.uniform_index(1, 3));
    KolmogorovPair p = minimal_kolmogorov(k, tol);
    worst = std::max(worst, kolmogorov_residual(k, p));

    // independent second route: SVD factorization of the full Gram
    CMatrix g = k.full_gram();
    g = (g + g.adjoint()) / 2.0;
    Eigen::JacobiSVD<CMatrix> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Index rank = 0;
    for (Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > tol.eps_rank * svd.singularValues()(0)) ++rank;
    CMatrix f2 = svd.singularValues().head(rank).cwiseSqrt().asDiagonal() *
                 svd.matrixU().leftCols(rank).adjoint();
    KolmogorovPair q{rank, {}, true};
    for (Index i = 0; i < k.size(); ++i) q.nu.push_back(f2.middleCols(i * k.dim_H, k.dim_H));
    if (rank == p.dim_K &&
        classify_isometry(equivalence_isometry(p, q, tol), tol) == IsometryClass::unitary)
      ++unitary_ok;
  }
  const double secs = timer.seconds();
  report(2, "kolmogorov-roundtrip-uniqueness", worst <= 1e-9 && unitary_ok == n && secs < 5.0,
         fmt("worst residual %.2e, unitary equivalence %d/%d, %.2fs (< 5s)", worst, unitary_ok, n,
             secs));
}

// 3. Lemma 2.2 on 30 random (phi, E): W_phi unitary, intertwining residual
//    <= 1e-9, norm identity within 1e-9 on 10 random combinations each.
void criterion_3() {
  Rng rng(1003);
  double worst_resid = 0.0, worst_norm = 0.0;
  int unitary_ok = 0;
  const int n = 30;
  for (int t = 0; t < n; ++t) {
    BlockAlgebra a = random_algebra(rng, SizeCaps{2, 2, 3});
    HilbertModule mod{a, rng.uniform_index(1, 2)};
    OperatorMap phi = random_cp_map(rng, a, rng.uniform_index(1, 3));
    CanonicalPhiData cphi = construct_canonical_phi(phi, mod, tol);
    StinespringTriple st = minimal_stinespring(phi, tol);
    CanonicalRepData crep = construct_canonical_rep(st.pi, mod, tol);
    CMatrix w = connecting_unitary(cphi, crep, st.V, tol);
    if (classify_isometry(w, tol) == IsometryClass::unitary) ++unitary_ok;
    const double scale = 1.0 + op_norm(phi.eval(AlgebraElement::unit(a)));
    for (Index e = 0; e < mod.dim_E(); ++e) {
      worst_resid = std::max(worst_resid,
                             diff_norm(CMatrix(w * cphi.phi_map.images[e]),
                                       CMatrix(crep.rep_map.images[e] * st.V)) / scale);
      worst_resid = std::max(
          worst_resid, diff_norm(cphi.phi_map.images[e],
                                 CMatrix(w.adjoint() * crep.rep_map.images[e] * st.V)) / scale);
    }
    for (int c = 0; c < 10; ++c) {
      const Index terms = rng.uniform_index(1, 3);
      CVector lhs = CVector::Zero(cphi.dim_Hphi), rhs = CVector::Zero(crep.dim_Kpi);
      double cscale = 1.0;
      for (Index i = 0; i < terms; ++i) {
        ModuleElement x = random_module_element(rng, mod);
        CVector h = random_matrix(rng, phi.dim_H, 1).col(0);
        lhs += cphi.phi_map.eval(x) * h;
        rhs += crep.rep_map.eval(x) * (st.V * h);
        cscale += module_norm(x) * h.norm();
      }
      worst_norm = std::max(worst_norm, std::abs(lhs.norm() - rhs.norm()) / cscale);
    }
  }
  report(3, "lemma-2.2-canonical-triple",
         unitary_ok == n && worst_resid <= 1e-9 && worst_norm <= 1e-9,
         fmt("W_phi unitary %d/%d, worst intertwine %.2e, worst norm identity %.2e", unitary_ok,
             n, worst_resid, worst_norm));
}

// 4. Theorem 2.3 (i)/(iii) uniqueness: connecting operator between
//    independently built non-degenerate phi-maps / pi-representations is
//    unitary with mapping residual <= 1e-8; 30 instances.
void criterion_4() {
  Rng rng(1004);
  int ok = 0;
  double worst = 0.0;
  const int n = 30;
  for (int t = 0; t < n; ++t) {
    BlockAlgebra a = random_algebra(rng, SizeCaps{2, 2, 3});
    HilbertModule mod{a, rng.uniform_index(1, 2)};
    OperatorMap phi = random_cp_map(rng, a, rng.uniform_index(1, 3));
    CanonicalPhiData cphi = construct_canonical_phi(phi, mod, tol);
    StinespringTriple st = minimal_stinespring(phi, tol);
    CanonicalRepData crep = construct_canonical_rep(st.pi, mod, tol);

    bool inst_ok = true;
    if (t % 2 == 0) {  // phi-map pairs
      CMatrix u1 = random_unitary(rng, cphi.dim_Hphi), u2 = random_unitary(rng, cphi.dim_Hphi);
      ModuleMap f1 = cphi.phi_map, f2 = cphi.phi_map;
      for (CMatrix& im : f1.images) im = u1 * im;
      for (CMatrix& im : f2.images) im = u2 * im;
      PhiFactorization fac1 = factor_phi_map(f1, phi, cphi, crep, st.V, tol);
      PhiFactorization fac2 = factor_phi_map(f2, phi, cphi, crep, st.V, tol);
      CMatrix connect = fac2.S * fac1.S.adjoint();
      inst_ok = classify_isometry(connect, tol) == IsometryClass::unitary;
      for (Index e = 0; e < mod.dim_E(); ++e)
        worst = std::max(worst, diff_norm(CMatrix(connect * f1.images[e]), f2.images[e]));
    } else {  // pi-representation pairs
      CMatrix u1 = random_unitary(rng, crep.dim_Kpi), u2 = random_unitary(rng, crep.dim_Kpi);
      ModuleMap g1 = crep.rep_map, g2 = crep.rep_map;
      for (CMatrix& im : g1.images) im = u1 * im;
      for (CMatrix& im : g2.images) im = u2 * im;
      RepFactorization fac1 = factor_representation(g1, st.pi, crep, tol);
      RepFactorization fac2 = factor_representation(g2, st.pi, crep, tol);
      CMatrix connect = fac2.S * fac1.S.adjoint();
      inst_ok = classify_isometry(connect, tol) == IsometryClass::unitary;
      for (Index e = 0; e < mod.dim_E(); ++e)
        worst = std::max(worst, diff_norm(CMatrix(connect * g1.images[e]), g2.images[e]));
    }
    if (inst_ok) ++ok;
  }
  report(4, "theorem-2.3-uniqueness", ok == n && worst <= 1e-8,
         fmt("unitary %d/%d, worst mapping residual %.2e", ok, n, worst));
}

// 5. Theorem 2.3 (ii) oracle equivalence: defect-Gram verdict vs level-n
//    checks (n <= 3, 20 random amplified elements each) on 50 instances, 10
//    of them engineered violators where a violating element is exhibited.
void criterion_5() {
  Rng rng(1005);
  const int n = 50;
  int agree = 0, violators = 0, exhibited = 0;
  for (int t = 0; t < n; ++t) {
    BlockAlgebra a = random_algebra(rng, SizeCaps{2, 2, 2});
    HilbertModule mod{a, rng.uniform_index(1, 2)};
    OperatorMap phi = random_cp_map(rng, a, rng.uniform_index(1, 2));
    ModuleMap f = ModuleMap::zero(mod, phi.dim_H, 1);
    const bool engineered = t % 5 == 0;
    if (engineered) {
      CanonicalPhiData cphi = construct_canonical_phi(phi, mod, tol);
      f = cphi.phi_map;
      for (CMatrix& im : f.images) im *= 1.5 + rng.uniform();
      ++violators;
    } else {
      f = random_module_map(rng, mod, phi.dim_H, rng.uniform_index(1, 3));
    }
    const bool verdict = is_completely_semi_phi_map(f, phi, tol);
    const double scale = std::max(1.0, op_norm(phi_gram(phi, mod)));
    bool level_consistent = true;
    for (Index lvl = 1; lvl <= 3; ++lvl) {
      OperatorMap phin = amplify_map(phi, lvl);
      ModuleMap fn = amplify_module_map(f, lvl);
      for (int s = 0; s < 20; ++s) {
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
        if (verdict && me < -1e-8 * scale * (1 + module_norm(x) * module_norm(x)))
          level_consistent = false;
      }
    }
    bool witness_ok = true;
    if (!verdict) witness_ok = find_semi_phi_violation(f, phi, 3, tol).has_value();
    if (engineered && !verdict && witness_ok) ++exhibited;
    if (level_consistent && witness_ok && !(engineered && verdict)) ++agree;
  }
  report(5, "semi-phi-oracle-equivalence", agree == n && exhibited == violators,
         fmt("agreement %d/%d, violators exhibited %d/%d", agree, n, exhibited, violators));
}

// 6. Theorem 2.1 / Corollary 2.4 loop on 50 random linear module maps:
//    factor residual <= 1e-8, bound checks at levels 1..3, cp_extend Choi
//    min eig >= -1e-9, lower <= upper; < 60 s total.
void criterion_6() {
  Timer timer;
  Rng rng(1006);
  const int n = 50;
  int ok = 0;
  double worst_resid = 0.0, worst_choi = 0.0;
  for (int t = 0; t < n; ++t) {
    BlockAlgebra a = random_algebra(rng, SizeCaps{2, 2, 3});
    HilbertModule mod{a, rng.uniform_index(1, 2)};
    ModuleMap f =
        random_module_map(rng, mod, rng.uniform_index(1, 3), rng.uniform_index(1, 3));
    FactorizationCertificate fac = factor_cb(f, tol);
    CbBoundReport bound = verify_cb_bound(fac, f, 3, rng, tol);
    DilationCertificate dil = dilate(f, tol);
    CPExtensionCertificate ext = cp_extend(f, dil, tol);
    worst_resid = std::max(worst_resid, fac.residual);
    worst_choi = std::min(worst_choi, ext.choi_min_eig);
    if (fac.residual <= 1e-8 && bound.ok && ext.choi_min_eig >= -1e-9 &&
        bound.lower_bound <= fac.cb_upper + 1e-8 * std::max(1.0, fac.cb_upper))
      ++ok;
  }
  const double secs = timer.seconds();
  report(6, "cb-factorization-loop", ok == n && secs < 60.0,
         fmt("%d/%d, worst residual %.2e, worst choi min-eig %.2e, %.2fs (< 60s)", ok, n,
             worst_resid, worst_choi, secs));
}

// 7. Corollary 2.5 on the transpose map of M2: CP-extension certificate on
//    M2(M2) with Choi min eig >= -1e-9 and corner equal to the transpose
//    within 1e-9.
void criterion_7() {
  BlockAlgebra m2{{2}};
  OperatorMap transpose = OperatorMap::zero(m2, 2, 2);
  for (Index b = 0; b < 4; ++b) {
    auto u = m2.unit_index(b);
    CMatrix img = CMatrix::Zero(2, 2);
    img(u.col, u.row) = 1.0;
    transpose.images[b] = img;
  }
  const bool not_cp = !is_completely_positive(transpose, tol);
  CPExtensionCertificate cert = corollary_2_5(transpose, tol);
  CPExtensionReport rep = verify_cp_extension(module_map_from_operator_map(transpose), cert, tol);
  report(7, "corollary-2.5-transpose",
         not_cp && cert.choi_min_eig >= -1e-9 && rep.corner_residual <= 1e-9 && rep.ok,
         fmt("CB-not-CP %s, choi min-eig %.2e, corner residual %.2e", not_cp ? "yes" : "no",
             cert.choi_min_eig, rep.corner_residual));
}

// 8. Falsification sensitivity: a relative 1e-3 perturbation of a certificate
//    operator must make the corresponding verifier fail; 20 certificates.
void criterion_8() {
  Rng rng(1008);
  const int n = 20;
  int detected = 0, clean = 0;
  for (int t = 0; t < n; ++t) {
    BlockAlgebra a = random_algebra(rng, SizeCaps{2, 2, 2});
    HilbertModule mod{a, rng.uniform_index(1, 2)};
    switch (t % 5) {
      case 0: {  // stinespring: perturb V
        OperatorMap phi = random_cp_map(rng, a, rng.uniform_index(1, 3));
        StinespringTriple st = minimal_stinespring(phi, tol);
        if (verify_stinespring(phi, st, tol).ok) ++clean;
        st.V += 1e-3 * op_norm(st.V) * random_matrix(rng, st.V.rows(), st.V.cols());
        if (!verify_stinespring(phi, st, tol).ok) ++detected;
        break;
      }
      case 1: {  // stinespring: perturb a pi image
        OperatorMap phi = random_cp_map(rng, a, rng.uniform_index(1, 3));
        StinespringTriple st = minimal_stinespring(phi, tol);
        if (verify_stinespring(phi, st, tol).ok) ++clean;
        CMatrix& im = st.pi.images[0];
        im += 1e-3 * std::max(1.0, op_norm(im)) * random_matrix(rng, im.rows(), im.cols());
        if (!verify_stinespring(phi, st, tol).ok) ++detected;
        break;
      }
      case 2: {  // kolmogorov: perturb nu
        FiniteKernel k = random_kernel(rng, rng.uniform_index(2, 4), rng.uniform_index(1, 3));
        KolmogorovPair p = minimal_kolmogorov(k, tol);
        const double bound = tol.eps_eq * std::max(1.0, op_norm(k.full_gram()));
        if (kolmogorov_residual(k, p) <= bound) ++clean;
        p.nu[0] += 1e-3 * op_norm(p.nu[0]) * random_matrix(rng, p.dim_K, k.dim_H);
        if (kolmogorov_residual(k, p) > bound) ++detected;
        break;
      }
      case 3: {  // factor-cb: perturb S
        ModuleMap f = random_module_map(rng, mod, rng.uniform_index(1, 3),
                                        rng.uniform_index(1, 3));
        FactorizationCertificate fac = factor_cb(f, tol);
        if (verify_factorization(f, fac, tol).ok) ++clean;
        fac.S += 1e-3 * op_norm(fac.S) * random_matrix(rng, fac.S.rows(), fac.S.cols());
        if (!verify_factorization(f, fac, tol).ok) ++detected;
        break;
      }
      default: {  // cp-extension: perturb a phi1 image
        ModuleMap f = random_module_map(rng, mod, rng.uniform_index(1, 3),
                                        rng.uniform_index(1, 3));
        DilationCertificate dil = dilate(f, tol);
        CPExtensionCertificate cert = cp_extend(f, dil, tol);
        if (verify_cp_extension(f, cert, tol).ok) ++clean;
        const Index b0 = cert.phi1.domain.linear_dim() / 2;
        CMatrix& im = cert.phi1.images[b0];
        im += 1e-3 * std::max(1.0, op_norm(im)) *
              random_matrix(rng, im.rows(), im.cols());
        if (!verify_cp_extension(f, cert, tol).ok) ++detected;
        break;
      }
    }
  }
  report(8, "falsification-sensitivity", detected == n && clean == n,
         fmt("detected %d/%d (clean certificates verified %d/%d)", detected, n, clean, n));
}

}  // namespace

int main() {
  Timer total;
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  std::printf("%d/8 criteria passed in %.2fs\n", 8 - failures, total.seconds());
  return failures;
}
