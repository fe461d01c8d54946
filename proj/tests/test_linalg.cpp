#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cstarmod/linalg.hpp"
#include "cstarmod/rng.hpp"

using namespace cstarmod;

namespace {

CMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// independent oracle: power iteration for the largest singular value
double power_iteration_norm(const CMatrix& m, int iters = 200) {
  CMatrix g = m.adjoint() * m;
  CVector v = CVector::Ones(g.rows());
  v.normalize();
  for (int i = 0; i < iters; ++i) {
    v = g * v;
    v.normalize();
  }
  return std::sqrt(std::abs((v.adjoint() * g * v)(0, 0)));
}

}  // namespace

TEST_CASE("adjoint on small matrices") {
  CMatrix m(1, 1);
  m(0, 0) = Complex(0, 1);
  CHECK(adjoint(m)(0, 0) == Complex(0, -1));

  CMatrix r = mat2(1, 2, 3, 4);
  CMatrix rt = adjoint(r);
  CHECK(rt(0, 1) == Complex(3, 0));
  CHECK(rt(1, 0) == Complex(2, 0));
  CHECK(diff_norm(adjoint(rt), r) == 0.0);

  CMatrix shift = mat2(0, 1, 0, 0);
  CHECK(adjoint(shift)(1, 0) == Complex(1, 0));
  CHECK(adjoint(shift)(0, 1) == Complex(0, 0));
}

TEST_CASE("op_norm basics") {
  CHECK(op_norm(CMatrix::Identity(3, 3)) == doctest::Approx(1.0));
  CHECK(op_norm(mat2(0, 2, 0, 0)) == doctest::Approx(2.0));
  CMatrix ones = mat2(1, 1, 1, 1);
  CHECK(op_norm(ones) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(op_norm(ones) == doctest::Approx(power_iteration_norm(ones)).epsilon(1e-10));
  CHECK(op_norm(CMatrix(0, 0)) == 0.0);
}

TEST_CASE("op_norm is submultiplicative and C*-identity holds on random input") {
  Rng rng(42);
  for (int t = 0; t < 100; ++t) {
    Index n = rng.uniform_index(1, 8), m = rng.uniform_index(1, 8);
    CMatrix a = random_matrix(rng, n, m);
    double na = op_norm(a);
    CHECK(op_norm(CMatrix(a.adjoint() * a)) == doctest::Approx(na * na).epsilon(1e-10));
    CMatrix b = random_matrix(rng, m, rng.uniform_index(1, 8));
    CHECK(op_norm(CMatrix(a * b)) <= na * op_norm(b) * (1 + 1e-12));
  }
}

TEST_CASE("is_psd") {
  Tolerance tol;
  CHECK(is_psd(mat2(2, 1, 1, 2), tol));
  CHECK_FALSE(is_psd(mat2(0, 1, 1, 0), tol));
  CHECK(is_psd(CMatrix::Zero(3, 3), tol));
  CHECK_FALSE(is_psd(mat2(1, 1, -1, 1), tol));  // not Hermitian
  CHECK_THROWS_AS(is_psd(CMatrix::Zero(2, 3), tol), std::invalid_argument);
}

TEST_CASE("psd_factor examples") {
  Tolerance tol;
  auto [f_id, r_id] = psd_factor(CMatrix::Identity(2, 2), tol);
  CHECK(r_id == 2);
  CHECK(diff_norm(CMatrix(f_id.adjoint() * f_id), CMatrix::Identity(2, 2)) < 1e-12);

  // eigendecomposition oracle for [[1,1],[1,1]]: eigenvalues {0,2}
  CMatrix ones = mat2(1, 1, 1, 1);
  auto [f1, r1] = psd_factor(ones, tol);
  CHECK(r1 == 1);
  CHECK(f1.rows() == 1);
  CHECK(diff_norm(CMatrix(f1.adjoint() * f1), ones) < 1e-12);

  CMatrix g = mat2(2, 1, 1, 2);
  auto [f2, r2] = psd_factor(g, tol);
  CHECK(r2 == 2);
  CHECK(diff_norm(CMatrix(f2.adjoint() * f2), g) < 1e-12);

  CHECK_THROWS_AS(psd_factor(mat2(0, 1, 1, 0), tol), std::invalid_argument);
}

TEST_CASE("psd_factor round trip and rank on random PSD matrices") {
  Rng rng(7);
  Tolerance tol;
  for (int t = 0; t < 100; ++t) {
    Index n = rng.uniform_index(1, 8);
    Index r = rng.uniform_index(0, n);
    CMatrix g = random_psd(rng, n, r);
    auto pf = psd_factor(g, tol);
    CHECK(diff_norm(CMatrix(pf.factor.adjoint() * pf.factor), g) <=
          tol.eps_eq * std::max(1.0, op_norm(g)));
    CHECK(pf.rank == numerical_rank(g, tol));
    CHECK(numerical_rank(pf.factor, tol) == pf.rank);  // rows span C^rank
  }
}

TEST_CASE("lsq_solve") {
  Tolerance tol;
  CMatrix b = mat2(1, 2, 3, 4);
  CHECK(diff_norm(lsq_solve(CMatrix::Identity(2, 2), b, tol), b) < 1e-13);

  CMatrix a(2, 1), rhs(2, 1);
  a << 1, 0;
  rhs << 2, 0;
  CMatrix x = lsq_solve(a, rhs, tol);
  CHECK(x.rows() == 1);
  CHECK(std::abs(x(0, 0) - Complex(2, 0)) < 1e-13);

  Rng rng(3);
  CMatrix a6 = random_matrix(rng, 6, 3);
  CMatrix x0 = random_matrix(rng, 3, 2);
  CMatrix sol = lsq_solve(a6, CMatrix(a6 * x0), tol);
  CHECK(diff_norm(sol, x0) < 1e-10);
}

TEST_CASE("classify_isometry") {
  Tolerance tol;
  CHECK(classify_isometry(CMatrix::Identity(3, 3), tol) == IsometryClass::unitary);
  CMatrix col(2, 1);
  col << 1, 0;
  CHECK(classify_isometry(col, tol) == IsometryClass::isometry);
  CHECK(classify_isometry(CMatrix(col.adjoint()), tol) == IsometryClass::coisometry);
  CHECK(classify_isometry(mat2(1, 0, 0, 0), tol) == IsometryClass::partial_isometry);
  CHECK(classify_isometry(mat2(0.5, 0, 0, 0.25), tol) == IsometryClass::contraction);
  CHECK(classify_isometry(mat2(2, 0, 0, 0), tol) == IsometryClass::none);
  CHECK(classify_isometry(CMatrix(0, 0), tol) == IsometryClass::unitary);
}

TEST_CASE("classify_isometry matches brute-force definition checks on U*P products") {
  Rng rng(11);
  Tolerance tol;
  for (int t = 0; t < 50; ++t) {
    Index n = rng.uniform_index(1, 6);
    CMatrix u = random_unitary(rng, n);
    CMatrix p = CMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      if (rng.uniform() < 0.6) p(i, i) = 1.0;
    CMatrix m = u * p;
    auto cls = classify_isometry(m, tol);
    bool isom = diff_norm(CMatrix(m.adjoint() * m), CMatrix::Identity(n, n)) < 1e-10;
    bool coisom = diff_norm(CMatrix(m * m.adjoint()), CMatrix::Identity(n, n)) < 1e-10;
    CMatrix mtm = m.adjoint() * m;
    bool partial = diff_norm(CMatrix(mtm * mtm), mtm) < 1e-10;
    if (isom && coisom) CHECK(cls == IsometryClass::unitary);
    else if (isom) CHECK(cls == IsometryClass::isometry);
    else if (coisom) CHECK(cls == IsometryClass::coisometry);
    else if (partial) CHECK(cls == IsometryClass::partial_isometry);
  }
}

TEST_CASE("kron agrees with the defining identity") {
  Rng rng(5);
  CMatrix a = random_matrix(rng, 2, 3), b = random_matrix(rng, 3, 2);
  CMatrix k = kron(a, b);
  CHECK(k.rows() == 6);
  CHECK(k.cols() == 6);
  CHECK(std::abs(k(1 * 3 + 2, 2 * 2 + 1) - a(1, 2) * b(2, 1)) < 1e-15);
}

TEST_CASE("tolerance validation") {
  Tolerance bad;
  bad.eps_psd = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  Tolerance good;
  CHECK_NOTHROW(good.validate());
}

TEST_CASE("rng determinism and split independence") {
  Rng a(123), b(123);
  for (int i = 0; i < 32; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c = Rng(123).split(1), d = Rng(123).split(2);
  CHECK(c.next_u64() != d.next_u64());
}
