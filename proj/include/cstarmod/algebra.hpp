#pragma once

#include <numeric>
#include <vector>

#include "cstarmod/linalg.hpp"

namespace cstarmod {

// Finite-dimensional unital C*-algebra A = M_{n1} (+) ... (+) M_{nK}.
// Canonical basis: matrix units ordered block-major, then row-major inside a
// block; index b <-> (k, i, j) with b = unit_offset(k) + i*n_k + j.
struct BlockAlgebra {
  std::vector<Index> block_sizes;

  Index num_blocks() const { return static_cast<Index>(block_sizes.size()); }
  Index total_dim() const {  // concrete matrix dimension, sum n_k
    return std::accumulate(block_sizes.begin(), block_sizes.end(), Index{0});
  }
  Index linear_dim() const {  // complex dimension, sum n_k^2
    Index d = 0;
    for (Index n : block_sizes) d += n * n;
    return d;
  }
  Index unit_offset(Index k) const {
    Index d = 0;
    for (Index b = 0; b < k; ++b) d += block_sizes[b] * block_sizes[b];
    return d;
  }
  Index block_offset(Index k) const {  // row offset in the concrete matrix
    Index d = 0;
    for (Index b = 0; b < k; ++b) d += block_sizes[b];
    return d;
  }

  struct UnitIndex {
    Index block, row, col;
  };
  UnitIndex unit_index(Index b) const {
    for (Index k = 0; k < num_blocks(); ++k) {
      const Index n = block_sizes[k], sq = n * n;
      if (b < sq) return {k, b / n, b % n};
      b -= sq;
    }
    throw std::invalid_argument("BlockAlgebra: basis index out of range");
  }
  Index unit_flat(Index k, Index i, Index j) const {
    return unit_offset(k) + i * block_sizes[k] + j;
  }

  bool operator==(const BlockAlgebra&) const = default;

  void validate() const {
    if (block_sizes.empty())
      throw std::invalid_argument("BlockAlgebra: needs at least one block");
    for (Index n : block_sizes)
      if (n < 1) throw std::invalid_argument("BlockAlgebra: block sizes must be positive");
  }
};

struct AlgebraElement {
  BlockAlgebra algebra;
  std::vector<CMatrix> blocks;

  static AlgebraElement zero(const BlockAlgebra& a) {
    AlgebraElement e{a, {}};
    for (Index n : a.block_sizes) e.blocks.push_back(CMatrix::Zero(n, n));
    return e;
  }
  static AlgebraElement unit(const BlockAlgebra& a) {
    AlgebraElement e{a, {}};
    for (Index n : a.block_sizes) e.blocks.push_back(CMatrix::Identity(n, n));
    return e;
  }
  static AlgebraElement basis(const BlockAlgebra& a, Index b) {
    AlgebraElement e = zero(a);
    auto u = a.unit_index(b);
    e.blocks[u.block](u.row, u.col) = 1.0;
    return e;
  }

  // Coefficients against the canonical matrix-unit basis.
  CVector coeffs() const {
    CVector c(algebra.linear_dim());
    Index p = 0;
    for (const CMatrix& blk : blocks)
      for (Index i = 0; i < blk.rows(); ++i)
        for (Index j = 0; j < blk.cols(); ++j) c(p++) = blk(i, j);
    return c;
  }
  static AlgebraElement from_coeffs(const BlockAlgebra& a, const CVector& c) {
    if (c.size() != a.linear_dim())
      throw std::invalid_argument("AlgebraElement: coefficient length mismatch");
    AlgebraElement e = zero(a);
    Index p = 0;
    for (CMatrix& blk : e.blocks)
      for (Index i = 0; i < blk.rows(); ++i)
        for (Index j = 0; j < blk.cols(); ++j) blk(i, j) = c(p++);
    return e;
  }

  CMatrix to_matrix() const {  // block-diagonal concrete realization
    const Index d = algebra.total_dim();
    CMatrix m = CMatrix::Zero(d, d);
    Index off = 0;
    for (const CMatrix& blk : blocks) {
      m.block(off, off, blk.rows(), blk.cols()) = blk;
      off += blk.rows();
    }
    return m;
  }
  static AlgebraElement from_matrix(const BlockAlgebra& a, const CMatrix& m) {
    if (m.rows() != a.total_dim() || m.cols() != a.total_dim())
      throw std::invalid_argument("AlgebraElement: concrete dimension mismatch");
    AlgebraElement e{a, {}};
    Index off = 0;
    for (Index n : a.block_sizes) {
      e.blocks.push_back(m.block(off, off, n, n));
      off += n;
    }
    return e;
  }

  double norm() const {  // C*-norm of a direct sum: max block norm
    double n = 0.0;
    for (const CMatrix& blk : blocks) n = std::max(n, op_norm(blk));
    return n;
  }

  AlgebraElement& operator+=(const AlgebraElement& o) {
    check_same(o);
    for (std::size_t k = 0; k < blocks.size(); ++k) blocks[k] += o.blocks[k];
    return *this;
  }
  AlgebraElement& operator-=(const AlgebraElement& o) {
    check_same(o);
    for (std::size_t k = 0; k < blocks.size(); ++k) blocks[k] -= o.blocks[k];
    return *this;
  }
  AlgebraElement& operator*=(Complex s) {
    for (CMatrix& blk : blocks) blk *= s;
    return *this;
  }

  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
  friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
  friend AlgebraElement operator*(Complex s, AlgebraElement a) { return a *= s; }
  friend AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b) {
    a.check_same(b);
    AlgebraElement r{a.algebra, {}};
    r.blocks.reserve(a.blocks.size());
    for (std::size_t k = 0; k < a.blocks.size(); ++k)
      r.blocks.push_back(a.blocks[k] * b.blocks[k]);
    return r;
  }

  void check_same(const AlgebraElement& o) const {
    if (!(algebra == o.algebra))
      throw std::invalid_argument("AlgebraElement: algebra mismatch");
  }
};

inline AlgebraElement adjoint(const AlgebraElement& a) {
  AlgebraElement r{a.algebra, {}};
  r.blocks.reserve(a.blocks.size());
  for (const CMatrix& blk : a.blocks) r.blocks.push_back(blk.adjoint());
  return r;
}

// Unnormalized trace, sum over blocks of tr(a_k). Faithful positive functional.
inline Complex trace(const AlgebraElement& a) {
  Complex t = 0.0;
  for (const CMatrix& blk : a.blocks) t += blk.trace();
  return t;
}

// Free right Hilbert module E = A^m with <x,y> = sum_i x_i* y_i.
struct HilbertModule {
  BlockAlgebra algebra;
  Index m = 1;

  Index dim_E() const { return m * algebra.linear_dim(); }
  bool operator==(const HilbertModule&) const = default;
  void validate() const {
    algebra.validate();
    if (m < 1) throw std::invalid_argument("HilbertModule: rank m must be positive");
  }

  struct BasisIndex {
    Index coord, unit;
  };
  BasisIndex basis_index(Index e) const {
    const Index da = algebra.linear_dim();
    if (e < 0 || e >= dim_E())
      throw std::invalid_argument("HilbertModule: basis index out of range");
    return {e / da, e % da};
  }
};

struct ModuleElement {
  HilbertModule module;
  std::vector<AlgebraElement> coords;

  static ModuleElement zero(const HilbertModule& mod) {
    ModuleElement x{mod, {}};
    for (Index c = 0; c < mod.m; ++c) x.coords.push_back(AlgebraElement::zero(mod.algebra));
    return x;
  }
  static ModuleElement basis(const HilbertModule& mod, Index e) {
    ModuleElement x = zero(mod);
    auto b = mod.basis_index(e);
    x.coords[b.coord] = AlgebraElement::basis(mod.algebra, b.unit);
    return x;
  }

  CVector coeffs() const {
    CVector c(module.dim_E());
    const Index da = module.algebra.linear_dim();
    for (Index i = 0; i < module.m; ++i) c.segment(i * da, da) = coords[i].coeffs();
    return c;
  }
  static ModuleElement from_coeffs(const HilbertModule& mod, const CVector& c) {
    if (c.size() != mod.dim_E())
      throw std::invalid_argument("ModuleElement: coefficient length mismatch");
    ModuleElement x{mod, {}};
    const Index da = mod.algebra.linear_dim();
    for (Index i = 0; i < mod.m; ++i)
      x.coords.push_back(AlgebraElement::from_coeffs(mod.algebra, c.segment(i * da, da)));
    return x;
  }

  ModuleElement& operator+=(const ModuleElement& o) {
    check_same(o);
    for (Index i = 0; i < module.m; ++i) coords[i] += o.coords[i];
    return *this;
  }
  ModuleElement& operator*=(Complex s) {
    for (auto& c : coords) c *= s;
    return *this;
  }
  friend ModuleElement operator+(ModuleElement a, const ModuleElement& b) { return a += b; }
  friend ModuleElement operator*(Complex s, ModuleElement a) { return a *= s; }

  void check_same(const ModuleElement& o) const {
    if (!(module == o.module))
      throw std::invalid_argument("ModuleElement: module mismatch");
  }
};

// A-valued inner product <x,y> = sum_i x_i* y_i; conjugate-linear in x.
inline AlgebraElement inner_product(const ModuleElement& x, const ModuleElement& y) {
  x.check_same(y);
  AlgebraElement r = AlgebraElement::zero(x.module.algebra);
  for (Index i = 0; i < x.module.m; ++i) r += adjoint(x.coords[i]) * y.coords[i];
  return r;
}

inline double module_norm(const ModuleElement& x) {
  return std::sqrt(inner_product(x, x).norm());
}

// Right action (x . a)_i = x_i a.
inline ModuleElement module_action(const ModuleElement& x, const AlgebraElement& a) {
  if (!(x.module.algebra == a.algebra))
    throw std::invalid_argument("module_action: algebra mismatch");
  ModuleElement r{x.module, {}};
  for (const AlgebraElement& c : x.coords) r.coords.push_back(c * a);
  return r;
}

// K(E) = M_m(A), realized as the block algebra with sizes [m*n_1,...,m*n_K].
// Inside block k the index (p, i) -> p*n_k + i stacks the m module coordinates.
inline BlockAlgebra compacts(const HilbertModule& mod) {
  BlockAlgebra c;
  for (Index n : mod.algebra.block_sizes) c.block_sizes.push_back(mod.m * n);
  return c;
}

// Assemble an element of M_m(A) (an element of compacts(E)) from its m x m
// array of A-entries.
inline AlgebraElement compact_from_parts(const HilbertModule& mod,
                                         const std::vector<std::vector<AlgebraElement>>& parts) {
  const Index m = mod.m;
  if (static_cast<Index>(parts.size()) != m)
    throw std::invalid_argument("compact_from_parts: ragged input");
  AlgebraElement r = AlgebraElement::zero(compacts(mod));
  for (Index p = 0; p < m; ++p) {
    if (static_cast<Index>(parts[p].size()) != m)
      throw std::invalid_argument("compact_from_parts: ragged input");
    for (Index q = 0; q < m; ++q) {
      const AlgebraElement& a = parts[p][q];
      if (!(a.algebra == mod.algebra))
        throw std::invalid_argument("compact_from_parts: algebra mismatch");
      for (Index k = 0; k < mod.algebra.num_blocks(); ++k) {
        const Index n = mod.algebra.block_sizes[k];
        r.blocks[k].block(p * n, q * n, n, n) = a.blocks[k];
      }
    }
  }
  return r;
}

inline std::vector<std::vector<AlgebraElement>> compact_to_parts(const HilbertModule& mod,
                                                                 const AlgebraElement& t) {
  if (!(t.algebra == compacts(mod)))
    throw std::invalid_argument("compact_to_parts: element is not in K(E)");
  const Index m = mod.m;
  std::vector<std::vector<AlgebraElement>> parts(
      m, std::vector<AlgebraElement>(m, AlgebraElement::zero(mod.algebra)));
  for (Index p = 0; p < m; ++p)
    for (Index q = 0; q < m; ++q)
      for (Index k = 0; k < mod.algebra.num_blocks(); ++k) {
        const Index n = mod.algebra.block_sizes[k];
        parts[p][q].blocks[k] = t.blocks[k].block(p * n, q * n, n, n);
      }
  return parts;
}

// theta_{x,y} z = x <y,z>, as the M_m(A) matrix [x_i y_j*].
inline AlgebraElement compact_rank_one(const ModuleElement& x, const ModuleElement& y) {
  x.check_same(y);
  const Index m = x.module.m;
  std::vector<std::vector<AlgebraElement>> parts(m);
  for (Index p = 0; p < m; ++p)
    for (Index q = 0; q < m; ++q) parts[p].push_back(x.coords[p] * adjoint(y.coords[q]));
  return compact_from_parts(x.module, parts);
}

// Linking algebra element [[T, x],[y*, a]], carried as an (m+1) x (m+1)
// formal matrix over A next to its concrete block-diagonal realization.
struct LinkingElement {
  HilbertModule module;
  std::vector<std::vector<AlgebraElement>> entries;  // (m+1) x (m+1)

  static LinkingElement zero(const HilbertModule& mod) {
    LinkingElement l{mod, {}};
    l.entries.assign(mod.m + 1, std::vector<AlgebraElement>(
                                    mod.m + 1, AlgebraElement::zero(mod.algebra)));
    return l;
  }
  static LinkingElement unit(const HilbertModule& mod) {
    LinkingElement l = zero(mod);
    for (Index i = 0; i <= mod.m; ++i) l.entries[i][i] = AlgebraElement::unit(mod.algebra);
    return l;
  }

  friend LinkingElement operator*(const LinkingElement& a, const LinkingElement& b) {
    if (!(a.module == b.module))
      throw std::invalid_argument("LinkingElement: module mismatch");
    const Index d = a.module.m + 1;
    LinkingElement r = zero(a.module);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j)
        for (Index s = 0; s < d; ++s) r.entries[i][j] += a.entries[i][s] * b.entries[s][j];
    return r;
  }
  friend LinkingElement operator+(LinkingElement a, const LinkingElement& b) {
    if (!(a.module == b.module))
      throw std::invalid_argument("LinkingElement: module mismatch");
    const Index d = a.module.m + 1;
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) a.entries[i][j] += b.entries[i][j];
    return a;
  }
};

inline LinkingElement adjoint(const LinkingElement& l) {
  const Index d = l.module.m + 1;
  LinkingElement r = LinkingElement::zero(l.module);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) r.entries[i][j] = adjoint(l.entries[j][i]);
  return r;
}

// L(E) as a block algebra: sizes [(m+1)*n_1, ..., (m+1)*n_K]; inside block k
// the index (alpha, i) -> alpha*n_k + i, alpha = 0..m (alpha = m is the A row).
inline BlockAlgebra linking_algebra(const HilbertModule& mod) {
  BlockAlgebra l;
  for (Index n : mod.algebra.block_sizes) l.block_sizes.push_back((mod.m + 1) * n);
  return l;
}

inline AlgebraElement linking_as_element(const LinkingElement& l) {
  const HilbertModule& mod = l.module;
  AlgebraElement r = AlgebraElement::zero(linking_algebra(mod));
  for (Index k = 0; k < mod.algebra.num_blocks(); ++k) {
    const Index n = mod.algebra.block_sizes[k];
    for (Index i = 0; i <= mod.m; ++i)
      for (Index j = 0; j <= mod.m; ++j)
        r.blocks[k].block(i * n, j * n, n, n) = l.entries[i][j].blocks[k];
  }
  return r;
}

inline CMatrix linking_to_matrix(const LinkingElement& l) {
  return linking_as_element(l).to_matrix();
}

inline LinkingElement embed_linking(const AlgebraElement& t, const ModuleElement& x,
                                    const ModuleElement& y, const AlgebraElement& a) {
  const HilbertModule& mod = x.module;
  x.check_same(y);
  if (!(a.algebra == mod.algebra) || !(t.algebra == compacts(mod)))
    throw std::invalid_argument("embed_linking: dimension mismatch");
  LinkingElement l = LinkingElement::zero(mod);
  auto parts = compact_to_parts(mod, t);
  for (Index p = 0; p < mod.m; ++p)
    for (Index q = 0; q < mod.m; ++q) l.entries[p][q] = parts[p][q];
  for (Index p = 0; p < mod.m; ++p) {
    l.entries[p][mod.m] = x.coords[p];
    l.entries[mod.m][p] = adjoint(y.coords[p]);
  }
  l.entries[mod.m][mod.m] = a;
  return l;
}

// Role of a canonical basis unit of linking_algebra(E) under the
// [[T, x],[y*, a]] convention.
struct LinkingBasisPart {
  enum class Role { compact, module, module_adjoint, algebra } role;
  Index compact_unit = -1;  // basis index into compacts(E), role == compact
  Index module_basis = -1;  // basis index into E, role == module / module_adjoint
  Index algebra_unit = -1;  // basis index into A, role == algebra
};

inline LinkingBasisPart linking_basis_part(const HilbertModule& mod, Index b) {
  const BlockAlgebra link = linking_algebra(mod);
  auto u = link.unit_index(b);
  const Index n = mod.algebra.block_sizes[u.block];
  const Index alpha = u.row / n, i = u.row % n;
  const Index beta = u.col / n, j = u.col % n;
  LinkingBasisPart part{};
  if (alpha < mod.m && beta < mod.m) {
    part.role = LinkingBasisPart::Role::compact;
    part.compact_unit = compacts(mod).unit_flat(u.block, alpha * n + i, beta * n + j);
  } else if (alpha < mod.m) {  // x entry at coordinate alpha
    part.role = LinkingBasisPart::Role::module;
    part.module_basis = alpha * mod.algebra.linear_dim() + mod.algebra.unit_flat(u.block, i, j);
  } else if (beta < mod.m) {  // y* entry; the unit is (y_beta)*, so y_beta = E_ji
    part.role = LinkingBasisPart::Role::module_adjoint;
    part.module_basis = beta * mod.algebra.linear_dim() + mod.algebra.unit_flat(u.block, j, i);
  } else {
    part.role = LinkingBasisPart::Role::algebra;
    part.algebra_unit = mod.algebra.unit_flat(u.block, i, j);
  }
  return part;
}

// M_n(A) with the same block structure convention as compacts(): block k of
// the amplified algebra has size n*n_k, index (p, i) -> p*n_k + i.
inline BlockAlgebra amplify_algebra(const BlockAlgebra& a, Index n) {
  BlockAlgebra r;
  for (Index nk : a.block_sizes) r.block_sizes.push_back(n * nk);
  return r;
}

inline AlgebraElement amplify_element(const BlockAlgebra& a, Index n,
                                      const std::vector<std::vector<AlgebraElement>>& cells) {
  if (static_cast<Index>(cells.size()) != n)
    throw std::invalid_argument("amplify_element: ragged input");
  AlgebraElement r = AlgebraElement::zero(amplify_algebra(a, n));
  for (Index p = 0; p < n; ++p) {
    if (static_cast<Index>(cells[p].size()) != n)
      throw std::invalid_argument("amplify_element: ragged input");
    for (Index q = 0; q < n; ++q) {
      if (!(cells[p][q].algebra == a))
        throw std::invalid_argument("amplify_element: algebra mismatch");
      for (Index k = 0; k < a.num_blocks(); ++k) {
        const Index nk = a.block_sizes[k];
        r.blocks[k].block(p * nk, q * nk, nk, nk) = cells[p][q].blocks[k];
      }
    }
  }
  return r;
}

// M_n(E) as a module over M_n(A): an n x n array of E-elements becomes the
// m-tuple of its coordinatewise n x n A-matrices.
inline ModuleElement amplify_module(const std::vector<std::vector<ModuleElement>>& cells) {
  if (cells.empty()) throw std::invalid_argument("amplify_module: empty input");
  const Index n = static_cast<Index>(cells.size());
  const HilbertModule& mod = cells[0][0].module;
  HilbertModule amp{amplify_algebra(mod.algebra, n), mod.m};
  ModuleElement r = ModuleElement::zero(amp);
  for (Index c = 0; c < mod.m; ++c) {
    std::vector<std::vector<AlgebraElement>> coord_cells(n);
    for (Index p = 0; p < n; ++p) {
      if (static_cast<Index>(cells[p].size()) != n)
        throw std::invalid_argument("amplify_module: ragged input");
      for (Index q = 0; q < n; ++q) {
        if (!(cells[p][q].module == mod))
          throw std::invalid_argument("amplify_module: module mismatch");
        coord_cells[p].push_back(cells[p][q].coords[c]);
      }
    }
    r.coords[c] = amplify_element(mod.algebra, n, coord_cells);
  }
  return r;
}

}  // namespace cstarmod
