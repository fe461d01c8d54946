#pragma once

#include <cmath>
#include <cstdint>

#include "cstarmod/linalg.hpp"

namespace cstarmod {

// Splittable counter-based pseudorandom generator (splitmix64 finalizer over
// key + counter). Identical seeds give bit-identical streams on every
// platform; child streams are derived by split() and never overlap the
// parent's counter sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x9e3779b97f4a7c15ULL)) {}

  Rng split(std::uint64_t stream) const {
    return Rng(raw{}, mix(key_ ^ mix(stream + 0xbf58476d1ce4e5b9ULL)));
  }

  std::uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix(key_ ^ counter_);
  }

  // Uniform in [0, 1), 53 mantissa bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (two fresh uniforms per call).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Standard complex normal: E|z|^2 = 1.
  Complex cnormal() {
    const double s = 0.70710678118654752440084436210485;
    return {s * normal(), s * normal()};
  }

  // Uniform integer in [lo, hi] inclusive.
  Index uniform_index(Index lo, Index hi) {
    if (hi <= lo) return lo;
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<Index>(next_u64() % span);
  }

 private:
  struct raw {};
  Rng(raw, std::uint64_t key) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline CMatrix random_matrix(Rng& rng, Index rows, Index cols) {
  CMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.cnormal();
  return m;
}

inline CMatrix random_unitary(Rng& rng, Index n) {
  if (n == 0) return CMatrix(0, 0);
  Eigen::HouseholderQR<CMatrix> qr(random_matrix(rng, n, n));
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  // fix column phases so the factor is deterministic in exact arithmetic
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    Complex d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

inline CMatrix random_hermitian(Rng& rng, Index n) {
  CMatrix m = random_matrix(rng, n, n);
  return (m + m.adjoint()) / 2.0;
}

inline CMatrix random_psd(Rng& rng, Index n, Index rank) {
  CMatrix f = random_matrix(rng, rank, n);
  return f.adjoint() * f;
}

}  // namespace cstarmod
