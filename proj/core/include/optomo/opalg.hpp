// This code is licensed under the Apache License, Version 2.0. You may
// obtain a copy of this license at http://www.apache.org/licenses/LICENSE-2.0.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

namespace optomo {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Vectorization convention, fixed once for the whole library:
//   |A>> = sum_{m,n} A(m,n) |m>|n>   (row-major, index = m*cols + n)
// Consequences used everywhere:
//   <<A|B>>            = Tr[A^dag B]
//   (X (x) Y)|A>>      = |X A Y^T>>
//   Tr_2 |A>><<B|      = A B^dag
//   Tr_1 |A>><<B|      = (B^dag A)^T
Vec vectorize(const Mat& a);
Mat unvectorize(const Vec& v, Eigen::Index rows, Eigen::Index cols);

// Hilbert-Schmidt inner product Tr[A^dag B].
Cplx hs_inner(const Mat& a, const Mat& b);

Mat kron(const Mat& a, const Mat& b);

// Entrywise transposition w.r.t. the fixed computational basis (no conjugation).
Mat transpose_theta(const Mat& a);

// Reduced operator after tracing out the legs in `traced`. `dims` are the
// per-leg dimensions (product must match the matrix size); the kept legs stay
// in their original order.
Mat partial_trace(const Mat& m, const std::vector<Eigen::Index>& dims,
                  const std::vector<int>& traced);

// Bipartite shorthands, leg 1 has dimension d1 and leg 2 dimension d2.
Mat ptrace_leg1(const Mat& m, Eigen::Index d1, Eigen::Index d2);
Mat ptrace_leg2(const Mat& m, Eigen::Index d1, Eigen::Index d2);

// Weyl-Heisenberg unitary shift^m * clock^n on dimension d. The d^2 of them
// are trace-orthogonal: Tr[U_mn^dag U_pq] = d delta_mp delta_nq.
Mat weyl_unitary(int m, int n, int d);

// Maximally entangled projector |U_mn>><<U_mn| / d; the d^2 of them form the
// Bell measurement on C^d (x) C^d.
Mat bell_projector(int m, int n, int d);

bool is_hermitian(const Mat& a, double tol = 1e-10);
bool is_psd(const Mat& a, double tol = 1e-10);
bool is_unitary(const Mat& a, double tol = 1e-10);

// PSD square root via Hermitian eigendecomposition; eigenvalues in [-tol, 0)
// are clipped to zero, anything below -tol is an error.
Mat psd_sqrt(const Mat& a, double tol = 1e-10);

// Moore-Penrose pseudoinverse of a Hermitian matrix. Eigenvalues with
// |lambda| < rel_tol * max|lambda| are treated as zero.
Mat pseudo_inverse(const Mat& a, double rel_tol = 1e-12);

// Deterministic counter-style generator: a fixed (seed, draw sequence)
// reproduces outputs bit-for-bit, and substream(i) yields an independent
// stream derived from (seed, i) so parallel consumers never share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t u64();
  double uniform01();          // in [0, 1)
  double normal();             // standard normal, Box-Muller
  Cplx complex_normal();       // E|z|^2 = 1

  Rng substream(std::uint64_t index) const;
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

// Haar-distributed d x d unitary: QR of a complex Ginibre matrix with the
// positive-diagonal-R convention (Gram-Schmidt), which makes Q exactly Haar.
Mat haar_unitary(int d, Rng& rng);

}  // namespace optomo
