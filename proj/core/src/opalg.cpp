// This code is licensed under the Apache License, Version 2.0. You may
// obtain a copy of this license at http://www.apache.org/licenses/LICENSE-2.0.

#include "optomo/opalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace optomo {

Vec vectorize(const Mat& a) {
  Vec v(a.size());
  Eigen::Index k = 0;
  for (Eigen::Index m = 0; m < a.rows(); ++m)
    for (Eigen::Index n = 0; n < a.cols(); ++n) v(k++) = a(m, n);
  return v;
}

Mat unvectorize(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols)
    throw std::invalid_argument("unvectorize: size mismatch");
  Mat a(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index m = 0; m < rows; ++m)
    for (Eigen::Index n = 0; n < cols; ++n) a(m, n) = v(k++);
  return a;
}

Cplx hs_inner(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("hs_inner: dimension mismatch");
  return (a.adjoint() * b).trace();
}

Mat kron(const Mat& a, const Mat& b) {
  Mat k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

Mat transpose_theta(const Mat& a) { return a.transpose(); }

Mat partial_trace(const Mat& m, const std::vector<Eigen::Index>& dims,
                  const std::vector<int>& traced) {
  Eigen::Index total = 1;
  for (Eigen::Index d : dims) {
    if (d <= 0) throw std::invalid_argument("partial_trace: nonpositive dim");
    total *= d;
  }
  if (m.rows() != total || m.cols() != total)
    throw std::invalid_argument("partial_trace: dims product mismatch");

  const int nlegs = static_cast<int>(dims.size());
  std::vector<bool> is_traced(nlegs, false);
  for (int t : traced) {
    if (t < 0 || t >= nlegs)
      throw std::invalid_argument("partial_trace: invalid leg index");
    is_traced[t] = true;
  }

  std::vector<int> kept;
  Eigen::Index kept_dim = 1, traced_dim = 1;
  for (int l = 0; l < nlegs; ++l) {
    if (is_traced[l]) {
      traced_dim *= dims[l];
    } else {
      kept.push_back(l);
      kept_dim *= dims[l];
    }
  }

  // Strides of each leg in the flat row/column index.
  std::vector<Eigen::Index> stride(nlegs, 1);
  for (int l = nlegs - 2; l >= 0; --l) stride[l] = stride[l + 1] * dims[l + 1];

  std::vector<int> traced_legs;
  for (int l = 0; l < nlegs; ++l)
    if (is_traced[l]) traced_legs.push_back(l);

  Mat out = Mat::Zero(kept_dim, kept_dim);
  std::vector<Eigen::Index> kidx(kept.size(), 0), kjdx(kept.size(), 0),
      tidx(traced_legs.size(), 0);
  for (Eigen::Index ki = 0; ki < kept_dim; ++ki) {
    // decode ki into per-leg indices of the kept legs
    {
      Eigen::Index rem = ki;
      for (int p = static_cast<int>(kept.size()) - 1; p >= 0; --p) {
        kidx[p] = rem % dims[kept[p]];
        rem /= dims[kept[p]];
      }
    }
    for (Eigen::Index kj = 0; kj < kept_dim; ++kj) {
      {
        Eigen::Index rem = kj;
        for (int p = static_cast<int>(kept.size()) - 1; p >= 0; --p) {
          kjdx[p] = rem % dims[kept[p]];
          rem /= dims[kept[p]];
        }
      }
      Cplx sum(0.0, 0.0);
      for (Eigen::Index t = 0; t < traced_dim; ++t) {
        {
          Eigen::Index rem = t;
          for (int p = static_cast<int>(traced_legs.size()) - 1; p >= 0; --p) {
            tidx[p] = rem % dims[traced_legs[p]];
            rem /= dims[traced_legs[p]];
          }
        }
        Eigen::Index row = 0, col = 0;
        for (std::size_t p = 0; p < kept.size(); ++p) {
          row += kidx[p] * stride[kept[p]];
          col += kjdx[p] * stride[kept[p]];
        }
        for (std::size_t p = 0; p < traced_legs.size(); ++p) {
          row += tidx[p] * stride[traced_legs[p]];
          col += tidx[p] * stride[traced_legs[p]];
        }
        sum += m(row, col);
      }
      out(ki, kj) = sum;
    }
  }
  return out;
}

Mat ptrace_leg1(const Mat& m, Eigen::Index d1, Eigen::Index d2) {
  return partial_trace(m, {d1, d2}, {0});
}

Mat ptrace_leg2(const Mat& m, Eigen::Index d1, Eigen::Index d2) {
  return partial_trace(m, {d1, d2}, {1});
}

Mat weyl_unitary(int m, int n, int d) {
  if (d < 1) throw std::invalid_argument("weyl_unitary: d must be >= 1");
  if (m < 0 || m >= d || n < 0 || n >= d)
    throw std::out_of_range("weyl_unitary: index out of range");
  Mat u = Mat::Zero(d, d);
  const double w = 2.0 * std::numbers::pi / static_cast<double>(d);
  for (int j = 0; j < d; ++j)
    u((j + m) % d, j) = std::polar(1.0, w * static_cast<double>(n) * j);
  return u;
}

Mat bell_projector(int m, int n, int d) {
  const Vec v = vectorize(weyl_unitary(m, n, d));
  return (v * v.adjoint()) / static_cast<double>(d);
}

bool is_hermitian(const Mat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_psd(const Mat& a, double tol) {
  if (!is_hermitian(a, tol)) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.adjoint()));
  if (es.info() != Eigen::Success) return false;
  return es.eigenvalues().minCoeff() >= -tol;
}

bool is_unitary(const Mat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  Mat r = a.adjoint() * a - Mat::Identity(a.rows(), a.cols());
  return r.cwiseAbs().maxCoeff() <= tol;
}

Mat psd_sqrt(const Mat& a, double tol) {
  if (!is_hermitian(a, tol))
    throw std::invalid_argument("psd_sqrt: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.adjoint()));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("psd_sqrt: eigensolver failed");
  Eigen::VectorXd lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) < -tol)
      throw std::invalid_argument("psd_sqrt: negative eigenvalue beyond tol");
    lam(i) = lam(i) > 0.0 ? std::sqrt(lam(i)) : 0.0;
  }
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

Mat pseudo_inverse(const Mat& a, double rel_tol) {
  if (!is_hermitian(a, 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff())))
    throw std::invalid_argument("pseudo_inverse: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.adjoint()));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("pseudo_inverse: eigensolver failed");
  Eigen::VectorXd lam = es.eigenvalues();
  const double cutoff = rel_tol * lam.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    inv(i) = std::abs(lam(i)) > cutoff ? 1.0 / lam(i) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
}

namespace {

// SplitMix64 step.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform01() {
  return static_cast<double>(u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  // Box-Muller, cosine branch only: two draws per normal keeps the stream a
  // pure function of the draw count.
  const double u1 = (static_cast<double>(u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(u64() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

Cplx Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return Cplx(re, im) / std::sqrt(2.0);
}

Rng Rng::substream(std::uint64_t index) const {
  return Rng(mix64(seed_ ^ mix64(index + 1)));
}

Mat haar_unitary(int d, Rng& rng) {
  if (d < 1) throw std::invalid_argument("haar_unitary: d must be >= 1");
  Mat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.complex_normal();

  // Modified Gram-Schmidt with a second orthogonalization pass; the implied
  // R has positive diagonal, which is the QR convention under which Q of a
  // Ginibre matrix is Haar.
  Mat q(d, d);
  for (int j = 0; j < d; ++j) {
    Vec v = g.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < j; ++i) v -= q.col(i).dot(v) * q.col(i);
    q.col(j) = v / v.norm();
  }
  return q;
}

}  // namespace optomo
