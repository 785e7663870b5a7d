// This code is licensed under the Apache License, Version 2.0. You may
// obtain a copy of this license at http://www.apache.org/licenses/LICENSE-2.0.

#include "optomo/tester.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace optomo {

bool ChoiOp::is_quantum_operation(double tol) const {
  const Mat marg = ptrace_leg1(m, d_out, d_in);  // Tr_out
  Eigen::SelfAdjointEigenSolver<Mat> es(
      Mat::Identity(d_in, d_in) - 0.5 * (marg + marg.adjoint()));
  return is_psd(m, tol) && es.eigenvalues().minCoeff() >= -tol;
}

bool ChoiOp::is_channel(double tol) const {
  const Mat marg = ptrace_leg1(m, d_out, d_in);
  return is_psd(m, tol) &&
         (marg - Mat::Identity(d_in, d_in)).cwiseAbs().maxCoeff() <= tol;
}

bool ChoiOp::is_unital_channel(double tol) const {
  const Mat marg = ptrace_leg2(m, d_out, d_in);
  return is_channel(tol) &&
         (marg - Mat::Identity(d_out, d_out)).cwiseAbs().maxCoeff() <= tol;
}

void ChoiOp::validate(double tol) const {
  if (d_out < 1 || d_in < 1)
    throw std::invalid_argument("ChoiOp: dimensions must be positive");
  if (m.rows() != static_cast<Eigen::Index>(d_out) * d_in || m.rows() != m.cols())
    throw std::invalid_argument("ChoiOp: matrix shape mismatch");
  if (!is_psd(m, tol)) throw std::invalid_argument("ChoiOp: matrix is not PSD");
}

void SeedSet::validate(double tol) const {
  if (alphas.size() != psis.size() || alphas.empty())
    throw std::invalid_argument("SeedSet: empty or mismatched seed lists");
  double total = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i] <= 0.0)
      throw std::invalid_argument("SeedSet: weights must be positive");
    if (psis[i].rows() != d_out || psis[i].cols() != d_in)
      throw std::invalid_argument("SeedSet: seed shape mismatch");
    const double nrm = std::real(hs_inner(psis[i], psis[i]));
    if (std::abs(nrm - 1.0) > 1e-8)
      throw std::invalid_argument("SeedSet: seed is not unit-normalized");
    total += alphas[i];
  }
  if (std::abs(total - static_cast<double>(d_out)) > std::max(tol, 1e-10))
    throw std::invalid_argument("SeedSet: weights must sum to d_out");
}

Mat SeedSet::element(std::size_t i) const {
  const Vec v = vectorize(psis.at(i));
  return alphas.at(i) * (v * v.adjoint());
}

ChoiOp choi_from_kraus(const std::vector<Mat>& kraus, double tol) {
  if (kraus.empty()) throw std::invalid_argument("choi_from_kraus: empty set");
  const Eigen::Index d_out = kraus.front().rows();
  const Eigen::Index d_in = kraus.front().cols();
  Mat ksum = Mat::Zero(d_in, d_in);
  Mat r = Mat::Zero(d_out * d_in, d_out * d_in);
  for (const Mat& k : kraus) {
    if (k.rows() != d_out || k.cols() != d_in)
      throw std::invalid_argument("choi_from_kraus: Kraus shape mismatch");
    const Vec v = vectorize(k);
    r += v * v.adjoint();
    ksum += k.adjoint() * k;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat::Identity(d_in, d_in) - ksum);
  if (es.eigenvalues().minCoeff() < -tol)
    throw std::invalid_argument(
        "choi_from_kraus: map is trace increasing (sum K^dag K > I)");
  return ChoiOp{static_cast<int>(d_out), static_cast<int>(d_in), std::move(r)};
}

Mat apply_choi(const ChoiOp& r, const Mat& rho) {
  if (rho.rows() != r.d_in || rho.cols() != r.d_in)
    throw std::invalid_argument("apply_choi: state dimension mismatch");
  const Mat w = kron(Mat::Identity(r.d_out, r.d_out), rho.transpose()) * r.m;
  return ptrace_leg2(w, r.d_out, r.d_in);
}

Mat validate_tester(const Tester& t, double tol) {
  if (t.elements.empty())
    throw std::invalid_argument("validate_tester: empty tester");
  const Eigen::Index dim = static_cast<Eigen::Index>(t.d_out) * t.d_in;
  Mat sum = Mat::Zero(dim, dim);
  for (const Mat& e : t.elements) {
    if (e.rows() != dim || e.cols() != dim)
      throw std::invalid_argument("validate_tester: element shape mismatch");
    if (!is_psd(e, tol))
      throw std::invalid_argument("validate_tester: element is not PSD");
    sum += e;
  }
  const Mat sigma = ptrace_leg1(sum, t.d_out, t.d_in) / t.d_out;
  const Mat residual = sum - kron(Mat::Identity(t.d_out, t.d_out), sigma);
  if (residual.cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument(
        "validate_tester: element sum is not of the form I (x) sigma");
  if (std::abs(sigma.trace().real() - 1.0) > std::max(tol, 1e-12) ||
      std::abs(sigma.trace().imag()) > 1e-12)
    throw std::invalid_argument("validate_tester: Tr[sigma] != 1");
  if (!is_psd(sigma, tol))
    throw std::invalid_argument("validate_tester: sigma is not PSD");
  if (t.sigma.size() > 0 && (t.sigma - sigma).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument(
        "validate_tester: stored sigma disagrees with the marginal");
  return sigma;
}

std::vector<double> tester_probabilities(const ChoiOp& r, const Tester& t) {
  const Eigen::Index dim = static_cast<Eigen::Index>(t.d_out) * t.d_in;
  if (r.m.rows() != dim || r.d_out != t.d_out || r.d_in != t.d_in)
    throw std::invalid_argument("tester_probabilities: dimension mismatch");
  std::vector<double> p(t.elements.size());
  double total = 0.0;
  for (std::size_t i = 0; i < t.elements.size(); ++i) {
    p[i] = (r.m * t.elements[i]).trace().real();
    total += p[i];
  }
  if (r.is_channel() && std::abs(total - 1.0) > 1e-10)
    throw incomplete_error(
        "tester_probabilities: probabilities of a channel do not sum to 1");
  return p;
}

Realization tester_to_realization(const Tester& t, bool strict,
                                  double rank_tol) {
  const Mat sigma = validate_tester(t);
  Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
  const double lmax = es.eigenvalues().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > rank_tol * lmax) keep.push_back(i);
  const int r = static_cast<int>(keep.size());
  if (strict && r < t.d_in)
    throw std::invalid_argument(
        "tester_to_realization: sigma is singular (strict mode)");

  Mat u(t.d_in, r);
  Eigen::VectorXd lam(r);
  for (int j = 0; j < r; ++j) {
    u.col(j) = es.eigenvectors().col(keep[j]);
    lam(j) = es.eigenvalues()(keep[j]);
  }

  // nu = |M>><<M| with M M^dag = sigma^T, so the tester reconstructed from
  // (nu, {P_i}) is exactly the input one under the row-major vectorization.
  const Mat m_in = u.conjugate() * lam.cwiseSqrt().asDiagonal();      // d_in x r
  const Mat g = lam.cwiseSqrt().cwiseInverse().asDiagonal() * u.adjoint();  // r x d_in

  Realization real;
  real.d_out = t.d_out;
  real.d_in = t.d_in;
  real.d_anc = r;
  const Vec vm = vectorize(m_in);
  real.nu = vm * vm.adjoint();
  const Mat lift = kron(Mat::Identity(t.d_out, t.d_out), g);
  real.povm.reserve(t.elements.size());
  for (const Mat& e : t.elements) real.povm.push_back(lift * e * lift.adjoint());
  return real;
}

Tester realization_to_tester(const Realization& r, double tol) {
  const Eigen::Index din = r.d_in, dout = r.d_out, da = r.d_anc;
  if (r.nu.rows() != din * da || r.nu.cols() != din * da)
    throw std::invalid_argument("realization_to_tester: nu shape mismatch");
  if (!is_psd(r.nu, tol) || std::abs(r.nu.trace().real() - 1.0) > tol)
    throw std::invalid_argument("realization_to_tester: nu is not a state");
  Mat psum = Mat::Zero(dout * da, dout * da);
  for (const Mat& p : r.povm) {
    if (p.rows() != dout * da || p.cols() != dout * da)
      throw std::invalid_argument("realization_to_tester: POVM shape mismatch");
    if (!is_psd(p, tol))
      throw std::invalid_argument("realization_to_tester: effect is not PSD");
    psum += p;
  }
  if ((psum - Mat::Identity(dout * da, dout * da)).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("realization_to_tester: POVM does not sum to I");

  Tester t;
  t.d_out = r.d_out;
  t.d_in = r.d_in;
  t.elements.reserve(r.povm.size());
  // Pi[(m'n'),(mn)] = sum_{a a'} nu[(n a),(n' a')] P[(m' a'),(m a)]
  for (const Mat& p : r.povm) {
    Mat pi(dout * din, dout * din);
    for (Eigen::Index mp = 0; mp < dout; ++mp)
      for (Eigen::Index np = 0; np < din; ++np)
        for (Eigen::Index m = 0; m < dout; ++m)
          for (Eigen::Index n = 0; n < din; ++n) {
            Cplx sum(0.0, 0.0);
            for (Eigen::Index a = 0; a < da; ++a)
              for (Eigen::Index ap = 0; ap < da; ++ap)
                sum += r.nu(n * da + a, np * da + ap) *
                       p(mp * da + ap, m * da + a);
            pi(mp * din + np, m * din + n) = sum;
          }
    t.elements.push_back(std::move(pi));
  }
  t.sigma = transpose_theta(ptrace_leg2(r.nu, din, da));
  validate_tester(t, std::max(tol, 1e-9));
  return t;
}

Mat covariant_element(const SeedSet& seeds, std::size_t i, const Mat& g,
                      const Mat& h) {
  if (!is_unitary(g, 1e-10) || !is_unitary(h, 1e-10))
    throw std::invalid_argument("covariant_element: g and h must be unitary");
  const Mat w = kron(g, h);
  return w * seeds.element(i) * w.adjoint();
}

Tester tester_from_seeds(const SeedSet& seeds) {
  seeds.validate();
  Tester t;
  t.d_out = seeds.d_out;
  t.d_in = seeds.d_in;
  for (std::size_t i = 0; i < seeds.size(); ++i)
    t.elements.push_back(seeds.element(i));
  const Eigen::Index dim = static_cast<Eigen::Index>(t.d_out) * t.d_in;
  Mat sum = Mat::Zero(dim, dim);
  for (const Mat& e : t.elements) sum += e;
  t.sigma = ptrace_leg1(sum, t.d_out, t.d_in) / t.d_out;
  return t;
}

}  // namespace optomo
