// This code is licensed under the Apache License, Version 2.0. You may
// obtain a copy of this license at http://www.apache.org/licenses/LICENSE-2.0.

#include "optomo/frames.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace optomo {

namespace {

constexpr double kCompletenessRatio = 1e-8;  // complete on V iff a >= 1e-8 b

void check_subspace(const Mat& q, Eigen::Index dim) {
  if (q.rows() != dim || q.cols() != dim)
    throw std::invalid_argument("subspace projector has wrong dimension");
  if (!is_hermitian(q, 1e-10) ||
      (q * q - q).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("subspace projector is not idempotent Hermitian");
}

// Orthonormal basis of range(Q) as matrix columns.
Mat range_basis(const Mat& q) {
  Eigen::SelfAdjointEigenSolver<Mat> es(q);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 0.5) keep.push_back(i);
  Mat b(q.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    b.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]);
  return b;
}

DualSet dual_from_kernel(const OperatorFrame& frame, const Mat& subspace,
                         const Mat& kernel, const std::vector<double>* inv_w) {
  const Mat q = subspace;
  const Mat qkq = q * kernel * q;
  const Mat b = range_basis(q);
  const Mat compressed = b.adjoint() * qkq * b;
  Eigen::SelfAdjointEigenSolver<Mat> es(compressed);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  if (es.eigenvalues().minCoeff() < kCompletenessRatio * top)
    throw std::invalid_argument(
        "frame is not informationally complete on the requested subspace");
  const Mat pinv = b * compressed.inverse() * b.adjoint();

  DualSet dual;
  dual.subspace = q;
  dual.elements.reserve(frame.elements.size());
  for (std::size_t i = 0; i < frame.elements.size(); ++i) {
    Vec d = pinv * vectorize(frame.elements[i]);
    if (inv_w) d *= (*inv_w)[i];
    dual.elements.push_back(
        unvectorize(d, frame.op_rows(), frame.op_cols()));
  }
  return dual;
}

}  // namespace

void OperatorFrame::validate(double tol) const {
  if (elements.empty())
    throw std::invalid_argument("OperatorFrame: empty element list");
  for (const Mat& e : elements)
    if (e.rows() != op_rows() || e.cols() != op_cols())
      throw std::invalid_argument("OperatorFrame: mixed element shapes");
  if (weights) {
    if (weights->size() != elements.size())
      throw std::invalid_argument("OperatorFrame: weight count mismatch");
    double total = 0.0;
    for (double w : *weights) {
      if (w < 0.0) throw std::invalid_argument("OperatorFrame: negative weight");
      total += w;
    }
    if (std::abs(total - 1.0) > std::max(tol, 1e-12))
      throw std::invalid_argument("OperatorFrame: weights must sum to 1");
  }
}

void WeightedObservables::validate() const {
  if (items.empty())
    throw std::invalid_argument("WeightedObservables: empty list");
  for (const auto& [q, a] : items)
    if (q <= 0.0)
      throw std::invalid_argument("WeightedObservables: weights must be > 0");
}

Mat WeightedObservables::gram() const {
  validate();
  const Eigen::Index dim = items.front().second.size();
  Mat g = Mat::Zero(dim, dim);
  for (const auto& [q, a] : items) {
    const Vec v = vectorize(a);
    g += q * (v * v.adjoint());
  }
  return g;
}

void StateEnsemble::validate(double tol) const {
  if (items.empty()) throw std::invalid_argument("StateEnsemble: empty list");
  double total = 0.0;
  for (const auto& [p, rho] : items) {
    if (p < 0.0) throw std::invalid_argument("StateEnsemble: negative weight");
    total += p;
  }
  if (std::abs(total - 1.0) > std::max(tol, 1e-12))
    throw std::invalid_argument("StateEnsemble: weights must sum to 1");
}

Mat StateEnsemble::average() const {
  validate();
  Mat avg = Mat::Zero(items.front().second.rows(), items.front().second.cols());
  for (const auto& [p, rho] : items) avg += p * rho;
  return avg;
}

Mat frame_operator(const OperatorFrame& frame) {
  frame.validate();
  Mat f = Mat::Zero(frame.vec_dim(), frame.vec_dim());
  for (const Mat& e : frame.elements) {
    const Vec v = vectorize(e);
    f += v * v.adjoint();
  }
  return f;
}

std::pair<double, double> frame_bounds(const OperatorFrame& frame,
                                       const Mat& subspace) {
  check_subspace(subspace, frame.vec_dim());
  const Mat f = frame_operator(frame);
  const Mat b = range_basis(subspace);
  Eigen::SelfAdjointEigenSolver<Mat> es(b.adjoint() * f * b);
  double a = es.eigenvalues().minCoeff();
  if (a < 0.0 && a > -1e-12) a = 0.0;
  return {a, es.eigenvalues().maxCoeff()};
}

std::pair<double, double> frame_bounds(const OperatorFrame& frame) {
  return frame_bounds(frame, Mat::Identity(frame.vec_dim(), frame.vec_dim()));
}

DualSet canonical_dual(const OperatorFrame& frame, const Mat& subspace) {
  frame.validate();
  check_subspace(subspace, frame.vec_dim());
  return dual_from_kernel(frame, subspace, frame_operator(frame), nullptr);
}

DualSet canonical_dual(const OperatorFrame& frame) {
  return canonical_dual(frame, Mat::Identity(frame.vec_dim(), frame.vec_dim()));
}

Mat weighted_frame_operator(const OperatorFrame& frame) {
  frame.validate();
  if (!frame.weights)
    throw std::invalid_argument("weighted_frame_operator: frame has no weights");
  Mat x = Mat::Zero(frame.vec_dim(), frame.vec_dim());
  for (std::size_t i = 0; i < frame.elements.size(); ++i) {
    const double p = (*frame.weights)[i];
    if (p <= 0.0) {
      if (frame.elements[i].cwiseAbs().maxCoeff() > 1e-14)
        throw std::invalid_argument(
            "weighted_frame_operator: zero-probability element with nonzero "
            "operator");
      continue;
    }
    const Vec v = vectorize(frame.elements[i]);
    x += (v * v.adjoint()) / p;
  }
  return x;
}

DualSet optimal_dual(const OperatorFrame& frame, const Mat& subspace) {
  frame.validate();
  check_subspace(subspace, frame.vec_dim());
  if (!frame.weights)
    throw std::invalid_argument("optimal_dual: frame has no weights");
  std::vector<double> inv_w(frame.elements.size());
  for (std::size_t i = 0; i < inv_w.size(); ++i) {
    const double p = (*frame.weights)[i];
    if (p <= 0.0) {
      if (frame.elements[i].cwiseAbs().maxCoeff() > 1e-14)
        throw std::invalid_argument(
            "optimal_dual: zero-probability element with nonzero operator");
      inv_w[i] = 0.0;
    } else {
      inv_w[i] = 1.0 / p;
    }
  }
  return dual_from_kernel(frame, subspace, weighted_frame_operator(frame),
                          &inv_w);
}

DualSet optimal_dual(const OperatorFrame& frame) {
  return optimal_dual(frame, Mat::Identity(frame.vec_dim(), frame.vec_dim()));
}

double duality_residual(const OperatorFrame& frame, const DualSet& dual) {
  if (dual.elements.size() != frame.elements.size())
    throw std::invalid_argument("duality_residual: dual/frame length mismatch");
  Mat s = Mat::Zero(frame.vec_dim(), frame.vec_dim());
  for (std::size_t i = 0; i < frame.elements.size(); ++i)
    s += vectorize(frame.elements[i]) * vectorize(dual.elements[i]).adjoint();
  return (dual.subspace * s - dual.subspace).cwiseAbs().maxCoeff();
}

double variance(const OperatorFrame& frame, const DualSet& dual, const Mat& a,
                const Mat& rho) {
  if (dual.elements.size() != frame.elements.size())
    throw std::invalid_argument("variance: dual/frame length mismatch");
  double first = 0.0;
  for (std::size_t i = 0; i < frame.elements.size(); ++i) {
    const double p = (rho * frame.elements[i]).trace().real();
    first += std::norm(hs_inner(dual.elements[i], a)) * p;
  }
  return first - std::norm((rho * a).trace());
}

double variance_ensemble(const OperatorFrame& frame, const DualSet& dual,
                         const Mat& a, const StateEnsemble& s) {
  const Mat rho_s = s.average();
  double first = 0.0;
  for (std::size_t i = 0; i < frame.elements.size(); ++i) {
    const double p = (rho_s * frame.elements[i]).trace().real();
    first += std::norm(hs_inner(dual.elements[i], a)) * p;
  }
  double second = 0.0;
  for (const auto& [p, rho] : s.items) second += p * std::norm((rho * a).trace());
  return first - second;
}

double variance_weighted(const OperatorFrame& frame, const DualSet& dual,
                         const WeightedObservables& g, const StateEnsemble& s) {
  const Mat gram = g.gram();
  const Mat rho_s = s.average();
  double first = 0.0;
  for (std::size_t i = 0; i < frame.elements.size(); ++i) {
    const double p = (rho_s * frame.elements[i]).trace().real();
    const Vec d = vectorize(dual.elements[i]);
    first += (d.adjoint() * gram * d).value().real() * p;
  }
  double second = 0.0;
  for (const auto& [pk, rho] : s.items)
    for (const auto& [qn, an] : g.items)
      second += pk * qn * std::norm((rho * an).trace());
  return first - second;
}

double eta_term(const OperatorFrame& frame, const DualSet& dual,
                const WeightedObservables& g, const Mat& rho_s) {
  const Mat q = dual.subspace;
  const Mat gram = q * g.gram() * q;
  double eta = 0.0;
  for (std::size_t i = 0; i < frame.elements.size(); ++i) {
    const double p = (rho_s * frame.elements[i]).trace().real();
    const Vec d = vectorize(dual.elements[i]);
    eta += (d.adjoint() * gram * d).value().real() * p;
  }
  return eta;
}

}  // namespace optomo
