// This code is licensed under the Apache License, Version 2.0. You may
// obtain a copy of this license at http://www.apache.org/licenses/LICENSE-2.0.

#pragma once

#include "optomo/opalg.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace optomo {

// A (possibly overcomplete) set of operators used to expand expectation
// values, with optional outcome probabilities attached.
struct OperatorFrame {
  std::vector<Mat> elements;
  std::optional<std::vector<double>> weights;  // p_i >= 0, sum = 1

  void validate(double tol = 1e-12) const;
  Eigen::Index op_rows() const { return elements.front().rows(); }
  Eigen::Index op_cols() const { return elements.front().cols(); }
  Eigen::Index vec_dim() const { return op_rows() * op_cols(); }
};

// Dual elements D_i together with the projector Q_V of the subspace the
// duality holds on. Duals are stored explicitly so estimator evaluation is a
// plain inner product.
struct DualSet {
  std::vector<Mat> elements;
  Mat subspace;  // Q_V on the vectorized operator space
};

// Weighted observables {(q_n, A_n)}; G = sum_n q_n |A_n>><<A_n|.
struct WeightedObservables {
  std::vector<std::pair<double, Mat>> items;

  void validate() const;
  Mat gram() const;  // G on the vectorized space
};

// Prior ensemble {(p_k, rho_k)} of states (or Choi operators for processes).
struct StateEnsemble {
  std::vector<std::pair<double, Mat>> items;

  void validate(double tol = 1e-12) const;
  Mat average() const;  // sum_k p_k rho_k
};

// F = sum_i |P_i>><<P_i|.
Mat frame_operator(const OperatorFrame& frame);

// Extreme eigenvalues (a, b) of Q_V F Q_V restricted to range(Q_V);
// a > 0 iff the frame is informationally complete for V.
std::pair<double, double> frame_bounds(const OperatorFrame& frame,
                                       const Mat& subspace);
std::pair<double, double> frame_bounds(const OperatorFrame& frame);

// D_i = unvec((Q F Q)^pinv |P_i>>); errors if the frame is incomplete on V
// (a < 1e-8 b).
DualSet canonical_dual(const OperatorFrame& frame, const Mat& subspace);
DualSet canonical_dual(const OperatorFrame& frame);

// Variance-optimal dual for a frame with outcome probabilities p_i:
// D_i = unvec((Q X Q)^pinv |P_i>> / p_i) with X = sum_i |P_i>><<P_i| / p_i.
// Minimizes sum_i p_i <<D_i| Q G Q |D_i>> over all duals on V for every PSD
// G at once; with G = I the minimum is Tr[(Q X Q)^pinv].
DualSet optimal_dual(const OperatorFrame& frame, const Mat& subspace);
DualSet optimal_dual(const OperatorFrame& frame);

// X = sum_i |P_i>><<P_i| / p_i for a weighted frame.
Mat weighted_frame_operator(const OperatorFrame& frame);

// max_i | sum_i Q |P_i>><<D_i| - Q |, the duality residual on V.
double duality_residual(const OperatorFrame& frame, const DualSet& dual);

// delta(A) = sum_i |<<D_i|A>>|^2 Tr[rho P_i] - |Tr[rho A]|^2. For processes
// pass the Choi operator as rho; the weights Tr[rho P_i] are then the tester
// probabilities.
double variance(const OperatorFrame& frame, const DualSet& dual, const Mat& a,
                const Mat& rho);

// delta_S(A): first term at the ensemble average, second term averaged.
double variance_ensemble(const OperatorFrame& frame, const DualSet& dual,
                         const Mat& a, const StateEnsemble& s);

// delta_{S,G} = sum_i <<D_i|G|D_i>> Tr[rho_S P_i]
//               - sum_{k,n} p_k q_n |Tr[rho_k A_n]|^2.
double variance_weighted(const OperatorFrame& frame, const DualSet& dual,
                         const WeightedObservables& g, const StateEnsemble& s);

// First term only, with G compressed to V:
// eta = sum_i <<D_i| Q G Q |D_i>> Tr[rho_S P_i].
double eta_term(const OperatorFrame& frame, const DualSet& dual,
                const WeightedObservables& g, const Mat& rho_s);

}  // namespace optomo
