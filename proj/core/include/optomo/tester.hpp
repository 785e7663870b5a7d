// This code is licensed under the Apache License, Version 2.0. You may
// obtain a copy of this license at http://www.apache.org/licenses/LICENSE-2.0.

#pragma once

#include "optomo/opalg.hpp"

#include <vector>

namespace optomo {

// Global leg conventions, tested by the catalogued identity-channel example:
//   Choi operator           : (out, in), output leg first
//   realization input state : (in, ancilla)
//   realization POVM        : (out, ancilla)
// The ancilla dimension equals rank(sigma) (= d_in for full-rank sigma).

// Choi operator of a quantum operation T: R = (T (x) Id)(|I>><<I|).
struct ChoiOp {
  int d_out = 0;
  int d_in = 0;
  Mat m;

  bool is_quantum_operation(double tol = 1e-10) const;  // Tr_out[R] <= I
  bool is_channel(double tol = 1e-10) const;            // Tr_out[R] == I
  bool is_unital_channel(double tol = 1e-10) const;     // and Tr_in[R] == I
  void validate(double tol = 1e-10) const;              // PSD + shape
};

// Process measurement: PSD elements on out (x) in with sum_i Pi_i = I (x) sigma.
struct Tester {
  int d_out = 0;
  int d_in = 0;
  std::vector<Mat> elements;
  Mat sigma;
};

// Rank-one generators Pi_i = alpha_i |Psi_i>><<Psi_i| of a covariant family;
// the Psi_i are d_out x d_in with unit Hilbert-Schmidt norm and
// sum_i alpha_i = d_out (the trace of I (x) sigma).
struct SeedSet {
  int d_out = 0;
  int d_in = 0;
  std::vector<double> alphas;
  std::vector<Mat> psis;

  void validate(double tol = 1e-10) const;
  Mat element(std::size_t i) const;  // alpha_i |Psi_i>><<Psi_i|
  std::size_t size() const { return alphas.size(); }
};

// Physical (input state, POVM) pair reproducing a tester's statistics.
struct Realization {
  int d_out = 0;
  int d_in = 0;
  int d_anc = 0;
  Mat nu;                  // state on (in, ancilla)
  std::vector<Mat> povm;   // effects on (out, ancilla)
};

ChoiOp choi_from_kraus(const std::vector<Mat>& kraus, double tol = 1e-10);

// T(rho) = Tr_in[(I_out (x) rho^T) R].
Mat apply_choi(const ChoiOp& r, const Mat& rho);

// Checks sum_i Pi_i = I (x) sigma (and that sigma is a state); returns sigma.
Mat validate_tester(const Tester& t, double tol = 1e-10);

// Generalized Born rule p_i = Tr[R Pi_i].
std::vector<double> tester_probabilities(const ChoiOp& r, const Tester& t);

// Realization with nu = |sqrt(sigma^T)>><<sqrt(sigma^T)| restricted to
// supp(sigma); with strict = true a singular sigma is an error instead.
Realization tester_to_realization(const Tester& t, bool strict = false,
                                  double rank_tol = 1e-12);

Tester realization_to_tester(const Realization& r, double tol = 1e-10);

// (U_g (x) V_h) Pi_i (U_g^dag (x) V_h^dag) for a seed set element.
Mat covariant_element(const SeedSet& seeds, std::size_t i, const Mat& g,
                      const Mat& h);

Tester tester_from_seeds(const SeedSet& seeds);  // seeds taken as-is (discrete)

// Thrown when a requested figure or estimator needs components the design
// cannot see (informational incompleteness), and for kindred numerical
// failures that are not input-validation errors.
struct incomplete_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace optomo
