// This code is licensed under the Apache License, Version 2.0. You may
// obtain a copy of this license at http://www.apache.org/licenses/LICENSE-2.0.

#pragma once

#include "optomo/opalg.hpp"
#include "optomo/tester.hpp"

#include <array>
#include <functional>
#include <string>
#include <utility>

namespace optomo {

enum class ProtocolClass { QuantumOperation, Channel, Unital, State, Povm };

std::string to_string(ProtocolClass cls);
ProtocolClass protocol_class_from_string(const std::string& s);

// (d_out, d_in) of the probed objects: (d, d) for process classes, (d, 1)
// for states, (1, d) for POVMs.
std::pair<int, int> dims_for_class(ProtocolClass cls, int d);

// Projectors of the commutant of U_g (x) V_h (x) U_g^* (x) V_h^* on the
// vectorized out (x) in operator space, legs ordered (out-row, in-row,
// out-col, in-col):
//   P1 = Omega_oo (x) Omega_ii          rank 1
//   P2 = (I - Omega)_oo (x) Omega_ii    rank d_out^2 - 1
//   P3 = Omega_oo (x) (I - Omega)_ii    rank d_in^2 - 1
//   P4 = (I - Omega)_oo (x) (I-Omega)_ii
// with Omega the maximally entangled projector across the row/column copies.
struct SchurBlocks {
  int d_out = 0;
  int d_in = 0;
  std::array<Mat, 4> p;

  std::array<Eigen::Index, 4> ranks() const;
};

SchurBlocks schur_projectors(int d_out, int d_in);

// Coefficients of the group average of X = sum_i d_in |Pi_i>><<Pi_i|/Tr[Pi_i]
// over the Schur blocks: avg(X) = P1 + A P2 + B P3 + C P4. The normalization
// fixes the P1 coefficient to 1 for every tester geometry.
struct SchurCoeffs {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

SchurCoeffs coeffs_abc(const SeedSet& seeds);
SchurCoeffs coeffs_abc(const Tester& t);
SchurCoeffs coeffs_abc(const std::vector<Mat>& elements, int d_out, int d_in);

// Dense assembly of P1 + a P2 + b P3 + c P4 (size (d_out d_in)^2 square).
Mat xtilde_dense(const SchurCoeffs& abc, int d_out, int d_in);
Mat xtilde(const SeedSet& seeds);

// Dense projector Q_V of a protocol class (sum of the Schur blocks it spans).
Mat class_projector(ProtocolClass cls, int d_out, int d_in);

// Which Schur blocks a class subspace is made of.
std::array<bool, 4> class_blocks(ProtocolClass cls);

// Figure of merit eta = Tr[avg(X)^pinv Q_V], by the closed block formula.
// Throws incomplete_error when a needed block coefficient vanishes.
double eta_spectral(const SchurCoeffs& abc, ProtocolClass cls, int d_out,
                    int d_in);
// Same figure by dense assembly + Moore-Penrose pseudoinverse + trace.
double eta_dense(const SchurCoeffs& abc, ProtocolClass cls, int d_out,
                 int d_in);

// Both routes, cross-checked to 1e-8 relative; returns the spectral value.
double eta_of(const SeedSet& seeds, ProtocolClass cls);
double eta_of(const Tester& t, ProtocolClass cls);

// Exact group average of an arbitrary kernel on the vectorized space.
Mat schur_average(const Mat& x, int d_out, int d_in);

// Closed-form optimum of the figure of merit for each class.
double eta_bound(ProtocolClass cls, int d);

// eta of the single-seed family as a function of the coefficient A
// (B = A, C = (1 - 2A)/(d^2 - 1)), restricted to the class subspace.
double eta_class_at(ProtocolClass cls, int d, double a);

// Seed matrix [ (1-beta)/d I + beta |e0><e0| ]^(1/2); unit HS norm.
Mat seed_psi(int d, double beta);

// A solved design: optimal coefficient, seed, and analytic figure of merit.
struct CovariantDesign {
  ProtocolClass cls = ProtocolClass::QuantumOperation;
  int d = 0;
  double a_coeff = 0.0;  // A* (and B* = A* for the square classes)
  double beta = 0.0;
  double purity = 0.0;   // Tr[(Psi Psi^dag)^2]
  double eta = 0.0;
  Mat psi;
};

// Closed-form optimal design for qo / channel / unital, cross-checked
// against a golden-section minimization of eta_class_at.
CovariantDesign optimize_class(ProtocolClass cls, int d);

// dim(in) = 1 (state) and dim(out) = 1 (povm) special cases: any pure seed
// is optimal with eta = d^3 + d^2 - d.
CovariantDesign state_povm_design(ProtocolClass kind, int d);

// Spectrum of a block-diagonal observable weighting G = g1 P1 + g2 P2 +
// g3 P3 + g4 P4.
struct WeightSpec {
  double g1 = 0.0, g2 = 0.0, g3 = 0.0, g4 = 0.0;

  void validate() const;  // nonnegative, at least one of g2..g4 positive
};

struct WeightedOptimum {
  double a = 0.0;
  double b = 0.0;
  double eta = 0.0;
};

// Minimizes g1 + (d^2-1)(g2/A + g3/B + (d^2-1) g4 / C) with
// C = (1 - A - B)/(d^2 - 1) over (A, B) in (0, 1/(d+1)]^2; zero-weight
// blocks are excluded via pseudo-inverse semantics and the corresponding
// coordinate is pushed to its objective-optimal boundary.
WeightedOptimum optimize_weighted(const WeightSpec& w, int d);

// Objective of optimize_weighted at a given point.
double weighted_eta_at(const WeightSpec& w, int d, double a, double b);

// 1-D golden-section minimizer on [lo, hi], interval tolerance tol.
double golden_section(const std::function<double(double)>& f, double lo,
                      double hi, double tol = 1e-12);

// Numeric recovery of the class optimum A* from the eta_class_at curve:
// golden-section bracketing refined by bisection on a central-difference
// derivative, accurate to ~1e-11 (plain golden section is comparison-limited
// near a flat minimum).
double minimize_class_figure(ProtocolClass cls, int d);

}  // namespace optomo
