// This code is licensed under the Apache License, Version 2.0. You may
// obtain a copy of this license at http://www.apache.org/licenses/LICENSE-2.0.

#pragma once

#include "optomo/covopt.hpp"
#include "optomo/opalg.hpp"
#include "optomo/tester.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace optomo {

// One run of the double-Bell measurement scheme: an ancilla pair prepared in
// |Psi>><<Psi|, fresh Haar unitaries on the two probed legs each shot, and a
// Bell measurement per branch (d^4 outcomes per shot).
struct SchemeSpec {
  int d = 0;
  Mat psi;  // d x d seed, unit Hilbert-Schmidt norm; empty = take the design's
  std::uint64_t shots = 0;
  std::uint64_t rng_seed = 0;
  std::vector<std::string> names;
  std::vector<Mat> observables;  // Hermitian, on out (x) in

  void validate() const;
};

struct ShotRecord {
  std::uint64_t index = 0;
  std::array<int, 4> outcome{};  // Bell outcomes (m, n) and (p, q)
  std::vector<double> values;    // estimator value per observable
};

struct ObservableStat {
  std::string name;
  double mean = 0.0;
  double se = 0.0;
  double truth = 0.0;
  double z = 0.0;
};

struct SimReport {
  std::uint64_t shots = 0;
  std::uint64_t rng_seed = 0;
  double eta_analytic = 0.0;  // class-restricted figure of the simulated seed
  double eta_hat = 0.0;       // mean of <<Delta_i|Delta_i>> over shots
  double eta_hat_se = 0.0;
  std::vector<ObservableStat> observables;
  std::vector<ShotRecord> records;  // in-memory diagnostics, not serialized
};

// Tester of the scheme at fixed unitaries: d^4 rank-one elements
//   Pi_{mnpq} = d^-3 |Phi>><<Phi|,  Phi = U_g (U_mn^dag Psi U_pq^*) V_h^T,
// the exact contraction of the ancilla dyad with the two Bell projectors.
// Sums to I (x) I / d for every (Psi, g, h), so sigma = I/d.
Tester scheme_tester(const Mat& psi, const Mat& g, const Mat& h, int d);

// Monte Carlo run: per shot draw a fresh Haar pair (g, h) from the shot's own
// substream, sample a Bell outcome pair from the exact d^4 probabilities, and
// evaluate the optimal-dual estimator for every observable. Shots are
// accumulated in fixed-size shards merged in shard order, so the result is
// bit-identical for any thread count.
SimReport run_simulation(const SchemeSpec& spec, const ChoiOp& r,
                         const CovariantDesign& design, int threads = 1,
                         std::uint64_t record_first = 0);

// Unbiased sample variance of the estimator of the given observable
// (se^2 * shots); the observable must be one the simulation ran with.
double empirical_variance(const SimReport& report, const SchemeSpec& spec,
                          const Mat& a);

}  // namespace optomo
