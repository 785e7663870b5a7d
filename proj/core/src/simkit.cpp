// This code is licensed under the Apache License, Version 2.0. You may
// obtain a copy of this license at http://www.apache.org/licenses/LICENSE-2.0.

#include "optomo/simkit.hpp"

#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace optomo {

namespace {

constexpr std::uint64_t kShardSize = 8192;

struct SchemeBasis {
  int d;
  std::vector<Mat> phi0;        // d^4 base seed matrices U_mn^dag Psi U_pq^*
  std::vector<Mat> dual0;       // base optimal duals (d^2 x d^2)
  std::vector<double> dual_nrm; // <<Delta_i|Delta_i>>
};

// Block-diagonal inverse of the averaged kernel restricted to the class
// subspace: sum over probed blocks of P_k / c_k.
Mat class_pinv_kernel(const SchurCoeffs& abc, ProtocolClass cls, int d) {
  const auto blocks = class_blocks(cls);
  const std::array<double, 4> c = {1.0, abc.a, abc.b, abc.c};
  SchurCoeffs inv;
  inv.a = blocks[1] ? 1.0 / c[1] : 0.0;
  inv.b = blocks[2] ? 1.0 / c[2] : 0.0;
  inv.c = blocks[3] ? 1.0 / c[3] : 0.0;
  // P1 always belongs to the process-class subspaces and carries weight 1.
  return xtilde_dense(inv, d, d);
}

SchemeBasis build_basis(const Mat& psi, const SchurCoeffs& abc,
                        ProtocolClass cls, int d) {
  SchemeBasis basis;
  basis.d = d;
  const Mat pinv = class_pinv_kernel(abc, cls, d);
  const double d4 = std::pow(static_cast<double>(d), 4);
  basis.phi0.reserve(static_cast<std::size_t>(d4));
  basis.dual0.reserve(static_cast<std::size_t>(d4));
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n) {
      const Mat left = weyl_unitary(m, n, d).adjoint();
      for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q) {
          const Mat phi = left * psi * weyl_unitary(p, q, d).conjugate();
          basis.phi0.push_back(phi);
          const Vec v = vectorize(phi);
          const Mat pi0 = (v * v.adjoint()) / (d4 / d);  // trace d^-3
          Mat delta = unvectorize(d4 * (pinv * vectorize(pi0)),
                                  static_cast<Eigen::Index>(d) * d,
                                  static_cast<Eigen::Index>(d) * d);
          basis.dual_nrm.push_back(std::real(hs_inner(delta, delta)));
          basis.dual0.push_back(std::move(delta));
        }
    }
  return basis;
}

struct ShardSums {
  std::vector<double> sum, sumsq;
  double eta_sum = 0.0, eta_sumsq = 0.0;
  std::vector<ShotRecord> records;
};

ShardSums run_shard(const SchemeSpec& spec, const Mat& rmat,
                    const SchemeBasis& basis, std::uint64_t first,
                    std::uint64_t count, std::uint64_t record_first) {
  const int d = basis.d;
  const Eigen::Index dd = static_cast<Eigen::Index>(d) * d;
  const std::size_t nout = basis.phi0.size();
  const std::size_t nobs = spec.observables.size();
  const Rng master(spec.rng_seed);

  ShardSums sums;
  sums.sum.assign(nobs, 0.0);
  sums.sumsq.assign(nobs, 0.0);

  Mat tmp(d, d), phi(d, d), w(dd, dd), wt(dd, dd), atil(dd, dd);
  Vec v(dd * dd), rv(dd * dd);
  std::vector<double> probs(nout);

  for (std::uint64_t t = first; t < first + count; ++t) {
    Rng shot_rng = master.substream(t);
    const Mat g = haar_unitary(d, shot_rng);
    const Mat h = haar_unitary(d, shot_rng);
    const Mat ht = h.transpose();

    double total = 0.0;
    for (std::size_t i = 0; i < nout; ++i) {
      tmp.noalias() = g * basis.phi0[i];
      phi.noalias() = tmp * ht;
      Eigen::Index k = 0;
      for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) v(k++) = phi(r, c);
      rv.noalias() = rmat * v;
      double p = std::real(v.dot(rv)) / (static_cast<double>(dd) * d);
      if (p < 0.0) {
        if (p < -1e-12)
          throw incomplete_error("run_simulation: negative outcome probability");
        p = 0.0;  // clip only at the sampling boundary
      }
      probs[i] = p;
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-8)
      throw incomplete_error(
          "run_simulation: outcome probabilities do not sum to 1");

    const double u = shot_rng.uniform01() * total;
    std::size_t outcome = nout - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < nout; ++i) {
      acc += probs[i];
      if (u < acc) {
        outcome = i;
        break;
      }
    }

    ShotRecord* rec = nullptr;
    if (t < record_first) {
      ShotRecord r0;
      r0.index = t;
      const int rem = static_cast<int>(outcome);
      r0.outcome = {rem / (d * d * d), (rem / (d * d)) % d, (rem / d) % d,
                    rem % d};
      sums.records.push_back(r0);
      rec = &sums.records.back();
    }

    if (nobs > 0) {
      w = kron(g, h);
      for (std::size_t nidx = 0; nidx < nobs; ++nidx) {
        wt.noalias() = spec.observables[nidx] * w;
        atil.noalias() = w.adjoint() * wt;
        const double val =
            std::real(basis.dual0[outcome].conjugate().cwiseProduct(atil).sum());
        sums.sum[nidx] += val;
        sums.sumsq[nidx] += val * val;
        if (rec) rec->values.push_back(val);
      }
    }
    const double nrm = basis.dual_nrm[outcome];
    sums.eta_sum += nrm;
    sums.eta_sumsq += nrm * nrm;
  }
  return sums;
}

std::pair<double, double> mean_se(double sum, double sumsq, std::uint64_t n) {
  const double mean = sum / static_cast<double>(n);
  if (n < 2) return {mean, 0.0};
  double var = (sumsq - static_cast<double>(n) * mean * mean) /
               (static_cast<double>(n) - 1.0);
  if (var < 0.0) var = 0.0;
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace

void SchemeSpec::validate() const {
  if (d < 2) throw std::invalid_argument("SchemeSpec: d must be >= 2");
  if (shots < 1) throw std::invalid_argument("SchemeSpec: shots must be >= 1");
  if (psi.size() > 0) {
    if (psi.rows() != d || psi.cols() != d)
      throw std::invalid_argument("SchemeSpec: psi must be d x d");
    if (std::abs(std::real(hs_inner(psi, psi)) - 1.0) > 1e-8)
      throw std::invalid_argument("SchemeSpec: psi must have unit HS norm");
  }
  if (names.size() != observables.size())
    throw std::invalid_argument("SchemeSpec: name/observable count mismatch");
  for (const Mat& a : observables) {
    if (a.rows() != static_cast<Eigen::Index>(d) * d || a.rows() != a.cols())
      throw std::invalid_argument("SchemeSpec: observable shape mismatch");
    if (!is_hermitian(a, 1e-10))
      throw std::invalid_argument("SchemeSpec: observables must be Hermitian");
  }
}

Tester scheme_tester(const Mat& psi, const Mat& g, const Mat& h, int d) {
  if (psi.rows() != d || psi.cols() != d)
    throw std::invalid_argument("scheme_tester: psi must be d x d");
  if (std::abs(std::real(hs_inner(psi, psi)) - 1.0) > 1e-8)
    throw std::invalid_argument("scheme_tester: psi must have unit HS norm");
  if (!is_unitary(g, 1e-10) || !is_unitary(h, 1e-10))
    throw std::invalid_argument("scheme_tester: g and h must be unitary");

  Tester t;
  t.d_out = d;
  t.d_in = d;
  const double d3 = std::pow(static_cast<double>(d), 3);
  const Mat ht = h.transpose();
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n) {
      const Mat left = g * weyl_unitary(m, n, d).adjoint();
      for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q) {
          const Mat phi = left * psi * weyl_unitary(p, q, d).conjugate() * ht;
          const Vec v = vectorize(phi);
          t.elements.push_back((v * v.adjoint()) / d3);
        }
    }
  t.sigma = Mat::Identity(d, d) / d;
  return t;
}

SimReport run_simulation(const SchemeSpec& spec, const ChoiOp& r,
                         const CovariantDesign& design, int threads,
                         std::uint64_t record_first) {
  spec.validate();
  if (design.cls == ProtocolClass::State || design.cls == ProtocolClass::Povm)
    throw std::invalid_argument(
        "run_simulation: the double-Bell scheme simulates process classes");
  if (design.d != spec.d)
    throw std::invalid_argument("run_simulation: design dimension mismatch");
  r.validate();
  if (r.d_out != spec.d || r.d_in != spec.d)
    throw std::invalid_argument("run_simulation: Choi dimension mismatch");
  if (!r.is_channel(1e-8))
    throw std::invalid_argument(
        "run_simulation: sampling requires a trace-preserving channel");

  const int d = spec.d;
  const Mat psi = spec.psi.size() > 0 ? spec.psi : design.psi;

  SeedSet single;
  single.d_out = d;
  single.d_in = d;
  single.alphas = {static_cast<double>(d)};
  single.psis = {psi};
  const SchurCoeffs abc = coeffs_abc(single);
  const double eta = eta_spectral(abc, design.cls, d, d);  // throws if incomplete

  // Observables must lie inside the class subspace; estimates of anything
  // outside it are refused rather than silently projected.
  const Mat q = class_projector(design.cls, d, d);
  for (std::size_t i = 0; i < spec.observables.size(); ++i) {
    const Vec va = vectorize(spec.observables[i]);
    const double scale = std::max(1.0, va.cwiseAbs().maxCoeff());
    if (((q * va) - va).cwiseAbs().maxCoeff() > 1e-9 * scale)
      throw std::invalid_argument("run_simulation: observable '" +
                                  spec.names[i] +
                                  "' is outside the class subspace");
  }

  const SchemeBasis basis = build_basis(psi, abc, design.cls, d);

  const std::uint64_t nshards = (spec.shots + kShardSize - 1) / kShardSize;
  std::vector<ShardSums> parts(nshards);
  if (threads <= 1) {
    for (std::uint64_t s = 0; s < nshards; ++s) {
      const std::uint64_t first = s * kShardSize;
      parts[s] = run_shard(spec, r.m, basis, first,
                           std::min(kShardSize, spec.shots - first),
                           record_first);
    }
  } else {
    std::vector<std::future<void>> workers;
    std::atomic<std::uint64_t> next{0};
    for (int w = 0; w < threads; ++w)
      workers.push_back(std::async(std::launch::async, [&]() {
        for (std::uint64_t s = next.fetch_add(1); s < nshards;
             s = next.fetch_add(1)) {
          const std::uint64_t first = s * kShardSize;
          parts[s] = run_shard(spec, r.m, basis, first,
                               std::min(kShardSize, spec.shots - first),
                               record_first);
        }
      }));
    for (auto& w : workers) w.get();
  }

  // Merge in shard order: the reduction is then independent of thread count.
  const std::size_t nobs = spec.observables.size();
  std::vector<double> sum(nobs, 0.0), sumsq(nobs, 0.0);
  double eta_sum = 0.0, eta_sumsq = 0.0;
  SimReport report;
  for (const ShardSums& p : parts) {
    for (std::size_t i = 0; i < nobs; ++i) {
      sum[i] += p.sum[i];
      sumsq[i] += p.sumsq[i];
    }
    eta_sum += p.eta_sum;
    eta_sumsq += p.eta_sumsq;
    report.records.insert(report.records.end(), p.records.begin(),
                          p.records.end());
  }

  report.shots = spec.shots;
  report.rng_seed = spec.rng_seed;
  report.eta_analytic = eta;
  std::tie(report.eta_hat, report.eta_hat_se) =
      mean_se(eta_sum, eta_sumsq, spec.shots);
  for (std::size_t i = 0; i < nobs; ++i) {
    ObservableStat stat;
    stat.name = spec.names[i];
    std::tie(stat.mean, stat.se) = mean_se(sum[i], sumsq[i], spec.shots);
    stat.truth = (r.m * spec.observables[i]).trace().real();
    const double diff = stat.mean - stat.truth;
    stat.z = stat.se > 1e-300 ? diff / stat.se : (std::abs(diff) < 1e-9 ? 0.0
                                    : std::numeric_limits<double>::infinity());
    report.observables.push_back(std::move(stat));
  }
  return report;
}

double empirical_variance(const SimReport& report, const SchemeSpec& spec,
                          const Mat& a) {
  for (std::size_t i = 0; i < spec.observables.size(); ++i) {
    if (spec.observables[i].rows() == a.rows() &&
        spec.observables[i].cols() == a.cols() &&
        (spec.observables[i] - a).cwiseAbs().maxCoeff() <= 1e-12) {
      const double se = report.observables.at(i).se;
      return se * se * static_cast<double>(report.shots);
    }
  }
  throw std::invalid_argument("empirical_variance: observable absent from spec");
}

}  // namespace optomo
