// This code is licensed under the Apache License, Version 2.0. You may
// obtain a copy of this license at http://www.apache.org/licenses/LICENSE-2.0.

#include "optomo/covopt.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace optomo {

namespace {

constexpr double kBlockRatio = 1e-8;  // block counts as present iff c >= 1e-8 max

// Entry factors of the Schur blocks. Row index (m, n, m', n'), column index
// (p, q, p', q'); the out pair is (m, m' | p, p'), the in pair (n, n' | q, q').
struct EntryGeom {
  int d_out, d_in;

  double omega_out(int m, int mp, int p, int pp) const {
    return (m == mp && p == pp) ? 1.0 / d_out : 0.0;
  }
  double id_out(int m, int mp, int p, int pp) const {
    return (m == p && mp == pp) ? 1.0 : 0.0;
  }
  double omega_in(int n, int np, int q, int qp) const {
    return (n == np && q == qp) ? 1.0 / d_in : 0.0;
  }
  double id_in(int n, int np, int q, int qp) const {
    return (n == q && np == qp) ? 1.0 : 0.0;
  }
};

template <typename F>
Mat assemble(int d_out, int d_in, F entry) {
  const Eigen::Index dim =
      static_cast<Eigen::Index>(d_out) * d_out * d_in * d_in;
  Mat out(dim, dim);
  for (int m = 0; m < d_out; ++m)
    for (int n = 0; n < d_in; ++n)
      for (int mp = 0; mp < d_out; ++mp)
        for (int np = 0; np < d_in; ++np) {
          const Eigen::Index row =
              ((static_cast<Eigen::Index>(m) * d_in + n) * d_out + mp) * d_in +
              np;
          for (int p = 0; p < d_out; ++p)
            for (int q = 0; q < d_in; ++q)
              for (int pp = 0; pp < d_out; ++pp)
                for (int qp = 0; qp < d_in; ++qp) {
                  const Eigen::Index col =
                      ((static_cast<Eigen::Index>(p) * d_in + q) * d_out + pp) *
                          d_in +
                      qp;
                  out(row, col) = entry(m, n, mp, np, p, q, pp, qp);
                }
        }
  return out;
}

std::array<double, 4> block_weights(const SchurCoeffs& abc) {
  return {1.0, abc.a, abc.b, abc.c};
}

void check_completeness(const SchurCoeffs& abc, ProtocolClass cls, int d_out,
                        int d_in) {
  const auto blocks = class_blocks(cls);
  const std::array<Eigen::Index, 4> ranks = {
      1, static_cast<Eigen::Index>(d_out) * d_out - 1,
      static_cast<Eigen::Index>(d_in) * d_in - 1,
      (static_cast<Eigen::Index>(d_out) * d_out - 1) *
          (static_cast<Eigen::Index>(d_in) * d_in - 1)};
  const auto w = block_weights(abc);
  double wmax = 0.0;
  for (double v : w) wmax = std::max(wmax, v);
  for (int k = 0; k < 4; ++k) {
    if (!blocks[k] || ranks[k] == 0) continue;
    if (w[k] < kBlockRatio * wmax)
      throw incomplete_error(
          "design is informationally incomplete for class " + to_string(cls) +
          ": Schur block " + std::to_string(k + 1) + " is not probed");
  }
}

}  // namespace

std::string to_string(ProtocolClass cls) {
  switch (cls) {
    case ProtocolClass::QuantumOperation: return "qo";
    case ProtocolClass::Channel: return "channel";
    case ProtocolClass::Unital: return "unital";
    case ProtocolClass::State: return "state";
    case ProtocolClass::Povm: return "povm";
  }
  throw std::logic_error("to_string: bad ProtocolClass");
}

ProtocolClass protocol_class_from_string(const std::string& s) {
  if (s == "qo") return ProtocolClass::QuantumOperation;
  if (s == "channel") return ProtocolClass::Channel;
  if (s == "unital") return ProtocolClass::Unital;
  if (s == "state") return ProtocolClass::State;
  if (s == "povm") return ProtocolClass::Povm;
  throw std::invalid_argument("unknown protocol class: " + s);
}

std::pair<int, int> dims_for_class(ProtocolClass cls, int d) {
  switch (cls) {
    case ProtocolClass::State: return {d, 1};
    case ProtocolClass::Povm: return {1, d};
    default: return {d, d};
  }
}

std::array<Eigen::Index, 4> SchurBlocks::ranks() const {
  const Eigen::Index r2 = static_cast<Eigen::Index>(d_out) * d_out - 1;
  const Eigen::Index r3 = static_cast<Eigen::Index>(d_in) * d_in - 1;
  return {1, r2, r3, r2 * r3};
}

SchurBlocks schur_projectors(int d_out, int d_in) {
  if (d_out < 1 || d_in < 1)
    throw std::invalid_argument("schur_projectors: dims must be >= 1");
  const EntryGeom g{d_out, d_in};
  SchurBlocks blocks;
  blocks.d_out = d_out;
  blocks.d_in = d_in;
  blocks.p[0] = assemble(d_out, d_in, [&](int m, int n, int mp, int np, int p,
                                          int q, int pp, int qp) {
    return g.omega_out(m, mp, p, pp) * g.omega_in(n, np, q, qp);
  });
  blocks.p[1] = assemble(d_out, d_in, [&](int m, int n, int mp, int np, int p,
                                          int q, int pp, int qp) {
    return (g.id_out(m, mp, p, pp) - g.omega_out(m, mp, p, pp)) *
           g.omega_in(n, np, q, qp);
  });
  blocks.p[2] = assemble(d_out, d_in, [&](int m, int n, int mp, int np, int p,
                                          int q, int pp, int qp) {
    return g.omega_out(m, mp, p, pp) *
           (g.id_in(n, np, q, qp) - g.omega_in(n, np, q, qp));
  });
  blocks.p[3] = assemble(d_out, d_in, [&](int m, int n, int mp, int np, int p,
                                          int q, int pp, int qp) {
    return (g.id_out(m, mp, p, pp) - g.omega_out(m, mp, p, pp)) *
           (g.id_in(n, np, q, qp) - g.omega_in(n, np, q, qp));
  });
  return blocks;
}

SchurCoeffs coeffs_abc(const std::vector<Mat>& elements, int d_out, int d_in) {
  if (elements.empty()) throw std::invalid_argument("coeffs_abc: no elements");
  double trace_sum = 0.0, sum_out = 0.0, sum_in = 0.0, sum_full = 0.0;
  for (const Mat& e : elements) {
    const double tr = e.trace().real();
    if (tr <= 1e-14)
      throw std::invalid_argument("coeffs_abc: zero-trace element");
    trace_sum += tr;
    const Mat red_out = ptrace_leg2(e, d_out, d_in);  // on H_out
    const Mat red_in = ptrace_leg1(e, d_out, d_in);   // on H_in
    sum_out += (red_out * red_out).trace().real() / tr;
    sum_in += (red_in * red_in).trace().real() / tr;
    sum_full += static_cast<double>(d_in) * (e * e).trace().real() / tr;
  }
  if (std::abs(trace_sum - d_out) > 1e-8)
    throw std::invalid_argument(
        "coeffs_abc: element traces must sum to d_out (normalization)");

  const double t2 = sum_out - 1.0;
  const double t3 = (static_cast<double>(d_in) / d_out) * sum_in - 1.0;
  const double t4 = sum_full - 1.0 - t2 - t3;
  const double r2 = static_cast<double>(d_out) * d_out - 1.0;
  const double r3 = static_cast<double>(d_in) * d_in - 1.0;

  SchurCoeffs abc;
  abc.a = r2 > 0.0 ? t2 / r2 : 0.0;
  abc.b = r3 > 0.0 ? t3 / r3 : 0.0;
  abc.c = (r2 > 0.0 && r3 > 0.0) ? t4 / (r2 * r3) : 0.0;
  return abc;
}

SchurCoeffs coeffs_abc(const SeedSet& seeds) {
  seeds.validate();
  std::vector<Mat> elements;
  elements.reserve(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i)
    elements.push_back(seeds.element(i));
  return coeffs_abc(elements, seeds.d_out, seeds.d_in);
}

SchurCoeffs coeffs_abc(const Tester& t) {
  return coeffs_abc(t.elements, t.d_out, t.d_in);
}

Mat xtilde_dense(const SchurCoeffs& abc, int d_out, int d_in) {
  const EntryGeom g{d_out, d_in};
  return assemble(d_out, d_in, [&](int m, int n, int mp, int np, int p, int q,
                                   int pp, int qp) {
    const double oo = g.omega_out(m, mp, p, pp);
    const double oi = g.id_out(m, mp, p, pp);
    const double io = g.omega_in(n, np, q, qp);
    const double ii = g.id_in(n, np, q, qp);
    return oo * io + abc.a * (oi - oo) * io + abc.b * oo * (ii - io) +
           abc.c * (oi - oo) * (ii - io);
  });
}

Mat xtilde(const SeedSet& seeds) {
  return xtilde_dense(coeffs_abc(seeds), seeds.d_out, seeds.d_in);
}

std::array<bool, 4> class_blocks(ProtocolClass cls) {
  switch (cls) {
    case ProtocolClass::QuantumOperation: return {true, true, true, true};
    case ProtocolClass::Channel: return {true, true, false, true};
    case ProtocolClass::Unital: return {true, false, false, true};
    case ProtocolClass::State: return {true, true, false, false};
    case ProtocolClass::Povm: return {true, false, true, false};
  }
  throw std::logic_error("class_blocks: bad ProtocolClass");
}

Mat class_projector(ProtocolClass cls, int d_out, int d_in) {
  const auto blocks = class_blocks(cls);
  const EntryGeom g{d_out, d_in};
  return assemble(d_out, d_in, [&](int m, int n, int mp, int np, int p, int q,
                                   int pp, int qp) {
    const double oo = g.omega_out(m, mp, p, pp);
    const double oi = g.id_out(m, mp, p, pp);
    const double io = g.omega_in(n, np, q, qp);
    const double ii = g.id_in(n, np, q, qp);
    double v = 0.0;
    if (blocks[0]) v += oo * io;
    if (blocks[1]) v += (oi - oo) * io;
    if (blocks[2]) v += oo * (ii - io);
    if (blocks[3]) v += (oi - oo) * (ii - io);
    return v;
  });
}

double eta_spectral(const SchurCoeffs& abc, ProtocolClass cls, int d_out,
                    int d_in) {
  check_completeness(abc, cls, d_out, d_in);
  const auto blocks = class_blocks(cls);
  const double r2 = static_cast<double>(d_out) * d_out - 1.0;
  const double r3 = static_cast<double>(d_in) * d_in - 1.0;
  const std::array<double, 4> ranks = {1.0, r2, r3, r2 * r3};
  const auto w = block_weights(abc);
  double eta = 0.0;
  for (int k = 0; k < 4; ++k)
    if (blocks[k] && ranks[k] > 0.0) eta += ranks[k] / w[k];
  return eta;
}

double eta_dense(const SchurCoeffs& abc, ProtocolClass cls, int d_out,
                 int d_in) {
  check_completeness(abc, cls, d_out, d_in);
  const Mat xt = xtilde_dense(abc, d_out, d_in);
  const Mat q = class_projector(cls, d_out, d_in);
  return (pseudo_inverse(xt) * q).trace().real();
}

namespace {

double eta_both_routes(const SchurCoeffs& abc, ProtocolClass cls, int d_out,
                       int d_in) {
  const double spectral = eta_spectral(abc, cls, d_out, d_in);
  const double dense = eta_dense(abc, cls, d_out, d_in);
  if (std::abs(spectral - dense) > 1e-8 * std::max(1.0, std::abs(spectral)))
    throw incomplete_error("eta_of: spectral and dense routes disagree");
  return spectral;
}

}  // namespace

double eta_of(const SeedSet& seeds, ProtocolClass cls) {
  const auto [d_out, d_in] = dims_for_class(cls, std::max(seeds.d_out, seeds.d_in));
  if (d_out != seeds.d_out || d_in != seeds.d_in)
    throw std::invalid_argument("eta_of: seed dimensions do not fit the class");
  return eta_both_routes(coeffs_abc(seeds), cls, seeds.d_out, seeds.d_in);
}

double eta_of(const Tester& t, ProtocolClass cls) {
  const auto [d_out, d_in] = dims_for_class(cls, std::max(t.d_out, t.d_in));
  if (d_out != t.d_out || d_in != t.d_in)
    throw std::invalid_argument("eta_of: tester dimensions do not fit the class");
  return eta_both_routes(coeffs_abc(t), cls, t.d_out, t.d_in);
}

Mat schur_average(const Mat& x, int d_out, int d_in) {
  const SchurBlocks blocks = schur_projectors(d_out, d_in);
  const auto ranks = blocks.ranks();
  Mat avg = Mat::Zero(x.rows(), x.cols());
  for (int k = 0; k < 4; ++k) {
    if (ranks[k] == 0) continue;
    const Cplx tr = (x * blocks.p[k]).trace();
    avg += (tr / static_cast<double>(ranks[k])) * blocks.p[k];
  }
  return avg;
}

double eta_bound(ProtocolClass cls, int d) {
  if (d < 2) throw std::invalid_argument("eta_bound: d must be >= 2");
  const double dd = d;
  const double d2 = dd * dd;
  switch (cls) {
    case ProtocolClass::QuantumOperation:
      return d2 * d2 * d2 + d2 * d2 - d2;
    case ProtocolClass::Channel: {
      const double s2 = std::sqrt(2.0);
      return d2 * d2 * d2 + (2.0 * s2 - 3.0) * d2 * d2 +
             (5.0 - 4.0 * s2) * d2 + 2.0 * (s2 - 1.0);
    }
    case ProtocolClass::Unital: {
      const double e = d2 - 1.0;
      return e * e * e + 1.0;
    }
    case ProtocolClass::State:
    case ProtocolClass::Povm:
      return dd * dd * dd + dd * dd - dd;
  }
  throw std::logic_error("eta_bound: bad ProtocolClass");
}

double eta_class_at(ProtocolClass cls, int d, double a) {
  const double e = static_cast<double>(d) * d - 1.0;
  const double inf = std::numeric_limits<double>::infinity();
  if (a < 0.0 || a > 0.5) return inf;
  const double c_term = 1.0 - 2.0 * a;
  switch (cls) {
    case ProtocolClass::QuantumOperation:
      if (a == 0.0 || c_term <= 0.0) return inf;
      return 1.0 + e * (2.0 / a + e * e / c_term);
    case ProtocolClass::Channel:
      if (a == 0.0 || c_term <= 0.0) return inf;
      return 1.0 + e * (1.0 / a + e * e / c_term);
    case ProtocolClass::Unital:
      if (c_term <= 0.0) return inf;
      return 1.0 + e * e * e / c_term;
    case ProtocolClass::State:
    case ProtocolClass::Povm:
      // single pure seed is forced, a = 1/(d+1)
      return 1.0 + e * (d + 1.0);
  }
  throw std::logic_error("eta_class_at: bad ProtocolClass");
}

Mat seed_psi(int d, double beta) {
  if (d < 1) throw std::invalid_argument("seed_psi: d must be >= 1");
  if (beta < 0.0 || beta > 1.0)
    throw std::invalid_argument("seed_psi: beta must be in [0, 1]");
  Mat rho = Mat::Identity(d, d) * ((1.0 - beta) / d);
  rho(0, 0) += beta;
  return psd_sqrt(rho);
}

double golden_section(const std::function<double(double)>& f, double lo,
                      double hi, double tol) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

CovariantDesign optimize_class(ProtocolClass cls, int d) {
  if (d < 2) throw std::invalid_argument("optimize_class: d must be >= 2");
  const double d2 = static_cast<double>(d) * d;
  double a_star = 0.0;
  switch (cls) {
    case ProtocolClass::QuantumOperation:
      a_star = 1.0 / (d2 + 1.0);
      break;
    case ProtocolClass::Channel:
      a_star = 1.0 / (std::sqrt(2.0) * (d2 - 1.0) + 2.0);
      break;
    case ProtocolClass::Unital:
      a_star = 0.0;
      break;
    default:
      throw std::invalid_argument(
          "optimize_class: use state_povm_design for state/povm");
  }

  const double a_numeric = golden_section(
      [&](double a) { return eta_class_at(cls, d, a); }, 0.0,
      1.0 / (d + 1.0), 1e-12);
  if (std::abs(a_numeric - a_star) > 1e-9)
    throw std::runtime_error(
        "optimize_class: numeric minimizer disagrees with the closed form");

  CovariantDesign design;
  design.cls = cls;
  design.d = d;
  design.a_coeff = a_star;
  design.beta = std::sqrt(a_star * (d + 1.0));
  design.purity = (a_star * (d2 - 1.0) + 1.0) / d;
  design.eta = eta_bound(cls, d);
  design.psi = seed_psi(d, design.beta);
  return design;
}

CovariantDesign state_povm_design(ProtocolClass kind, int d) {
  if (kind != ProtocolClass::State && kind != ProtocolClass::Povm)
    throw std::invalid_argument("state_povm_design: kind must be state or povm");
  if (d < 2) throw std::invalid_argument("state_povm_design: d must be >= 2");
  CovariantDesign design;
  design.cls = kind;
  design.d = d;
  design.a_coeff = 1.0 / (d + 1.0);
  design.beta = 1.0;
  design.purity = 1.0;
  design.eta = eta_bound(kind, d);
  const auto [d_out, d_in] = dims_for_class(kind, d);
  Mat psi = Mat::Zero(d_out, d_in);
  psi(0, 0) = 1.0;
  design.psi = psi;
  return design;
}

void WeightSpec::validate() const {
  if (g1 < 0.0 || g2 < 0.0 || g3 < 0.0 || g4 < 0.0)
    throw std::invalid_argument("WeightSpec: weights must be nonnegative");
  if (g2 <= 0.0 && g3 <= 0.0 && g4 <= 0.0)
    throw std::invalid_argument(
        "WeightSpec: at least one of g2, g3, g4 must be positive");
}

double weighted_eta_at(const WeightSpec& w, int d, double a, double b) {
  const double e = static_cast<double>(d) * d - 1.0;
  const double inf = std::numeric_limits<double>::infinity();
  if (a < 0.0 || b < 0.0 || a + b >= 1.0) return inf;
  double eta = w.g1;
  if (w.g2 > 0.0) {
    if (a == 0.0) return inf;
    eta += e * w.g2 / a;
  }
  if (w.g3 > 0.0) {
    if (b == 0.0) return inf;
    eta += e * w.g3 / b;
  }
  if (w.g4 > 0.0) eta += e * e * w.g4 / (1.0 - a - b);
  return eta;
}

WeightedOptimum optimize_weighted(const WeightSpec& w, int d) {
  w.validate();
  if (d < 2) throw std::invalid_argument("optimize_weighted: d must be >= 2");
  const double e = static_cast<double>(d) * d - 1.0;
  const double amax = 1.0 / (d + 1.0);

  // 1-D stationary point of g/x + e^2 g4/(1 - off - x) on (0, amax].
  auto stationary_1d = [&](double g, double off) {
    if (g <= 0.0) return 0.0;
    if (w.g4 <= 0.0) return amax;
    const double kappa = std::sqrt(e * e * w.g4 / (e * g));
    return std::min(amax, (1.0 - off) / (1.0 + kappa));
  };

  std::vector<std::pair<double, double>> candidates;
  if (w.g2 > 0.0 && w.g3 > 0.0 && w.g4 > 0.0) {
    const double s =
        std::sqrt(w.g2) + std::sqrt(w.g3) + e * std::sqrt(w.g4);
    candidates.emplace_back(std::sqrt(w.g2) / s, std::sqrt(w.g3) / s);
  }
  // Edges and degenerate-weight boundaries.
  const double a_zero = 0.0, b_zero = 0.0;
  candidates.emplace_back(stationary_1d(w.g2, b_zero), b_zero);       // B = 0
  candidates.emplace_back(a_zero, stationary_1d(w.g3, a_zero));       // A = 0
  candidates.emplace_back(amax, stationary_1d(w.g3, amax));           // A = amax
  candidates.emplace_back(stationary_1d(w.g2, amax), amax);           // B = amax
  candidates.emplace_back(amax, amax);
  candidates.emplace_back(a_zero, b_zero);

  WeightedOptimum best;
  best.eta = std::numeric_limits<double>::infinity();
  for (auto [a, b] : candidates) {
    a = std::clamp(a, 0.0, amax);
    b = std::clamp(b, 0.0, amax);
    if (w.g2 > 0.0 && a == 0.0) continue;
    if (w.g3 > 0.0 && b == 0.0) continue;
    if (w.g2 <= 0.0) a = 0.0;  // unprobed block stays out
    if (w.g3 <= 0.0) b = 0.0;
    const double eta = weighted_eta_at(w, d, a, b);
    if (eta < best.eta) best = WeightedOptimum{a, b, eta};
  }
  if (!std::isfinite(best.eta))
    throw std::invalid_argument("optimize_weighted: infeasible weight spec");
  return best;
}

}  // namespace optomo
