#include "optomo/frames.hpp"

#include "optomo/covopt.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace optomo;
using namespace optomo::testsup;

namespace {

OperatorFrame pauli_frame() {
  Mat x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << Cplx(0, 0), Cplx(0, -1), Cplx(0, 1), Cplx(0, 0);
  z << 1, 0, 0, -1;
  const double s = std::sqrt(2.0);
  OperatorFrame f;
  f.elements = {Mat::Identity(2, 2) / s, x / s, y / s, z / s};
  return f;
}

// Complete random frame with strictly positive outcome weights.
OperatorFrame random_complete_frame(Rng& rng, Eigen::Index d, int n) {
  OperatorFrame f;
  std::vector<double> w(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    f.elements.push_back(random_matrix(rng, d, d));
    w[i] = 0.1 + rng.uniform01();
    total += w[i];
  }
  for (double& v : w) v /= total;
  f.weights = w;
  return f;
}

// Duals perturbed inside the null space of the duality constraint:
// E_i' = E_i - correction so that sum |P_i>><<E_i'| = 0.
std::vector<Mat> null_space_perturbation(Rng& rng, const OperatorFrame& frame) {
  const Eigen::Index d = frame.op_rows();
  std::vector<Mat> e;
  Mat m = Mat::Zero(d * d, d * d);
  for (const Mat& p : frame.elements) {
    e.push_back(0.1 * random_matrix(rng, d, d));
    m += vectorize(p) * vectorize(e.back()).adjoint();
  }
  const Mat x = weighted_frame_operator(frame);
  const Mat y = pseudo_inverse(x) * m;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const Vec corr =
        y.adjoint() * vectorize(frame.elements[i]) / (*frame.weights)[i];
    e[i] -= unvectorize(corr, d, d);
  }
  return e;
}

// eta at G = I with the frame's own outcome probabilities.
double eta_identity_g(const OperatorFrame& frame, const DualSet& dual) {
  double eta = 0.0;
  for (std::size_t i = 0; i < frame.elements.size(); ++i)
    eta += std::real(hs_inner(dual.elements[i], dual.elements[i])) *
           (*frame.weights)[i];
  return eta;
}

}  // namespace

TEST_CASE("frame_operator") {
  SUBCASE("normalized Pauli basis has F = I") {
    CHECK(max_abs(frame_operator(pauli_frame()) - Mat::Identity(4, 4)) <
          1e-14);
  }
  SUBCASE("single element gives a rank-one F") {
    OperatorFrame f;
    f.elements = {Mat::Identity(2, 2) / std::sqrt(2.0)};
    const Mat fo = frame_operator(f);
    Eigen::SelfAdjointEigenSolver<Mat> es(fo);
    int nonzero = 0;
    for (Eigen::Index i = 0; i < 4; ++i)
      if (es.eigenvalues()(i) > 1e-12) ++nonzero;
    CHECK(nonzero == 1);
  }
  SUBCASE("rank-deficient set is flagged by a vanishing lower bound") {
    OperatorFrame f = pauli_frame();
    f.elements.pop_back();  // drop Z
    const auto [a, b] = frame_bounds(f);
    CHECK(a < 1e-12);
    CHECK(b > 0.0);
  }
}

TEST_CASE("frame_bounds") {
  SUBCASE("Pauli basis has bounds (1, 1)") {
    const auto [a, b] = frame_bounds(pauli_frame());
    CHECK(a == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("covariantized optimal design, discretized, is complete") {
    const int d = 2, K = 10000;
    const CovariantDesign design =
        optimize_class(ProtocolClass::QuantumOperation, d);
    SeedSet seeds;
    seeds.d_out = d;
    seeds.d_in = d;
    seeds.alphas = {static_cast<double>(d)};
    seeds.psis = {design.psi};
    Rng rng(31);
    OperatorFrame f;
    const double scale = 1.0 / std::sqrt(static_cast<double>(K));
    for (int k = 0; k < K; ++k) {
      const Mat g = haar_unitary(d, rng);
      const Mat h = haar_unitary(d, rng);
      f.elements.push_back(scale * covariant_element(seeds, 0, g, h));
    }
    const auto [a, b] = frame_bounds(f);
    CHECK(a > 0.01);  // strictly away from zero
    CHECK(b < 10.0);
  }
  SUBCASE("subspace projector must be idempotent") {
    CHECK_THROWS_AS(frame_bounds(pauli_frame(), 2.0 * Mat::Identity(4, 4)),
                    std::invalid_argument);
  }
}

TEST_CASE("canonical_dual") {
  SUBCASE("Pauli basis is self-dual") {
    const OperatorFrame f = pauli_frame();
    const DualSet dual = canonical_dual(f);
    for (std::size_t i = 0; i < f.elements.size(); ++i)
      CHECK(max_abs(dual.elements[i] - f.elements[i]) < 1e-12);
  }
  SUBCASE("scaling the frame scales duals inversely") {
    OperatorFrame f = pauli_frame();
    const double c = 3.0;
    OperatorFrame scaled = f;
    for (Mat& e : scaled.elements) e *= c;
    const DualSet dual = canonical_dual(f);
    const DualSet dual_scaled = canonical_dual(scaled);
    for (std::size_t i = 0; i < f.elements.size(); ++i)
      CHECK(max_abs(dual_scaled.elements[i] - dual.elements[i] / c) < 1e-12);
  }
  SUBCASE("duality residual on random complete frames") {
    Rng rng(32);
    for (int it = 0; it < 25; ++it) {
      const OperatorFrame f = random_complete_frame(rng, 2, 5 + it % 3);
      const DualSet dual = canonical_dual(f);
      CHECK(duality_residual(f, dual) < 1e-9);
    }
  }
  SUBCASE("incomplete frames are rejected") {
    OperatorFrame f = pauli_frame();
    f.elements.pop_back();
    CHECK_THROWS_AS(canonical_dual(f), std::invalid_argument);
  }
}

TEST_CASE("optimal_dual") {
  Rng rng(33);
  SUBCASE("equal-weight orthonormal basis coincides with the canonical dual") {
    OperatorFrame f = pauli_frame();
    f.weights = std::vector<double>{0.25, 0.25, 0.25, 0.25};
    const DualSet opt = optimal_dual(f);
    const DualSet can = canonical_dual(f);
    for (std::size_t i = 0; i < f.elements.size(); ++i)
      CHECK(max_abs(opt.elements[i] - can.elements[i]) < 1e-12);
  }
  SUBCASE("optimal dual beats the canonical dual") {
    for (int it = 0; it < 25; ++it) {
      const OperatorFrame f = random_complete_frame(rng, 2, 6);
      const DualSet opt = optimal_dual(f);
      const DualSet can = canonical_dual(f);
      CHECK(eta_identity_g(f, opt) <= eta_identity_g(f, can) + 1e-9);
    }
  }
  SUBCASE("optimal dual beats 100 null-space perturbations") {
    const OperatorFrame f = random_complete_frame(rng, 2, 6);
    const DualSet opt = optimal_dual(f);
    const double eta_opt = eta_identity_g(f, opt);
    CHECK(duality_residual(f, opt) < 1e-9);
    for (int it = 0; it < 100; ++it) {
      DualSet bumped = opt;
      const auto bumps = null_space_perturbation(rng, f);
      for (std::size_t i = 0; i < bumped.elements.size(); ++i)
        bumped.elements[i] += bumps[i];
      CHECK(duality_residual(f, bumped) < 1e-9);
      CHECK(eta_identity_g(f, bumped) >= eta_opt - 1e-9);
    }
  }
  SUBCASE("the minimum with G = I is Tr[(Q X Q)^pinv]") {
    const OperatorFrame f = random_complete_frame(rng, 2, 6);
    const DualSet opt = optimal_dual(f);
    const double traced = pseudo_inverse(weighted_frame_operator(f))
                              .trace()
                              .real();
    CHECK(eta_identity_g(f, opt) == doctest::Approx(traced).epsilon(1e-9));
  }
  SUBCASE("zero-probability element with nonzero operator is rejected") {
    OperatorFrame f = pauli_frame();
    f.weights = std::vector<double>{0.5, 0.5, 0.0, 0.0};
    CHECK_THROWS_AS(optimal_dual(f), std::invalid_argument);
  }
}

TEST_CASE("variance functionals") {
  SUBCASE("projective Z measurement on its eigenstate is deterministic") {
    Mat e0 = Mat::Zero(2, 2), e1 = Mat::Zero(2, 2), z(2, 2);
    e0(0, 0) = 1.0;
    e1(1, 1) = 1.0;
    z << 1, 0, 0, -1;
    OperatorFrame f;
    f.elements = {e0, e1};
    // duality on the diagonal (commuting) subspace
    Mat q = Mat::Zero(4, 4);
    q(0, 0) = 1.0;
    q(3, 3) = 1.0;
    const DualSet dual = canonical_dual(f, q);
    CHECK(std::abs(variance(f, dual, z, e0)) < 1e-12);
  }
  SUBCASE("variance is nonnegative over a random sweep") {
    Rng rng(34);
    for (int it = 0; it < 1000; ++it) {
      const OperatorFrame f = random_complete_frame(rng, 2, 5);
      const DualSet dual = optimal_dual(f);
      const Mat a = random_hermitian(rng, 2);
      const Mat rho = random_state(rng, 2);
      CHECK(variance(f, dual, a, rho) >= -1e-9);
    }
  }
  SUBCASE("delta_{S,G} with G = I matches eta minus the ensemble term") {
    Rng rng(35);
    const OperatorFrame f = random_complete_frame(rng, 2, 6);
    const DualSet dual = optimal_dual(f);
    // equally weighted orthonormal operator basis: G = identity
    WeightedObservables g;
    for (const Mat& e : pauli_frame().elements) g.items.push_back({1.0, e});
    CHECK(max_abs(g.gram() - Mat::Identity(4, 4)) < 1e-12);
    StateEnsemble s;
    s.items = {{1.0, Mat::Identity(2, 2) / 2.0}};
    const double lhs = variance_weighted(f, dual, g, s);
    double second = 0.0;
    for (const auto& [q, a] : g.items)
      second += std::norm((s.average() * a).trace());
    const double rhs = eta_term(f, dual, g, s.average()) - second;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
  SUBCASE("unbiased reconstruction on the subspace") {
    Rng rng(36);
    const OperatorFrame f = random_complete_frame(rng, 2, 6);
    const DualSet dual = optimal_dual(f);
    for (int it = 0; it < 50; ++it) {
      const Mat a = random_hermitian(rng, 2);
      const Mat rho = random_state(rng, 2);
      Cplx est(0.0, 0.0);
      for (std::size_t i = 0; i < f.elements.size(); ++i)
        est += hs_inner(dual.elements[i], a) *
               (rho * f.elements[i]).trace();
      CHECK(std::abs(est - (rho * a).trace()) < 1e-9);
      // reconstruction of A itself
      Mat rec = Mat::Zero(2, 2);
      for (std::size_t i = 0; i < f.elements.size(); ++i)
        rec += hs_inner(dual.elements[i], a) * f.elements[i];
      CHECK(max_abs(rec - a) < 1e-9);
    }
  }
  SUBCASE("ensemble variance averages the second moment") {
    Rng rng(37);
    const OperatorFrame f = random_complete_frame(rng, 2, 5);
    const DualSet dual = optimal_dual(f);
    const Mat a = random_hermitian(rng, 2);
    StateEnsemble s;
    const Mat r1 = random_state(rng, 2), r2 = random_state(rng, 2);
    s.items = {{0.3, r1}, {0.7, r2}};
    const double direct = variance_ensemble(f, dual, a, s);
    double expect = 0.0;
    for (std::size_t i = 0; i < f.elements.size(); ++i)
      expect += std::norm(hs_inner(dual.elements[i], a)) *
                (s.average() * f.elements[i]).trace().real();
    expect -= 0.3 * std::norm((r1 * a).trace());
    expect -= 0.7 * std::norm((r2 * a).trace());
    CHECK(direct == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("length mismatch is rejected") {
    const OperatorFrame f = pauli_frame();
    DualSet dual = canonical_dual(f);
    dual.elements.pop_back();
    CHECK_THROWS_AS(variance(f, dual, Mat::Identity(2, 2),
                             Mat::Identity(2, 2) / 2.0),
                    std::invalid_argument);
  }
}

TEST_CASE("WeightedObservables and StateEnsemble validation") {
  WeightedObservables g;
  CHECK_THROWS_AS(g.gram(), std::invalid_argument);
  g.items = {{-1.0, Mat::Identity(2, 2)}};
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);

  StateEnsemble s;
  s.items = {{0.5, Mat::Identity(2, 2) / 2.0}};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);  // weights sum to 0.5
}
