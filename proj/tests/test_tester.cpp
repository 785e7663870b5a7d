#include "optomo/tester.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace optomo;
using namespace optomo::testsup;

namespace {

// Applies the map through its Kraus operators to one leg of a bipartite
// state; the independent route for the Born-rule equivalence checks.
Mat apply_kraus_leg1(const std::vector<Mat>& kraus, const Mat& rho,
                     Eigen::Index d_anc) {
  Mat out = Mat::Zero(kraus.front().rows() * d_anc,
                      kraus.front().rows() * d_anc);
  const Mat id = Mat::Identity(d_anc, d_anc);
  for (const Mat& k : kraus) {
    const Mat lift = kron(k, id);
    out += lift * rho * lift.adjoint();
  }
  return out;
}

Tester bell_tester(int d) {
  Tester t;
  t.d_out = d;
  t.d_in = d;
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n)
      t.elements.push_back(bell_projector(m, n, d) / d);
  t.sigma = Mat::Identity(d, d) / d;
  return t;
}

}  // namespace

TEST_CASE("choi_from_kraus") {
  SUBCASE("identity channel gives |I>><<I|") {
    const ChoiOp r = choi_from_kraus({Mat::Identity(3, 3)});
    const Vec vi = vectorize(Mat::Identity(3, 3));
    CHECK(max_abs(r.m - vi * vi.adjoint()) < 1e-14);
    CHECK(r.is_channel());
    CHECK(r.is_unital_channel());
  }
  SUBCASE("Weyl Kraus set over d gives the depolarizing Choi I (x) I / d") {
    const int d = 3;
    std::vector<Mat> kraus;
    for (int m = 0; m < d; ++m)
      for (int n = 0; n < d; ++n)
        kraus.push_back(weyl_unitary(m, n, d) / d);
    const ChoiOp r = choi_from_kraus(kraus);
    CHECK(max_abs(r.m - Mat::Identity(d * d, d * d) / d) < 1e-12);
    CHECK(r.is_channel());
  }
  SUBCASE("unitary channel is unital with Choi |U>><<U|") {
    Rng rng(21);
    const Mat u = haar_unitary(3, rng);
    const ChoiOp r = choi_from_kraus({u});
    const Vec vu = vectorize(u);
    CHECK(max_abs(r.m - vu * vu.adjoint()) < 1e-12);
    CHECK(r.is_unital_channel());
  }
  SUBCASE("trace-increasing sets are rejected") {
    CHECK_THROWS_AS(choi_from_kraus({Mat::Identity(2, 2) * 1.1}),
                    std::invalid_argument);
  }
  SUBCASE("genuine quantum operation is not a channel") {
    Mat half = Mat::Zero(2, 2);
    half(0, 0) = 0.5;
    const ChoiOp r = choi_from_kraus({half});
    CHECK(r.is_quantum_operation());
    CHECK_FALSE(r.is_channel());
  }
}

TEST_CASE("apply_choi") {
  Rng rng(22);
  SUBCASE("identity Choi acts as the identity") {
    const ChoiOp r = choi_from_kraus({Mat::Identity(2, 2)});
    const Mat rho = random_state(rng, 2);
    CHECK(max_abs(apply_choi(r, rho) - rho) < 1e-13);
  }
  SUBCASE("depolarizing Choi maps everything to I/d") {
    const int d = 3;
    ChoiOp r{d, d, Mat::Identity(d * d, d * d) / d};
    const Mat rho = random_state(rng, d);
    CHECK(max_abs(apply_choi(r, rho) - Mat::Identity(d, d) / d) < 1e-13);
  }
  SUBCASE("unitary Choi conjugates, against the direct route") {
    const Mat u = haar_unitary(3, rng);
    const ChoiOp r = choi_from_kraus({u});
    const Mat rho = random_state(rng, 3);
    CHECK(max_abs(apply_choi(r, rho) - u * rho * u.adjoint()) < 1e-12);
  }
  SUBCASE("channels preserve trace on random states") {
    for (int it = 0; it < 20; ++it) {
      const ChoiOp r = random_channel(rng, 3);
      const Mat rho = random_state(rng, 3);
      CHECK(std::abs(apply_choi(r, rho).trace().real() - 1.0) < 1e-10);
    }
  }
  SUBCASE("dimension mismatch") {
    const ChoiOp r = choi_from_kraus({Mat::Identity(2, 2)});
    CHECK_THROWS_AS(apply_choi(r, Mat::Identity(3, 3)),
                    std::invalid_argument);
  }
}

TEST_CASE("validate_tester") {
  SUBCASE("Bell tester at sigma = I/d passes") {
    const Mat sigma = validate_tester(bell_tester(2));
    CHECK(max_abs(sigma - Mat::Identity(2, 2) / 2) < 1e-12);
  }
  SUBCASE("a POVM that is not I (x) sigma normalized is rejected") {
    Tester t;
    t.d_out = 2;
    t.d_in = 2;
    Rng rng(23);
    const Mat p = random_psd(rng, 4);
    t.elements = {p, Mat::Identity(4, 4) - p};  // sums to I, not I (x) sigma
    t.sigma = Mat::Identity(2, 2) / 2;
    CHECK_THROWS_AS(validate_tester(t), std::invalid_argument);
  }
  SUBCASE("perturbations above tolerance are rejected") {
    Rng rng(24);
    for (int it = 0; it < 20; ++it) {
      Tester t = random_tester(rng, 2, 2, 4);
      CHECK_NOTHROW(validate_tester(t));
      Mat bump = random_hermitian(rng, 4);
      bump *= 1e-6 / max_abs(bump);
      t.elements[0] += bump;
      CHECK_THROWS_AS(validate_tester(t, 1e-10), std::invalid_argument);
    }
  }
  SUBCASE("discretized covariant average approaches I (x) I / d") {
    // (1/K) sum_k W_k (sum_i Pi_i) W_k^dag -> I (x) I / d
    const int d = 2, K = 10000;
    Rng rng(25);
    const SeedSet seeds = random_seed_set(rng, d, d, 3);
    Mat seed_sum = Mat::Zero(d * d, d * d);
    for (std::size_t i = 0; i < seeds.size(); ++i) seed_sum += seeds.element(i);
    Mat acc = Mat::Zero(d * d, d * d);
    for (int k = 0; k < K; ++k) {
      const Mat g = haar_unitary(d, rng);
      const Mat h = haar_unitary(d, rng);
      const Mat w = kron(g, h);
      acc += w * seed_sum * w.adjoint();
    }
    acc /= static_cast<double>(K);
    CHECK(op_norm(acc - Mat::Identity(d * d, d * d) / d) <=
          5.0 / std::sqrt(static_cast<double>(K)));
  }
}

TEST_CASE("tester_probabilities") {
  SUBCASE("identity channel against the Bell tester concentrates on |I>>") {
    const int d = 3;
    const ChoiOp r = choi_from_kraus({Mat::Identity(d, d)});
    const auto p = tester_probabilities(r, bell_tester(d));
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 1; i < p.size(); ++i)
      CHECK(std::abs(p[i]) < 1e-12);
  }
  SUBCASE("depolarizing channel gives p_i = Tr[Pi_i]/d") {
    const int d = 2;
    ChoiOp r{d, d, Mat::Identity(d * d, d * d) / d};
    Rng rng(26);
    const Tester t = random_tester(rng, d, d, 5);
    const auto p = tester_probabilities(r, t);
    for (std::size_t i = 0; i < p.size(); ++i)
      CHECK(p[i] == doctest::Approx(t.elements[i].trace().real() / d)
                        .epsilon(1e-10));
  }
}

TEST_CASE("realization round trip and Born equivalence") {
  Rng rng(27);
  SUBCASE("sigma = I/d gives the maximally entangled input and P_i = d Pi_i") {
    const Tester t = bell_tester(2);
    const Realization real = tester_to_realization(t);
    const Vec vi = vectorize(Mat::Identity(2, 2));
    CHECK(max_abs(real.nu - (vi * vi.adjoint()) / 2.0) < 1e-12);
    REQUIRE(real.d_anc == 2);
    for (std::size_t i = 0; i < t.elements.size(); ++i)
      CHECK(max_abs(real.povm[i] - 2.0 * t.elements[i]) < 1e-12);
  }
  SUBCASE("round trip is the identity on random full-rank testers") {
    for (int it = 0; it < 25; ++it) {
      const Tester t = random_tester(rng, 2, 2, 4);
      const Tester back = realization_to_tester(tester_to_realization(t));
      for (std::size_t i = 0; i < t.elements.size(); ++i)
        CHECK(max_abs(back.elements[i] - t.elements[i]) < 1e-9);
      CHECK(max_abs(back.sigma - t.sigma) < 1e-9);
    }
  }
  SUBCASE("identical statistics through both Born rules") {
    for (int it = 0; it < 25; ++it) {
      const int d = 2;
      const auto kraus = random_kraus_channel(rng, d, 3);
      const ChoiOp r = choi_from_kraus(kraus);
      const Tester t = random_tester(rng, d, d, 5);
      const Realization real = tester_to_realization(t);
      const Mat evolved = apply_kraus_leg1(kraus, real.nu, real.d_anc);
      const auto p_tester = tester_probabilities(r, t);
      for (std::size_t i = 0; i < t.elements.size(); ++i) {
        const double p_real = (evolved * real.povm[i]).trace().real();
        CHECK(std::abs(p_real - p_tester[i]) < 1e-9);
      }
    }
  }
  SUBCASE("rank-deficient sigma restricts to the support") {
    // Build a tester whose sigma has rank 1: all elements live on that block.
    const int d = 2;
    Mat sigma = Mat::Zero(d, d);
    sigma(0, 0) = 1.0;
    Tester t;
    t.d_out = d;
    t.d_in = d;
    t.sigma = sigma;
    Mat e0 = Mat::Zero(d, d);
    e0(0, 0) = 1.0;
    t.elements = {0.5 * kron(Mat::Identity(d, d), e0),
                  0.5 * kron(Mat::Identity(d, d), e0)};
    CHECK_THROWS_AS(tester_to_realization(t, /*strict=*/true),
                    std::invalid_argument);
    const Realization real = tester_to_realization(t);
    CHECK(real.d_anc == 1);
    const Tester back = realization_to_tester(real);
    for (std::size_t i = 0; i < t.elements.size(); ++i)
      CHECK(max_abs(back.elements[i] - t.elements[i]) < 1e-9);
  }
}

TEST_CASE("realization_to_tester structure") {
  Rng rng(28);
  SUBCASE("maximally entangled input with Bell POVM gives B/d elements") {
    const int d = 2;
    Realization real;
    real.d_out = d;
    real.d_in = d;
    real.d_anc = d;
    const Vec vi = vectorize(Mat::Identity(d, d));
    real.nu = (vi * vi.adjoint()) / d;
    for (int m = 0; m < d; ++m)
      for (int n = 0; n < d; ++n) real.povm.push_back(bell_projector(m, n, d));
    const Tester t = realization_to_tester(real);
    CHECK(max_abs(t.sigma - Mat::Identity(d, d) / d) < 1e-12);
    for (std::size_t i = 0; i < t.elements.size(); ++i)
      CHECK(max_abs(t.elements[i] - bell_projector(static_cast<int>(i) / d,
                                                   static_cast<int>(i) % d, d) /
                                        d) < 1e-12);
  }
  SUBCASE("product input factorizes the tester elements") {
    const int d = 2;
    const Mat rho_in = random_state(rng, d);
    Vec alpha(d);
    for (int i = 0; i < d; ++i) alpha(i) = rng.complex_normal();
    alpha /= alpha.norm();
    const Mat rho_anc = alpha * alpha.adjoint();  // rank one
    Realization real;
    real.d_out = d;
    real.d_in = d;
    real.d_anc = d;
    real.nu = kron(rho_in, rho_anc);
    // complete the POVM with two random effects
    const Mat p = random_psd(rng, d * d);
    const Mat s = psd_sqrt(p + random_psd(rng, d * d));
    const Mat sinv = pseudo_inverse(s);
    const Mat p0 = sinv * p * sinv;
    real.povm = {p0, Mat::Identity(d * d, d * d) - p0};
    const Tester t = realization_to_tester(real);
    CHECK(max_abs(t.sigma - rho_in.transpose()) < 1e-12);
    for (const Mat& pi : t.elements) {
      // rank-one ancilla forces the factorized form X (x) rho_in^T
      const Mat x = ptrace_leg2(pi, d, d) / rho_in.transpose().trace().real();
      CHECK(max_abs(pi - kron(x, rho_in.transpose())) < 1e-9);
    }
  }
}

TEST_CASE("covariant_element") {
  Rng rng(29);
  SeedSet seeds = random_seed_set(rng, 2, 2, 3);
  const Mat g = haar_unitary(2, rng);
  const Mat h = haar_unitary(2, rng);
  SUBCASE("identity pair leaves elements unchanged") {
    const Mat id = Mat::Identity(2, 2);
    CHECK(max_abs(covariant_element(seeds, 0, id, id) - seeds.element(0)) <
          1e-14);
  }
  SUBCASE("trace and rank are preserved") {
    const Mat conj = covariant_element(seeds, 0, g, h);
    CHECK(std::abs(conj.trace().real() - seeds.element(0).trace().real()) <
          1e-12);
  }
  SUBCASE("vectorized form matches the product representation") {
    const Mat conj = covariant_element(seeds, 1, g, h);
    const Mat w = kron(kron(g, h), kron(g, h).conjugate());
    const Vec lhs = vectorize(conj);
    const Vec rhs = w * vectorize(seeds.element(1));
    CHECK(max_abs(unvectorize(lhs - rhs, 4, 4)) < 1e-12);
  }
  SUBCASE("non-unitary arguments are rejected") {
    CHECK_THROWS_AS(covariant_element(seeds, 0, Mat::Zero(2, 2), h),
                    std::invalid_argument);
  }
}
