#include "qsampler/linalg.hpp"

#include <numbers>
#include <random>

#include "gtest/gtest.h"
#include "test_util.hpp"

using namespace qsampler;

TEST(dft_matrix, one_dimensional) {
  const auto q = dft_matrix(1);
  ASSERT_EQ(q.dim(), 1);
  EXPECT_NEAR(std::abs(q.matrix()(0, 0) - Complex(1.0, 0.0)), 0.0, 1e-15);
}

TEST(dft_matrix, two_dimensional_is_hadamard) {
  const auto q = dft_matrix(2).matrix();
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(q(0, 0) - r), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(q(0, 1) - r), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(q(1, 0) - r), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(q(1, 1) + r), 0.0, 1e-15);
}

TEST(dft_matrix, unitary_by_direct_multiplication) {
  for (int n = 1; n <= 128; ++n) {
    const ComplexMatrix q = dft_matrix(n).matrix();
    // explicit triple loop, not Eigen's product kernel
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Complex s = 0.0;
        for (int k = 0; k < n; ++k) s += std::conj(q(k, i)) * q(k, j);
        worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
      }
    }
    EXPECT_LT(worst, 1e-12) << "N=" << n;
  }
}

TEST(dft_matrix, rejects_zero_dimension) {
  EXPECT_THROW(dft_matrix(0), InvalidDimension);
}

TEST(eig_hermitian, diagonal) {
  ComplexMatrix h = ComplexMatrix::Zero(3, 3);
  h(0, 0) = 3;
  h(1, 1) = 1;
  h(2, 2) = 2;
  const auto eig = eig_hermitian(HermitianMatrix(h));
  ASSERT_EQ(eig.eigenvalues.size(), 3u);
  EXPECT_NEAR(eig.eigenvalues[0], 1.0, 1e-14);
  EXPECT_NEAR(eig.eigenvalues[1], 2.0, 1e-14);
  EXPECT_NEAR(eig.eigenvalues[2], 3.0, 1e-14);
}

TEST(eig_hermitian, zero_matrix) {
  const auto eig = eig_hermitian(HermitianMatrix(ComplexMatrix::Zero(5, 5)));
  for (double v : eig.eigenvalues) EXPECT_EQ(v, 0.0);
}

TEST(eig_hermitian, reconstructs_random_hermitian) {
  std::mt19937_64 rng(11);
  const auto h = test_util::random_hermitian(16, rng);
  const auto eig = eig_hermitian(h);
  const auto& v = eig.eigenvectors.matrix();
  RealVector d = Eigen::Map<const RealVector>(eig.eigenvalues.data(), 16);
  const ComplexMatrix rebuilt = v * d.cast<Complex>().asDiagonal() * v.adjoint();
  EXPECT_LT(max_abs(rebuilt - h.matrix()), 1e-8);
  const double hnorm = h.matrix().norm();
  for (int j = 0; j < 16; ++j) {
    const ComplexVector r = h.matrix() * v.col(j) - eig.eigenvalues[j] * v.col(j);
    EXPECT_LT(r.norm(), 1e-8 * hnorm);
  }
  EXPECT_TRUE(std::is_sorted(eig.eigenvalues.begin(), eig.eigenvalues.end()));
}

TEST(eig_hermitian, rejects_non_hermitian) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(eig_hermitian(HermitianMatrix(m)), ContractViolation);
}

TEST(eigenphases, identity) {
  for (double th : eigenphases(UnitaryMatrix::identity(4))) EXPECT_EQ(th, 0.0);
}

TEST(eigenphases, quarter_turns) {
  ComplexMatrix d = ComplexMatrix::Zero(4, 4);
  d(0, 0) = 1.0;
  d(1, 1) = Complex(0, 1);
  d(2, 2) = -1.0;
  d(3, 3) = Complex(0, -1);
  const auto th = eigenphases(UnitaryMatrix(d));
  const double pi = std::numbers::pi;
  EXPECT_NEAR(th[0], 0.0, 1e-14);
  EXPECT_NEAR(th[1], pi / 2, 1e-14);
  EXPECT_NEAR(th[2], pi, 1e-14);
  EXPECT_NEAR(th[3], 3 * pi / 2, 1e-14);
}

TEST(eigenphases, product_matches_determinant) {
  std::mt19937_64 rng(5);
  const UnitaryMatrix u(test_util::random_unitary_gs(32, rng));
  const auto th = eigenphases(u);
  double total = 0.0;
  for (double t : th) total += t;
  const Complex det = u.matrix().determinant();
  EXPECT_LT(std::abs(std::polar(1.0, total) - det), 1e-8);
  for (double t : th) {
    EXPECT_GE(t, 0.0);
    EXPECT_LT(t, kTwoPi);
  }
}

TEST(eigenphases, stable_under_eigenbasis_reordering) {
  std::mt19937_64 rng(8);
  const ComplexMatrix v = test_util::random_unitary_gs(12, rng);
  std::uniform_real_distribution<double> ph(0.0, kTwoPi);
  ComplexVector lambda(12);
  for (int j = 0; j < 12; ++j) lambda[j] = std::polar(1.0, ph(rng));
  const ComplexMatrix u1 = v * lambda.asDiagonal() * v.adjoint();
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(12);
  perm.setIdentity();
  std::shuffle(perm.indices().data(), perm.indices().data() + 12, rng);
  const ComplexMatrix vp = v * perm;
  const ComplexVector lp = perm.transpose() * lambda;
  const ComplexMatrix u2 = vp * lp.asDiagonal() * vp.adjoint();
  const auto a = eigenphases(UnitaryMatrix(u1));
  const auto b = eigenphases(UnitaryMatrix(u2));
  for (int j = 0; j < 12; ++j) EXPECT_NEAR(a[j], b[j], 1e-10);
}

TEST(unitary_matrix, rejects_non_unitary) {
  ComplexMatrix m = ComplexMatrix::Identity(3, 3);
  m(0, 0) = 1.001;
  EXPECT_THROW(UnitaryMatrix{m}, ContractViolation);
  EXPECT_NO_THROW(UnitaryMatrix(m, 1e-2));
}

TEST(expm_hermitian, zero_time_is_identity) {
  std::mt19937_64 rng(3);
  const auto u = expm_hermitian(test_util::random_hermitian(6, rng), 0.0);
  EXPECT_LT(max_abs(u.matrix() - ComplexMatrix::Identity(6, 6)), 1e-12);
}

TEST(expm_hermitian, diagonal_gives_phases) {
  ComplexMatrix h = ComplexMatrix::Zero(3, 3);
  h(0, 0) = 0.5;
  h(1, 1) = -1.25;
  h(2, 2) = 2.0;
  const auto u = expm_hermitian(HermitianMatrix(h), 0.7).matrix();
  for (int j = 0; j < 3; ++j) {
    EXPECT_LT(std::abs(u(j, j) - std::polar(1.0, -0.7 * h(j, j).real())), 1e-14);
  }
  EXPECT_LT(std::abs(u(0, 1)), 1e-14);
}

TEST(expm_hermitian, inverse_and_group_property) {
  std::mt19937_64 rng(21);
  const auto h = test_util::random_hermitian(16, rng);
  const auto fwd = expm_hermitian(h, 0.37);
  const auto back = expm_hermitian(h, -0.37);
  EXPECT_LT(max_abs(fwd.matrix() * back.matrix() - ComplexMatrix::Identity(16, 16)), 1e-10);
  EXPECT_LT(fwd.defect(), 1e-10);
  const auto s1 = expm_hermitian(h, 0.2);
  const auto s2 = expm_hermitian(h, 1.1);
  const auto s12 = expm_hermitian(h, 1.3);
  EXPECT_LT(max_abs(s1.matrix() * s2.matrix() - s12.matrix()), 1e-9);
}
