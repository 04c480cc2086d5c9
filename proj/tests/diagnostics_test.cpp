#include "qsampler/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "gtest/gtest.h"
#include "test_util.hpp"

using namespace qsampler;

namespace {

constexpr double kPi = std::numbers::pi;

/// Composite Simpson rule on [lo, hi] with an even number of panels.
template <class F>
double simpson(F f, double lo, double hi, int panels) {
  const double h = (hi - lo) / panels;
  double s = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

/// Haar moments of N z for a single squared overlap, z ~ Beta(1, N - 1).
double haar_scaled_moment(int n, int q) {
  double m = std::tgamma(q + 1.0);
  for (int i = 0; i < q; ++i) m *= static_cast<double>(n) / (n + i);
  return m;
}

std::vector<double> sorted_phases_of(const ComplexMatrix& u) {
  Eigen::ComplexEigenSolver<ComplexMatrix> es(u, false);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double a = std::arg(es.eigenvalues()[i]);
    if (a < 0) a += 2 * kPi;
    if (a >= 2 * kPi) a = 0.0;
    out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ComplexVector random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexVector v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(g(rng), g(rng));
  return v.normalized();
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / v.size()) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

// ---------------------------------------------------------------------------

TEST(spacing_sample, equally_spaced_phases) {
  std::vector<double> phases;
  for (int j = 0; j < 10; ++j) phases.push_back(0.3 + 2 * kPi * j / 10.0);
  const auto s = spacing_sample(phases);
  ASSERT_EQ(s.spacings.size(), 10u);
  for (double x : s.spacings) EXPECT_NEAR(x, 1.0, 1e-12);
}

TEST(spacing_sample, normalized_to_unit_mean) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi);
  for (int n : {2, 5, 40}) {
    std::vector<double> phases(n);
    for (double& x : phases) x = u(rng);
    std::sort(phases.begin(), phases.end());
    const auto s = spacing_sample(phases);
    EXPECT_EQ(s.spacings.size(), static_cast<std::size_t>(n));
    EXPECT_NEAR(mean_of(s.spacings), 1.0, 1e-10);
    for (double x : s.spacings) EXPECT_GE(x, 0.0);
  }
}

TEST(spacing_sample, invariant_under_global_rotation) {
  std::mt19937_64 rng(22);
  const auto phases = sorted_phases_of(test_util::random_unitary_gs(30, rng));
  auto base = spacing_sample(phases).spacings;
  std::vector<double> rotated;
  for (double p : phases) rotated.push_back(std::fmod(p + 2.2, 2 * kPi));
  std::sort(rotated.begin(), rotated.end());
  auto moved = spacing_sample(rotated).spacings;
  std::sort(base.begin(), base.end());
  std::sort(moved.begin(), moved.end());
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(base[i], moved[i], 1e-10);
}

TEST(spacing_sample, rejects_bad_input) {
  EXPECT_THROW(spacing_sample(std::vector<double>{1.0}), InvalidArgument);
  EXPECT_THROW(spacing_sample(std::vector<double>{2.0, 1.0}), InvalidArgument);
  EXPECT_THROW(spacing_sample(std::vector<double>{1.0, 7.0}), InvalidArgument);
}

TEST(spacing_sample, haar_spacings_follow_surmise) {
  std::mt19937_64 rng(23);
  const auto phases = sorted_phases_of(test_util::random_unitary_gs(600, rng));
  const auto s = spacing_sample(phases);
  EXPECT_LT(ks_distance(s.spacings, [](double x) { return cue_surmise_cdf(x); }), 0.05);
}

TEST(spacing_sample, poisson_spacings_are_rejected_by_surmise) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi);
  std::vector<double> phases(600);
  for (double& x : phases) x = u(rng);
  std::sort(phases.begin(), phases.end());
  const auto s = spacing_sample(phases);
  EXPECT_GT(ks_distance(s.spacings, [](double x) { return cue_surmise_cdf(x); }), 0.2);
}

TEST(cue_surmise, vanishes_at_origin) { EXPECT_EQ(cue_surmise_pdf(0.0), 0.0); }

TEST(cue_surmise, normalized_with_unit_mean) {
  const double norm = simpson([](double s) { return cue_surmise_pdf(s); }, 0.0, 12.0, 20000);
  const double mean = simpson([](double s) { return s * cue_surmise_pdf(s); }, 0.0, 12.0, 20000);
  EXPECT_NEAR(norm, 1.0, 1e-6);
  EXPECT_NEAR(mean, 1.0, 1e-6);
}

TEST(cue_surmise, literal_form) {
  EXPECT_NEAR(cue_surmise_pdf(0.0, SurmiseForm::unnormalized), 32.0 / (kPi * kPi), 1e-15);
  EXPECT_NEAR(cue_surmise_pdf(0.0, SurmiseForm::unnormalized), 3.2423, 1e-4);
  const double norm = simpson(
      [](double s) { return cue_surmise_pdf(s, SurmiseForm::unnormalized); }, 0.0, 12.0, 20000);
  EXPECT_NEAR(norm, 8.0 / kPi, 1e-6);
}

TEST(cue_surmise, cdf_matches_quadrature) {
  for (double s : {0.0, 0.3, 1.0, 1.7, 3.0}) {
    for (auto form : {SurmiseForm::wigner, SurmiseForm::unnormalized}) {
      const double q = simpson([form](double t) { return cue_surmise_pdf(t, form); }, 0.0, s, 2000);
      EXPECT_NEAR(cue_surmise_cdf(s, form), q, 1e-10);
    }
  }
}

TEST(cue_surmise, negative_argument_is_domain_error) {
  EXPECT_THROW(cue_surmise_pdf(-0.1), DomainError);
  EXPECT_THROW(cue_surmise_cdf(-0.1), DomainError);
}

TEST(ks_distance, hand_computed) {
  // uniform CDF on [0, 1], sample {0.5}: sup(|1 - 0.5|, |0.5 - 0|) = 0.5
  const auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  EXPECT_DOUBLE_EQ(ks_distance({0.5}, uniform), 0.5);
  EXPECT_NEAR(ks_distance({0.25, 0.75}, uniform), 0.25, 1e-15);
  EXPECT_THROW(ks_distance({}, uniform), InvalidArgument);
}

// ---------------------------------------------------------------------------

TEST(transition_matrix, identity_pattern) {
  std::mt19937_64 rng(31);
  const Basis b{UnitaryMatrix(test_util::random_unitary_gs(7, rng)), BasisLabel::custom};
  const auto t = transition_matrix(UnitaryMatrix::identity(7), b);
  EXPECT_LT((t.z - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(transition_matrix, doubly_stochastic) {
  std::mt19937_64 rng(32);
  const UnitaryMatrix u(test_util::random_unitary_gs(20, rng));
  const Basis b{UnitaryMatrix(test_util::random_unitary_gs(20, rng)), BasisLabel::custom};
  const auto t = transition_matrix(u, b);
  EXPECT_LT((t.z.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-8);
  EXPECT_LT((t.z.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-8);
  EXPECT_GE(t.z.minCoeff(), 0.0);
  EXPECT_LE(t.z.maxCoeff(), 1.0);
}

TEST(transition_matrix, matches_overlap_definition) {
  std::mt19937_64 rng(33);
  const int n = 6;
  const UnitaryMatrix u(test_util::random_unitary_gs(n, rng));
  const Basis b{UnitaryMatrix(test_util::random_unitary_gs(n, rng)), BasisLabel::custom};
  const auto t = transition_matrix(u, b);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const Complex amp = b.vectors.matrix().col(j).dot(u.matrix() * b.vectors.matrix().col(k));
      EXPECT_NEAR(t.z(j, k), std::norm(amp), 1e-12);
    }
}

TEST(transition_matrix, dimension_mismatch) {
  EXPECT_THROW(transition_matrix(UnitaryMatrix::identity(3), angle_basis(4)), InvalidDimension);
}

TEST(trans_moments, uniform_case) {
  const int n = 8;
  TransitionMatrix t{Eigen::MatrixXd::Constant(n, n, 1.0 / n), BasisLabel::angle};
  const auto m = trans_moments(t);
  EXPECT_NEAR(m.m2, 1.0, 1e-14);
  EXPECT_NEAR(m.m3, 1.0, 1e-14);
  EXPECT_NEAR(m.se2, 0.0, 1e-7);
}

TEST(trans_moments, identity_gives_dimension) {
  const int n = 9;
  const auto m = trans_moments(transition_matrix(UnitaryMatrix::identity(n), angle_basis(n)));
  // N diagonal entries (N * 1)^q out of N^2 values
  EXPECT_NEAR(m.m2, n, 1e-12);
  EXPECT_NEAR(m.m3, n * n, 1e-10);
  EXPECT_GE(m.m3, m.m2);
}

TEST(sample_moments, exponential_reference) {
  std::mt19937_64 rng(34);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(400000);
  for (double& v : x) v = e(rng);
  const auto m = sample_moments(x);
  EXPECT_NEAR(m.m2, 2.0, 3 * m.se2);
  EXPECT_NEAR(m.m3, 6.0, 3 * m.se3);
}

TEST(sample_moments, hand_computed_errors) {
  const std::vector<double> x{0.0, 2.0};
  const auto m = sample_moments(x);
  EXPECT_DOUBLE_EQ(m.m2, 2.0);
  EXPECT_DOUBLE_EQ(m.m3, 4.0);
  // <x^4> = 8, se2 = sqrt(8 - 4) / sqrt(2)
  EXPECT_NEAR(m.se2, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(m.se3, std::sqrt(32.0 - 16.0) / std::sqrt(2.0), 1e-14);
}

TEST(trans_moments, haar_angle_basis) {
  std::mt19937_64 rng(35);
  const int n = 81;
  const auto m = trans_moments(
      transition_matrix(UnitaryMatrix(test_util::random_unitary_gs(n, rng)), angle_basis(n)));
  EXPECT_NEAR(m.m2, haar_scaled_moment(n, 2), 3 * m.se2);
  EXPECT_NEAR(m.m3, haar_scaled_moment(n, 3), 3 * m.se3);
  EXPECT_NEAR(m.m2, 2.0, 3 * m.se2 + 2.0 / (n + 1));
}

TEST(trans_moments, hybrid_propagator_deviates_in_h0_basis) {
  const auto p = hybrid_floquet_params(81);
  const auto m = trans_moments(transition_matrix(floquet_propagator(p), h0_eigenbasis(p)));
  EXPECT_GT(m.m2, 5.0);
  EXPECT_GE(m.m3, m.m2);
}

TEST(porter_thomas_cdf, reference_points) {
  EXPECT_EQ(porter_thomas_cdf(0.0, 10), 0.0);
  EXPECT_NEAR(porter_thomas_cdf(std::log(2.0) / 37.0, 37), 0.5, 1e-15);
  EXPECT_THROW(porter_thomas_cdf(-1e-3, 10), DomainError);
}

TEST(porter_thomas_cdf, haar_transition_probabilities) {
  std::mt19937_64 rng(36);
  const int n = 81;
  const auto t =
      transition_matrix(UnitaryMatrix(test_util::random_unitary_gs(n, rng)), angle_basis(n));
  std::vector<double> z(t.z.data(), t.z.data() + t.z.size());
  EXPECT_LT(ks_distance(z, [n](double x) { return porter_thomas_cdf(x, n); }), 0.03);
}

// ---------------------------------------------------------------------------

TEST(ipr, basis_vector_and_flat_state) {
  const int n = 12;
  const Basis b = angle_basis(n);
  for (int q = 2; q <= 4; ++q) {
    EXPECT_NEAR(ipr(ComplexVector::Unit(n, 5), b, q), 1.0, 1e-15);
    const ComplexVector flat = ComplexVector::Constant(n, 1.0 / std::sqrt(12.0));
    EXPECT_NEAR(ipr(flat, b, q), std::pow(12.0, 1.0 - q), 1e-14);
  }
}

TEST(ipr, monotone_in_order_and_bounded) {
  std::mt19937_64 rng(41);
  const int n = 20;
  const Basis b{UnitaryMatrix(test_util::random_unitary_gs(n, rng)), BasisLabel::custom};
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexVector psi = random_state(n, rng);
    for (int q = 2; q <= 5; ++q) {
      const double iq = ipr(psi, b, q);
      EXPECT_LE(ipr(psi, b, q + 1), iq);
      EXPECT_GE(iq, std::pow(n, 1.0 - q) * (1 - 1e-12));
      EXPECT_LE(iq, 1.0);
    }
  }
}

TEST(ipr, validation) {
  const Basis b = angle_basis(4);
  EXPECT_THROW(ipr(ComplexVector::Constant(4, 1.0), b, 2), ContractViolation);
  EXPECT_THROW(ipr(ComplexVector::Unit(4, 0), b, 1), InvalidArgument);
  EXPECT_THROW(ipr(ComplexVector::Unit(5, 0), b, 2), InvalidDimension);
}

TEST(ipr, haar_states_mean) {
  std::mt19937_64 rng(42);
  const int n = 81;
  const Basis b = angle_basis(n);
  std::vector<double> values;
  for (int i = 0; i < 500; ++i) values.push_back(ipr(random_state(n, rng), b, 2));
  EXPECT_NEAR(mean_of(values), haar_ipr_exact(n, 2), 3 * se_of(values));
  // 2/81 is the large-N value; it sits 2/81 - 2/82 above the exact mean.
  const double bias = haar_ipr_asymptotic(n, 2) - haar_ipr_exact(n, 2);
  EXPECT_NEAR(mean_of(values), 2.0 / 81.0, 3 * se_of(values) + bias);
}

TEST(ipr, haar_expectation_formulas) {
  EXPECT_NEAR(haar_ipr_exact(81, 2), 2.0 / 82.0, 1e-15);
  EXPECT_NEAR(haar_ipr_exact(81, 3), 6.0 / (82.0 * 83.0), 1e-15);
  EXPECT_NEAR(haar_ipr_asymptotic(81, 2), 2.0 / 81.0, 1e-15);
  EXPECT_NEAR(haar_ipr_asymptotic(81, 3), 6.0 / 6561.0, 1e-15);
}

TEST(ipr_set, identity_and_fourier) {
  const int n = 16;
  for (int q = 2; q <= 3; ++q) {
    for (double v : ipr_set(UnitaryMatrix::identity(n), angle_basis(n), q)) {
      EXPECT_NEAR(v, 1.0, 1e-15);
    }
    const auto f = ipr_set(dft_matrix(n), angle_basis(n), q);
    ASSERT_EQ(f.size(), 16u);
    for (double v : f) EXPECT_NEAR(v, std::pow(16.0, 1.0 - q), 1e-14);
  }
}

TEST(ipr_set, matches_single_state_ipr) {
  std::mt19937_64 rng(43);
  const int n = 10;
  const UnitaryMatrix u(test_util::random_unitary_gs(n, rng));
  const Basis b{UnitaryMatrix(test_util::random_unitary_gs(n, rng)), BasisLabel::custom};
  const auto set = ipr_set(u, b, 3);
  for (int j = 0; j < n; ++j) {
    const ComplexVector psi = u.matrix() * b.vectors.matrix().col(j);
    EXPECT_NEAR(set[static_cast<std::size_t>(j)], ipr(psi, b, 3), 1e-14);
  }
}

TEST(ipr_set, haar_unitary_mean) {
  std::mt19937_64 rng(44);
  const int n = 81;
  const auto s = ipr_set(UnitaryMatrix(test_util::random_unitary_gs(n, rng)), angle_basis(n), 2);
  EXPECT_NEAR(mean_of(s), 2.0 / 81.0, 3 * se_of(s));
}

// ---------------------------------------------------------------------------

TEST(husimi_grid, angle_ket_peaks_at_its_angle) {
  const int n = 24;
  for (int j : {0, 5, 23}) {
    const auto g = husimi_grid(ComplexVector::Unit(n, j), n);
    Eigen::Index r, c;
    g.values.maxCoeff(&r, &c);
    EXPECT_EQ(c, j);
    EXPECT_NEAR(g.phi_at(static_cast<int>(c)), kTwoPi * j / n, 1e-15);
  }
}

TEST(husimi_grid, fourier_mode_peaks_at_its_momentum) {
  const int n = 24;
  for (int k : {0, 3, 17}) {
    ComplexVector psi(n);
    for (int j = 0; j < n; ++j) psi[j] = std::polar(1.0 / std::sqrt(24.0), kTwoPi * j * k / n);
    const auto g = husimi_grid(psi, n);
    Eigen::Index r, c;
    g.values.maxCoeff(&r, &c);
    EXPECT_EQ(r, k);
    // flat in angle: the row is constant up to the periodization tail
    EXPECT_NEAR(g.values.row(k).minCoeff() / g.values.row(k).maxCoeff(), 1.0, 1e-8);
  }
}

TEST(husimi_grid, global_phase_invariance_and_positivity) {
  std::mt19937_64 rng(51);
  const ComplexVector psi = random_state(15, rng);
  const auto a = husimi_grid(psi, 30);
  const auto b = husimi_grid(psi * std::polar(1.0, 1.3), 30);
  EXPECT_LT((a.values - b.values).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_GE(a.values.minCoeff(), 0.0);
  EXPECT_TRUE(a.values.allFinite());
  EXPECT_LE(a.values.maxCoeff(), 1.0 + 1e-12);
}

TEST(husimi_grid, coherent_state_overlap_oracle) {
  std::mt19937_64 rng(52);
  const int n = 11;
  const ComplexVector psi = random_state(n, rng);
  const auto g = husimi_grid(psi, 7);
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 7; ++c) {
      const double phi = kTwoPi * c / 7, p = kTwoPi * r / 7;
      ComplexVector coh(n);
      for (int j = 0; j < n; ++j) {
        double amp = 0.0;
        for (int m = -5; m <= 5; ++m) {
          const double x = kTwoPi * j / n - phi + kTwoPi * m;
          amp += std::exp(-x * x * n / (4 * kPi));
        }
        coh[j] = amp * std::exp(Complex(0.0, p * j));
      }
      coh.normalize();
      EXPECT_NEAR(g.values(r, c), std::norm(coh.dot(psi)), 1e-13);
    }
}

TEST(husimi_grid, haar_eigenstates_spread_over_phase_space) {
  std::mt19937_64 rng(53);
  const int n = 49;
  const UnitaryMatrix u(test_util::random_unitary_gs(n, rng));
  const ComplexMatrix v = unitary_eigenvectors(u);
  std::vector<double> occupancy;
  for (int i = 0; i < n; ++i) occupancy.push_back(husimi_occupancy(husimi_grid(v.col(i), n)));
  std::sort(occupancy.begin(), occupancy.end());
  EXPECT_GT(occupancy[n / 2], 0.5);
  EXPECT_GT(occupancy[0], 0.2);
}

TEST(husimi_grid, libration_ground_state_is_localized) {
  const auto p = hybrid_floquet_params(49);
  const Basis b = h0_eigenbasis(p);
  const double ground = husimi_occupancy(husimi_grid(b.vectors.matrix().col(0), 49));
  EXPECT_LT(ground, 0.1);
}

TEST(unitary_eigenvectors, diagonalize) {
  std::mt19937_64 rng(54);
  const UnitaryMatrix u(test_util::random_unitary_gs(12, rng));
  const ComplexMatrix v = unitary_eigenvectors(u);
  const auto phases = eigenphases(u);
  for (int i = 0; i < 12; ++i) {
    const ComplexVector lhs = u.matrix() * v.col(i);
    const ComplexVector rhs = std::polar(1.0, phases[static_cast<std::size_t>(i)]) * v.col(i);
    EXPECT_LT((lhs - rhs).norm(), 1e-10);
  }
}

TEST(histogram, counts_and_edges) {
  const std::vector<double> v{0.0, 0.1, 0.5, 0.99, 1.0, 1.5, -0.2};
  const auto h = histogram(v, 0.0, 1.0, 2);
  EXPECT_EQ(h.counts[0], 2u);
  EXPECT_EQ(h.counts[1], 3u);
  EXPECT_DOUBLE_EQ(h.bin_width(), 0.5);
  EXPECT_THROW(histogram(v, 1.0, 1.0, 3), InvalidArgument);
}
