#ifndef QSAMPLER_DIAGNOSTICS_HPP
#define QSAMPLER_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qsampler/harper.hpp"
#include "qsampler/linalg.hpp"

namespace qsampler {

// ---------------------------------------------------------------------------
// Quasi-energy spacings

struct SpacingSample {
  std::vector<double> spacings;  // normalized to mean 1
};

/// Circular nearest-neighbour spacings of ascending phases in [0, 2 pi),
/// including the wrap-around gap, divided by their mean.
inline SpacingSample spacing_sample(std::span<const double> phases) {
  if (phases.size() < 2) throw InvalidArgument("spacing_sample: need at least 2 phases");
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (!(phases[i] >= 0.0 && phases[i] < kTwoPi)) {
      throw InvalidArgument("spacing_sample: phases must lie in [0, 2 pi)");
    }
    if (i > 0 && phases[i] < phases[i - 1]) {
      throw InvalidArgument("spacing_sample: phases must be ascending");
    }
  }
  const std::size_t n = phases.size();
  std::vector<double> gaps(n);
  for (std::size_t i = 0; i + 1 < n; ++i) gaps[i] = phases[i + 1] - phases[i];
  gaps[n - 1] = kTwoPi - (phases[n - 1] - phases[0]);
  double sum = 0.0;
  for (double g : gaps) sum += g;
  const double mean = sum / static_cast<double>(n);
  for (double& g : gaps) g /= mean;
  return SpacingSample{std::move(gaps)};
}

enum class SurmiseForm {
  wigner,         // (32/pi^2) s^2 e^{-4 s^2/pi}, normalized with mean 1
  unnormalized,  // (32/pi^2) e^{-4 s^2/pi}, integrates to 8/pi
};

inline double cue_surmise_pdf(double s, SurmiseForm form = SurmiseForm::wigner) {
  if (!(s >= 0.0)) throw DomainError("cue_surmise_pdf: s must be >= 0");
  constexpr double pi = std::numbers::pi;
  const double base = 32.0 / (pi * pi) * std::exp(-4.0 * s * s / pi);
  return form == SurmiseForm::wigner ? s * s * base : base;
}

inline double cue_surmise_cdf(double s, SurmiseForm form = SurmiseForm::wigner) {
  if (!(s >= 0.0)) throw DomainError("cue_surmise_cdf: s must be >= 0");
  constexpr double pi = std::numbers::pi;
  const double erf_term = std::erf(2.0 * s / std::sqrt(pi));
  if (form == SurmiseForm::unnormalized) return 8.0 / pi * erf_term;
  return erf_term - 4.0 * s / pi * std::exp(-4.0 * s * s / pi);
}

/// Kolmogorov-Smirnov distance sup |F_emp - F| of a sample against a CDF.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InvalidArgument("ks_distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, std::abs(static_cast<double>(i + 1) / n - f),
                  std::abs(f - static_cast<double>(i) / n)});
  }
  return d;
}

// ---------------------------------------------------------------------------
// Transition probabilities

struct TransitionMatrix {
  Eigen::MatrixXd z;  // z(j, k) = |<v_j|U|v_k>|^2
  BasisLabel basis_label = BasisLabel::custom;

  int dim() const { return static_cast<int>(z.rows()); }
};

inline constexpr double kStochasticTol = 1e-8;

inline TransitionMatrix transition_matrix(const UnitaryMatrix& u, const Basis& b) {
  if (u.dim() != b.dim()) throw InvalidDimension("transition_matrix: dimension mismatch");
  const ComplexMatrix& v = b.vectors.matrix();
  TransitionMatrix t{(v.adjoint() * u.matrix() * v).cwiseAbs2(), b.label};
  const double col_dev = (t.z.colwise().sum().array() - 1.0).abs().maxCoeff();
  if (col_dev > kStochasticTol) {
    throw ContractViolation("transition_matrix: column sums deviate from 1 by " +
                            std::to_string(col_dev));
  }
  return t;
}

struct MomentReport {
  double m2 = 0.0;
  double m3 = 0.0;
  double se2 = 0.0;
  double se3 = 0.0;
};

/// Sample moments <x^q> for q = 2, 3 with standard errors sqrt(<x^2q> - <x^q>^2) / sqrt(n).
inline MomentReport sample_moments(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("sample_moments: empty sample");
  double s2 = 0, s3 = 0, s4 = 0, s6 = 0;
  for (double v : x) {
    const double v2 = v * v;
    const double v3 = v2 * v;
    s2 += v2;
    s3 += v3;
    s4 += v2 * v2;
    s6 += v3 * v3;
  }
  const double n = static_cast<double>(x.size());
  MomentReport r;
  r.m2 = s2 / n;
  r.m3 = s3 / n;
  r.se2 = std::sqrt(std::max(s4 / n - r.m2 * r.m2, 0.0)) / std::sqrt(n);
  r.se3 = std::sqrt(std::max(s6 / n - r.m3 * r.m3, 0.0)) / std::sqrt(n);
  return r;
}

/// Moments of the scaled set {N z_jk}.
inline MomentReport trans_moments(const TransitionMatrix& t) {
  const double n = t.dim();
  std::vector<double> scaled(static_cast<std::size_t>(t.z.size()));
  for (Eigen::Index i = 0; i < t.z.size(); ++i) {
    scaled[static_cast<std::size_t>(i)] = n * t.z.data()[i];
  }
  return sample_moments(scaled);
}

inline double porter_thomas_cdf(double z, int n) {
  if (n < 1) throw InvalidDimension("porter_thomas_cdf: N must be >= 1");
  if (!(z >= 0.0)) throw DomainError("porter_thomas_cdf: z must be >= 0");
  return -std::expm1(-n * z);
}

// ---------------------------------------------------------------------------
// Inverse participation ratios

inline constexpr double kNormalizationTol = 1e-8;

namespace detail {

inline double sum_pow_abs2(const ComplexVector& c, int q) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) s += std::pow(std::norm(c[i]), q);
  return s;
}

inline void require_ipr_order(int q) {
  if (q < 2) throw InvalidArgument("ipr: q must be >= 2");
}

inline void require_normalized(const ComplexVector& psi, const char* what) {
  const double dev = std::abs(psi.norm() - 1.0);
  if (dev > kNormalizationTol) {
    throw ContractViolation(std::string(what) + ": state norm deviates from 1 by " +
                            std::to_string(dev));
  }
}

}  // namespace detail

/// I_q = sum_j |<v_j|psi>|^{2q}.
inline double ipr(const ComplexVector& psi, const Basis& b, int q) {
  detail::require_ipr_order(q);
  if (psi.size() != b.dim()) throw InvalidDimension("ipr: dimension mismatch");
  detail::require_normalized(psi, "ipr");
  return detail::sum_pow_abs2(b.vectors.matrix().adjoint() * psi, q);
}

/// {I_q(B, U|v_j>)} for every basis vector v_j.
inline std::vector<double> ipr_set(const UnitaryMatrix& u, const Basis& b, int q) {
  detail::require_ipr_order(q);
  if (u.dim() != b.dim()) throw InvalidDimension("ipr_set: dimension mismatch");
  const ComplexMatrix& v = b.vectors.matrix();
  const ComplexMatrix c = v.adjoint() * u.matrix() * v;
  std::vector<double> out(static_cast<std::size_t>(c.cols()));
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    out[static_cast<std::size_t>(j)] = detail::sum_pow_abs2(c.col(j), q);
  }
  return out;
}

/// Large-N Haar estimate q! N^{1-q}.
inline double haar_ipr_asymptotic(int n, int q) {
  return std::tgamma(q + 1.0) * std::pow(static_cast<double>(n), 1.0 - q);
}

/// Exact Haar-state expectation N q! (N-1)! / (N+q-1)!.
inline double haar_ipr_exact(int n, int q) {
  return std::exp(std::log(static_cast<double>(n)) + std::lgamma(q + 1.0) + std::lgamma(n) -
                  std::lgamma(n + q));
}

// ---------------------------------------------------------------------------
// Husimi distributions

struct HusimiGrid {
  Eigen::MatrixXd values;  // values(r, c): p = 2 pi r / R, phi = 2 pi c / R
  int resolution = 0;

  double phi_at(int c) const { return kTwoPi * c / resolution; }
  double p_at(int r) const { return kTwoPi * r / resolution; }
};

/// Periodized Gaussian coherent state centred at (phi0, p0), sigma^2 = pi / N, unit norm.
inline ComplexVector coherent_state(int n, double phi0, double p0) {
  if (n < 1) throw InvalidDimension("coherent_state: N must be >= 1");
  const double four_sigma2 = 4.0 * std::numbers::pi / n;
  ComplexVector c(n);
  for (int j = 0; j < n; ++j) {
    const double d = kTwoPi * j / n - phi0;
    double amp = 0.0;
    for (int m = -3; m <= 3; ++m) {
      const double x = d + kTwoPi * m;
      amp += std::exp(-x * x / four_sigma2);
    }
    c[j] = std::polar(amp, p0 * j);
  }
  return c / c.norm();
}

inline HusimiGrid husimi_grid(const ComplexVector& psi, int resolution) {
  if (resolution < 1) throw InvalidArgument("husimi_grid: resolution must be >= 1");
  const auto n = static_cast<int>(psi.size());
  if (n < 1) throw InvalidDimension("husimi_grid: empty state");
  detail::require_normalized(psi, "husimi_grid");
  const int r_res = resolution;
  // <coh(phi_c, p_r)|psi> = sum_j g_c(j) e^{-i p_r j} psi_j with g_c real
  Eigen::MatrixXd gauss(n, r_res);
  for (int c = 0; c < r_res; ++c) {
    gauss.col(c) = coherent_state(n, kTwoPi * c / r_res, 0.0).real();
  }
  ComplexMatrix weighted = gauss.cast<Complex>();
  for (int c = 0; c < r_res; ++c) weighted.col(c) = weighted.col(c).cwiseProduct(psi);
  ComplexMatrix momentum(r_res, n);
  for (int r = 0; r < r_res; ++r)
    for (int j = 0; j < n; ++j) momentum(r, j) = std::polar(1.0, -kTwoPi * r / r_res * j);
  return HusimiGrid{(momentum * weighted).cwiseAbs2(), resolution};
}

/// Fraction of grid cells whose value exceeds `relative_threshold` times the grid maximum.
inline double husimi_occupancy(const HusimiGrid& g, double relative_threshold = 0.1) {
  const double cut = relative_threshold * g.values.maxCoeff();
  return static_cast<double>((g.values.array() > cut).count()) /
         static_cast<double>(g.values.size());
}

/// Unit-norm eigenvectors of a unitary, ordered by ascending eigenphase in [0, 2 pi).
inline ComplexMatrix unitary_eigenvectors(const UnitaryMatrix& u) {
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(u.matrix(), /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    throw ContractViolation("unitary_eigenvectors: eigensolver did not converge");
  }
  const auto n = u.dim();
  std::vector<std::pair<double, Eigen::Index>> order;
  order.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    order.emplace_back(wrap_angle(std::arg(solver.eigenvalues()[i])), i);
  }
  std::sort(order.begin(), order.end());
  ComplexMatrix v(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v.col(i) = solver.eigenvectors().col(order[static_cast<std::size_t>(i)].second).normalized();
  }
  return v;
}

// ---------------------------------------------------------------------------
// Histograms for plot-ready export

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;

  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
};

/// Values outside [lo, hi) are dropped; hi itself lands in the last bin.
inline Histogram histogram(std::span<const double> values, double lo, double hi, int bins) {
  if (bins < 1 || !(hi > lo)) throw InvalidArgument("histogram: need bins >= 1 and hi > lo");
  Histogram h{lo, hi, std::vector<std::size_t>(static_cast<std::size_t>(bins), 0)};
  for (double v : values) {
    if (v < lo || v > hi) continue;
    auto i = static_cast<std::size_t>((v - lo) / h.bin_width());
    h.counts[std::min(i, h.counts.size() - 1)] += 1;
  }
  return h;
}

}  // namespace qsampler

#endif  // QSAMPLER_DIAGNOSTICS_HPP
