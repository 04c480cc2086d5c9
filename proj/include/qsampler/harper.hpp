#ifndef QSAMPLER_HARPER_HPP
#define QSAMPLER_HARPER_HPP

#include <cmath>
#include <string>
#include <utility>

#include "qsampler/fft.hpp"
#include "qsampler/linalg.hpp"

namespace qsampler {

/// Control parameters of the perturbed Harper Hamiltonian
///   h(tau) = a(1 - cos(p - b)) - eps cos(phi - phi0)
///            - mu cos(phi - phi0 + tau - tau0) - mu' cos(phi - phi0 - tau + tau0).
struct HarperParams {
  int N = 2;
  double a = 0.0;
  double b = 0.0;
  double epsilon = 0.0;
  double mu = 0.0;
  double mu_prime = 0.0;
  double phi0 = 0.0;
  double tau0 = 0.0;

  void validate() const {
    if (N < 2) throw InvalidDimension("HarperParams: N must be >= 2");
    for (double v : {a, b, epsilon, mu, mu_prime, phi0, tau0}) {
      if (!std::isfinite(v)) throw InvalidArgument("HarperParams: parameters must be finite");
    }
  }

  friend bool operator==(const HarperParams&, const HarperParams&) = default;
};

/// Constant time derivatives d/dtau of each Harper parameter.
struct ParamRates {
  double a = 0.0;
  double b = 0.0;
  double epsilon = 0.0;
  double mu = 0.0;
  double mu_prime = 0.0;
  double phi0 = 0.0;
  double tau0 = 0.0;

  bool kinetic_constant() const { return a == 0.0 && b == 0.0; }

  friend bool operator==(const ParamRates&, const ParamRates&) = default;
};

struct DriftSchedule {
  HarperParams initial;
  ParamRates rates;
  int n_periods = 1;

  void validate() const {
    initial.validate();
    if (n_periods < 1) throw InvalidArgument("DriftSchedule: n_periods must be >= 1");
    for (double v : {rates.a, rates.b, rates.epsilon, rates.mu, rates.mu_prime, rates.phi0,
                     rates.tau0}) {
      if (!std::isfinite(v)) throw InvalidArgument("DriftSchedule: rates must be finite");
    }
  }

  /// Parameters at time tau: initial + rate * tau.
  HarperParams at(double tau) const {
    HarperParams p = initial;
    p.a += rates.a * tau;
    p.b += rates.b * tau;
    p.epsilon += rates.epsilon * tau;
    p.mu += rates.mu * tau;
    p.mu_prime += rates.mu_prime * tau;
    p.phi0 += rates.phi0 * tau;
    p.tau0 += rates.tau0 * tau;
    return p;
  }
};

/// hbar_eff = 2 pi / N from quantizing the torus.
struct EffectivePlanck {
  double hbar_eff;

  static EffectivePlanck for_dimension(int n) {
    if (n < 1) throw InvalidDimension("EffectivePlanck: N must be >= 1");
    return EffectivePlanck{kTwoPi / n};
  }
};

enum class BasisLabel { angle, h0_eigen, custom };

inline std::string to_string(BasisLabel label) {
  switch (label) {
    case BasisLabel::angle:
      return "angle";
    case BasisLabel::h0_eigen:
      return "h0-eigen";
    case BasisLabel::custom:
      return "custom";
  }
  return "custom";
}

/// Orthonormal basis stored as the columns of a unitary.
struct Basis {
  UnitaryMatrix vectors;
  BasisLabel label = BasisLabel::custom;

  Eigen::Index dim() const { return vectors.dim(); }
};

inline Basis angle_basis(int n) {
  if (n < 1) throw InvalidDimension("angle_basis: N must be >= 1");
  return Basis{UnitaryMatrix::identity(n), BasisLabel::angle};
}

namespace detail {

inline double angle_grid(int j, int n) { return kTwoPi * static_cast<double>(j) / n; }

inline double kinetic_energy(const HarperParams& p, int k) {
  return p.a * (1.0 - std::cos(angle_grid(k, p.N) - p.b));
}

inline double potential_energy(const HarperParams& p, int j, double tau) {
  const double x = angle_grid(j, p.N) - p.phi0;
  return -p.epsilon * std::cos(x) - p.mu * std::cos(x + tau - p.tau0) -
         p.mu_prime * std::cos(x - tau + p.tau0);
}

/// Diagonal of exp(-i (N / 2pi) dtau T) in the Fourier basis, with the 1/N of an
/// unnormalized forward/backward DFT pair folded in.
inline ComplexVector kinetic_phases(const HarperParams& p, double dtau) {
  const double scale = p.N / kTwoPi;
  ComplexVector d(p.N);
  for (int k = 0; k < p.N; ++k) {
    d[k] = std::polar(1.0 / p.N, -scale * dtau * kinetic_energy(p, k));
  }
  return d;
}

inline ComplexVector potential_phases(const HarperParams& p, double tau, double dtau) {
  const double scale = p.N / kTwoPi;
  const double ct = std::cos(tau - p.tau0);
  const double st = std::sin(tau - p.tau0);
  ComplexVector d(p.N);
  for (int j = 0; j < p.N; ++j) {
    const double x = angle_grid(j, p.N) - p.phi0;
    const double cx = std::cos(x);
    const double sx = std::sin(x);
    // cos(x +- (tau - tau0)) by angle addition
    const double v = -p.epsilon * cx - p.mu * (cx * ct - sx * st) - p.mu_prime * (cx * ct + sx * st);
    d[j] = std::polar(1.0, -scale * dtau * v);
  }
  return d;
}

/// Below this dimension a dense circulant product beats the batched FFT.
inline constexpr int kDenseKineticMaxDim = 100;

/// Applies Q diag(phases) Q^dagger (Q the unitary DFT, 1/N folded into phases).
/// The operator is circulant; small dimensions use it as a dense matrix.
class KineticStep {
 public:
  explicit KineticStep(ComplexVector phases) : phases_(std::move(phases)) {
    const auto n = phases_.size();
    if (n < kDenseKineticMaxDim) {
      // first column c_m = sum_k e^{2 pi i mk/N} phases_k, then C_jl = c_{(j-l) mod N}
      ComplexMatrix col = phases_;
      fft::backward_columns(col);
      circulant_.resize(n, n);
      for (Eigen::Index l = 0; l < n; ++l)
        for (Eigen::Index j = 0; j < n; ++j) circulant_(j, l) = col((j - l + n) % n, 0);
    }
  }

  void apply(ComplexMatrix& u, ComplexMatrix& scratch) const {
    if (circulant_.size() != 0) {
      scratch.noalias() = circulant_ * u;
      u.swap(scratch);
    } else {
      fft::forward_columns(u);
      u = phases_.asDiagonal() * u;
      fft::backward_columns(u);
    }
  }

 private:
  ComplexVector phases_;
  ComplexMatrix circulant_;
};

/// Strang splitting: half kinetic, potential at the step midpoint, half kinetic.
/// Adjacent half kinetic steps are merged when the kinetic parameters do not drift.
template <class ParamsAt>
ComplexMatrix split_step(const ParamsAt& params_at, int n, int n_steps, double dtau,
                         bool kinetic_constant) {
  ComplexMatrix u = ComplexMatrix::Identity(n, n);
  ComplexMatrix scratch(n, n);
  if (kinetic_constant) {
    const HarperParams p0 = params_at(0.0);
    const KineticStep half(kinetic_phases(p0, 0.5 * dtau));
    const KineticStep full(kinetic_phases(p0, dtau));
    half.apply(u, scratch);
    for (int m = 0; m < n_steps; ++m) {
      const double tau_mid = (m + 0.5) * dtau;
      u = potential_phases(params_at(tau_mid), tau_mid, dtau).asDiagonal() * u;
      (m + 1 < n_steps ? full : half).apply(u, scratch);
    }
  } else {
    for (int m = 0; m < n_steps; ++m) {
      const double tau_mid = (m + 0.5) * dtau;
      const HarperParams p = params_at(tau_mid);
      const KineticStep half(kinetic_phases(p, 0.5 * dtau));
      half.apply(u, scratch);
      u = potential_phases(p, tau_mid, dtau).asDiagonal() * u;
      half.apply(u, scratch);
    }
  }
  return u;
}

}  // namespace detail

/// h0 = a(I - cos(p - b)) - eps cos(phi - phi0) in the angle basis, where
/// phi = diag(2 pi j / N) and p = Q phi Q^dagger.
inline HermitianMatrix build_h0(const HarperParams& p) {
  p.validate();
  const auto q = dft_matrix(p.N);
  RealVector kin(p.N);
  for (int k = 0; k < p.N; ++k) kin[k] = detail::kinetic_energy(p, k);
  ComplexMatrix h = q.matrix() * kin.cast<Complex>().asDiagonal() * q.matrix().adjoint();
  for (int j = 0; j < p.N; ++j) {
    h(j, j) += -p.epsilon * std::cos(detail::angle_grid(j, p.N) - p.phi0);
  }
  // remove the roundoff anti-Hermitian part of the dense product
  return HermitianMatrix(0.5 * (h + h.adjoint()));
}

/// h1(tau), diagonal in the angle basis.
inline HermitianMatrix build_h1(const HarperParams& p, double tau) {
  p.validate();
  ComplexMatrix h = ComplexMatrix::Zero(p.N, p.N);
  for (int j = 0; j < p.N; ++j) {
    const double x = detail::angle_grid(j, p.N) - p.phi0;
    h(j, j) = -p.mu * std::cos(x + tau - p.tau0) - p.mu_prime * std::cos(x - tau + p.tau0);
  }
  return HermitianMatrix(std::move(h));
}

inline int default_n_tau(int n) { return 4 * n; }

/// One-period (tau in [0, 2 pi)) Floquet propagator of h = h0 + h1(tau),
/// time-ordered exp(-i (N/2pi) int h dtau) via n_tau Strang steps.
inline UnitaryMatrix floquet_propagator(const HarperParams& p, int n_tau) {
  p.validate();
  if (n_tau < 1) throw InvalidArgument("floquet_propagator: n_tau must be >= 1");
  const double dtau = kTwoPi / n_tau;
  auto params_at = [&p](double) { return p; };
  return UnitaryMatrix(detail::split_step(params_at, p.N, n_tau, dtau, true));
}

inline UnitaryMatrix floquet_propagator(const HarperParams& p) {
  return floquet_propagator(p, default_n_tau(p.N));
}

/// Propagator over n_periods with every parameter drifting linearly in tau,
/// sampled at each step's midpoint time.
inline UnitaryMatrix drift_propagator(const DriftSchedule& s, int n_tau_per_period) {
  s.validate();
  if (n_tau_per_period < 1) throw InvalidArgument("drift_propagator: n_tau must be >= 1");
  const double dtau = kTwoPi / n_tau_per_period;
  const int n_steps = n_tau_per_period * s.n_periods;
  auto params_at = [&s](double tau) { return s.at(tau); };
  return UnitaryMatrix(
      detail::split_step(params_at, s.initial.N, n_steps, dtau, s.rates.kinetic_constant()));
}

inline UnitaryMatrix drift_propagator(const DriftSchedule& s) {
  return drift_propagator(s, default_n_tau(s.initial.N));
}

/// Eigenvectors of h0 ordered by ascending eigenvalue.
inline Basis h0_eigenbasis(const HarperParams& p) {
  auto eig = eig_hermitian(build_h0(p));
  return Basis{std::move(eig.eigenvectors), BasisLabel::h0_eigen};
}

// Reference propagator parameter sets.

/// Fully ergodic Floquet system (lambda = 1/sqrt(a eps) ~ 0.33).
inline HarperParams ergodic_floquet_params(int n) {
  return HarperParams{n, 3.0, 0.2, 3.1, 3.0, 3.1, 0.0, 0.0};
}

/// Hybrid Floquet system with both regular islands and a chaotic sea.
inline HarperParams hybrid_floquet_params(int n) {
  return HarperParams{n, 3.0, 0.0, 3.1, 1.0, 0.0, 0.0, 0.0};
}

/// Drifting system: b 0 -> 1.9, mu 1 -> 7, mu' 0.5 -> 6.5 over 3 periods.
inline DriftSchedule reference_drift_schedule(int n) {
  constexpr int periods = 3;
  const double duration = kTwoPi * periods;
  DriftSchedule s;
  s.initial = HarperParams{n, 3.0, 0.0, 3.0, 1.0, 0.5, 0.0, 0.0};
  s.rates.b = 1.9 / duration;
  s.rates.mu = 6.0 / duration;
  s.rates.mu_prime = 6.0 / duration;
  s.n_periods = periods;
  return s;
}

}  // namespace qsampler

#endif  // QSAMPLER_HARPER_HPP
