#ifndef QSAMPLER_CLASSICAL_HPP
#define QSAMPLER_CLASSICAL_HPP

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "qsampler/harper.hpp"

namespace qsampler {

/// Point on the (phi, p) torus.
struct PhasePoint {
  double phi = 0.0;
  double p = 0.0;

  PhasePoint wrapped() const { return PhasePoint{wrap_angle(phi), wrap_angle(p)}; }
};

struct PhaseVelocity {
  double dphi_dtau = 0.0;
  double dp_dtau = 0.0;
};

/// Classical Hamiltonian H(phi, p, tau); N is ignored.
inline double classical_hamiltonian(const PhasePoint& x, double tau, const HarperParams& p) {
  const double u = x.phi - p.phi0;
  return p.a * (1.0 - std::cos(x.p - p.b)) - p.epsilon * std::cos(u) -
         p.mu * std::cos(u + tau - p.tau0) - p.mu_prime * std::cos(u - tau + p.tau0);
}

/// Unperturbed part H0 (mu = mu' = 0).
inline double classical_h0(const PhasePoint& x, const HarperParams& p) {
  return p.a * (1.0 - std::cos(x.p - p.b)) - p.epsilon * std::cos(x.phi - p.phi0);
}

/// Hamilton's equations (dH/dp, -dH/dphi).
inline PhaseVelocity classical_eom(const PhasePoint& x, double tau, const HarperParams& p) {
  const double u = x.phi - p.phi0;
  return PhaseVelocity{
      p.a * std::sin(x.p - p.b),
      -p.epsilon * std::sin(u) - p.mu * std::sin(u + tau - p.tau0) -
          p.mu_prime * std::sin(u - tau + p.tau0),
  };
}

enum class IntegratorOrder { second = 2, fourth = 4 };

namespace detail {

inline double classical_force(double phi, double tau, const HarperParams& p) {
  const double u = phi - p.phi0;
  return -p.epsilon * std::sin(u) - p.mu * std::sin(u + tau - p.tau0) -
         p.mu_prime * std::sin(u - tau + p.tau0);
}

/// Kick-drift-kick over [tau, tau + h]; h may be negative.
inline void kick_drift_kick(PhasePoint& x, double tau, double h, const HarperParams& p) {
  x.p += 0.5 * h * classical_force(x.phi, tau, p);
  x.phi += h * p.a * std::sin(x.p - p.b);
  x.p += 0.5 * h * classical_force(x.phi, tau + h, p);
}

// Yoshida triple-jump weights
inline const double kYoshidaW1 = 1.0 / (2.0 - std::cbrt(2.0));
inline const double kYoshidaW0 = -std::cbrt(2.0) / (2.0 - std::cbrt(2.0));

}  // namespace detail

/// Advances x from tau to tau + h (unwrapped coordinates). Symmetric, so a step
/// with -h from tau + h undoes it.
inline void symplectic_step(PhasePoint& x, double tau, double h, const HarperParams& p,
                            IntegratorOrder order = IntegratorOrder::fourth) {
  if (order == IntegratorOrder::second) {
    detail::kick_drift_kick(x, tau, h, p);
    return;
  }
  const double h1 = detail::kYoshidaW1 * h;
  const double h0 = detail::kYoshidaW0 * h;
  detail::kick_drift_kick(x, tau, h1, p);
  detail::kick_drift_kick(x, tau + h1, h0, p);
  detail::kick_drift_kick(x, tau + h1 + h0, h1, p);
}

struct Orbit {
  PhasePoint initial;
  std::vector<PhasePoint> points;  // stroboscopic, one per period
};

struct PoincareSection {
  std::vector<Orbit> orbits;
  HarperParams params;
};

inline constexpr int kMinStepsPerPeriod = 100;

/// Stroboscopic map: (phi, p) mod 2pi recorded at tau = 2 pi n, n = 1..n_periods.
/// `on_step`, when given, sees every intermediate state as (orbit, tau, point).
template <class StepObserver>
PoincareSection poincare_section(const std::vector<PhasePoint>& initials, const HarperParams& p,
                                 int n_periods, int steps_per_period, StepObserver&& on_step,
                                 IntegratorOrder order = IntegratorOrder::fourth) {
  if (n_periods < 1) throw InvalidArgument("poincare_section: n_periods must be >= 1");
  if (steps_per_period < kMinStepsPerPeriod) {
    throw InvalidArgument("poincare_section: steps_per_period must be >= 100");
  }
  PoincareSection section{{}, p};
  section.orbits.reserve(initials.size());
  const double h = kTwoPi / steps_per_period;
  for (std::size_t o = 0; o < initials.size(); ++o) {
    Orbit orbit{initials[o].wrapped(), {}};
    orbit.points.reserve(static_cast<std::size_t>(n_periods));
    PhasePoint x = orbit.initial;
    for (int n = 0; n < n_periods; ++n) {
      const double period_start = kTwoPi * n;
      for (int s = 0; s < steps_per_period; ++s) {
        const double tau = period_start + s * h;
        symplectic_step(x, tau, h, p, order);
        on_step(o, tau + h, x);
      }
      x = x.wrapped();
      orbit.points.push_back(x);
    }
    section.orbits.push_back(std::move(orbit));
  }
  return section;
}

inline PoincareSection poincare_section(const std::vector<PhasePoint>& initials,
                                        const HarperParams& p, int n_periods,
                                        int steps_per_period = 1000,
                                        IntegratorOrder order = IntegratorOrder::fourth) {
  return poincare_section(initials, p, n_periods, steps_per_period,
                          [](std::size_t, double, const PhasePoint&) {}, order);
}

struct LibrationRatio {
  double omega0;  // sqrt(a eps)
  double lambda;  // perturbation / libration frequency = 1 / omega0
};

inline LibrationRatio libration_ratio(const HarperParams& p) {
  const double ae = p.a * p.epsilon;
  if (!(ae > 0.0)) throw DomainError("libration_ratio: requires a * epsilon > 0");
  const double omega0 = std::sqrt(ae);
  return LibrationRatio{omega0, 1.0 / omega0};
}

/// Fraction of cells of a resolution x resolution grid on the torus visited by `points`.
inline double occupancy_fraction(const std::vector<PhasePoint>& points, int resolution) {
  if (resolution < 1) throw InvalidArgument("occupancy_fraction: resolution must be >= 1");
  std::vector<char> seen(static_cast<std::size_t>(resolution) * resolution, 0);
  for (const auto& raw : points) {
    const auto x = raw.wrapped();
    const int i = std::min(resolution - 1, static_cast<int>(x.phi / kTwoPi * resolution));
    const int j = std::min(resolution - 1, static_cast<int>(x.p / kTwoPi * resolution));
    seen[static_cast<std::size_t>(j) * resolution + i] = 1;
  }
  std::size_t count = 0;
  for (char c : seen) count += static_cast<std::size_t>(c);
  return static_cast<double>(count) / static_cast<double>(seen.size());
}

}  // namespace qsampler

#endif  // QSAMPLER_CLASSICAL_HPP
