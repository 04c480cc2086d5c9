#ifndef QSAMPLER_WEYL_HPP
#define QSAMPLER_WEYL_HPP

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>

#include "qsampler/harper.hpp"
#include "qsampler/linalg.hpp"

namespace qsampler {

namespace detail {

inline int mod_n(std::int64_t v, int n) {
  const auto r = static_cast<int>(v % n);
  return r < 0 ? r + n : r;
}

/// omega^m for an integer m, reduced mod N before taking the phase.
inline Complex omega_pow(std::int64_t m, int n) {
  return std::polar(1.0, kTwoPi * mod_n(m, n) / n);
}

inline void require_weyl_dim(int n, const char* what) {
  if (n < 2) throw InvalidDimension(std::string(what) + ": N must be >= 2");
}

}  // namespace detail

/// Z = diag(omega^j).
inline UnitaryMatrix clock(int n) {
  detail::require_weyl_dim(n, "clock");
  ComplexMatrix z = ComplexMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) z(j, j) = detail::omega_pow(j, n);
  return UnitaryMatrix(std::move(z));
}

/// X|j> = |j+1 mod N>.
inline UnitaryMatrix shift(int n) {
  detail::require_weyl_dim(n, "shift");
  ComplexMatrix x = ComplexMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) x((j + 1) % n, j) = 1.0;
  return UnitaryMatrix(std::move(x));
}

struct DisplacementIndex {
  int j = 0;
  int k = 0;
};

/// D_jk = omega^{-jk/2} Z^j X^k with omega^{1/2} = e^{i pi / N}.
///
/// Signed indices are accepted and not reduced in the prefactor, so that
/// D_{-j,-k} is exactly the adjoint of D_{j,k}. Reducing both indices mod N
/// changes D by the sign (-1)^{N + j + k} when j, k are both nonzero.
inline UnitaryMatrix displacement(int n, std::int64_t j, std::int64_t k) {
  detail::require_weyl_dim(n, "displacement");
  ComplexMatrix d = ComplexMatrix::Zero(n, n);
  // jk mod 2N keeps the half-angle phase exact for large indices
  const std::int64_t jk = ((j % (2 * n)) * (k % (2 * n))) % (2 * n);
  const Complex prefactor = std::polar(1.0, -std::numbers::pi * static_cast<double>(jk) / n);
  for (int l = 0; l < n; ++l) {
    d(l, detail::mod_n(l - k, n)) = prefactor * detail::omega_pow(j * l, n);
  }
  return UnitaryMatrix(std::move(d));
}

inline UnitaryMatrix displacement(int n, DisplacementIndex idx) {
  if (idx.j < 0 || idx.j >= n || idx.k < 0 || idx.k >= n) {
    throw InvalidArgument("displacement: index outside [0, N)");
  }
  return displacement(n, idx.j, idx.k);
}

/// Coefficients w_jk = tr(D_jk^dagger W) / sqrt(N); row index j, column index k.
struct OperatorCoefficients {
  int dim = 0;
  ComplexMatrix w;

  double norm_squared() const { return w.squaredNorm(); }

  /// The set {N |w_jk|^2} in row-major (j, k) order.
  std::vector<double> scaled_magnitudes() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(dim) * dim);
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k) out.push_back(dim * std::norm(w(j, k)));
    return out;
  }
};

namespace detail {

/// e^{-i pi jk / N} for 0 <= j, k < N.
inline Complex half_phase(int j, int k, int n) {
  const std::int64_t jk = (static_cast<std::int64_t>(j) * k) % (2 * n);
  return std::polar(1.0, -std::numbers::pi * static_cast<double>(jk) / n);
}

/// F(j, l) = omega^{sign * j l}.
inline ComplexMatrix fourier_kernel(int n, int sign) {
  ComplexMatrix f(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) f(j, l) = omega_pow(sign * static_cast<std::int64_t>(j) * l, n);
  return f;
}

}  // namespace detail

inline OperatorCoefficients op_decompose(const ComplexMatrix& w) {
  detail::require_square(w, "op_decompose");
  const int n = static_cast<int>(w.rows());
  detail::require_weyl_dim(n, "op_decompose");
  // D_jk has its nonzero entries on the cyclic diagonal (l, l - k).
  ComplexMatrix diagonals(n, n);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k) diagonals(l, k) = w(l, detail::mod_n(l - k, n));
  ComplexMatrix t = detail::fourier_kernel(n, -1) * diagonals;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) t(j, k) *= std::conj(detail::half_phase(j, k, n)) * scale;
  return OperatorCoefficients{n, std::move(t)};
}

/// W = (1/sqrt N) sum_jk w_jk D_jk.
inline ComplexMatrix op_reconstruct(const OperatorCoefficients& c) {
  const int n = c.dim;
  detail::require_weyl_dim(n, "op_reconstruct");
  ComplexMatrix phased(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) phased(j, k) = c.w(j, k) * detail::half_phase(j, k, n);
  const ComplexMatrix diagonals = detail::fourier_kernel(n, +1).transpose() * phased;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  ComplexMatrix out(n, n);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k) out(l, detail::mod_n(l - k, n)) = diagonals(l, k) * scale;
  return out;
}

/// Writes "j,k,abs2" rows of |w_jk|^2.
inline void write_coefficient_grid_csv(std::ostream& os, const OperatorCoefficients& c) {
  os << "j,k,abs2\n";
  os.precision(17);
  for (int j = 0; j < c.dim; ++j)
    for (int k = 0; k < c.dim; ++k) os << j << ',' << k << ',' << std::norm(c.w(j, k)) << '\n';
}

/// Z^j X^k U X^{-k} Z^{-j}, applied as a permutation and two diagonal phases.
inline ComplexMatrix conjugate_by_clock_shift(const ComplexMatrix& u, std::int64_t j,
                                              std::int64_t k) {
  const int n = static_cast<int>(u.rows());
  ComplexMatrix out(n, n);
  for (int m = 0; m < n; ++m) {
    const Complex right = detail::omega_pow(-j * m, n);
    const int src_m = detail::mod_n(m - k, n);
    for (int l = 0; l < n; ++l) {
      out(l, m) = detail::omega_pow(j * l, n) * u(detail::mod_n(l - k, n), src_m) * right;
    }
  }
  return out;
}

/// max |U_T(b + 2 pi j/N, phi0 + 2 pi k/N) - Z^j X^k U_T X^{-k} Z^{-j}|.
inline double verify_shift_conjugation(const HarperParams& p, std::int64_t j, std::int64_t k,
                                       int n_tau) {
  const int n = p.N;
  HarperParams shifted = p;
  shifted.b = p.b + kTwoPi * static_cast<double>(j) / n;
  shifted.phi0 = p.phi0 + kTwoPi * static_cast<double>(k) / n;
  const auto u = floquet_propagator(p, n_tau);
  const auto u_shifted = floquet_propagator(shifted, n_tau);
  return max_abs(u_shifted.matrix() - conjugate_by_clock_shift(u.matrix(), j, k));
}

namespace detail {
inline void require_positive_k(int k, const char* what) {
  if (k < 1) throw InvalidArgument(std::string(what) + ": k must be >= 1");
}
}  // namespace detail

/// Exact k-frame potential of the uniform distribution on {D_mn W D_mn^dagger}:
/// (1/N^2) sum_ab |sum_jn p_jn omega^{an - bj}|^{2k} with p_jn = |w_jn|^2.
inline double twirl_frame_potential(const UnitaryMatrix& w, int k) {
  detail::require_positive_k(k, "twirl_frame_potential");
  const auto c = op_decompose(w.matrix());
  const int n = c.dim;
  const ComplexMatrix p = c.w.cwiseAbs2().cast<Complex>();
  // (Omega^* p Omega)(b, a) = sum_jn omega^{-bj} p_jn omega^{an}
  const ComplexMatrix fourier = detail::fourier_kernel(n, -1) * p * detail::fourier_kernel(n, +1);
  double total = 0.0;
  for (Eigen::Index i = 0; i < fourier.size(); ++i) {
    total += std::pow(std::norm(fourier.data()[i]), k);
  }
  return total / (static_cast<double>(n) * n);
}

/// Lower and upper bounds (1/N^2) S^k and S^k with S = (sum p)^2.
struct TwirlBounds {
  double lower;
  double upper;
};

inline TwirlBounds twirl_bounds(const UnitaryMatrix& w, int k) {
  detail::require_positive_k(k, "twirl_bounds");
  const auto c = op_decompose(w.matrix());
  const double sum_p = c.norm_squared();
  const double s_k = std::pow(sum_p * sum_p, k);
  return TwirlBounds{s_k / (static_cast<double>(c.dim) * c.dim), s_k};
}

inline constexpr int kTwirlBruteForceMaxDim = 8;

/// Averages |tr(A B^dagger)|^{2k} over all N^4 ordered pairs of conjugates. N <= 8 only.
inline double twirl_frame_potential_brute_force(const UnitaryMatrix& w, int k) {
  detail::require_positive_k(k, "twirl_frame_potential_brute_force");
  const int n = static_cast<int>(w.dim());
  if (n > kTwirlBruteForceMaxDim) {
    throw InvalidDimension("twirl_frame_potential_brute_force: N must be <= 8");
  }
  std::vector<ComplexMatrix> conjugates;
  conjugates.reserve(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const auto d = displacement(n, a, b).matrix();
      conjugates.push_back(d * w.matrix() * d.adjoint());
    }
  }
  double total = 0.0;
  for (const auto& x : conjugates)
    for (const auto& y : conjugates) total += std::pow(std::norm((x * y.adjoint()).trace()), k);
  const double count = static_cast<double>(conjugates.size());
  return total / (count * count);
}

}  // namespace qsampler

#endif  // QSAMPLER_WEYL_HPP
