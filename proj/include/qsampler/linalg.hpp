#ifndef QSAMPLER_LINALG_HPP
#define QSAMPLER_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qsampler/errors.hpp"

namespace qsampler {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kDefaultUnitarityTol = 1e-8;
inline constexpr double kHermiticityTol = 1e-10;

/// Largest entry modulus of a matrix (the "max-entry norm").
inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

/// max |U^dagger U - I|.
inline double unitarity_defect(const ComplexMatrix& u) {
  const auto n = u.rows();
  return max_abs(u.adjoint() * u - ComplexMatrix::Identity(n, n));
}

inline double hermiticity_defect(const ComplexMatrix& h) {
  return max_abs(h - h.adjoint());
}

namespace detail {
inline void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidDimension(std::string(what) + ": matrix must be square and non-empty");
  }
  if (!all_finite(m)) throw ContractViolation(std::string(what) + ": non-finite entries");
}
}  // namespace detail

/// A square complex matrix together with its certified unitarity defect.
class UnitaryMatrix {
 public:
  /// Throws ContractViolation unless max|U^dagger U - I| < tol.
  explicit UnitaryMatrix(ComplexMatrix m, double tol = kDefaultUnitarityTol)
      : matrix_(std::move(m)) {
    detail::require_square(matrix_, "UnitaryMatrix");
    defect_ = unitarity_defect(matrix_);
    if (!(defect_ < tol)) {
      throw ContractViolation("UnitaryMatrix: unitarity defect " + std::to_string(defect_) +
                              " exceeds tolerance " + std::to_string(tol));
    }
  }

  static UnitaryMatrix identity(Eigen::Index n) {
    return UnitaryMatrix(ComplexMatrix::Identity(n, n));
  }

  const ComplexMatrix& matrix() const { return matrix_; }
  double defect() const { return defect_; }
  Eigen::Index dim() const { return matrix_.rows(); }

  UnitaryMatrix adjoint() const { return UnitaryMatrix(matrix_.adjoint()); }

  friend UnitaryMatrix operator*(const UnitaryMatrix& a, const UnitaryMatrix& b) {
    return UnitaryMatrix(a.matrix_ * b.matrix_);
  }

 private:
  ComplexMatrix matrix_;
  double defect_ = 0.0;
};

/// A square complex matrix equal to its adjoint within kHermiticityTol.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(ComplexMatrix m, double tol = kHermiticityTol) : matrix_(std::move(m)) {
    detail::require_square(matrix_, "HermitianMatrix");
    const double d = hermiticity_defect(matrix_);
    if (!(d < tol)) {
      throw ContractViolation("HermitianMatrix: hermiticity defect " + std::to_string(d));
    }
  }

  const ComplexMatrix& matrix() const { return matrix_; }
  Eigen::Index dim() const { return matrix_.rows(); }

 private:
  ComplexMatrix matrix_;
};

/// Unitary discrete Fourier transform, entries omega^{jk} / sqrt(N) with omega = e^{2 pi i / N}.
inline UnitaryMatrix dft_matrix(int n) {
  if (n < 1) throw InvalidDimension("dft_matrix: N must be >= 1");
  ComplexMatrix q(n, n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      // reduce jk mod N first so the phase argument stays small
      const long long jk = (static_cast<long long>(j) * k) % n;
      q(j, k) = std::polar(norm, kTwoPi * static_cast<double>(jk) / n);
    }
  }
  return UnitaryMatrix(std::move(q));
}

struct HermitianEigen {
  std::vector<double> eigenvalues;  // ascending
  UnitaryMatrix eigenvectors;       // column j pairs with eigenvalues[j]
};

inline HermitianEigen eig_hermitian(const HermitianMatrix& h) {
  // Symmetrize so the solver sees an exactly Hermitian input.
  const ComplexMatrix sym = 0.5 * (h.matrix() + h.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw ContractViolation("eig_hermitian: eigensolver did not converge");
  }
  const RealVector& vals = solver.eigenvalues();
  return HermitianEigen{std::vector<double>(vals.data(), vals.data() + vals.size()),
                        UnitaryMatrix(solver.eigenvectors())};
}

/// Wraps an angle into [0, 2 pi).
inline double wrap_angle(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Sorted eigenphases in [0, 2 pi) of a unitary matrix.
inline std::vector<double> eigenphases(const UnitaryMatrix& u) {
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(u.matrix(), /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw ContractViolation("eigenphases: eigensolver did not converge");
  }
  const auto& lambda = solver.eigenvalues();
  std::vector<double> phases;
  phases.reserve(static_cast<std::size_t>(lambda.size()));
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double modulus = std::abs(lambda[i]);
    if (std::abs(modulus - 1.0) > 1e-8) {
      throw ContractViolation("eigenphases: eigenvalue modulus deviates from 1 by " +
                              std::to_string(std::abs(modulus - 1.0)));
    }
    // arg is invariant under projection onto the unit circle
    phases.push_back(wrap_angle(std::arg(lambda[i])));
  }
  std::sort(phases.begin(), phases.end());
  return phases;
}

/// exp(-i s H) via the spectral decomposition of H.
inline UnitaryMatrix expm_hermitian(const HermitianMatrix& h, double s) {
  const auto eig = eig_hermitian(h);
  const auto& v = eig.eigenvectors.matrix();
  ComplexVector phases(v.cols());
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    phases[j] = std::polar(1.0, -s * eig.eigenvalues[static_cast<std::size_t>(j)]);
  }
  return UnitaryMatrix(v * phases.asDiagonal() * v.adjoint());
}

}  // namespace qsampler

#endif  // QSAMPLER_LINALG_HPP
