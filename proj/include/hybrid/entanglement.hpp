#pragma once

#include <string>

#include <Eigen/Core>

#include "hybrid/gaussian_moments.hpp"

namespace hybrid {

using Matrix2 = Eigen::Matrix2d;
using Matrix4 = Eigen::Matrix4d;
using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;

/// E_N above this counts as entangled in reports.
inline constexpr double kEntanglementThreshold = 1e-6;

/// Quantum covariance of (q, p, q', p'). Only quantum data can become a
/// TwoModeCov, so every measure taking one is safe from classical input.
class TwoModeCov {
 public:
  /// Throws Inadmissible unless symmetric and cov + (i/2)Omega_2 >= 0.
  explicit TwoModeCov(const Matrix4& cov);

  const Matrix4& matrix() const noexcept { return cov_; }
  Matrix2 block_a() const { return cov_.topLeftCorner<2, 2>(); }
  Matrix2 block_b() const { return cov_.bottomRightCorner<2, 2>(); }
  Matrix2 block_c() const { return cov_.topRightCorner<2, 2>(); }

 private:
  Matrix4 cov_;
};

/// Partial trace over the mediator: drop the x, k rows and columns.
/// Throws TagRefusal on classical-tagged moments.
TwoModeCov reduce_to_QQprime(const GaussianMoments& g);

/// State of (Q, Q') after an ideal readout of the mediator coordinate x:
/// cov_QQ' - v v^T / Var(x), v = Cov((q,p,q',p'), x). Independent of the
/// read-out value. Throws TagRefusal on classical tags and
/// SingularCovariance when Var(x) = 0.
TwoModeCov condition_on_mediator_position(const GaussianMoments& g);

/// Logarithmic negativity from the smallest symplectic eigenvalue of the
/// partially transposed covariance.
double log_negativity(const TwoModeCov& cov);

/// 1/2 ln(det A det B / det cov) for the (Q; Q') split. Accepts either tag.
double gaussian_mutual_information(const GaussianMoments& g);
double gaussian_mutual_information(const TwoModeCov& cov);
double gaussian_mutual_information(const Matrix4& cov);

class TwoQubitState {
 public:
  /// Throws InvalidState unless Hermitian, trace 1 and PSD (eigenvalues >= -1e-12).
  explicit TwoQubitState(const Matrix4c& rho);

  static TwoQubitState pure(const Vector4c& amplitudes);
  /// "phi+", "phi-", "psi+", "psi-", "00", "01", "10", "11", "mixed" (I/4),
  /// "classical" (½(|00><00| + |11><11|)).
  static TwoQubitState named(const std::string& name);

  const Matrix4c& matrix() const noexcept { return rho_; }

 private:
  Matrix4c rho_;
};

/// Partial transpose on the second qubit (basis order |ab>, index 2a + b).
Matrix4c partial_transpose(const Matrix4c& rho);

double negativity_qubits(const TwoQubitState& rho);

/// Horodecki closed form 2 sqrt(m1 + m2) over the two largest eigenvalues of T^T T.
double chsh_max(const TwoQubitState& rho);

/// Pauli correlation matrix T_ij = tr(rho sigma_i ⊗ sigma_j).
Eigen::Matrix3d correlation_matrix(const TwoQubitState& rho);

struct EntanglementVerdict {
  std::string measure;
  double value = 0.0;
  double threshold = kEntanglementThreshold;
  bool entangled = false;
};

EntanglementVerdict judge_entanglement(std::string measure, double value,
                                       double threshold = kEntanglementThreshold);

}  // namespace hybrid
