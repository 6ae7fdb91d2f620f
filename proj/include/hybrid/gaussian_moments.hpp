#pragma once

#include <Eigen/Core>

#include "hybrid/config_space.hpp"

namespace hybrid {

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// Phase-space ordering (q, p, q', p', x, k).
enum PhaseIndex : int { kQ = 0, kP = 1, kQp = 2, kPp = 3, kX = 4, kK = 5 };

/// Variance of each quadrature in the vacuum (hbar = 1). Shared by the
/// propagator, the state constructors and every entanglement measure.
inline constexpr double kVacuumVariance = 0.5;

enum class Tag { Quantum, Classical };

const char* tag_name(Tag tag);

/// Block-diagonal symplectic form, one [[0,1],[-1,0]] block per mode.
Matrix6 symplectic_form();

/// Symmetrized first and second moments over (q, p, q', p', x, k).
class GaussianMoments {
 public:
  /// Validates symmetry (1e-12); a quantum tag additionally requires
  /// cov + (i/2) Omega >= 0 (UncertaintyViolation), a classical tag cov >= 0.
  GaussianMoments(Vector6 mean, Matrix6 cov, Tag tag);

  static GaussianMoments vacuum(Tag tag = Tag::Quantum);
  /// Moments of the product packet state described by `spec`.
  static GaussianMoments from_packets(const PacketSpec& spec, Tag tag = Tag::Quantum);

  const Vector6& mean() const noexcept { return mean_; }
  const Matrix6& cov() const noexcept { return cov_; }
  Tag tag() const noexcept { return tag_; }

 private:
  Vector6 mean_;
  Matrix6 cov_;
  Tag tag_;
};

/// Smallest eigenvalue of cov + (i/2) Omega.
double uncertainty_margin(const Matrix6& cov);

/// First and second moments of a grid state: positions by multiplication,
/// momenta by spectral differentiation, cross terms symmetrized. The state
/// need not be Gaussian; the result is tagged quantum.
GaussianMoments measure_moments(const HybridWavefunction& psi);

}  // namespace hybrid
