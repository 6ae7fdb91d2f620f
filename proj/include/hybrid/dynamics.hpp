#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "hybrid/config_space.hpp"
#include "hybrid/gaussian_moments.hpp"

namespace hybrid {

/// Couplings of H_eff = g1 p x + g2 q' k and the evolution time.
struct InteractionParams {
  double g1 = 1.0;
  double g2 = 1.0;
  double t = 0.0;

  /// Throws ConfigError on non-finite values or t < 0.
  void validate() const;
};

/// Characteristic flow of H_eff on (q, q', x).
class FlowMap {
 public:
  explicit FlowMap(const InteractionParams& params);

  Eigen::Vector3d apply(const Eigen::Vector3d& z) const;
  /// Phi_{-t}.
  Eigen::Vector3d inverse(const Eigen::Vector3d& z) const;
  const Eigen::Matrix3d& matrix() const noexcept { return forward_; }
  double jacobian() const { return forward_.determinant(); }

 private:
  Eigen::Matrix3d forward_;
  Eigen::Matrix3d backward_;
};

/// Linear Heisenberg propagator on (q, p, q', p', x, k).
Matrix6 heisenberg_matrix(const InteractionParams& params);

GaussianMoments evolve_gaussian(const GaussianMoments& state, const InteractionParams& params);

/// psi_t(z) = psi_0(Phi_{-t} z). With `initial_form` the closed form is
/// evaluated at the pulled-back points (it must match psi up to a global
/// phase, otherwise InitializerMismatch); without it the grid is
/// interpolated tricubically and renormalized.
HybridWavefunction evolve_wavefunction(const HybridWavefunction& psi, const InteractionParams& params,
                                       const std::optional<ClosedForm>& initial_form = std::nullopt);

/// Largest stable step h / ((|g1| + |g2|) L).
double max_madelung_step(const GridSpec& grid, const InteractionParams& params);
/// Steps used by default: dt = 0.4 * max_madelung_step.
int madelung_steps(const GridSpec& grid, const InteractionParams& params);

/// RK4 integration of
///   dP/dt = -g1 x dP/dq - g2 q' dP/dx,   dS/dt = -g1 x dS/dq - g2 q' dS/dx
/// over [0, t] in `steps` equal steps.
MadelungFields evolve_madelung(const MadelungFields& m, const InteractionParams& params, int steps);
MadelungFields evolve_madelung(const MadelungFields& m, const InteractionParams& params);

/// Same propagation as evolve_gaussian for classical-tagged moments.
/// Throws WrongTag on quantum input.
GaussianMoments classical_twin(const GaussianMoments& state, const InteractionParams& params);

struct KSensitivityRow {
  double k_variance = 0.0;
  double log_negativity = 0.0;
  /// E_N of (Q, Q') conditioned on a readout of the mediator position.
  double conditioned_log_negativity = 0.0;
};

/// Product vacuum for Q and Q', mediator with the given position variance
/// and each requested k variance, evolved to params.t.
std::vector<KSensitivityRow> k_sensitivity(const std::vector<double>& k_variances,
                                           const InteractionParams& params,
                                           double x_variance = kVacuumVariance);

}  // namespace hybrid
