#include "hybrid/dynamics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "hybrid/entanglement.hpp"

namespace hybrid {

namespace {

Eigen::Matrix3d flow_matrix(double g1, double g2, double t) {
  const double c = 0.5 * g1 * g2 * t * t;
  Eigen::Matrix3d m;
  m << 1.0, c, g1 * t,
       0.0, 1.0, 0.0,
       0.0, g2 * t, 1.0;
  return m;
}

std::array<double, 4> lagrange_weights(double t) {
  return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
          -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

ComplexField interpolate_pullback(const ComplexField& amp, const GridSpec& grid, const FlowMap& flow) {
  const int n = grid.points();
  const double h = grid.spacing();
  const double lo = -grid.half_width();
  ComplexField out(static_cast<Eigen::Index>(grid.size()));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < n; ++l) {
        const Eigen::Vector3d z(grid.coordinate(i), grid.coordinate(j), grid.coordinate(l));
        const Eigen::Vector3d src = flow.inverse(z);
        std::array<int, 3> base;
        std::array<std::array<double, 4>, 3> w;
        for (int a = 0; a < 3; ++a) {
          const double s = (src(a) - lo) / h;
          base[a] = static_cast<int>(std::floor(s));
          w[a] = lagrange_weights(s - base[a]);
        }
        Complex acc = 0.0;
        for (int a = 0; a < 4; ++a) {
          const int ia = base[0] - 1 + a;
          if (ia < 0 || ia >= n) continue;
          for (int b = 0; b < 4; ++b) {
            const int jb = base[1] - 1 + b;
            if (jb < 0 || jb >= n) continue;
            const double wab = w[0][a] * w[1][b];
            for (int c = 0; c < 4; ++c) {
              const int lc = base[2] - 1 + c;
              if (lc < 0 || lc >= n) continue;
              acc += wab * w[2][c] * amp(static_cast<Eigen::Index>(grid.index(ia, jb, lc)));
            }
          }
        }
        out(static_cast<Eigen::Index>(grid.index(i, j, l))) = acc;
      }
    }
  }
  return out;
}

ComplexField sample_at_pullback(const ClosedForm& form, const GridSpec& grid, const FlowMap* flow) {
  const int n = grid.points();
  ComplexField out(static_cast<Eigen::Index>(grid.size()));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        Eigen::Vector3d z(grid.coordinate(i), grid.coordinate(j), grid.coordinate(l));
        if (flow) z = flow->inverse(z);
        out(static_cast<Eigen::Index>(grid.index(i, j, l))) = form(z(0), z(1), z(2));
      }
  return out;
}

void check_boundary(const ComplexField& amp, const GridSpec& grid) {
  const double mass = boundary_mass(amp.abs2(), grid);
  if (mass > kBoundaryMassLimit) {
    std::ostringstream os;
    os << "evolved state carries " << mass << " of its probability in the boundary margin";
    throw Error(ErrorCode::BoundaryMass, os.str());
  }
}

// S carries no information on masked nodes, but the zero placed there by
// to_madelung is a jump that the advection stencils would carry into the
// bulk. Fill masked nodes layer by layer, each from the highest-order axis
// extrapolation its filled neighbours allow (exact for quadratic S).
RealField extend_action(const RealField& s, const std::vector<bool>& masked, const GridSpec& grid) {
  const int n = grid.points();
  RealField out = s;
  std::vector<char> filled(masked.size());
  std::size_t remaining = 0;
  for (std::size_t i = 0; i < masked.size(); ++i) {
    filled[i] = !masked[i];
    remaining += masked[i];
  }
  std::vector<std::pair<std::size_t, double>> layer;
  while (remaining > 0) {
    layer.clear();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          const std::size_t idx = grid.index(i, j, l);
          if (filled[idx]) continue;
          const std::array<int, 3> at{i, j, l};
          int best = 0;
          double sum = 0.0;
          int count = 0;
          for (Axis axis : kAllAxes) {
            const int a = static_cast<int>(axis);
            const std::ptrdiff_t st = grid.stride(axis);
            for (int dir : {-1, 1}) {
              std::array<double, 3> v{};
              int order = 0;
              while (order < 3) {
                const int pos = at[a] + dir * (order + 1);
                if (pos < 0 || pos >= n) break;
                const std::size_t k = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) +
                                                               dir * (order + 1) * st);
                if (!filled[k]) break;
                v[order++] = out[static_cast<Eigen::Index>(k)];
              }
              if (order == 0 || order < best) continue;
              const double estimate = order == 3   ? 3 * v[0] - 3 * v[1] + v[2]
                                      : order == 2 ? 2 * v[0] - v[1]
                                                   : v[0];
              if (order > best) {
                best = order;
                sum = 0.0;
                count = 0;
              }
              sum += estimate;
              ++count;
            }
          }
          if (count > 0) layer.emplace_back(idx, sum / count);
        }
    if (layer.empty()) break;
    for (const auto& [idx, value] : layer) {
      out[static_cast<Eigen::Index>(idx)] = value;
      filled[idx] = 1;
    }
    remaining -= layer.size();
  }
  return out;
}

struct Rates {
  RealField dP;
  RealField dS;
};

Rates advection_rates(const RealField& p, const RealField& s, const RealField& vq, const RealField& vx,
                      const GridSpec& grid) {
  Rates r;
  r.dP = -(vq * spectral_derivative(p, Axis::Q, grid) + vx * spectral_derivative(p, Axis::X, grid));
  r.dS = -(vq * gradient(s, Axis::Q, grid) + vx * gradient(s, Axis::X, grid));
  return r;
}

}  // namespace

void InteractionParams::validate() const {
  if (!std::isfinite(g1) || !std::isfinite(g2) || !std::isfinite(t))
    throw Error(ErrorCode::ConfigError, "interaction parameters must be finite");
  if (t < 0.0) throw Error(ErrorCode::ConfigError, "evolution time must be >= 0");
}

FlowMap::FlowMap(const InteractionParams& params)
    : forward_(flow_matrix(params.g1, params.g2, params.t)),
      backward_(flow_matrix(params.g1, params.g2, -params.t)) {}

Eigen::Vector3d FlowMap::apply(const Eigen::Vector3d& z) const { return forward_ * z; }

Eigen::Vector3d FlowMap::inverse(const Eigen::Vector3d& z) const { return backward_ * z; }

Matrix6 heisenberg_matrix(const InteractionParams& params) {
  const double g1 = params.g1, g2 = params.g2, t = params.t;
  const double c = 0.5 * g1 * g2 * t * t;
  Matrix6 s = Matrix6::Identity();
  s(kQ, kX) = g1 * t;
  s(kQ, kQp) = c;
  s(kPp, kK) = -g2 * t;
  s(kPp, kP) = c;
  s(kX, kQp) = g2 * t;
  s(kK, kP) = -g1 * t;
  return s;
}

GaussianMoments evolve_gaussian(const GaussianMoments& state, const InteractionParams& params) {
  params.validate();
  const Matrix6 s = heisenberg_matrix(params);
  Matrix6 cov = s * state.cov() * s.transpose();
  cov = 0.5 * (cov + cov.transpose());
  return GaussianMoments(s * state.mean(), cov, state.tag());
}

HybridWavefunction evolve_wavefunction(const HybridWavefunction& psi, const InteractionParams& params,
                                       const std::optional<ClosedForm>& initial_form) {
  params.validate();
  const GridSpec& grid = psi.grid();
  if (params.t == 0.0) return psi;
  const FlowMap flow(params);

  if (initial_form) {
    const ComplexField sampled = sample_at_pullback(*initial_form, grid, nullptr);
    const Complex overlap = quadrature((sampled.conjugate() * psi.amplitudes()).eval(), grid);
    const double sampled_norm = quadrature(sampled.abs2().eval(), grid);
    if (!(sampled_norm > 0.0))
      throw Error(ErrorCode::InitializerMismatch, "closed form vanishes on the grid");
    const Complex scale = overlap / sampled_norm;
    const double mismatch = quadrature((psi.amplitudes() - scale * sampled).abs2().eval(), grid);
    if (mismatch > 1e-8) {
      std::ostringstream os;
      os << "closed form differs from the state by " << mismatch << " in squared norm";
      throw Error(ErrorCode::InitializerMismatch, os.str());
    }
    ComplexField moved = scale * sample_at_pullback(*initial_form, grid, &flow);
    check_boundary(moved, grid);
    return HybridWavefunction(grid, std::move(moved));
  }

  ComplexField moved = interpolate_pullback(psi.amplitudes(), grid, flow);
  check_boundary(moved, grid);
  const double norm = std::sqrt(quadrature(moved.abs2().eval(), grid));
  if (!(norm > 0.0)) throw Error(ErrorCode::NotNormalized, "transported state vanishes");
  moved /= norm;
  return HybridWavefunction(grid, std::move(moved));
}

double max_madelung_step(const GridSpec& grid, const InteractionParams& params) {
  const double speed = (std::abs(params.g1) + std::abs(params.g2)) * grid.half_width();
  if (speed == 0.0) return std::numeric_limits<double>::infinity();
  return grid.spacing() / speed;
}

int madelung_steps(const GridSpec& grid, const InteractionParams& params) {
  if (params.t == 0.0) return 0;
  const double dt = 0.4 * max_madelung_step(grid, params);
  if (!std::isfinite(dt)) return 1;
  return std::max(1, static_cast<int>(std::ceil(params.t / dt - 1e-12)));
}

MadelungFields evolve_madelung(const MadelungFields& m, const InteractionParams& params) {
  return evolve_madelung(m, params, madelung_steps(m.grid(), params));
}

MadelungFields evolve_madelung(const MadelungFields& m, const InteractionParams& params, int steps) {
  params.validate();
  const GridSpec& grid = m.grid();
  const double masked = m.masked_mass();
  if (masked > 1e-6) {
    std::ostringstream os;
    os << "masked nodes carry probability " << masked;
    throw Error(ErrorCode::NodeDominated, os.str());
  }
  if (params.t == 0.0 || (params.g1 == 0.0 && params.g2 == 0.0)) return m;
  if (steps < 1) throw Error(ErrorCode::ConfigError, "evolve_madelung needs at least one step");
  const double dt = params.t / steps;
  if (dt > max_madelung_step(grid, params) * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt = " << dt << " exceeds the advection bound " << max_madelung_step(grid, params);
    throw Error(ErrorCode::StepTooLarge, os.str());
  }

  const RealField vq = params.g1 * grid.coordinate_field(Axis::X);
  const RealField vx = params.g2 * grid.coordinate_field(Axis::QPrime);
  RealField p = m.probability();
  RealField s = extend_action(m.action(), m.masked(), grid);
  for (int step = 0; step < steps; ++step) {
    const Rates k1 = advection_rates(p, s, vq, vx, grid);
    const Rates k2 = advection_rates(p + 0.5 * dt * k1.dP, s + 0.5 * dt * k1.dS, vq, vx, grid);
    const Rates k3 = advection_rates(p + 0.5 * dt * k2.dP, s + 0.5 * dt * k2.dS, vq, vx, grid);
    const Rates k4 = advection_rates(p + dt * k3.dP, s + dt * k3.dS, vq, vx, grid);
    p += dt / 6.0 * (k1.dP + 2.0 * k2.dP + 2.0 * k3.dP + k4.dP);
    s += dt / 6.0 * (k1.dS + 2.0 * k2.dS + 2.0 * k3.dS + k4.dS);
  }
  p = p.max(0.0);
  const double total = quadrature(p, grid);
  if (!(total > 0.0)) throw Error(ErrorCode::NotNormalized, "advected density vanishes");
  p /= total;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] < kProbabilityFloor) s[i] = 0.0;
  return MadelungFields(grid, std::move(p), std::move(s));
}

GaussianMoments classical_twin(const GaussianMoments& state, const InteractionParams& params) {
  if (state.tag() != Tag::Classical)
    throw Error(ErrorCode::WrongTag, "classical_twin expects classical-tagged moments");
  return evolve_gaussian(state, params);
}

std::vector<KSensitivityRow> k_sensitivity(const std::vector<double>& k_variances,
                                           const InteractionParams& params, double x_variance) {
  params.validate();
  std::vector<KSensitivityRow> rows;
  rows.reserve(k_variances.size());
  for (double vk : k_variances) {
    if (!(vk > 0.0) || !(x_variance > 0.0))
      throw Error(ErrorCode::UncertaintyViolation, "mediator variances must be positive");
    if (x_variance * vk < kVacuumVariance * kVacuumVariance * (1.0 - 1e-12)) {
      std::ostringstream os;
      os << "Var(x) Var(k) = " << x_variance * vk << " is below hbar^2/4";
      throw Error(ErrorCode::UncertaintyViolation, os.str());
    }
    Matrix6 cov = Matrix6::Identity() * kVacuumVariance;
    cov(kX, kX) = x_variance;
    cov(kK, kK) = vk;
    const GaussianMoments evolved =
        evolve_gaussian(GaussianMoments(Vector6::Zero(), cov, Tag::Quantum), params);
    KSensitivityRow row;
    row.k_variance = vk;
    row.log_negativity = log_negativity(reduce_to_QQprime(evolved));
    row.conditioned_log_negativity = log_negativity(condition_on_mediator_position(evolved));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hybrid
