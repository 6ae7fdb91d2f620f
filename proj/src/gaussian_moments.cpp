#include "hybrid/gaussian_moments.hpp"

#include <array>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace hybrid {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kPsdTolerance = 1e-10;

}  // namespace

const char* tag_name(Tag tag) { return tag == Tag::Quantum ? "quantum" : "classical"; }

Matrix6 symplectic_form() {
  Matrix6 omega = Matrix6::Zero();
  for (int m = 0; m < 3; ++m) {
    omega(2 * m, 2 * m + 1) = 1.0;
    omega(2 * m + 1, 2 * m) = -1.0;
  }
  return omega;
}

double uncertainty_margin(const Matrix6& cov) {
  using Matrix6c = Eigen::Matrix<Complex, 6, 6>;
  Matrix6c h = cov.cast<Complex>() + Complex(0.0, 0.5 * Constants::hbar) * symplectic_form().cast<Complex>();
  Eigen::SelfAdjointEigenSolver<Matrix6c> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

GaussianMoments::GaussianMoments(Vector6 mean, Matrix6 cov, Tag tag)
    : mean_(std::move(mean)), cov_(std::move(cov)), tag_(tag) {
  if (!mean_.allFinite() || !cov_.allFinite())
    throw Error(ErrorCode::InvalidState, "moments contain non-finite entries");
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale)
    throw Error(ErrorCode::InvalidState, "covariance is not symmetric");
  if (tag_ == Tag::Quantum) {
    const double margin = uncertainty_margin(cov_);
    if (margin < -kPsdTolerance * scale) {
      std::ostringstream os;
      os << "cov + (i/2)Omega has eigenvalue " << margin;
      throw Error(ErrorCode::UncertaintyViolation, os.str());
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix6> solver(cov_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -kPsdTolerance * scale)
      throw Error(ErrorCode::InvalidState, "classical covariance is not positive semidefinite");
  }
}

GaussianMoments GaussianMoments::vacuum(Tag tag) {
  return GaussianMoments(Vector6::Zero(), Matrix6::Identity() * kVacuumVariance, tag);
}

GaussianMoments GaussianMoments::from_packets(const PacketSpec& spec, Tag tag) {
  spec.validate();
  Vector6 mean;
  Matrix6 cov = Matrix6::Zero();
  for (int a = 0; a < 3; ++a) {
    const double w2 = spec.widths[a] * spec.widths[a];
    const double chirp = spec.chirps[a];
    const int qi = 2 * a, pi = 2 * a + 1;
    mean(qi) = spec.centers[a];
    mean(pi) = Constants::hbar * spec.momenta[a];
    cov(qi, qi) = kVacuumVariance * w2;
    cov(pi, pi) = kVacuumVariance * (1.0 / w2 + chirp * chirp * w2);
    cov(qi, pi) = cov(pi, qi) = kVacuumVariance * chirp * w2;
  }
  return GaussianMoments(mean, cov, tag);
}

GaussianMoments measure_moments(const HybridWavefunction& psi) {
  const GridSpec& grid = psi.grid();
  const ComplexField& amp = psi.amplitudes();
  std::array<ComplexField, 6> applied;
  for (int a = 0; a < 3; ++a) {
    const Axis axis = static_cast<Axis>(a);
    applied[2 * a] = amp * grid.coordinate_field(axis);
    applied[2 * a + 1] = spectral_derivative(amp, axis, grid) * Complex(0.0, -Constants::hbar);
  }
  Vector6 mean;
  for (int i = 0; i < 6; ++i)
    mean(i) = quadrature(ComplexField(amp.conjugate() * applied[i]), grid).real();
  Matrix6 cov;
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j) {
      const double second =
          quadrature(ComplexField(applied[i].conjugate() * applied[j]), grid).real();
      cov(i, j) = cov(j, i) = second - mean(i) * mean(j);
    }
  return GaussianMoments(mean, cov, Tag::Quantum);
}

}  // namespace hybrid
