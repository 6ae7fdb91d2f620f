#include "hybrid/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace hybrid {

namespace {

constexpr double kAdmissibilityTolerance = 1e-10;

Matrix4 omega2() {
  Matrix4 o = Matrix4::Zero();
  o(0, 1) = o(2, 3) = 1.0;
  o(1, 0) = o(3, 2) = -1.0;
  return o;
}

void refuse_classical(const GaussianMoments& g, const char* what) {
  if (g.tag() == Tag::Classical) {
    throw Error(ErrorCode::TagRefusal,
                std::string(what) +
                    " is only defined for quantum systems; the moments are tagged classical");
  }
}

Matrix4 qq_block(const Matrix6& cov) { return cov.topLeftCorner<4, 4>(); }

std::array<Eigen::Matrix2cd, 4> paulis() {
  Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd sx, sy, sz;
  sx << 0, 1, 1, 0;
  sy << 0, Complex(0, -1), Complex(0, 1), 0;
  sz << 1, 0, 0, -1;
  return {id, sx, sy, sz};
}

Matrix4c kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

}  // namespace

TwoModeCov::TwoModeCov(const Matrix4& cov) : cov_(cov) {
  if (!cov_.allFinite()) throw Error(ErrorCode::Inadmissible, "covariance has non-finite entries");
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorCode::Inadmissible, "covariance is not symmetric");
  Matrix4c h = cov_.cast<Complex>() + Complex(0.0, 0.5 * Constants::hbar) * omega2().cast<Complex>();
  Eigen::SelfAdjointEigenSolver<Matrix4c> solver(h, Eigen::EigenvaluesOnly);
  const double margin = solver.eigenvalues().minCoeff();
  if (margin < -kAdmissibilityTolerance * scale) {
    std::ostringstream os;
    os << "cov + (i/2)Omega has eigenvalue " << margin;
    throw Error(ErrorCode::Inadmissible, os.str());
  }
}

TwoModeCov reduce_to_QQprime(const GaussianMoments& g) {
  refuse_classical(g, "reduce_to_QQprime");
  return TwoModeCov(qq_block(g.cov()));
}

TwoModeCov condition_on_mediator_position(const GaussianMoments& g) {
  refuse_classical(g, "condition_on_mediator_position");
  const Matrix6& c = g.cov();
  const double vx = c(kX, kX);
  if (!(vx > 0.0)) throw Error(ErrorCode::SingularCovariance, "mediator position variance is 0");
  const Eigen::Vector4d v = c.block<4, 1>(0, kX);
  Matrix4 out = qq_block(c) - v * v.transpose() / vx;
  out = 0.5 * (out + out.transpose());
  return TwoModeCov(out);
}

double log_negativity(const TwoModeCov& cov) {
  const double det_a = cov.block_a().determinant();
  const double det_b = cov.block_b().determinant();
  const double det_c = cov.block_c().determinant();
  const double det_all = cov.matrix().determinant();
  const double delta = det_a + det_b - 2.0 * det_c;
  const double disc = std::max(0.0, delta * delta - 4.0 * det_all);
  const double nu = std::sqrt(std::max(0.0, (delta - std::sqrt(disc)) / 2.0));
  if (nu <= 0.0) throw Error(ErrorCode::Inadmissible, "vanishing symplectic eigenvalue");
  return std::max(0.0, -std::log(2.0 * nu / Constants::hbar));
}

double gaussian_mutual_information(const Matrix4& cov) {
  const double det_all = cov.determinant();
  const double det_a = cov.topLeftCorner<2, 2>().determinant();
  const double det_b = cov.bottomRightCorner<2, 2>().determinant();
  if (!(det_all > 0.0) || !(det_a > 0.0) || !(det_b > 0.0))
    throw Error(ErrorCode::SingularCovariance, "mutual information needs a nonsingular covariance");
  return std::max(0.0, 0.5 * std::log(det_a * det_b / det_all));
}

double gaussian_mutual_information(const GaussianMoments& g) {
  return gaussian_mutual_information(qq_block(g.cov()));
}

double gaussian_mutual_information(const TwoModeCov& cov) {
  return gaussian_mutual_information(cov.matrix());
}

TwoQubitState::TwoQubitState(const Matrix4c& rho) : rho_(rho) {
  if (!rho_.allFinite()) throw Error(ErrorCode::InvalidState, "density matrix has non-finite entries");
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(ErrorCode::InvalidState, "density matrix is not Hermitian");
  if (std::abs(rho_.trace() - Complex(1.0)) > 1e-12)
    throw Error(ErrorCode::InvalidState, "density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<Matrix4c> solver(rho_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-12)
    throw Error(ErrorCode::InvalidState, "density matrix has a negative eigenvalue");
}

TwoQubitState TwoQubitState::pure(const Vector4c& amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0)) throw Error(ErrorCode::InvalidState, "zero state vector");
  const Vector4c v = amplitudes / n;
  return TwoQubitState(v * v.adjoint());
}

TwoQubitState TwoQubitState::named(const std::string& name) {
  const double s = 1.0 / std::sqrt(2.0);
  if (name == "phi+") return pure(Vector4c(s, 0, 0, s));
  if (name == "phi-") return pure(Vector4c(s, 0, 0, -s));
  if (name == "psi+") return pure(Vector4c(0, s, s, 0));
  if (name == "psi-") return pure(Vector4c(0, s, -s, 0));
  if (name == "00") return pure(Vector4c(1, 0, 0, 0));
  if (name == "01") return pure(Vector4c(0, 1, 0, 0));
  if (name == "10") return pure(Vector4c(0, 0, 1, 0));
  if (name == "11") return pure(Vector4c(0, 0, 0, 1));
  if (name == "mixed") return TwoQubitState(Matrix4c::Identity() * 0.25);
  if (name == "classical") {
    Matrix4c rho = Matrix4c::Zero();
    rho(0, 0) = rho(3, 3) = 0.5;
    return TwoQubitState(rho);
  }
  throw Error(ErrorCode::InvalidState, "unknown named two-qubit state '" + name + "'");
}

Matrix4c partial_transpose(const Matrix4c& rho) {
  Matrix4c out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) out(2 * a + b, 2 * c + d) = rho(2 * a + d, 2 * c + b);
  return out;
}

double negativity_qubits(const TwoQubitState& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> solver(partial_transpose(rho.matrix()),
                                                 Eigen::EigenvaluesOnly);
  double total = 0.0;
  for (int i = 0; i < 4; ++i) total += std::max(0.0, -solver.eigenvalues()(i));
  return total;
}

Eigen::Matrix3d correlation_matrix(const TwoQubitState& rho) {
  const auto s = paulis();
  Eigen::Matrix3d t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = (rho.matrix() * kron(s[i + 1], s[j + 1])).trace().real();
  return t;
}

double chsh_max(const TwoQubitState& rho) {
  const Eigen::Matrix3d t = correlation_matrix(rho);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(t.transpose() * t, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();  // ascending
  return 2.0 * std::sqrt(std::max(0.0, ev(1) + ev(2)));
}

EntanglementVerdict judge_entanglement(std::string measure, double value, double threshold) {
  return {std::move(measure), value, threshold, value > threshold};
}

}  // namespace hybrid
