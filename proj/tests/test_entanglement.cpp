#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "hybrid/dynamics.hpp"
#include "hybrid/entanglement.hpp"

using namespace hybrid;

namespace {

void check_error(ErrorCode code, auto&& fn) {
  try {
    fn();
    FAIL("expected " << to_string(code));
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

Eigen::Matrix2d random_symplectic(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const double th = u(rng), r = u(rng) / 2, ph = u(rng);
  Eigen::Matrix2d rot1, sq, rot2;
  rot1 << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  sq << std::exp(r), 0, 0, std::exp(-r);
  rot2 << std::cos(ph), -std::sin(ph), std::sin(ph), std::cos(ph);
  return rot1 * sq * rot2;
}

}  // namespace

TEST_SUITE("entanglement") {

TEST_CASE("reduction to the probes") {
  const TwoModeCov v = reduce_to_QQprime(GaussianMoments::vacuum());
  CHECK((v.block_a() - Matrix2::Identity() / 2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((v.block_b() - Matrix2::Identity() / 2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(v.block_c().cwiseAbs().maxCoeff() == 0.0);
  const TwoModeCov e = reduce_to_QQprime(evolve_gaussian(GaussianMoments::vacuum(), {1, 1, 1}));
  CHECK(std::abs(e.block_c()(0, 0) - 0.25) < 1e-12);
  CHECK(std::abs(e.block_c()(1, 1) - 0.25) < 1e-12);
  check_error(ErrorCode::TagRefusal, [] { reduce_to_QQprime(GaussianMoments::vacuum(Tag::Classical)); });
  check_error(ErrorCode::TagRefusal,
              [] { condition_on_mediator_position(GaussianMoments::vacuum(Tag::Classical)); });
}

TEST_CASE("log-negativity of two-mode squeezed states") {
  for (double r : {0.25, 0.5, 1.0}) {
    const TwoModeCov cov(oracle::two_mode_squeezed(r));
    CHECK(std::abs(log_negativity(cov) - 2 * r) < 1e-9);
    CHECK(std::abs(oracle::log_negativity_bruteforce(cov.matrix()) - 2 * r) < 1e-9);
  }
  CHECK(log_negativity(TwoModeCov(Matrix4::Identity() / 2)) == 0.0);
}

TEST_CASE("mediated state, exact time series") {
  CHECK(log_negativity(reduce_to_QQprime(GaussianMoments::vacuum())) == 0.0);
  for (double t : {0.25, 0.5, 1.0, 2.0}) {
    const GaussianMoments g = evolve_gaussian(GaussianMoments::vacuum(), {1, 1, t});
    // Regression fixture: the traced state is PPT at every time.
    CHECK(log_negativity(reduce_to_QQprime(g)) == 0.0);
  }
  // Conditioned on x, the vacuum run at t = 1 has nu = 1/(2 sqrt 2).
  const GaussianMoments g1 = evolve_gaussian(GaussianMoments::vacuum(), {1, 1, 1});
  const TwoModeCov cond = condition_on_mediator_position(g1);
  CHECK(log_negativity(cond) == doctest::Approx(std::log(2.0) / 2).epsilon(1e-12));
  CHECK(oracle::log_negativity_bruteforce(cond.matrix()) == doctest::Approx(std::log(2.0) / 2).epsilon(1e-9));
  const double values[] = {0.030312, 0.111572, 0.346574};
  int i = 0;
  for (double t : {0.25, 0.5, 1.0}) {
    const TwoModeCov c = condition_on_mediator_position(evolve_gaussian(GaussianMoments::vacuum(), {1, 1, t}));
    CHECK(std::abs(log_negativity(c) - values[i++]) < 1e-6);
  }
}

TEST_CASE("product covariances have zero log-negativity") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(1.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    Matrix4 cov = Matrix4::Zero();
    const Eigen::Matrix2d sa = random_symplectic(rng), sb = random_symplectic(rng);
    cov.topLeftCorner<2, 2>() = sa * (u(rng) / 2 * Eigen::Matrix2d::Identity()) * sa.transpose();
    cov.bottomRightCorner<2, 2>() = sb * (u(rng) / 2 * Eigen::Matrix2d::Identity()) * sb.transpose();
    CHECK(log_negativity(TwoModeCov(cov)) == 0.0);
  }
}

TEST_CASE("local symplectics leave log-negativity unchanged") {
  std::mt19937_64 rng(32);
  for (double r : {0.25, 0.5, 1.0})
    for (int i = 0; i < 10; ++i) {
      Matrix4 local = Matrix4::Identity();
      local.topLeftCorner<2, 2>() = random_symplectic(rng);
      local.bottomRightCorner<2, 2>() = random_symplectic(rng);
      const Matrix4 moved = local * oracle::two_mode_squeezed(r) * local.transpose();
      CHECK(std::abs(log_negativity(TwoModeCov(0.5 * (moved + moved.transpose()))) - 2 * r) < 1e-9);
    }
}

TEST_CASE("agreement with the symplectic eigensolve") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0, 1.2);
  for (int i = 0; i < 50; ++i) {
    Matrix4 local = Matrix4::Identity();
    local.topLeftCorner<2, 2>() = random_symplectic(rng);
    const Matrix4 cov = local * (oracle::two_mode_squeezed(u(rng)) + Matrix4::Identity() * u(rng) / 4) *
                        local.transpose();
    const TwoModeCov c(0.5 * (cov + cov.transpose()));
    CHECK(std::abs(log_negativity(c) - oracle::log_negativity_bruteforce(c.matrix())) < 1e-9);
  }
}

TEST_CASE("inadmissible covariances") {
  check_error(ErrorCode::Inadmissible, [] { TwoModeCov(Matrix4::Identity() * 0.3); });
  Matrix4 asym = Matrix4::Identity();
  asym(0, 1) = 0.1;
  check_error(ErrorCode::Inadmissible, [&] { TwoModeCov{asym}; });
}

TEST_CASE("gaussian mutual information") {
  CHECK(gaussian_mutual_information(GaussianMoments::vacuum()) == 0.0);
  const GaussianMoments twin = evolve_gaussian(GaussianMoments::vacuum(Tag::Classical), {1, 1, 1});
  const GaussianMoments quantum = evolve_gaussian(GaussianMoments::vacuum(), {1, 1, 1});
  CHECK(gaussian_mutual_information(twin) > 0.0);
  CHECK(gaussian_mutual_information(twin) == gaussian_mutual_information(quantum));
  CHECK(gaussian_mutual_information(reduce_to_QQprime(quantum)) == gaussian_mutual_information(quantum));
  // Pure two-mode squeezed state: det A = det B = cosh^2(2r)/4, det = 1/16.
  const double r = 0.5;
  CHECK(gaussian_mutual_information(TwoModeCov(oracle::two_mode_squeezed(r))) ==
        doctest::Approx(2 * std::log(std::cosh(2 * r))).epsilon(1e-12));
  Matrix6 singular = Matrix6::Identity() * 0.5;
  singular(kQ, kQ) = 0.0;
  singular(kP, kP) = 0.0;
  check_error(ErrorCode::SingularCovariance,
              [&] { gaussian_mutual_information(GaussianMoments(Vector6::Zero(), singular, Tag::Classical)); });
}

TEST_CASE("qubit negativity examples") {
  CHECK(negativity_qubits(TwoQubitState::named("phi+")) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(negativity_qubits(TwoQubitState::named("classical")) == 0.0);
  CHECK(negativity_qubits(TwoQubitState::named("mixed")) == 0.0);
  for (const char* bell : {"phi-", "psi+", "psi-"})
    CHECK(negativity_qubits(TwoQubitState::named(bell)) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("negativity vanishes exactly when the partial transpose is positive") {
  std::mt19937_64 rng(34);
  int entangled = 0, separable = 0;
  for (int i = 0; i < 300; ++i) {
    const Eigen::Matrix4cd rho = oracle::random_density(rng, 1 + i % 4);
    const TwoQubitState state(0.5 * (rho + rho.adjoint()));
    CHECK((partial_transpose(state.matrix()) - oracle::partial_transpose_indices(state.matrix())).cwiseAbs().maxCoeff() ==
          0.0);
    const double lam = oracle::min_eigenvalue(oracle::partial_transpose_indices(state.matrix()));
    const double n = negativity_qubits(state);
    if (lam < -1e-12) {
      ++entangled;
      CHECK(n > 0.0);
      CHECK(n == doctest::Approx(-lam).epsilon(1e-10));  // at most one negative eigenvalue for two qubits
    } else {
      ++separable;
      CHECK(n < 1e-12);
    }
  }
  CHECK(entangled > 0);
  CHECK(separable > 0);
}

TEST_CASE("CHSH maxima") {
  CHECK(std::abs(chsh_max(TwoQubitState::named("phi+")) - 2 * std::sqrt(2.0)) < 1e-9);
  CHECK(std::abs(chsh_max(TwoQubitState::named("classical")) - 2.0) < 1e-9);
  CHECK(chsh_max(TwoQubitState::named("mixed")) < 1e-12);
  const Eigen::Matrix3d t = correlation_matrix(TwoQubitState::named("phi+"));
  CHECK((t - Eigen::Vector3d(1, -1, 1).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("CHSH bounds") {
  std::mt19937_64 rng(35);
  for (int i = 0; i < 300; ++i) {
    const Eigen::Matrix4cd rho = oracle::random_density(rng, 1 + i % 4);
    const TwoQubitState state(0.5 * (rho + rho.adjoint()));
    const double b = chsh_max(state);
    CHECK(b <= 2 * std::sqrt(2.0) + 1e-9);
    if (negativity_qubits(state) < 1e-12) CHECK(b <= 2.0 + 1e-9);
  }
  for (const char* sep : {"00", "01", "10", "11", "mixed", "classical"})
    CHECK(chsh_max(TwoQubitState::named(sep)) <= 2.0 + 1e-9);
}

TEST_CASE("invalid qubit states") {
  Matrix4c bad = Matrix4c::Identity() * 0.25;
  bad(0, 1) = 0.1;
  check_error(ErrorCode::InvalidState, [&] { TwoQubitState{bad}; });
  check_error(ErrorCode::InvalidState, [] { TwoQubitState(Matrix4c::Identity() * 0.3); });
  Matrix4c neg = Matrix4c::Zero();
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  check_error(ErrorCode::InvalidState, [&] { TwoQubitState{neg}; });
  check_error(ErrorCode::InvalidState, [] { TwoQubitState::named("ghz"); });
}

TEST_CASE("verdict records") {
  const EntanglementVerdict yes = judge_entanglement("log_negativity", 2e-6);
  CHECK(yes.entangled);
  CHECK(yes.threshold == kEntanglementThreshold);
  CHECK_FALSE(judge_entanglement("log_negativity", 1e-6).entangled);
}

}
