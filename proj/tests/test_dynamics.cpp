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

double max_diff(const GaussianMoments& a, const GaussianMoments& b) {
  return std::max((a.mean() - b.mean()).cwiseAbs().maxCoeff(), (a.cov() - b.cov()).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("heisenberg matrix is the Hamiltonian flow") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2), ut(0, 3);
  for (int i = 0; i < 100; ++i) {
    const InteractionParams p{u(rng), u(rng), ut(rng)};
    CHECK((heisenberg_matrix(p) - oracle::hamilton_flow(p.g1, p.g2, p.t)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("symplecticity over random parameters") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2, 2), ut(0, 3);
  const Matrix6 omega = symplectic_form();
  for (int i = 0; i < 100; ++i) {
    const Matrix6 s = heisenberg_matrix({u(rng), u(rng), ut(rng)});
    CHECK((s * omega * s.transpose() - omega).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("group property") {
  CHECK((heisenberg_matrix({1, 1, 0}) - Matrix6::Identity()).cwiseAbs().maxCoeff() == 0.0);
  const Matrix6 half = heisenberg_matrix({1, 1, 0.5});
  CHECK((half * half - heisenberg_matrix({1, 1, 1.0})).cwiseAbs().maxCoeff() < 1e-12);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2), ut(0, 2);
  for (int i = 0; i < 100; ++i) {
    const double g1 = u(rng), g2 = u(rng), t1 = ut(rng), t2 = ut(rng);
    const Matrix6 lhs = heisenberg_matrix({g1, g2, t1}) * heisenberg_matrix({g1, g2, t2});
    CHECK((lhs - heisenberg_matrix({g1, g2, t1 + t2})).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("decoupled sector") {
  const Matrix6 s = heisenberg_matrix({1.3, 0.0, 0.7});
  Matrix6 expected = Matrix6::Identity();
  expected(kQ, kX) = 1.3 * 0.7;
  expected(kK, kP) = -1.3 * 0.7;
  CHECK((s - expected).cwiseAbs().maxCoeff() == 0.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2, 2), ut(0, 3);
  const GaussianMoments start = GaussianMoments::from_packets(
      PacketSpec{{0.2, 0.1, -0.3}, {0.9, 1.1, 1.3}, {0.4, 0.2, 0.1}, {0.2, -0.1, 0.3}});
  for (int i = 0; i < 20; ++i) {
    const GaussianMoments g = evolve_gaussian(start, {u(rng), 0.0, ut(rng)});
    CHECK(g.cov().block<2, 2>(kQ, kQp).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("flow map") {
  const FlowMap flow({1.0, 1.0, 1.0});
  const Eigen::Vector3d z(0.3, -0.7, 1.1);
  const Eigen::Vector3d fz = flow.apply(z);
  CHECK(fz(0) == doctest::Approx(0.3 + 1.1 - 0.35));
  CHECK(fz(1) == -0.7);
  CHECK(fz(2) == doctest::Approx(1.1 - 0.7));
  CHECK((flow.inverse(fz) - z).norm() < 1e-15);
  CHECK(flow.jacobian() == doctest::Approx(1.0).epsilon(1e-15));
  // Phi_t acts on (q, q', x) exactly as S(t) does on the positions.
  const Matrix6 s = heisenberg_matrix({1.0, 1.0, 1.0});
  CHECK(flow.matrix()(0, 2) == s(kQ, kX));
  CHECK(flow.matrix()(0, 1) == s(kQ, kQp));
  CHECK(flow.matrix()(2, 1) == s(kX, kQp));
}

TEST_CASE("vacuum cross covariances grow as t^2/4") {
  for (double t : {0.0, 0.25, 0.5, 1.0, 2.0}) {
    const GaussianMoments g = evolve_gaussian(GaussianMoments::vacuum(), {1, 1, t});
    CHECK(std::abs(g.cov()(kQ, kQp) - t * t / 4) < 1e-12);
    CHECK(std::abs(g.cov()(kP, kPp) - t * t / 4) < 1e-12);
  }
  const GaussianMoments v = GaussianMoments::vacuum();
  const GaussianMoments same = evolve_gaussian(v, {1, 1, 0});
  CHECK(same.cov() == v.cov());
  CHECK(same.mean() == v.mean());
}

TEST_CASE("tag passes through") {
  const GaussianMoments c = evolve_gaussian(GaussianMoments::vacuum(Tag::Classical), {1, 1, 1});
  const GaussianMoments q = evolve_gaussian(GaussianMoments::vacuum(Tag::Quantum), {1, 1, 1});
  CHECK(c.tag() == Tag::Classical);
  CHECK(c.cov() == q.cov());
}

TEST_CASE("moment validation") {
  Matrix6 cov = Matrix6::Identity() * 0.4;
  check_error(ErrorCode::UncertaintyViolation, [&] { GaussianMoments(Vector6::Zero(), cov, Tag::Quantum); });
  CHECK_NOTHROW(GaussianMoments(Vector6::Zero(), cov, Tag::Classical));
  cov(0, 1) = 0.1;
  check_error(ErrorCode::InvalidState, [&] { GaussianMoments(Vector6::Zero(), cov, Tag::Classical); });
  check_error(ErrorCode::InvalidState,
              [&] { GaussianMoments(Vector6::Zero(), -Matrix6::Identity(), Tag::Classical); });
}

TEST_CASE("parameter validation") {
  check_error(ErrorCode::ConfigError, [] { evolve_gaussian(GaussianMoments::vacuum(), {1, 1, -1}); });
  check_error(ErrorCode::ConfigError, [] { evolve_gaussian(GaussianMoments::vacuum(), {NAN, 1, 1}); });
}

TEST_CASE("wavefunction transport") {
  GridSpec grid;
  PacketSpec spec;
  spec.centers = {0.2, -0.1, 0.3};
  spec.momenta = {0.3, -0.2, 0.1};
  const HybridWavefunction psi = gaussian_product_state(grid, spec);
  const HybridWavefunction same = evolve_wavefunction(psi, {1, 1, 0}, spec.closed_form());
  CHECK((same.amplitudes() - psi.amplitudes()).abs().maxCoeff() == 0.0);

  const InteractionParams p{1, 1, 1};
  const HybridWavefunction exact = evolve_wavefunction(psi, p, spec.closed_form());
  CHECK(std::abs(exact.norm() - 1.0) < 1e-9);
  const GaussianMoments oracle_moments = evolve_gaussian(GaussianMoments::from_packets(spec), p);
  CHECK(max_diff(measure_moments(exact), oracle_moments) < 1e-4);

  const HybridWavefunction interp = evolve_wavefunction(psi, p);
  CHECK(max_diff(measure_moments(interp), oracle_moments) < 1e-3);
  const Complex fidelity = quadrature(ComplexField(exact.amplitudes().conjugate() * interp.amplitudes()), grid);
  CHECK(std::abs(fidelity) > 1.0 - 1e-4);
}

TEST_CASE("transport initializer must match the state") {
  GridSpec grid(6.0, 24);
  PacketSpec spec;
  const HybridWavefunction psi = gaussian_product_state(grid, spec);
  PacketSpec other;
  other.centers = {0.5, 0, 0};
  check_error(ErrorCode::InitializerMismatch, [&] { evolve_wavefunction(psi, {1, 1, 1}, other.closed_form()); });
  // A global phase is allowed.
  const ClosedForm rotated = [&](double q, double qp, double x) {
    return Complex(0, 1) * spec.amplitude(q, qp, x);
  };
  const HybridWavefunction fine = gaussian_product_state(GridSpec(), spec);
  CHECK_NOTHROW(evolve_wavefunction(fine, {1, 1, 1}, rotated));
}

TEST_CASE("transport out of the box is refused") {
  GridSpec grid(8.0, 32);
  PacketSpec spec;
  spec.centers = {0, 0, 2};
  const HybridWavefunction psi = gaussian_product_state(grid, spec);
  check_error(ErrorCode::BoundaryMass, [&] { evolve_wavefunction(psi, {3, 0, 1}, spec.closed_form()); });
}

TEST_CASE("madelung advection") {
  GridSpec grid(6.0, 32);
  PacketSpec spec;
  const MadelungFields m0 = to_madelung(gaussian_product_state(grid, spec));
  const MadelungFields frozen = evolve_madelung(m0, {0, 0, 1});
  CHECK((frozen.probability() - m0.probability()).abs().maxCoeff() == 0.0);
  CHECK((frozen.action() - m0.action()).abs().maxCoeff() == 0.0);

  const RealField q = grid.coordinate_field(Axis::Q);
  const MadelungFields centred = evolve_madelung(m0, {1, 0, 0.5});
  CHECK(std::abs(quadrature(RealField(q * centred.probability()), grid)) < 1e-3);
  PacketSpec shifted;
  shifted.centers = {0, 0, 2};
  const MadelungFields m1 = evolve_madelung(to_madelung(gaussian_product_state(grid, shifted)), {1, 0, 0.5});
  CHECK(std::abs(quadrature(RealField(q * m1.probability()), grid) - 1.0) < 1e-3);
}

TEST_CASE("madelung step bound") {
  GridSpec grid(6.0, 32);
  const MadelungFields m0 = to_madelung(gaussian_product_state(grid, PacketSpec{}));
  const InteractionParams p{1, 1, 1};
  const int needed = static_cast<int>(std::ceil(p.t / max_madelung_step(grid, p)));
  check_error(ErrorCode::StepTooLarge, [&] { evolve_madelung(m0, p, needed - 1); });
  CHECK(madelung_steps(grid, p) >= static_cast<int>(std::ceil(p.t / (0.4 * max_madelung_step(grid, p)))));
}

TEST_CASE("madelung agrees with transport") {
  GridSpec grid;
  PacketSpec spec;
  spec.momenta = {0.3, 0.0, -0.2};
  const HybridWavefunction psi = gaussian_product_state(grid, spec);
  const InteractionParams p{1, 1, 0.5};
  const MadelungFields advected = evolve_madelung(to_madelung(psi), p);
  const HybridWavefunction moved = evolve_wavefunction(psi, p, spec.closed_form());
  const double l2 = std::sqrt(quadrature(RealField((advected.probability() - moved.density()).square()), grid));
  CHECK(l2 < 1e-3);
  CHECK(max_diff(measure_moments(from_madelung(advected)), measure_moments(moved)) < 1e-3);
}

TEST_CASE("classical twin") {
  const GaussianMoments c0 = GaussianMoments::vacuum(Tag::Classical);
  const GaussianMoments twin = classical_twin(c0, {1, 1, 1});
  const Matrix6& cov = twin.cov();
  CHECK(cov(kQ, kQp) / std::sqrt(cov(kQ, kQ) * cov(kQp, kQp)) > 0.0);
  check_error(ErrorCode::TagRefusal, [&] { reduce_to_QQprime(twin); });
  check_error(ErrorCode::WrongTag, [] { classical_twin(GaussianMoments::vacuum(), {1, 1, 1}); });
  CHECK(gaussian_mutual_information(twin) > 0.0);
  // Oracle: diag blocks and determinant from the t^2/4 propagation.
  const double vq = cov(kQ, kQ), vqp = cov(kQp, kQp), c = cov(kQ, kQp);
  const double vp = cov(kP, kP), vpp = cov(kPp, kPp), d = cov(kP, kPp);
  CHECK(c == doctest::Approx(0.25));
  CHECK(cov(kQ, kP) == 0.0);
  const double mi = 0.5 * std::log(vq * vqp / (vq * vqp - c * c)) + 0.5 * std::log(vp * vpp / (vp * vpp - d * d));
  CHECK(gaussian_mutual_information(twin) == doctest::Approx(mi).epsilon(1e-12));
  CHECK(evolve_gaussian(GaussianMoments::vacuum(), {1, 1, 1}).cov() == twin.cov());
}

TEST_CASE("k sensitivity") {
  const auto rows = k_sensitivity({0.5, 1.0, 2.0}, {1, 1, 1});
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) CHECK(r.log_negativity == 0.0);
  // Given a readout of x the table is non-constant.
  CHECK(rows[0].conditioned_log_negativity == doctest::Approx(std::log(2.0) / 2).epsilon(1e-12));
  CHECK(rows[1].conditioned_log_negativity == doctest::Approx(0.227873197204).epsilon(1e-9));
  CHECK(rows[2].conditioned_log_negativity == doctest::Approx(0.127281552799).epsilon(1e-9));

  for (const auto& r : k_sensitivity({0.5, 1.0, 2.0}, {0, 1, 1})) {
    CHECK(r.log_negativity == 0.0);
    CHECK(r.conditioned_log_negativity < 1e-12);
  }
  for (const auto& r : k_sensitivity({0.5, 1.0, 2.0}, {1, 1, 0})) {
    CHECK(r.log_negativity == 0.0);
    CHECK(r.conditioned_log_negativity < 1e-12);
  }
  check_error(ErrorCode::UncertaintyViolation, [] { k_sensitivity({0.4}, {1, 1, 1}); });
  CHECK_NOTHROW(k_sensitivity({0.25}, {1, 1, 1}, 1.0));
}

TEST_CASE("the mediator-traced state stays separable") {
  // det C = c^2 Var(q') Var(p) >= 0 for any product start: Simon's criterion gives E_N = 0.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2, 2), ut(0, 4), w(0.5, 2);
  for (int i = 0; i < 200; ++i) {
    Matrix6 cov = Matrix6::Zero();
    for (int m = 0; m < 3; ++m) {
      const double a = w(rng), ch = u(rng);
      cov(2 * m, 2 * m) = a / 2;
      cov(2 * m + 1, 2 * m + 1) = (1 / a + ch * ch * a) / 2;
      cov(2 * m, 2 * m + 1) = cov(2 * m + 1, 2 * m) = ch * a / 2;
    }
    const GaussianMoments g = evolve_gaussian(GaussianMoments(Vector6::Zero(), cov, Tag::Quantum),
                                              {u(rng), u(rng), ut(rng)});
    const TwoModeCov qq = reduce_to_QQprime(g);
    CHECK(qq.block_c().determinant() >= -1e-12);
    CHECK(log_negativity(qq) < 1e-9);
    CHECK(oracle::log_negativity_bruteforce(qq.matrix()) < 1e-9);
  }
}

}
