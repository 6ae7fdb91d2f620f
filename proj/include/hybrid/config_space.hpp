#pragma once

// Discretized configuration space z = (q, q', x) and the fields that live on it.
//
// Storage is flat and row-major with axis order (q, q', x): the x index runs
// fastest. All fields on a grid share that layout.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "hybrid/errors.hpp"

namespace hybrid {

using Complex = std::complex<double>;
using RealField = Eigen::ArrayXd;
using ComplexField = Eigen::ArrayXcd;

/// Reduced Planck constant. Fixed; every formula in the library assumes it.
struct Constants {
  static constexpr double hbar = 1.0;

  /// Throws ConfigError for any value other than 1.
  static void validate_hbar(double value);
};

inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kBoundaryMassLimit = 1e-6;
inline constexpr int kBoundaryMarginCells = 2;

enum class Axis : int { Q = 0, QPrime = 1, X = 2 };

inline constexpr std::array<Axis, 3> kAllAxes{Axis::Q, Axis::QPrime, Axis::X};

const char* axis_name(Axis axis);

class GridSpec {
 public:
  /// Uniform grid on [-L, L]^3 with N points per axis. N >= 8.
  explicit GridSpec(double half_width = 8.0, int points_per_axis = 64);

  double half_width() const noexcept { return half_width_; }
  int points() const noexcept { return points_; }
  double spacing() const noexcept { return spacing_; }
  double cell_volume() const noexcept { return spacing_ * spacing_ * spacing_; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(points_) * points_ * points_;
  }

  double coordinate(int i) const noexcept { return -half_width_ + i * spacing_; }

  std::size_t index(int i, int j, int l) const noexcept {
    return (static_cast<std::size_t>(i) * points_ + j) * points_ + l;
  }

  /// Flat-index distance between neighbours along an axis.
  std::ptrdiff_t stride(Axis axis) const noexcept;

  /// Coordinate of every node along one axis, as a field.
  RealField coordinate_field(Axis axis) const;

  bool operator==(const GridSpec& other) const noexcept {
    return half_width_ == other.half_width_ && points_ == other.points_;
  }

 private:
  double half_width_;
  int points_;
  double spacing_;
};

/// Trapezoidal rule on the full grid.
double quadrature(const RealField& field, const GridSpec& grid);
Complex quadrature(const ComplexField& field, const GridSpec& grid);

/// d(field)/d(axis): 4th-order central differences in the interior and
/// 4th-order one-sided stencils on the two nodes nearest each face.
/// Exact for polynomials of degree <= 4.
RealField gradient(const RealField& field, Axis axis, const GridSpec& grid);

/// d(field)/d(axis) by FFT along each grid line; the field is treated as
/// periodic with period N*h and the Nyquist mode is dropped.
ComplexField spectral_derivative(const ComplexField& field, Axis axis, const GridSpec& grid);
RealField spectral_derivative(const RealField& field, Axis axis, const GridSpec& grid);

/// The N x N matrix of the spectral derivative along one grid line.
Eigen::MatrixXd spectral_matrix(const GridSpec& grid);

/// Probability carried by nodes closer than kBoundaryMarginCells cells to any face.
double boundary_mass(const RealField& density, const GridSpec& grid);

/// Closed-form amplitude psi(q, q', x).
using ClosedForm = std::function<Complex(double, double, double)>;

/// Product of three Gaussian packets
///   psi_a(u) ∝ exp(-(u-c)^2 / (2 w^2) + i p u + i chirp (u-c)^2 / 2).
/// With width w the position variance is w^2/2 and the momentum variance
/// 1/(2 w^2) + chirp^2 w^2 / 2.
struct PacketSpec {
  std::array<double, 3> centers{0.0, 0.0, 0.0};
  std::array<double, 3> widths{1.0, 1.0, 1.0};
  std::array<double, 3> momenta{0.0, 0.0, 0.0};
  std::array<double, 3> chirps{0.0, 0.0, 0.0};

  /// Throws NonPositiveWidth.
  void validate() const;
  /// Analytically normalized amplitude.
  Complex amplitude(double q, double qp, double x) const;
  ClosedForm closed_form() const;
};

class HybridWavefunction {
 public:
  /// Validates shape, normalization (1e-9) and boundary mass (1e-6).
  HybridWavefunction(GridSpec grid, ComplexField amplitudes);

  const GridSpec& grid() const noexcept { return grid_; }
  const ComplexField& amplitudes() const noexcept { return amplitudes_; }
  RealField density() const { return amplitudes_.abs2(); }
  double norm() const;

 private:
  GridSpec grid_;
  ComplexField amplitudes_;
};

/// Madelung representation psi = sqrt(P) exp(i S / hbar).
class MadelungFields {
 public:
  /// Validates shape, P >= 0 and normalization of P (1e-9).
  MadelungFields(GridSpec grid, RealField probability, RealField action);

  const GridSpec& grid() const noexcept { return grid_; }
  const RealField& probability() const noexcept { return probability_; }
  const RealField& action() const noexcept { return action_; }

  /// Nodes with P below the floor; S carries no information there.
  std::vector<bool> masked(double floor = kProbabilityFloor) const;
  double masked_mass(double floor = kProbabilityFloor) const;

 private:
  GridSpec grid_;
  RealField probability_;
  RealField action_;
};

/// Normalized product of three Gaussian wavepackets sampled on the grid.
HybridWavefunction gaussian_product_state(const GridSpec& grid, const PacketSpec& spec);
HybridWavefunction gaussian_product_state(const GridSpec& grid, std::array<double, 3> centers,
                                          std::array<double, 3> widths,
                                          std::array<double, 3> momenta);

/// Samples a closed form and rescales it to unit quadrature norm. Throws
/// NotNormalized if the sampled norm is zero and BoundaryMass on leakage.
HybridWavefunction sample_closed_form(const GridSpec& grid, const ClosedForm& form);

/// P = |psi|^2, S = hbar * unwrapped phase. Unwrapping runs along q through
/// the origin node, then along q' from that line, then along x from that
/// plane, moving outward from the origin in each direction. The origin is
/// the grid centre unless it is masked, in which case it is the node of
/// maximal P. S is set to 0 on masked nodes (P < floor).
MadelungFields to_madelung(const HybridWavefunction& psi, double floor = kProbabilityFloor);

/// psi = sqrt(P) exp(i S / hbar).
HybridWavefunction from_madelung(const MadelungFields& fields);

}  // namespace hybrid
