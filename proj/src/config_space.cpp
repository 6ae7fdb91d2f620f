#include "hybrid/config_space.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/FFT>

namespace hybrid {

namespace {

/// Calls fn(start) for the first node of every grid line along `axis`.
template <typename Fn>
void for_each_line(const GridSpec& grid, Axis axis, Fn&& fn) {
  const std::size_t n = static_cast<std::size_t>(grid.points());
  const std::size_t st = static_cast<std::size_t>(grid.stride(axis));
  const std::size_t blocks = grid.size() / (n * st);
  for (std::size_t b = 0; b < blocks; ++b)
    for (std::size_t o = 0; o < st; ++o) fn(b * n * st + o);
}

std::string shape_message(std::size_t got, std::size_t want) {
  std::ostringstream os;
  os << "field has " << got << " nodes, grid expects " << want;
  return os.str();
}

void require_shape(std::size_t got, const GridSpec& grid) {
  if (got != grid.size()) throw Error(ErrorCode::ShapeMismatch, shape_message(got, grid.size()));
}

std::vector<double> trapezoid_weights(const GridSpec& grid) {
  std::vector<double> w(static_cast<std::size_t>(grid.points()), 1.0);
  w.front() = 0.5;
  w.back() = 0.5;
  return w;
}

template <typename Field>
auto trapezoid(const Field& field, const GridSpec& grid) {
  using Scalar = typename Field::Scalar;
  require_shape(static_cast<std::size_t>(field.size()), grid);
  const int n = grid.points();
  const auto w = trapezoid_weights(grid);
  Scalar total{0};
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    Scalar plane{0};
    for (int j = 0; j < n; ++j) {
      Scalar line{0};
      for (int l = 0; l < n; ++l, ++idx) line += w[l] * field[static_cast<Eigen::Index>(idx)];
      plane += w[j] * line;
    }
    total += w[i] * plane;
  }
  return total * grid.cell_volume();
}

double wrap_phase(double d) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  d = std::fmod(d + std::numbers::pi, two_pi);
  if (d < 0) d += two_pi;
  return d - std::numbers::pi;
}

// Unwraps one grid line outward from `origin`, starting from value S[origin].
// Masked nodes get S = 0 and are skipped when choosing the reference.
void unwrap_line(const std::vector<double>& raw, const std::vector<bool>& mask, RealField& s,
                 std::size_t base, std::ptrdiff_t stride, int n, int origin) {
  auto at = [&](int k) { return static_cast<Eigen::Index>(base + k * stride); };
  for (int dir : {+1, -1}) {
    bool have_ref = !mask[at(origin)];
    double ref_raw = raw[at(origin)];
    double ref_val = s[at(origin)];
    for (int k = origin + dir; k >= 0 && k < n; k += dir) {
      const auto id = at(k);
      if (mask[id]) {
        s[id] = 0.0;
        continue;
      }
      if (!have_ref) {
        s[id] = raw[id];
        have_ref = true;
      } else {
        s[id] = ref_val + wrap_phase(raw[id] - ref_raw);
      }
      ref_raw = raw[id];
      ref_val = s[id];
    }
  }
}

}  // namespace

void Constants::validate_hbar(double value) {
  if (value != hbar) {
    std::ostringstream os;
    os << "hbar must be 1 (dimensionless units), got " << value;
    throw Error(ErrorCode::ConfigError, os.str());
  }
}

const char* axis_name(Axis axis) {
  switch (axis) {
    case Axis::Q: return "q";
    case Axis::QPrime: return "q'";
    case Axis::X: return "x";
  }
  return "?";
}

GridSpec::GridSpec(double half_width, int points_per_axis)
    : half_width_(half_width), points_(points_per_axis), spacing_(0.0) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw Error(ErrorCode::ConfigError, "grid half_width must be positive and finite");
  }
  if (points_per_axis < 8) {
    throw Error(ErrorCode::ConfigError, "grid points_per_axis must be >= 8");
  }
  spacing_ = 2.0 * half_width / (points_per_axis - 1);
}

std::ptrdiff_t GridSpec::stride(Axis axis) const noexcept {
  switch (axis) {
    case Axis::Q: return static_cast<std::ptrdiff_t>(points_) * points_;
    case Axis::QPrime: return points_;
    case Axis::X: return 1;
  }
  return 1;
}

RealField GridSpec::coordinate_field(Axis axis) const {
  RealField out(static_cast<Eigen::Index>(size()));
  const int n = points_;
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l, ++idx) {
        const int k = axis == Axis::Q ? i : (axis == Axis::QPrime ? j : l);
        out[static_cast<Eigen::Index>(idx)] = coordinate(k);
      }
  return out;
}

double quadrature(const RealField& field, const GridSpec& grid) { return trapezoid(field, grid); }

Complex quadrature(const ComplexField& field, const GridSpec& grid) {
  return trapezoid(field, grid);
}

RealField gradient(const RealField& field, Axis axis, const GridSpec& grid) {
  require_shape(static_cast<std::size_t>(field.size()), grid);
  const int n = grid.points();
  const std::ptrdiff_t st = grid.stride(axis);
  const double inv = 1.0 / (12.0 * grid.spacing());
  RealField out(field.size());
  const double* f = field.data();
  double* g = out.data();

  for_each_line(grid, axis, [&](std::size_t start) {
    auto v = [&](int k) { return f[start + k * st]; };
    auto put = [&](int k, double value) { g[start + k * st] = value * inv; };
    put(0, -25 * v(0) + 48 * v(1) - 36 * v(2) + 16 * v(3) - 3 * v(4));
    put(1, -3 * v(0) - 10 * v(1) + 18 * v(2) - 6 * v(3) + v(4));
    for (int k = 2; k < n - 2; ++k) put(k, v(k - 2) - 8 * v(k - 1) + 8 * v(k + 1) - v(k + 2));
    put(n - 2, 3 * v(n - 1) + 10 * v(n - 2) - 18 * v(n - 3) + 6 * v(n - 4) - v(n - 5));
    put(n - 1, 25 * v(n - 1) - 48 * v(n - 2) + 36 * v(n - 3) - 16 * v(n - 4) + 3 * v(n - 5));
  });
  return out;
}

Eigen::MatrixXd spectral_matrix(const GridSpec& grid) {
  const int n = grid.points();
  const double period = n * grid.spacing();
  std::vector<Complex> ik(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    int freq = m <= n / 2 ? m : m - n;
    if (n % 2 == 0 && m == n / 2) freq = 0;
    ik[m] = Complex(0.0, 2.0 * std::numbers::pi * freq / period);
  }
  Eigen::FFT<double> fft;
  std::vector<Complex> line(static_cast<std::size_t>(n)), spec(static_cast<std::size_t>(n));
  Eigen::MatrixXd d(n, n);
  for (int col = 0; col < n; ++col) {
    std::fill(line.begin(), line.end(), Complex(0.0));
    line[col] = 1.0;
    fft.fwd(spec, line);
    for (int m = 0; m < n; ++m) spec[m] *= ik[m];
    fft.inv(line, spec);
    for (int row = 0; row < n; ++row) d(row, col) = line[row].real();
  }
  return d;
}

RealField spectral_derivative(const RealField& field, Axis axis, const GridSpec& grid) {
  require_shape(static_cast<std::size_t>(field.size()), grid);
  const Eigen::MatrixXd d = spectral_matrix(grid);
  const Eigen::Index n = grid.points();
  const Eigen::Index st = grid.stride(axis);
  RealField out(field.size());
  if (st == 1) {
    Eigen::Map<const Eigen::MatrixXd> in(field.data(), n, field.size() / n);
    Eigen::Map<Eigen::MatrixXd>(out.data(), n, field.size() / n).noalias() = d * in;
    return out;
  }
  const Eigen::Index blocks = field.size() / (n * st);
  for (Eigen::Index b = 0; b < blocks; ++b) {
    Eigen::Map<const Eigen::MatrixXd> in(field.data() + b * n * st, st, n);
    Eigen::Map<Eigen::MatrixXd>(out.data() + b * n * st, st, n).noalias() = in * d.transpose();
  }
  return out;
}

ComplexField spectral_derivative(const ComplexField& field, Axis axis, const GridSpec& grid) {
  require_shape(static_cast<std::size_t>(field.size()), grid);
  const RealField re = spectral_derivative(RealField(field.real()), axis, grid);
  const RealField im = spectral_derivative(RealField(field.imag()), axis, grid);
  ComplexField out(field.size());
  out.real() = re;
  out.imag() = im;
  return out;
}

double boundary_mass(const RealField& density, const GridSpec& grid) {
  require_shape(static_cast<std::size_t>(density.size()), grid);
  const int n = grid.points();
  const int lo = kBoundaryMarginCells;
  const int hi = n - 1 - kBoundaryMarginCells;
  auto edge = [&](int k) { return k < lo || k > hi; };
  double mass = 0.0;
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l, ++idx)
        if (edge(i) || edge(j) || edge(l)) mass += density[static_cast<Eigen::Index>(idx)];
  return mass * grid.cell_volume();
}

void PacketSpec::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (!(widths[a] > 0.0) || !std::isfinite(widths[a])) {
      std::ostringstream os;
      os << "packet width on axis " << axis_name(static_cast<Axis>(a)) << " is " << widths[a];
      throw Error(ErrorCode::NonPositiveWidth, os.str());
    }
  }
}

Complex PacketSpec::amplitude(double q, double qp, double x) const {
  const std::array<double, 3> u{q, qp, x};
  Complex value{1.0, 0.0};
  for (int a = 0; a < 3; ++a) {
    const double d = u[a] - centers[a];
    const double w = widths[a];
    const double mag = std::pow(std::numbers::pi * w * w, -0.25) * std::exp(-d * d / (2.0 * w * w));
    const double phase = (momenta[a] * u[a] + 0.5 * chirps[a] * d * d) / Constants::hbar;
    value *= std::polar(mag, phase);
  }
  return value;
}

ClosedForm PacketSpec::closed_form() const {
  return [spec = *this](double q, double qp, double x) { return spec.amplitude(q, qp, x); };
}

HybridWavefunction::HybridWavefunction(GridSpec grid, ComplexField amplitudes)
    : grid_(grid), amplitudes_(std::move(amplitudes)) {
  require_shape(static_cast<std::size_t>(amplitudes_.size()), grid_);
  const double n = norm();
  if (std::abs(n - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os << "wavefunction norm " << n << " deviates from 1 by more than " << kNormTolerance;
    throw Error(ErrorCode::NotNormalized, os.str());
  }
  const double edge = boundary_mass(amplitudes_.abs2(), grid_);
  if (edge > kBoundaryMassLimit) {
    std::ostringstream os;
    os << "probability " << edge << " within " << kBoundaryMarginCells
       << " cells of the boundary exceeds " << kBoundaryMassLimit;
    throw Error(ErrorCode::BoundaryMass, os.str());
  }
}

double HybridWavefunction::norm() const { return quadrature(RealField(amplitudes_.abs2()), grid_); }

MadelungFields::MadelungFields(GridSpec grid, RealField probability, RealField action)
    : grid_(grid), probability_(std::move(probability)), action_(std::move(action)) {
  require_shape(static_cast<std::size_t>(probability_.size()), grid_);
  require_shape(static_cast<std::size_t>(action_.size()), grid_);
  if ((probability_ < 0.0).any()) {
    throw Error(ErrorCode::InvalidState, "probability density has negative entries");
  }
  const double total = quadrature(probability_, grid_);
  if (std::abs(total - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os << "integral of P is " << total;
    throw Error(ErrorCode::NotNormalized, os.str());
  }
}

std::vector<bool> MadelungFields::masked(double floor) const {
  std::vector<bool> out(static_cast<std::size_t>(probability_.size()));
  for (Eigen::Index k = 0; k < probability_.size(); ++k) out[k] = probability_[k] < floor;
  return out;
}

double MadelungFields::masked_mass(double floor) const {
  RealField m = (probability_ < floor).select(probability_, 0.0);
  return quadrature(m, grid_);
}

HybridWavefunction sample_closed_form(const GridSpec& grid, const ClosedForm& form) {
  const int n = grid.points();
  ComplexField psi(static_cast<Eigen::Index>(grid.size()));
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l, ++idx)
        psi[static_cast<Eigen::Index>(idx)] =
            form(grid.coordinate(i), grid.coordinate(j), grid.coordinate(l));
  const double norm2 = quadrature(RealField(psi.abs2()), grid);
  if (!(norm2 > 0.0)) throw Error(ErrorCode::NotNormalized, "sampled state has zero norm");
  psi /= std::sqrt(norm2);
  return HybridWavefunction(grid, std::move(psi));
}

HybridWavefunction gaussian_product_state(const GridSpec& grid, const PacketSpec& spec) {
  spec.validate();
  return sample_closed_form(grid, spec.closed_form());
}

HybridWavefunction gaussian_product_state(const GridSpec& grid, std::array<double, 3> centers,
                                          std::array<double, 3> widths,
                                          std::array<double, 3> momenta) {
  PacketSpec spec;
  spec.centers = centers;
  spec.widths = widths;
  spec.momenta = momenta;
  return gaussian_product_state(grid, spec);
}

MadelungFields to_madelung(const HybridWavefunction& psi, double floor) {
  const GridSpec& grid = psi.grid();
  const int n = grid.points();
  const ComplexField& amp = psi.amplitudes();
  RealField p = amp.abs2();

  std::vector<double> raw(static_cast<std::size_t>(amp.size()));
  std::vector<bool> mask(static_cast<std::size_t>(amp.size()));
  for (Eigen::Index k = 0; k < amp.size(); ++k) {
    raw[k] = std::arg(amp[k]);
    mask[k] = p[k] < floor;
  }

  int oi = n / 2, oj = n / 2, ol = n / 2;
  if (mask[grid.index(oi, oj, ol)]) {
    Eigen::Index best = 0;
    p.maxCoeff(&best);
    const auto b = static_cast<std::size_t>(best);
    oi = static_cast<int>(b / (static_cast<std::size_t>(n) * n));
    oj = static_cast<int>((b / n) % n);
    ol = static_cast<int>(b % n);
  }

  RealField s = RealField::Zero(amp.size());
  const auto origin = static_cast<Eigen::Index>(grid.index(oi, oj, ol));
  s[origin] = mask[origin] ? 0.0 : raw[origin];

  unwrap_line(raw, mask, s, grid.index(0, oj, ol), grid.stride(Axis::Q), n, oi);
  for (int i = 0; i < n; ++i)
    unwrap_line(raw, mask, s, grid.index(i, 0, ol), grid.stride(Axis::QPrime), n, oj);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      unwrap_line(raw, mask, s, grid.index(i, j, 0), grid.stride(Axis::X), n, ol);

  s *= Constants::hbar;
  return MadelungFields(grid, std::move(p), std::move(s));
}

HybridWavefunction from_madelung(const MadelungFields& fields) {
  const RealField& p = fields.probability();
  const RealField& s = fields.action();
  ComplexField psi(p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k)
    psi[k] = std::polar(std::sqrt(p[k]), s[k] / Constants::hbar);
  return HybridWavefunction(fields.grid(), std::move(psi));
}

}  // namespace hybrid
