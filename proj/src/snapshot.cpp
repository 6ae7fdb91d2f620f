#include "hybrid/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

namespace hybrid {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

json header_for(const GridSpec& grid, const char* kind, const char* a, const char* b) {
  const auto count = grid.size();
  return json{
      {"format", "hybrid-snapshot"},
      {"version", 1},
      {"kind", kind},
      {"grid",
       {{"half_width", grid.half_width()},
        {"points_per_axis", grid.points()},
        {"axes", {"q", "q'", "x"}}}},
      {"layout", "row-major"},
      {"arrays",
       {{{"name", a}, {"dtype", "f64le"}, {"count", count}},
        {{"name", b}, {"dtype", "f64le"}, {"count", count}}}},
  };
}

void write_array(std::ostream& out, const RealField& values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

RealField read_array(std::istream& in, std::size_t count) {
  RealField values(static_cast<Eigen::Index>(count));
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw Error(ErrorCode::ShapeMismatch, "snapshot truncated");
  return values;
}

struct Parsed {
  GridSpec grid;
  RealField first;
  RealField second;
};

Parsed read_any(std::istream& in, const std::string& expected_kind) {
  std::string magic;
  std::getline(in, magic);
  if (magic != kSnapshotMagic) throw Error(ErrorCode::ParseError, "not a hybrid snapshot");
  std::string header_line;
  std::getline(in, header_line);
  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("snapshot header: ") + e.what());
  }
  if (header.value("kind", "") != expected_kind) {
    throw Error(ErrorCode::ParseError,
                "snapshot kind is '" + header.value("kind", "") + "', expected " + expected_kind);
  }
  GridSpec grid(header.at("grid").at("half_width").get<double>(),
                header.at("grid").at("points_per_axis").get<int>());
  const auto& arrays = header.at("arrays");
  if (arrays.size() != 2) throw Error(ErrorCode::ParseError, "snapshot must hold two arrays");
  for (const auto& a : arrays) {
    if (a.at("count").get<std::size_t>() != grid.size())
      throw Error(ErrorCode::ShapeMismatch, "snapshot array count does not match grid");
  }
  RealField first = read_array(in, grid.size());
  RealField second = read_array(in, grid.size());
  return {grid, std::move(first), std::move(second)};
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  return in;
}

}  // namespace

void write_snapshot(std::ostream& out, const HybridWavefunction& psi) {
  out << kSnapshotMagic << '\n'
      << header_for(psi.grid(), "wavefunction", "real", "imag").dump() << '\n';
  write_array(out, psi.amplitudes().real());
  write_array(out, psi.amplitudes().imag());
}

void write_snapshot(std::ostream& out, const MadelungFields& fields) {
  out << kSnapshotMagic << '\n' << header_for(fields.grid(), "madelung", "P", "S").dump() << '\n';
  write_array(out, fields.probability());
  write_array(out, fields.action());
}

void write_snapshot(const std::filesystem::path& path, const HybridWavefunction& psi) {
  auto out = open_out(path);
  write_snapshot(out, psi);
}

void write_snapshot(const std::filesystem::path& path, const MadelungFields& fields) {
  auto out = open_out(path);
  write_snapshot(out, fields);
}

HybridWavefunction read_wavefunction_snapshot(std::istream& in) {
  auto parsed = read_any(in, "wavefunction");
  ComplexField amp(parsed.first.size());
  amp.real() = parsed.first;
  amp.imag() = parsed.second;
  return HybridWavefunction(parsed.grid, std::move(amp));
}

MadelungFields read_madelung_snapshot(std::istream& in) {
  auto parsed = read_any(in, "madelung");
  return MadelungFields(parsed.grid, std::move(parsed.first), std::move(parsed.second));
}

HybridWavefunction read_wavefunction_snapshot(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_wavefunction_snapshot(in);
}

MadelungFields read_madelung_snapshot(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_madelung_snapshot(in);
}

}  // namespace hybrid
