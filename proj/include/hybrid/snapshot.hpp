#pragma once

// State snapshots: a one-line text preamble, a JSON header line describing
// the grid and the arrays, then the arrays as little-endian float64 values,
// each flat in row-major (q, q', x) order. See README for the layout.

#include <filesystem>
#include <iosfwd>

#include "hybrid/config_space.hpp"

namespace hybrid {

inline constexpr const char* kSnapshotMagic = "HYBRID-SNAPSHOT 1";

void write_snapshot(std::ostream& out, const HybridWavefunction& psi);
void write_snapshot(std::ostream& out, const MadelungFields& fields);
void write_snapshot(const std::filesystem::path& path, const HybridWavefunction& psi);
void write_snapshot(const std::filesystem::path& path, const MadelungFields& fields);

HybridWavefunction read_wavefunction_snapshot(std::istream& in);
MadelungFields read_madelung_snapshot(std::istream& in);
HybridWavefunction read_wavefunction_snapshot(const std::filesystem::path& path);
MadelungFields read_madelung_snapshot(const std::filesystem::path& path);

}  // namespace hybrid
