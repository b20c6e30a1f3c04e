#pragma once

// Field snapshot files.
//
// Binary layout (little-endian):
//   8 bytes   magic "TLSNAP01"
//   4 bytes   dims (int32)
//   8*dims    lengths (float64)
//   4*dims    resolution (int32)
//   8*size    values (float64), row-major, last axis fastest

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "tumorlab/spectral.hpp"

namespace tumorlab {

inline constexpr std::string_view kSnapshotMagic = "TLSNAP01";

void write_snapshot(const std::filesystem::path& path, const Field& field);
Field read_snapshot(const std::filesystem::path& path);

void write_snapshot(std::ostream& out, const Field& field);
Field read_snapshot(std::istream& in);

/// One row per node: i0[,i1[,i2]],value.
void write_field_csv(const std::filesystem::path& path, const Field& field);

}  // namespace tumorlab
