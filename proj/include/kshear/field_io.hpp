#pragma once

// Field checkpoint format (version 1), all integers and floats little-endian:
//
//   offset  size  content
//   0       8     magic "KSHRFLD\0"
//   8       4     uint32 version (= 1)
//   12      4     uint32 reserved (= 0)
//   16      8     int64  Nx
//   24      8     int64  Ny
//   32      8     float64 L1
//   40      8     float64 L2
//   48      8     float64 t      (simulation time, 0 for plain fields)
//   56      8     uint64 step    (step index, 0 for plain fields)
//   64      ...   Nx*Ny pairs (re, im) of float64, k = -Nx/2..Nx/2-1 outer,
//                 j = -Ny/2..Ny/2-1 inner, normalized Fourier coefficients.

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "kshear/spectral.hpp"

namespace kshear {

struct FieldCheckpoint {
  SpectralField2D field;
  double t = 0.0;
  std::uint64_t step = 0;
};

void writeCheckpoint(std::ostream& os, const FieldCheckpoint& cp);
FieldCheckpoint readCheckpoint(std::istream& is);

void writeCheckpoint(const std::filesystem::path& path, const FieldCheckpoint& cp);
FieldCheckpoint readCheckpoint(const std::filesystem::path& path);

/// Inspection dump: header "k,j,re,im" and one row per logical mode, 10 digits.
void writeCoefficientCsv(std::ostream& os, const SpectralField2D& field);

}  // namespace kshear
