#pragma once

#include <string>

#include "rieszlab/grid.hpp"

namespace rieszlab {

// Flat binary field format: a 32-byte header ("RLGF " followed by "d n side"
// as text, NUL-padded; side printed with enough digits to round-trip) and
// then n^d little-endian 8-byte reals in row-major index order.
void write_rlgf(const std::string& path, const GridFunction& f);
GridFunction read_rlgf(const std::string& path);

// CSV interop: header "i0[,i1[,i2]],value", one row per grid point in
// row-major index order.
void write_csv(const std::string& path, const GridFunction& f);
GridFunction read_csv(const std::string& path, const Grid& g);

}  // namespace rieszlab
