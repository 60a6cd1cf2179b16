#pragma once

// Binary cache of assembled FormMatrices.
//
// Layout (all integers and doubles little-endian):
//   8 bytes  magic "RDFORM01"
//   u32      n (cells per axis)
//   u64      reduced dimension
//   five blocks, in the order K1, K2, M, Tpar, Teq:
//     u64    nnz
//     nnz x { i32 row, i32 col, f64 real, f64 imag }   (column-major order)

#include <filesystem>
#include <optional>

#include "rectdirac/formgrid.hpp"

namespace rectdirac {

void write_form_matrices(const std::filesystem::path& path, const FormMatrices& fm);

/// Throws std::runtime_error on a malformed or truncated file and
/// DomainError when the stored grid is invalid.
FormMatrices read_form_matrices(const std::filesystem::path& path);

/// Reads <dir>/form_n<n>.bin if present and valid, otherwise assembles and
/// writes it. Without a directory this is plain assemble().
FormMatrices load_or_assemble(int n, const std::optional<std::filesystem::path>& dir);

}  // namespace rectdirac
