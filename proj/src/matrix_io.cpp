#include "rectdirac/matrix_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rectdirac {

namespace {

constexpr std::array<char, 8> kMagic = {'R', 'D', 'F', 'O', 'R', 'M', '0', '1'};

static_assert(std::endian::native == std::endian::little, "matrix cache I/O assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) {
    throw std::runtime_error("matrix cache: truncated file");
  }
  return v;
}

void put_matrix(std::ostream& os, const SparseMatrix& a) {
  put<std::uint64_t>(os, static_cast<std::uint64_t>(a.nonZeros()));
  for (int c = 0; c < a.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
      put<std::int32_t>(os, static_cast<std::int32_t>(it.row()));
      put<std::int32_t>(os, static_cast<std::int32_t>(it.col()));
      put<double>(os, it.value().real());
      put<double>(os, it.value().imag());
    }
  }
}

SparseMatrix get_matrix(std::istream& is, std::uint64_t dim) {
  const auto nnz = get<std::uint64_t>(is);
  if (nnz > dim * dim) {
    throw std::runtime_error("matrix cache: implausible nonzero count");
  }
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(nnz);
  for (std::uint64_t k = 0; k < nnz; ++k) {
    const auto r = get<std::int32_t>(is);
    const auto c = get<std::int32_t>(is);
    const auto re = get<double>(is);
    const auto im = get<double>(is);
    if (r < 0 || c < 0 || static_cast<std::uint64_t>(r) >= dim || static_cast<std::uint64_t>(c) >= dim) {
      throw std::runtime_error("matrix cache: index out of range");
    }
    trips.emplace_back(r, c, Complex{re, im});
  }
  SparseMatrix a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

}  // namespace

void write_form_matrices(const std::filesystem::path& path, const FormMatrices& fm) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw std::runtime_error("matrix cache: cannot write " + path.string());
  }
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, static_cast<std::uint32_t>(fm.grid.n()));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(fm.grid.reduced_dimension()));
  for (const SparseMatrix* a : {&fm.k1, &fm.k2, &fm.mass, &fm.trace_par, &fm.trace_eq}) {
    put_matrix(os, *a);
  }
  if (!os) {
    throw std::runtime_error("matrix cache: write failed for " + path.string());
  }
}

FormMatrices read_form_matrices(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw std::runtime_error("matrix cache: cannot open " + path.string());
  }
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) {
    throw std::runtime_error("matrix cache: bad magic in " + path.string());
  }
  const auto n = get<std::uint32_t>(is);
  const auto dim = get<std::uint64_t>(is);
  Grid grid(static_cast<int>(n));
  if (dim != static_cast<std::uint64_t>(grid.reduced_dimension())) {
    throw std::runtime_error("matrix cache: dimension does not match n");
  }
  FormMatrices fm{grid, {}, {}, {}, {}, {}};
  fm.k1 = get_matrix(is, dim);
  fm.k2 = get_matrix(is, dim);
  fm.mass = get_matrix(is, dim);
  fm.trace_par = get_matrix(is, dim);
  fm.trace_eq = get_matrix(is, dim);
  if (is.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("matrix cache: trailing bytes in " + path.string());
  }
  return fm;
}

FormMatrices load_or_assemble(int n, const std::optional<std::filesystem::path>& dir) {
  const Grid grid(n);
  if (!dir) {
    return assemble(grid);
  }
  const std::filesystem::path file = *dir / ("form_n" + std::to_string(n) + ".bin");
  std::error_code ec;
  if (std::filesystem::exists(file, ec)) {
    try {
      return read_form_matrices(file);
    } catch (const std::runtime_error&) {
      // stale or damaged entry; fall through and rebuild it
    }
  }
  FormMatrices fm = assemble(grid);
  std::filesystem::create_directories(*dir, ec);
  const std::filesystem::path tmp = file.string() + ".tmp";
  try {
    write_form_matrices(tmp, fm);
    std::filesystem::rename(tmp, file);
  } catch (const std::exception&) {
    std::filesystem::remove(tmp, ec);
  }
  return fm;
}

}  // namespace rectdirac
