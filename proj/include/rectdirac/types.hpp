#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace rectdirac {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr Complex kI{0.0, 1.0};

/// Rectangle side lengths and particle mass.
struct Geometry {
  double a = 1.0;
  double b = 1.0;
  double m = 0.0;
};

/// Throws DomainError unless a, b > 0 and m >= 0, all finite.
void validate(const Geometry& g);

}  // namespace rectdirac
