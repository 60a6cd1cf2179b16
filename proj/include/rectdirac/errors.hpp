#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace rectdirac {

/// Invalid parameter values (negative mass, odd grid size, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The eigensolver ran out of iterations. Carries the best iterate so the
/// caller can inspect how far it got.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double best_mu, double best_residual,
                Eigen::VectorXcd best_vector, int iterations)
      : std::runtime_error(what),
        best_mu_(best_mu),
        best_residual_(best_residual),
        best_vector_(std::move(best_vector)),
        iterations_(iterations) {}

  double best_mu() const noexcept { return best_mu_; }
  double best_residual() const noexcept { return best_residual_; }
  const Eigen::VectorXcd& best_vector() const noexcept { return best_vector_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double best_mu_;
  double best_residual_;
  Eigen::VectorXcd best_vector_;
  int iterations_;
};

/// An eigenvalue cluster was not invariant under the rotation to tolerance.
class SymmetryResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One of the norms defining the Euler weights vanished numerically.
class DegenerateRatioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A relation that must hold by construction was violated (empty bracket,
/// discrete value below an analytic lower bound, ...). Always a bug.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace rectdirac
