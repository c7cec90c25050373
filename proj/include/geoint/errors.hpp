// SPDX-License-Identifier: Apache-2.0

#ifndef GEOINT_ERRORS_HPP
#define GEOINT_ERRORS_HPP

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>

namespace geoint {

namespace detail {
inline std::string sci(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}
}  // namespace detail

/// Base of every error raised by the steppers and diagnostics.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation outside a model's domain of validity (B <= 0, bad arguments).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Fixed-point iteration exhausted its budget above tolerance.
class NonConvergence : public Error {
 public:
  NonConvergence(std::size_t iterations, double residual)
      : Error("fixed-point iteration did not converge after " + std::to_string(iterations) +
              " iterations (residual " + detail::sci(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  std::size_t iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

/// 2x2 linear operator with |det| below the guard.
class SingularOperator : public Error {
 public:
  explicit SingularOperator(double determinant)
      : Error("singular 2x2 operator (det " + detail::sci(determinant) + ")"),
        determinant_(determinant) {}

  double determinant() const noexcept { return determinant_; }

 private:
  double determinant_;
};

/// Gravitational separation below the singularity guard.
class SingularConfiguration : public Error {
 public:
  using Error::Error;
};

class SeriesTooShort : public Error {
 public:
  using Error::Error;
};

}  // namespace geoint

#endif  // GEOINT_ERRORS_HPP
