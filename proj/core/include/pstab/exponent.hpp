#pragma once

#include <stdexcept>
#include <string>

namespace pstab {

/// Raised when an argument lies outside the range an operation is defined on.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an iterative solver cannot deliver a result.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exponent p of the p-Laplacian. Always p > 1; the narrower ranges some
/// paths need are checked by `require_at_least_two` / `require_below_two`.
class Exponent {
 public:
  explicit Exponent(double p);

  double value() const noexcept { return p_; }
  operator double() const noexcept { return p_; }

  /// Throws DomainError unless p >= 2. `what` names the caller.
  void require_at_least_two(const std::string& what) const;
  /// Throws DomainError unless 1 < p < 2.
  void require_below_two(const std::string& what) const;

 private:
  double p_;
};

}  // namespace pstab
