#include "pstab/exponent.hpp"

#include <cmath>
#include <sstream>

namespace pstab {

Exponent::Exponent(double p) : p_(p) {
  if (!std::isfinite(p) || p <= 1.0) {
    std::ostringstream msg;
    msg << "exponent p must satisfy p > 1 (got " << p << ")";
    throw DomainError(msg.str());
  }
}

void Exponent::require_at_least_two(const std::string& what) const {
  if (p_ < 2.0) {
    std::ostringstream msg;
    msg << what << " requires p >= 2 (got " << p_ << ")";
    throw DomainError(msg.str());
  }
}

void Exponent::require_below_two(const std::string& what) const {
  if (p_ >= 2.0) {
    std::ostringstream msg;
    msg << what << " requires 1 < p < 2 (got " << p_ << ")";
    throw DomainError(msg.str());
  }
}

}  // namespace pstab
