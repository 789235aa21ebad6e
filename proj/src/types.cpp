#include "hiersim/types.hpp"

#include <stdexcept>
#include <string>

namespace hiersim {

void require_finite(const Eigen::Ref<const Matrix>& M, std::string_view what) {
  if (!M.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
  }
}

bool is_symmetric(const Eigen::Ref<const Matrix>& S, double rel_tol) {
  if (S.rows() != S.cols()) return false;
  return (S - S.transpose()).norm() <= rel_tol * (1.0 + S.norm());
}

void LinearSystem::validate(std::string_view name) const {
  const std::string who(name);
  if (A.rows() == 0 || A.rows() != A.cols()) {
    throw std::invalid_argument(who + ": A must be square and non-empty");
  }
  if (B.rows() != A.rows()) {
    throw std::invalid_argument(who + ": B row count must match state dim");
  }
  if (C.cols() != A.rows()) {
    throw std::invalid_argument(who + ": C column count must match state dim");
  }
  require_finite(A, who + ".A");
  require_finite(B, who + ".B");
  require_finite(C, who + ".C");
}

}  // namespace hiersim
