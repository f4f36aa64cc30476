#include "threebody/core.hpp"

namespace threebody {

cd alpha_form(const Config3& X, const CoConfig3& Z, const Masses& M, int which) {
  if (X.norm() == 0) throw invalid_state("alpha_form: X = 0");
  const Eigen::Vector3d w = M.pair();
  switch (which) {
    case 0:
      return (w(0) * X(0) * (Z(2) - Z(1)) + w(1) * X(1) * (Z(0) - Z(2)) +
              w(2) * X(2) * (Z(1) - Z(0))) / M.m;
    case 1:
      return mass_norm_sq(X, M) * (Z(1) - Z(0)) / std::conj(X(2));
    case 2:
      return mass_norm_sq(X, M) * (Z(0) - Z(2)) / std::conj(X(1));
    case 3:
      return mass_norm_sq(X, M) * (Z(2) - Z(1)) / std::conj(X(0));
    default:
      throw std::out_of_range("alpha_form: which in 0..3");
  }
}

}  // namespace threebody
