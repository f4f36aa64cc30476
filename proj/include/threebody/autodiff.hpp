#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/AutoDiff>

namespace threebody {

using ADScalar = Eigen::AutoDiffScalar<Eigen::VectorXd>;
using ADVector = Eigen::Matrix<ADScalar, Eigen::Dynamic, 1>;

inline ADVector ad_seed(const Eigen::VectorXd& x) {
  ADVector a(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) a(i) = ADScalar(x(i), x.size(), i);
  return a;
}

// real gradient of a scalar field written generically in its scalar type
template <class F>
Eigen::VectorXd ad_gradient(F&& f, const Eigen::VectorXd& x, double* value = nullptr) {
  ADScalar y = f(ad_seed(x));
  if (value) *value = y.value();
  if (y.derivatives().size() == 0) return Eigen::VectorXd::Zero(x.size());
  return y.derivatives();
}

inline double value_of(double x) { return x; }
inline double value_of(const ADScalar& x) { return x.value(); }

}  // namespace threebody
