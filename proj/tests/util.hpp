#pragma once

#include <doctest.h>

#include <random>

#include "threebody/system.hpp"

namespace tb = threebody;

inline tb::cd crand(tb::Rng& g) {
  std::normal_distribution<double> N;
  return {N(g), N(g)};
}

inline tb::Config3 rand_triple(tb::Rng& g) { return {crand(g), crand(g), crand(g)}; }

inline tb::Config3 rand_w(tb::Rng& g) {
  const tb::cd a = crand(g), b = crand(g);
  return {a, b, -a - b};
}

inline tb::Config3 rand_cone(tb::Rng& g) { return tb::quad_param(tb::Pair2(crand(g), crand(g))); }

template <class D>
double max_abs(const Eigen::MatrixBase<D>& v) {
  return v.cwiseAbs().maxCoeff();
}
