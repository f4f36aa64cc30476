#pragma once

#include <vector>

#include "threebody/chart_spherical.hpp"

namespace threebody {

struct out_of_chart : std::domain_error {
  using std::domain_error::domain_error;
};

struct RedState {
  double r = 1, p_r = 0;
  Config3 X = Config3::Zero();
  CoConfig3 Z = CoConfig3::Zero();
  double mu = 0;
};

// Y = Z + mu i X* / |X|^2
CoConfig3 momentum_shift(const Config3& X, const CoConfig3& Z, double mu, const Masses& M);
RedState to_reduced(const SphState& s, const Masses& M);
SphState from_reduced(const RedState& s, const Masses& M);
RedState to_reduced(const RelState& s, const Masses& M);

double h_mu(const RedState& s, const Masses& M);
// same value through m |alpha|^2 / (2 m1 m2 m3)
double h_mu_fs(const RedState& s, const Masses& M);
RedState rhs_mu(const RedState& s, const Masses& M);
CoConfig3 curvature_mu(const RedState& s);

void normalize_gauge(RedState& s, const Masses& M);

// (r, p_r, X, Z) as 14 reals; mu travels separately
Eigen::VectorXd pack(const RedState& s);
RedState unpack_red(const Eigen::VectorXd& v, double mu);

struct AffineRedState {
  double r = 1, p_r = 0;
  cd z = 0, zeta = 0;
  double mu = 0;
};

// xi = (rho, z) when fixed == 0, xi = (z, rho) when fixed == 1
class AffineChart {
 public:
  AffineChart(const ChartBasis& b, cd rho, int fixed, const Masses& M);
  static AffineChart jacobi(const Masses& M);
  static AffineChart equilateral(const Masses& M);

  Pair2 xi(cd z) const;
  Pair2 eta(cd z, cd zeta) const;
  Config3 shape(cd z) const { return embed(xi(z), basis_); }
  double potential(cd z) const;
  cd potential_grad(cd z) const;

  double h(const AffineRedState& s) const;
  AffineRedState rhs(const AffineRedState& s) const;

  RedState to_reduced(const AffineRedState& s) const;
  AffineRedState from_reduced(const RedState& s) const;
  cd coordinate(const Config3& X) const;

  const ChartBasis& basis() const { return basis_; }
  cd rep() const { return rho_; }
  int fixed() const { return fixed_; }

 private:
  ChartBasis basis_;
  cd rho_;
  int fixed_;
  Masses M_;
  const Config3& free_vector() const { return fixed_ == 0 ? basis_.e2 : basis_.e1; }
};

Eigen::Vector3d hopf_map(const Pair2& xi);
Pair2 inverse_hopf(const Eigen::Vector3d& w);

struct RoundRedState {
  double r = 1, p_r = 0;
  Eigen::Vector3d w = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d alpha = Eigen::Vector3d::Zero();
  double mu = 0;
};

class RoundChart {
 public:
  RoundChart(const ChartBasis& b, const Masses& M);
  static RoundChart equilateral(const Masses& M);

  Eigen::Vector3d rho_sq(const Eigen::Vector3d& w) const;
  // mass norm squared of the shape X(w)
  double shape_norm_sq(const Eigen::Vector3d& w) const;
  Eigen::Vector3d shape_norm_sq_grad(const Eigen::Vector3d& w) const;
  double potential(const Eigen::Vector3d& w) const;
  Eigen::Vector3d potential_grad(const Eigen::Vector3d& w) const;
  double kappa(const Eigen::Vector3d& w) const;

  double h(const RoundRedState& s) const;
  RoundRedState rhs(const RoundRedState& s) const;
  Eigen::Vector3d curvature(const RoundRedState& s) const;

  RedState to_reduced(const RoundRedState& s) const;
  RoundRedState from_reduced(const RedState& s) const;
  Config3 shape(const Eigen::Vector3d& w) const { return embed(inverse_hopf(w), basis_); }
  Eigen::Vector3d point(const Config3& X) const { return hopf_map(chart_coords(X, basis_)); }

  // collision directions on the unit sphere, in 12, 31, 23 order
  std::vector<Eigen::Vector3d> collision_points() const;

  const ChartBasis& basis() const { return basis_; }
  const Masses& masses() const { return M_; }

 private:
  ChartBasis basis_;
  Masses M_;
  Eigen::Vector3d lin_[3];
  double iso_[3];
};

struct GridNode {
  double u, v, V;
};

enum class GridChart { affine, round };

// affine: z in [-extent, extent]^2 of the equilateral chart; round: longitude x latitude
std::vector<GridNode> potential_grid(GridChart chart, int resolution, const Masses& M,
                                     double extent = 2.0);
// lat-lon grid of size (2*res) x res, row-major in latitude
struct GridCounts {
  int minima = 0, saddles = 0, maxima = 0;
};
GridCounts count_grid_extrema(const std::vector<GridNode>& grid, int resolution);

struct CriticalPoint {
  Eigen::Vector3d w;
  double value;
  double grad_norm;
  int index;  // 0 minimum, 1 saddle, 2 maximum
};

// Newton refinement from a seed lattice on the unit sphere
std::vector<CriticalPoint> find_critical_points(const RoundChart& chart, int seeds_per_axis = 24);
// Euler points: 1-d rootfinding on the collinear equator, bracketed between collisions
std::vector<CriticalPoint> euler_points(const RoundChart& chart, double tol = 1e-12);

}  // namespace threebody
