#pragma once

#include <functional>
#include <string>

#include "threebody/regularize.hpp"

namespace threebody {

enum class TimeScaleKind { mcgehee_f1, bounded_f2 };

struct TimeScale {
  TimeScaleKind kind = TimeScaleKind::mcgehee_f1;

  static TimeScale f1() { return {TimeScaleKind::mcgehee_f1}; }
  static TimeScale f2() { return {TimeScaleKind::bounded_f2}; }
  static TimeScale parse(const std::string& name);
  std::string name() const { return kind == TimeScaleKind::mcgehee_f1 ? "f1" : "f2"; }

  double f(double r) const {
    return kind == TimeScaleKind::mcgehee_f1 ? std::pow(r, 1.5) : std::pow(r / (1 + r), 1.5);
  }
  // f^2 / r^3
  double nu(double r) const { return kind == TimeScaleKind::mcgehee_f1 ? 1.0 : 1.0 / ((1 + r) * (1 + r) * (1 + r)); }
  double dlog_nu(double r) const { return kind == TimeScaleKind::mcgehee_f1 ? 0.0 : -3.0 / (1 + r); }
  double phi(double r) const { return -0.5 * (1 - r * dlog_nu(r)); }
};

// H = B(q)(p,p)/(2r^2) + A(q)(p_r^2 + mu^2/r^2)/2 - V(q)/r - C(q), on the level H = E
struct GeneralForm {
  std::string name;
  int n = 0;  // real dimension of the shape block
  std::function<ADScalar(const ADVector& q)> A;
  std::function<ADScalar(const ADVector& q, const ADVector& p)> B;
  std::function<ADScalar(const ADVector& q)> C;
  std::function<ADScalar(const ADVector& q)> V;
  // curvature term of the alpha equation in blown-up variables
  std::function<Eigen::VectorXd(const Eigen::VectorXd& q, const Eigen::VectorXd& p, double mu_t)> curvature;
  // dt/ds of the underlying Hamiltonian time (1, or tau for regularized forms)
  std::function<double(const Eigen::VectorXd& q)> rate;
  double E = 0;
  bool reduced = false;
};

struct BlownState {
  double r = 0, v = 0, mu_t = 0;
  Eigen::VectorXd q, alpha;
};

Eigen::VectorXd pack(const BlownState& b);
BlownState unpack_blown(const Eigen::VectorXd& x, int n);

GeneralForm form_spherical(const Masses& M, double h);
GeneralForm form_reduced(const Masses& M, double h);
GeneralForm form_reg_affine(const Masses& M, double h);
GeneralForm form_reg_round(const Masses& M, double h);

// generic rescaling of a (r, p_r, q, p) packed state
BlownState blow_up(const Eigen::VectorXd& packed, double mu, const TimeScale& ts);
Eigen::VectorXd blow_down(const BlownState& b, const TimeScale& ts, double* mu = nullptr);

BlownState blow_up(const SphState& s, const TimeScale& ts);
BlownState blow_up(const RedState& s, const TimeScale& ts);
BlownState blow_up(const RegAffineState& s, const TimeScale& ts);
BlownState blow_up(const RegRoundState& s, const TimeScale& ts);
SphState blow_down_sph(const BlownState& b, const TimeScale& ts);
RedState blow_down_reduced(const BlownState& b, const TimeScale& ts);
RegAffineState blow_down_affine(const BlownState& b, const TimeScale& ts, double h);
RegRoundState blow_down_round(const BlownState& b, const TimeScale& ts, double h);

BlownState rhs_blowup(const BlownState& b, const GeneralForm& F, const TimeScale& ts);
// v' written as (phi + 1) A v^2 + B + A mu_t^2 - nu V
double v_prime_alt(const BlownState& b, const GeneralForm& F, const TimeScale& ts);

// 1/2 A (v^2 + mu_t^2) + 1/2 B - nu V - r nu (C + E)
double energy_residual(const BlownState& b, const GeneralForm& F, const TimeScale& ts);
// sqrt(r) mu_t - sqrt(nu) mu
double mu_constraint_residual(const BlownState& b, const TimeScale& ts, double mu);
// dt / d tau'
double clock_rate(const BlownState& b, const GeneralForm& F, const TimeScale& ts);

// v from the energy relation at given r, shape and momenta (negative root for collapse)
double energy_v(const BlownState& b, const GeneralForm& F, const TimeScale& ts, bool collapsing = true);

}  // namespace threebody
