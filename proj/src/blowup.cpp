#include "threebody/blowup.hpp"

namespace threebody {

TimeScale TimeScale::parse(const std::string& name) {
  if (name == "f1" || name == "mcgehee") return f1();
  if (name == "f2" || name == "bounded") return f2();
  throw invalid_state("unknown timescale '" + name + "' (expected f1 or f2)");
}

Eigen::VectorXd pack(const BlownState& b) {
  const Eigen::Index n = b.q.size();
  Eigen::VectorXd x(3 + 2 * n);
  x << b.r, b.v, b.mu_t, b.q, b.alpha;
  return x;
}

BlownState unpack_blown(const Eigen::VectorXd& x, int n) {
  BlownState b;
  b.r = x(0);
  b.v = x(1);
  b.mu_t = x(2);
  b.q = x.segment(3, n);
  b.alpha = x.segment(3 + n, n);
  return b;
}

namespace {

// -2 i s alpha on (re, im) pairs
Eigen::VectorXd rotate_minus_i(const Eigen::VectorXd& p, double s) {
  Eigen::VectorXd t(p.size());
  for (Eigen::Index k = 0; k < p.size(); k += 2) {
    t(k) = 2 * s * p(k + 1);
    t(k + 1) = -2 * s * p(k);
  }
  return t;
}

GeneralForm shape_form(const Masses& M, double h, bool reduced) {
  GeneralForm F;
  F.name = reduced ? "blowup_reduced" : "blowup_sph";
  F.n = 6;
  // constants carry a zero derivative vector so they mix with seeded scalars
  F.A = [](const ADVector& q) { return ADScalar(1.0, Eigen::VectorXd::Zero(q(0).derivatives().size())); };
  F.C = [](const ADVector& q) { return ADScalar(0.0, Eigen::VectorXd::Zero(q(0).derivatives().size())); };
  F.B = [M](const ADVector& q, const ADVector& p) {
    const Triple<ADScalar> X = unpack_triple<ADScalar>(q, 0), a = unpack_triple<ADScalar>(p, 0);
    return ADScalar(2 * mass_norm_sq(X, M) * kinetic(a, M));
  };
  F.V = [M](const ADVector& q) { return ADScalar(shape_potential(unpack_triple<ADScalar>(q, 0), M)); };
  if (reduced)
    F.curvature = [](const Eigen::VectorXd&, const Eigen::VectorXd& p, double mt) { return rotate_minus_i(p, mt); };
  else
    F.curvature = [](const Eigen::VectorXd&, const Eigen::VectorXd& p, double) {
      return Eigen::VectorXd::Zero(p.size()).eval();
    };
  F.rate = [](const Eigen::VectorXd&) { return 1.0; };
  F.E = h;
  F.reduced = reduced;
  return F;
}

}  // namespace

GeneralForm form_spherical(const Masses& M, double h) { return shape_form(M, h, false); }
GeneralForm form_reduced(const Masses& M, double h) { return shape_form(M, h, true); }

GeneralForm form_reg_affine(const Masses& M, double h) {
  GeneralForm F;
  F.name = "blowup_affine";
  F.n = 2;
  F.A = [](const ADVector& q) { return rho_tau(affine_rho(q(0), q(1))); };
  F.C = [h](const ADVector& q) { return ADScalar(h * rho_tau(affine_rho(q(0), q(1)))); };
  F.B = [M](const ADVector& q, const ADVector& p) {
    return ADScalar(affine_kin_factor(q(0), q(1), M) * (p(0) * p(0) + p(1) * p(1)) / 2);
  };
  F.V = [M](const ADVector& q) { return rho_W(affine_rho(q(0), q(1)), M); };
  F.curvature = [](const Eigen::VectorXd& q, const Eigen::VectorXd& p, double mt) {
    return rotate_minus_i(p, mt * rho_tau(affine_rho(q(0), q(1))));
  };
  F.rate = [](const Eigen::VectorXd& q) { return rho_tau(affine_rho(q(0), q(1))); };
  F.E = 0;
  F.reduced = true;
  return F;
}

GeneralForm form_reg_round(const Masses& M, double h) {
  GeneralForm F;
  F.name = "blowup_round";
  F.n = 3;
  auto cvec = [](const ADVector& q) { return Vec3<ADScalar>(q(0), q(1), q(2)); };
  F.A = [cvec](const ADVector& q) { return rho_tau(rho_of_c(cvec(q))); };
  F.C = [cvec, h](const ADVector& q) { return ADScalar(h * rho_tau(rho_of_c(cvec(q)))); };
  F.B = [cvec, M](const ADVector& q, const ADVector& p) {
    return ADScalar(2 * c_kin_factor(cvec(q), M) * p.squaredNorm());
  };
  F.V = [cvec, M](const ADVector& q) { return rho_W(rho_of_c(cvec(q)), M); };
  F.curvature = [](const Eigen::VectorXd& q, const Eigen::VectorXd& p, double mt) {
    const Eigen::Vector3d c = q.head<3>(), a = p.head<3>();
    return Eigen::VectorXd((2 * mt * tau_c(c) / c.norm()) * a.cross(c));
  };
  F.rate = [](const Eigen::VectorXd& q) { return tau_c(q.head<3>()); };
  F.E = 0;
  F.reduced = true;
  return F;
}

BlownState blow_up(const Eigen::VectorXd& packed, double mu, const TimeScale& ts) {
  const double r = packed(0);
  if (!(r > 0)) throw invalid_state("blow_up: requires r > 0");
  const Eigen::Index n = (packed.size() - 2) / 2;
  const double f = ts.f(r);
  BlownState b;
  b.r = r;
  b.v = f * packed(1) / r;
  b.mu_t = f * mu / (r * r);
  b.q = packed.segment(2, n);
  b.alpha = (f / (r * r)) * packed.segment(2 + n, n);
  return b;
}

Eigen::VectorXd blow_down(const BlownState& b, const TimeScale& ts, double* mu) {
  if (!(b.r > 0)) throw invalid_state("blow_down: the collision manifold r = 0 has no physical preimage");
  const double r = b.r, f = ts.f(r);
  const Eigen::Index n = b.q.size();
  Eigen::VectorXd x(2 + 2 * n);
  x(0) = r;
  x(1) = r * b.v / f;
  x.segment(2, n) = b.q;
  x.segment(2 + n, n) = (r * r / f) * b.alpha;
  if (mu) *mu = r * r * b.mu_t / f;
  return x;
}

BlownState blow_up(const SphState& s, const TimeScale& ts) { return blow_up(pack(s), 0.0, ts); }
BlownState blow_up(const RedState& s, const TimeScale& ts) { return blow_up(pack(s), s.mu, ts); }
BlownState blow_up(const RegAffineState& s, const TimeScale& ts) { return blow_up(pack(s), s.mu, ts); }
BlownState blow_up(const RegRoundState& s, const TimeScale& ts) { return blow_up(pack(s), s.mu, ts); }

SphState blow_down_sph(const BlownState& b, const TimeScale& ts) { return unpack_sph(blow_down(b, ts)); }

RedState blow_down_reduced(const BlownState& b, const TimeScale& ts) {
  double mu = 0;
  const Eigen::VectorXd x = blow_down(b, ts, &mu);
  return unpack_red(x, mu);
}

RegAffineState blow_down_affine(const BlownState& b, const TimeScale& ts, double h) {
  double mu = 0;
  const Eigen::VectorXd x = blow_down(b, ts, &mu);
  return unpack_affine(x, mu, h);
}

RegRoundState blow_down_round(const BlownState& b, const TimeScale& ts, double h) {
  double mu = 0;
  const Eigen::VectorXd x = blow_down(b, ts, &mu);
  return unpack_round(x, mu, h);
}

namespace {

struct Eval {
  double A, B, C, V;
  Eigen::VectorXd grad;  // of 1/2 A (v^2 + mu_t^2) + 1/2 B - nu V - r nu C over (q, alpha)
};

Eval evaluate(const BlownState& b, const GeneralForm& F, const TimeScale& ts) {
  const int n = F.n;
  if (b.q.size() != n || b.alpha.size() != n) throw invalid_state("blown state does not match form " + F.name);
  Eigen::VectorXd x(2 * n);
  x << b.q, b.alpha;
  const ADVector ax = ad_seed(x);
  const ADVector q = ax.head(n), p = ax.tail(n);
  const ADScalar A = F.A(q), B = F.B(q, p), C = F.C(q), V = F.V(q);
  const double nu = ts.nu(b.r);
  const ADScalar G = 0.5 * A * (b.v * b.v + b.mu_t * b.mu_t) + 0.5 * B - nu * V - b.r * nu * C;
  Eval e{A.value(), B.value(), C.value(), V.value(), G.derivatives()};
  if (e.grad.size() == 0) e.grad = Eigen::VectorXd::Zero(2 * n);
  return e;
}

}  // namespace

BlownState rhs_blowup(const BlownState& b, const GeneralForm& F, const TimeScale& ts) {
  const Eval e = evaluate(b, F, ts);
  const int n = F.n;
  const double phi = ts.phi(b.r), nu = ts.nu(b.r);
  const double twoK = e.A * (b.v * b.v + b.mu_t * b.mu_t) + e.B;
  BlownState d;
  d.r = e.A * b.v * b.r;
  d.v = phi * e.A * b.v * b.v + twoK - nu * e.V;
  d.mu_t = F.reduced ? phi * e.A * b.v * b.mu_t : 0.0;
  d.q = e.grad.tail(n);
  d.alpha = phi * e.A * b.v * b.alpha - e.grad.head(n) + F.curvature(b.q, b.alpha, b.mu_t);
  return d;
}

double v_prime_alt(const BlownState& b, const GeneralForm& F, const TimeScale& ts) {
  const Eval e = evaluate(b, F, ts);
  return (ts.phi(b.r) + 1) * e.A * b.v * b.v + e.B + e.A * b.mu_t * b.mu_t - ts.nu(b.r) * e.V;
}

double energy_residual(const BlownState& b, const GeneralForm& F, const TimeScale& ts) {
  const Eval e = evaluate(b, F, ts);
  const double nu = ts.nu(b.r);
  return 0.5 * e.A * (b.v * b.v + b.mu_t * b.mu_t) + 0.5 * e.B - nu * e.V - b.r * nu * (e.C + F.E);
}

double mu_constraint_residual(const BlownState& b, const TimeScale& ts, double mu) {
  return std::sqrt(b.r) * b.mu_t - std::sqrt(ts.nu(b.r)) * mu;
}

double clock_rate(const BlownState& b, const GeneralForm& F, const TimeScale& ts) {
  return ts.f(b.r) * F.rate(b.q);
}

double energy_v(const BlownState& b, const GeneralForm& F, const TimeScale& ts, bool collapsing) {
  const Eval e = evaluate(b, F, ts);
  const double nu = ts.nu(b.r);
  const double rest = nu * e.V + b.r * nu * (e.C + F.E) - 0.5 * e.A * b.mu_t * b.mu_t - 0.5 * e.B;
  if (!(e.A > 0) || rest < 0) throw invalid_state("energy_v: no real radial velocity on this level");
  const double v = std::sqrt(2 * rest / e.A);
  return collapsing ? -v : v;
}

}  // namespace threebody
