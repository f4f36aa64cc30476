#include "threebody/system.hpp"

#include <algorithm>
#include <ostream>

namespace threebody {

namespace {

const cd I(0, 1);

cd crandn(Rng& g) {
  std::normal_distribution<double> N;
  const double a = N(g);
  return {a, N(g)};
}

double randu(Rng& g, double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); }

std::vector<std::pair<int, int>> radial_pairs(int n) {
  std::vector<std::pair<int, int>> p{{0, 1}};
  for (int i = 0; i < n; ++i) p.emplace_back(2 + i, 2 + n + i);
  return p;
}

Vec zeros(int n) { return Vec::Zero(n); }

RelState unpack_rel(const Vec& y) {
  RelState s;
  s.Q = get_complex<3>(y, 0);
  s.P = get_complex<3>(y, 6);
  return s;
}

Vec pack_rel(const RelState& s) {
  Vec y(12);
  put_complex<3>(y, 0, s.Q);
  put_complex<3>(y, 6, s.P);
  return y;
}

Vec pack_affine_red(const AffineRedState& s) {
  Vec y(6);
  y << s.r, s.p_r, s.z.real(), s.z.imag(), s.zeta.real(), s.zeta.imag();
  return y;
}

AffineRedState unpack_affine_red(const Vec& y, double mu) {
  AffineRedState s;
  s.r = y(0);
  s.p_r = y(1);
  s.z = cd(y(2), y(3));
  s.zeta = cd(y(4), y(5));
  s.mu = mu;
  return s;
}

Vec pack_round_red(const RoundRedState& s) {
  Vec y(8);
  y << s.r, s.p_r, s.w, s.alpha;
  return y;
}

RoundRedState unpack_round_red(const Vec& y, double mu) {
  RoundRedState s;
  s.r = y(0);
  s.p_r = y(1);
  s.w = y.segment<3>(2);
  s.alpha = y.segment<3>(5);
  s.mu = mu;
  return s;
}

// random reduced-chart data: a physical state with the angular momentum replaced by mu
RedState random_red(Rng& g, const Masses& M, double mu) {
  RedState s = to_reduced(random_rel_state(g, M), M);
  s.mu = mu;
  return s;
}

// random (x, y) with the reduced (full) or spherical (real part) pairing constraint
QuadState random_quad(Rng& g, bool full, double mu, double h) {
  QuadState q;
  q.r = randu(g, 0.5, 2.0);
  q.p_r = std::normal_distribution<double>()(g);
  q.x = Pair2(crandn(g), crandn(g));
  q.y = Pair2(crandn(g), crandn(g));
  const cd c = q.x.dot(q.y) / q.x.squaredNorm();
  q.y -= (full ? c : cd(c.real(), 0)) * q.x;
  q.mu = mu;
  q.h = h;
  normalize_gauge(q);
  return q;
}

Eigen::Vector3d random_unit(Rng& g) {
  std::normal_distribution<double> N;
  Eigen::Vector3d v(N(g), N(g), N(g));
  return v.normalized();
}

FieldSpec F(const std::string& n, int off, int count, bool cplx) { return {n, off, count, cplx}; }

void radial_fields(System& S) {
  S.fields.push_back(F("r", 0, 1, false));
  S.fields.push_back(F("p_r", 1, 1, false));
}

InvariantSpec energy_inv(const System& S) { return {"energy", S.hamiltonian, true}; }

// ---- builders

System relative(const Masses& M) {
  System S;
  S.name = "relative";
  S.dim = 12;
  S.fields = {F("Q", 0, 3, true), F("P", 6, 3, true)};
  for (int i = 0; i < 6; ++i) S.canonical.emplace_back(i, 6 + i);
  S.rhs = [M](const Vec& y) { return pack_rel(rhs_rel(unpack_rel(y), M)); };
  S.hamiltonian = [M](const Vec& y) { return h_rel(unpack_rel(y), M); };
  S.sample = [M](Rng& g) { return pack_rel(random_rel_state(g, M)); };
  S.from_rel = [](const RelState& s) { return pack_rel(s); };
  S.to_reduced = [M](const Vec& y) { return to_reduced(unpack_rel(y), M); };
  S.to_rel = [](const Vec& y) { return std::optional<RelState>(unpack_rel(y)); };
  S.invariants = {energy_inv(S),
                  {"angular_momentum", [](const Vec& y) { return angular_momentum(unpack_rel(y)); }, true},
                  {"w_residual", [](const Vec& y) { return w_residual(get_complex<3>(y, 0)); }, false}};
  return S;
}

System jacobi(const Masses& M) {
  const ChartBasis b = make_basis(BasisKind::jacobi, M);
  auto unpack = [](const Vec& y) {
    ChartState s;
    s.xi = get_complex<2>(y, 0);
    s.eta = get_complex<2>(y, 4);
    return s;
  };
  auto pack = [](const ChartState& s) {
    Vec y(8);
    put_complex<2>(y, 0, s.xi);
    put_complex<2>(y, 4, s.eta);
    return y;
  };
  auto to_rel = [b, M, unpack](const Vec& y) {
    const ChartState s = unpack(y);
    RelState r;
    r.Q = embed(s.xi, b);
    r.P = lift_momentum(s.eta, b, M);
    return r;
  };
  System S;
  S.name = "jacobi";
  S.dim = 8;
  S.fields = {F("xi", 0, 2, true), F("eta", 4, 2, true)};
  for (int i = 0; i < 4; ++i) S.canonical.emplace_back(i, 4 + i);
  S.rhs = [=](const Vec& y) { return pack(rhs_chart(unpack(y), b, M)); };
  S.hamiltonian = [=](const Vec& y) { return h_chart(unpack(y), b, M); };
  S.from_rel = [=](const RelState& s) {
    ChartState c;
    c.xi = chart_coords(s.Q, b);
    c.eta = chart_momentum(s.P, b);
    return pack(c);
  };
  S.sample = [from = S.from_rel, M](Rng& g) { return from(random_rel_state(g, M)); };
  S.to_reduced = [=](const Vec& y) { return to_reduced(to_rel(y), M); };
  S.to_rel = [=](const Vec& y) { return std::optional<RelState>(to_rel(y)); };
  S.invariants = {energy_inv(S),
                  {"angular_momentum", [=](const Vec& y) { return angular_momentum(to_rel(y)); }, true}};
  return S;
}

System spherical(const Masses& M) {
  System S;
  S.name = "spherical";
  S.dim = 14;
  radial_fields(S);
  S.fields.push_back(F("X", 2, 3, true));
  S.fields.push_back(F("Y", 8, 3, true));
  S.canonical = radial_pairs(6);
  S.rhs = [M](const Vec& y) { return pack(rhs_sph(unpack_sph(y), M)); };
  S.hamiltonian = [M](const Vec& y) { return h_sph(unpack_sph(y), M); };
  S.gauge = [M](Vec& y) {
    SphState s = unpack_sph(y);
    normalize_gauge(s, M);
    y = pack(s);
  };
  S.from_rel = [M](const RelState& s) {
    SphState o = to_spherical(s, M);
    normalize_gauge(o, M);
    return pack(o);
  };
  S.sample = [from = S.from_rel, M](Rng& g) { return from(random_rel_state(g, M)); };
  S.to_reduced = [M](const Vec& y) { return to_reduced(unpack_sph(y), M); };
  S.to_rel = [M](const Vec& y) { return std::optional<RelState>(from_spherical(unpack_sph(y), M)); };
  S.invariants = {
      energy_inv(S),
      {"angular_momentum",
       [](const Vec& y) {
         const SphState s = unpack_sph(y);
         return -pairing(s.Y, s.X).imag();
       },
       true},
      {"radial_pairing",
       [](const Vec& y) {
         const SphState s = unpack_sph(y);
         return pairing(s.Y, s.X).real() / std::max(1.0, s.X.norm() * s.Y.norm());
       },
       false}};
  return S;
}

System reduced(const Masses& M, double mu) {
  System S;
  S.name = "reduced";
  S.dim = 14;
  S.reduced = true;
  radial_fields(S);
  S.fields.push_back(F("X", 2, 3, true));
  S.fields.push_back(F("Z", 8, 3, true));
  S.canonical = radial_pairs(6);
  S.rhs = [M, mu](const Vec& y) { return pack(rhs_mu(unpack_red(y, mu), M)); };
  S.hamiltonian = [M, mu](const Vec& y) { return h_mu(unpack_red(y, mu), M); };
  S.curvature = [mu](const Vec& y) {
    Vec c = zeros(14);
    put_complex<3>(c, 8, curvature_mu(unpack_red(y, mu)));
    return c;
  };
  S.gauge = [M, mu](Vec& y) {
    RedState s = unpack_red(y, mu);
    normalize_gauge(s, M);
    y = pack(s);
  };
  S.from_reduced = [M](const RedState& s, unsigned) {
    RedState o = s;
    normalize_gauge(o, M);
    return pack(o);
  };
  S.from_rel = [M, f = S.from_reduced](const RelState& s) { return f(to_reduced(s, M), 0); };
  S.sample = [M, mu](Rng& g) {
    RedState s = random_red(g, M, mu);
    normalize_gauge(s, M);
    return pack(s);
  };
  S.to_reduced = [mu](const Vec& y) { return unpack_red(y, mu); };
  S.invariants = {energy_inv(S),
                  {"reduced_pairing",
                   [](const Vec& y) {
                     const RedState s = unpack_red(y, 0);
                     return std::abs(pairing(s.Z, s.X)) / std::max(1.0, s.X.norm() * s.Z.norm());
                   },
                   false}};
  return S;
}

System affine(const Masses& M, double mu) {
  const AffineChart A = AffineChart::jacobi(M);
  System S;
  S.name = "affine";
  S.dim = 6;
  S.reduced = true;
  radial_fields(S);
  S.fields.push_back(F("z", 2, 1, true));
  S.fields.push_back(F("zeta", 4, 1, true));
  S.canonical = radial_pairs(2);
  S.rhs = [A, mu](const Vec& y) { return pack_affine_red(A.rhs(unpack_affine_red(y, mu))); };
  S.hamiltonian = [A, mu](const Vec& y) { return A.h(unpack_affine_red(y, mu)); };
  S.curvature = [mu](const Vec& y) {
    const cd t = (-2 * mu / (y(0) * y(0))) * I * cd(y(4), y(5));
    Vec c = zeros(6);
    c(4) = t.real();
    c(5) = t.imag();
    return c;
  };
  S.from_reduced = [A](const RedState& s, unsigned) { return pack_affine_red(A.from_reduced(s)); };
  S.from_rel = [A, M](const RelState& s) { return pack_affine_red(A.from_reduced(to_reduced(s, M))); };
  S.sample = [A, M, mu](Rng& g) {
    for (;;) {
      try {
        return pack_affine_red(A.from_reduced(random_red(g, M, mu)));
      } catch (const out_of_chart&) {
      }
    }
  };
  S.to_reduced = [A, mu](const Vec& y) { return A.to_reduced(unpack_affine_red(y, mu)); };
  S.invariants = {energy_inv(S)};
  return S;
}

System round(const Masses& M, double mu) {
  const RoundChart R = RoundChart::equilateral(M);
  System S;
  S.name = "round";
  S.dim = 8;
  S.reduced = true;
  radial_fields(S);
  S.fields.push_back(F("w", 2, 3, false));
  S.fields.push_back(F("alpha", 5, 3, false));
  S.canonical = radial_pairs(3);
  S.rhs = [R, mu](const Vec& y) { return pack_round_red(R.rhs(unpack_round_red(y, mu))); };
  S.hamiltonian = [R, mu](const Vec& y) { return R.h(unpack_round_red(y, mu)); };
  S.curvature = [R, mu](const Vec& y) {
    Vec c = zeros(8);
    c.segment<3>(5) = R.curvature(unpack_round_red(y, mu));
    return c;
  };
  S.gauge = [](Vec& y) {
    const double k = y.segment<3>(2).norm();
    y.segment<3>(2) /= k;
    y.segment<3>(5) *= k;
  };
  S.from_reduced = [R, g = S.gauge](const RedState& s, unsigned) {
    Vec y = pack_round_red(R.from_reduced(s));
    g(y);
    return y;
  };
  S.from_rel = [M, f = S.from_reduced](const RelState& s) { return f(to_reduced(s, M), 0); };
  S.sample = [R, M, mu, gg = S.gauge](Rng& g) {
    Vec y = pack_round_red(R.from_reduced(random_red(g, M, mu)));
    gg(y);
    return y;
  };
  S.to_reduced = [R, mu](const Vec& y) { return R.to_reduced(unpack_round_red(y, mu)); };
  S.invariants = {energy_inv(S),
                  {"alpha_dot_w",
                   [](const Vec& y) {
                     return y.segment<3>(5).dot(y.segment<3>(2)) /
                            std::max(1.0, y.segment<3>(5).norm() * y.segment<3>(2).norm());
                   },
                   false}};
  return S;
}

// ---- regularized

// d/ds of the physical distance r rho_k / |X(rho)| from chart moduli rho and their rates
double distance_rate(int k, double r, double dr, const Eigen::Vector3d& rho, const Eigen::Vector3d& drho,
                     const Masses& M) {
  const Eigen::Vector3d w = M.pair();
  const double x2 = rho_x2(rho, M);
  const double dx2 = 2 * (w.array() * rho.array() * drho.array()).sum() / M.m;
  return r / std::sqrt(x2) * (drho(k) + rho(k) * (dr / r - dx2 / (2 * x2)));
}

void add_distance_events(System& S, const Masses& M,
                         std::function<std::pair<Eigen::Vector3d, Eigen::Vector3d>(const Vec&, const Vec&)> moduli) {
  static const char* names[] = {"rho12_min", "rho31_min", "rho23_min"};
  for (int k = 0; k < 3; ++k) {
    S.events.push_back({names[k],
                        [rhs = S.rhs, moduli, M, k](double, const Vec& y) {
                          const Vec d = rhs(y);
                          const auto [rho, drho] = moduli(y, d);
                          return distance_rate(k, y(0), d(0), rho, drho, M);
                        },
                        Direction::up, EventAction::record});
  }
}

System reg_cone(const Masses& M, double mu, double h, bool red) {
  System S;
  S.name = red ? "reg_mu_z" : "reg_sph_z";
  S.dim = 14;
  S.reduced = red;
  S.regularized = true;
  if (!red) mu = 0;
  S.mu = mu;
  radial_fields(S);
  S.fields.push_back(F("z", 2, 3, true));
  S.fields.push_back(F("eta", 8, 3, true));
  S.canonical = radial_pairs(6);
  if (red) {
    S.rhs = [M, mu, h](const Vec& y) { return pack(rhs_tilde_mu(unpack_cone(y, mu, h), M)); };
    S.hamiltonian = [M, mu, h](const Vec& y) { return h_tilde_mu(unpack_cone(y, mu, h), M); };
    S.curvature = [mu, h](const Vec& y) {
      Vec c = zeros(14);
      put_complex<3>(c, 8, curvature_cone(unpack_cone(y, mu, h)));
      return c;
    };
  } else {
    S.rhs = [M, h](const Vec& y) { return pack(rhs_tilde_sph(unpack_cone(y, 0, h), M)); };
    S.hamiltonian = [M, h](const Vec& y) { return h_tilde_sph(unpack_cone(y, 0, h), M); };
  }
  S.gauge = [](Vec& y) {
    ConeState s = unpack_cone(y, 0, 0);
    normalize_gauge(s);
    y = pack(s);
  };
  S.sample = [red, mu, h](Rng& g) {
    ConeState c = quad_to_cone(random_quad(g, red, mu, h));
    normalize_gauge(c);
    return pack(c);
  };
  if (red) {
    S.from_reduced = [h](const RedState& s, unsigned b) { return pack(reduced_to_cone(s, b, h)); };
    S.from_rel = [M, h](const RelState& s) { return pack(reduced_to_cone(to_reduced(s, M), 0, h)); };
    S.to_reduced = [M, mu, h](const Vec& y) { return cone_to_reduced(unpack_cone(y, mu, h), M); };
  } else {
    S.from_rel_branch = [M, h](const RelState& s, unsigned b) {
      return pack(spherical_to_cone(to_spherical(s, M), b, h));
    };
    S.from_rel = [f = S.from_rel_branch](const RelState& s) { return f(s, 0); };
    S.to_reduced = [M, h](const Vec& y) { return to_reduced(cone_to_spherical(unpack_cone(y, 0, h), M), M); };
    S.to_rel = [M, h](const Vec& y) {
      return std::optional<RelState>(from_spherical(cone_to_spherical(unpack_cone(y, 0, h), M), M));
    };
  }
  S.time_rate = [](const Vec& y) { return tau(get_complex<3>(y, 2)); };
  S.invariants = {{"zero_level", S.hamiltonian, true},
                  {"cone", [](const Vec& y) { return cone_residual(get_complex<3>(y, 2)); }, false}};
  if (red) {
    S.invariants.push_back({"reduced_pairing",
                            [](const Vec& y) {
                              const ConeState s = unpack_cone(y, 0, 0);
                              return std::abs(pairing(s.eta, s.z)) / std::max(1.0, s.eta.norm() * s.z.norm());
                            },
                            false});
  } else {
    S.invariants.push_back({"radial_pairing",
                            [](const Vec& y) {
                              const ConeState s = unpack_cone(y, 0, 0);
                              return pairing(s.eta, s.z).real() / std::max(1.0, s.eta.norm() * s.z.norm());
                            },
                            false});
    S.invariants.push_back({"angular_momentum",
                            [](const Vec& y) {
                              const ConeState s = unpack_cone(y, 0, 0);
                              return -pairing(s.eta, s.z).imag() / 2;
                            },
                            true});
  }
  add_distance_events(S, M, [](const Vec& y, const Vec& d) {
    const Config3 z = get_complex<3>(y, 2), dz = get_complex<3>(d, 2);
    return std::pair<Eigen::Vector3d, Eigen::Vector3d>(rho_of(z), 2 * (z.conjugate().cwiseProduct(dz)).real());
  });
  return S;
}

System reg_quad(const Masses& M, double mu, double h, bool red) {
  System S;
  S.name = red ? "reg_mu_x" : "reg_sph_x";
  S.dim = 10;
  S.reduced = red;
  S.regularized = true;
  if (!red) mu = 0;
  S.mu = mu;
  radial_fields(S);
  S.fields.push_back(F("x", 2, 2, true));
  S.fields.push_back(F("y", 6, 2, true));
  S.canonical = radial_pairs(4);
  if (red) {
    S.rhs = [M, mu, h](const Vec& y) { return pack(rhs_tilde_mu(unpack_quad(y, mu, h), M)); };
    S.hamiltonian = [M, mu, h](const Vec& y) { return h_tilde_mu(unpack_quad(y, mu, h), M); };
    S.curvature = [mu, h](const Vec& y) {
      Vec c = zeros(10);
      put_complex<2>(c, 6, curvature_quad(unpack_quad(y, mu, h)));
      return c;
    };
  } else {
    S.rhs = [M, h](const Vec& y) { return pack(rhs_tilde_sph(unpack_quad(y, 0, h), M)); };
    S.hamiltonian = [M, h](const Vec& y) { return h_tilde_sph(unpack_quad(y, 0, h), M); };
  }
  S.gauge = [](Vec& y) {
    QuadState s = unpack_quad(y, 0, 0);
    normalize_gauge(s);
    y = pack(s);
  };
  S.sample = [red, mu, h](Rng& g) { return pack(random_quad(g, red, mu, h)); };
  auto to_cone = [mu, h](const Vec& y) { return quad_to_cone(unpack_quad(y, mu, h)); };
  if (red) {
    S.from_reduced = [h](const RedState& s, unsigned b) {
      QuadState q = cone_to_quad(reduced_to_cone(s, b, h));
      normalize_gauge(q);
      return pack(q);
    };
    S.from_rel = [M, f = S.from_reduced](const RelState& s) { return f(to_reduced(s, M), 0); };
    S.to_reduced = [M, to_cone](const Vec& y) { return cone_to_reduced(to_cone(y), M); };
  } else {
    S.from_rel_branch = [M, h](const RelState& s, unsigned b) {
      QuadState q = cone_to_quad(spherical_to_cone(to_spherical(s, M), b, h));
      normalize_gauge(q);
      return pack(q);
    };
    S.from_rel = [f = S.from_rel_branch](const RelState& s) { return f(s, 0); };
    S.to_reduced = [M, to_cone](const Vec& y) { return to_reduced(cone_to_spherical(to_cone(y), M), M); };
    S.to_rel = [M, to_cone](const Vec& y) {
      return std::optional<RelState>(from_spherical(cone_to_spherical(to_cone(y), M), M));
    };
  }
  S.time_rate = [](const Vec& y) { return tau(quad_param(get_complex<2>(y, 2))); };
  S.invariants = {{"zero_level", S.hamiltonian, true}};
  if (red) {
    S.invariants.push_back({"reduced_pairing",
                            [](const Vec& y) {
                              const QuadState s = unpack_quad(y, 0, 0);
                              return std::abs(s.x.dot(s.y)) / std::max(1.0, s.x.norm() * s.y.norm());
                            },
                            false});
  } else {
    S.invariants.push_back({"radial_pairing",
                            [](const Vec& y) {
                              const QuadState s = unpack_quad(y, 0, 0);
                              return s.y.dot(s.x).real() / std::max(1.0, s.x.norm() * s.y.norm());
                            },
                            false});
    S.invariants.push_back({"angular_momentum",
                            [](const Vec& y) {
                              const QuadState s = unpack_quad(y, 0, 0);
                              return -s.y.dot(s.x).imag() / 4;
                            },
                            true});
  }
  return S;
}

Eigen::Vector3d affine_rho_rate(cd z, cd dz) {
  const cd a = 1.0 + z * z, b = 1.0 - z * z;
  return {8 * (std::conj(z) * dz).real(), 2 * (std::conj(a) * 2.0 * z * dz).real(),
          -2 * (std::conj(b) * 2.0 * z * dz).real()};
}

System reg_affine(const Masses& M, double mu, double h) {
  System S;
  S.name = "reg_affine";
  S.dim = 6;
  S.reduced = true;
  S.regularized = true;
  radial_fields(S);
  S.fields.push_back(F("z", 2, 1, true));
  S.fields.push_back(F("zeta", 4, 1, true));
  S.canonical = radial_pairs(2);
  S.rhs = [M, mu, h](const Vec& y) { return pack(rhs_reg_affine(unpack_affine(y, mu, h), M)); };
  S.hamiltonian = [M, mu, h](const Vec& y) { return h_tilde_affine(unpack_affine(y, mu, h), M); };
  S.curvature = [mu](const Vec& y) {
    const double t = rho_tau(affine_rho(y(2), y(3)));
    const cd c = (-2 * mu * t / (y(0) * y(0))) * I * cd(y(4), y(5));
    Vec v = zeros(6);
    v(4) = c.real();
    v(5) = c.imag();
    return v;
  };
  S.sample = [mu, h](Rng& g) {
    RegAffineState s;
    s.r = randu(g, 0.5, 2.0);
    s.p_r = std::normal_distribution<double>()(g);
    s.z = crandn(g);
    s.zeta = crandn(g);
    s.mu = mu;
    s.h = h;
    return pack(s);
  };
  S.from_reduced = [h](const RedState& s, unsigned b) {
    return pack(quad_to_affine(cone_to_quad(reduced_to_cone(s, b, h))));
  };
  S.from_rel = [M, f = S.from_reduced](const RelState& s) {
    // the lift nearest z = 0 stays farthest from the chart's point at infinity
    const RedState r = to_reduced(s, M);
    std::optional<Vec> best;
    for (unsigned b = 0; b < 8; ++b) {
      try {
        Vec y = f(r, b);
        if (!best || y.segment<2>(2).norm() < best->segment<2>(2).norm()) best = y;
      } catch (const out_of_chart&) {
      }
    }
    if (!best) throw out_of_chart("reg_affine: no branch inside the chart");
    return *best;
  };
  S.to_reduced = [M, mu, h](const Vec& y) {
    return cone_to_reduced(quad_to_cone(affine_to_quad(unpack_affine(y, mu, h))), M);
  };
  S.time_rate = [](const Vec& y) { return rho_tau(affine_rho(y(2), y(3))); };
  S.invariants = {{"zero_level", S.hamiltonian, true}};
  add_distance_events(S, M, [](const Vec& y, const Vec& d) {
    return std::pair<Eigen::Vector3d, Eigen::Vector3d>(affine_rho(y(2), y(3)),
                                                      affine_rho_rate(cd(y(2), y(3)), cd(d(2), d(3))));
  });
  return S;
}

System reg_round(const Masses& M, double mu, double h) {
  System S;
  S.name = "reg_round";
  S.dim = 8;
  S.reduced = true;
  S.regularized = true;
  radial_fields(S);
  S.fields.push_back(F("c", 2, 3, false));
  S.fields.push_back(F("gamma", 5, 3, false));
  S.canonical = radial_pairs(3);
  S.rhs = [M, mu, h](const Vec& y) { return pack(rhs_reg_round(unpack_round(y, mu, h), M)); };
  S.hamiltonian = [M, mu, h](const Vec& y) { return h_tilde_mu_c(unpack_round(y, mu, h), M); };
  S.curvature = [M, mu, h](const Vec& y) {
    Vec v = zeros(8);
    v.segment<3>(5) = curvature_c(unpack_round(y, mu, h), M);
    return v;
  };
  S.gauge = [](Vec& y) {
    RegRoundState s = unpack_round(y, 0, 0);
    normalize_gauge(s);
    y = pack(s);
  };
  S.sample = [mu, h](Rng& g) {
    RegRoundState s;
    s.r = randu(g, 0.5, 2.0);
    s.p_r = std::normal_distribution<double>()(g);
    s.c = random_unit(g);
    const Eigen::Vector3d v = random_unit(g) * std::abs(std::normal_distribution<double>()(g));
    s.gamma = v - v.dot(s.c) * s.c;
    s.mu = mu;
    s.h = h;
    return pack(s);
  };
  S.from_reduced = [h](const RedState& s, unsigned b) { return pack(cone_to_round(reduced_to_cone(s, b, h))); };
  S.from_rel = [M, f = S.from_reduced](const RelState& s) { return f(to_reduced(s, M), 0); };
  S.to_reduced = [M, mu, h](const Vec& y) { return cone_to_reduced(round_to_cone(unpack_round(y, mu, h)), M); };
  S.time_rate = [](const Vec& y) { return tau_c(y.segment<3>(2)); };
  S.invariants = {{"zero_level", S.hamiltonian, true},
                  {"gamma_dot_c",
                   [](const Vec& y) {
                     return y.segment<3>(5).dot(y.segment<3>(2)) / std::max(1.0, y.segment<3>(2).norm());
                   },
                   false},
                  {"c_norm", [](const Vec& y) { return y.segment<3>(2).norm(); }, true}};
  return S;
}

// ---- blown up

System blown(const std::string& name, const Masses& M, double mu, double h, TimeScale ts) {
  GeneralForm G;
  System base;
  if (name == "blowup_sph") {
    G = form_spherical(M, h);
    base = spherical(M);
    mu = 0;
  } else if (name == "blowup_reduced") {
    G = form_reduced(M, h);
    base = reduced(M, mu);
  } else if (name == "blowup_affine") {
    G = form_reg_affine(M, h);
    base = reg_affine(M, mu, h);
  } else {
    G = form_reg_round(M, h);
    base = reg_round(M, mu, h);
  }
  const int n = G.n;
  System S;
  S.name = name;
  S.dim = 3 + 2 * n;
  S.reduced = G.reduced;
  S.regularized = name == "blowup_affine" || name == "blowup_round";
  S.fields = {F("r", 0, 1, false), F("v", 1, 1, false), F("mu_t", 2, 1, false)};
  const bool cplx = name != "blowup_round";
  const int count = cplx ? n / 2 : n;
  const std::string qn = name == "blowup_affine" ? "z" : name == "blowup_round" ? "c" : "X";
  S.fields.push_back(F(qn, 3, count, cplx));
  S.fields.push_back(F("alpha", 3 + n, count, cplx));
  S.rhs = [G, ts, n](const Vec& y) { return pack(rhs_blowup(unpack_blown(y, n), G, ts)); };
  if (base.gauge && name != "blowup_affine") {
    S.gauge = [n, M, name](Vec& y) {
      double k;
      if (name == "blowup_round") {
        k = y.segment(3, n).norm();
      } else {
        k = std::sqrt(mass_norm_sq(Config3(get_complex<3>(y, 3)), M));
      }
      y.segment(3, n) /= k;
      y.segment(3 + n, n) *= k;
    };
  }
  auto down = [ts](const Vec& y, int n_) { return blow_down(unpack_blown(y, n_), ts); };
  S.from_rel = [from = base.from_rel, ts, mu](const RelState& s) {
    return pack(blow_up(from(s), mu, ts));
  };
  if (base.from_reduced)
    S.from_reduced = [f = base.from_reduced, ts, mu](const RedState& s, unsigned b) {
      return pack(blow_up(f(s, b), mu, ts));
    };
  S.sample = [samp = base.sample, ts, mu](Rng& g) { return pack(blow_up(samp(g), mu, ts)); };
  S.to_reduced = [red = base.to_reduced, down, n](const Vec& y) { return red(down(y, n)); };
  if (base.to_rel) S.to_rel = [tr = base.to_rel, down, n](const Vec& y) { return tr(down(y, n)); };
  S.time_rate = [G, ts, n](const Vec& y) { return clock_rate(unpack_blown(y, n), G, ts); };
  S.invariants = {{"energy_relation", [G, ts, n](const Vec& y) { return energy_residual(unpack_blown(y, n), G, ts); },
                   false},
                  {"mu_constraint",
                   [ts, n, mu](const Vec& y) { return mu_constraint_residual(unpack_blown(y, n), ts, mu); }, false}};
  if (name == "blowup_round")
    S.invariants.push_back({"alpha_dot_c", [](const Vec& y) { return y.segment<3>(6).dot(y.segment<3>(3)); }, false});
  return S;
}

}  // namespace

IntegratorOptions System::options(double tol, bool with_gauge) const {
  IntegratorOptions o;
  o.rel_tol = tol;
  o.abs_tol = tol;
  if (with_gauge) o.gauge = gauge;
  o.invariants = invariants;
  return o;
}

std::vector<std::string> system_names() {
  return {"relative",  "jacobi",    "spherical",  "reduced",    "affine",     "round",
          "reg_sph_z", "reg_sph_x", "reg_mu_z",   "reg_mu_x",   "reg_affine", "reg_round",
          "blowup_sph", "blowup_reduced", "blowup_affine", "blowup_round"};
}

System make_system(const std::string& name, const Masses& M, double mu, double h, TimeScale ts) {
  System S;
  if (name == "relative") S = relative(M);
  else if (name == "jacobi") S = jacobi(M);
  else if (name == "spherical") S = spherical(M);
  else if (name == "reduced") S = reduced(M, mu);
  else if (name == "affine") S = affine(M, mu);
  else if (name == "round") S = round(M, mu);
  else if (name == "reg_sph_z") S = reg_cone(M, mu, h, false);
  else if (name == "reg_mu_z") S = reg_cone(M, mu, h, true);
  else if (name == "reg_sph_x") S = reg_quad(M, mu, h, false);
  else if (name == "reg_mu_x") S = reg_quad(M, mu, h, true);
  else if (name == "reg_affine") S = reg_affine(M, mu, h);
  else if (name == "reg_round") S = reg_round(M, mu, h);
  else if (name.rfind("blowup_", 0) == 0 &&
           (name == "blowup_sph" || name == "blowup_reduced" || name == "blowup_affine" || name == "blowup_round"))
    S = blown(name, M, mu, h, ts);
  else
    throw invalid_state("unknown chart '" + name + "'");
  S.M = M;
  if (S.reduced) S.mu = mu;
  S.h = h;
  S.ts = ts;
  if (!S.time_rate) S.time_rate = [](const Vec&) { return 1.0; };
  if (!S.curvature) {
    const int d = S.dim;
    S.curvature = [d](const Vec&) { return Vec::Zero(d).eval(); };
  }
  return S;
}

std::pair<System, Vec> system_from_bodies(const std::string& name, const Masses& M, const RelState& s, TimeScale ts) {
  const double mu = angular_momentum(s);
  const double E = h_rel(s, M);
  System S = make_system(name, M, mu, E, ts);
  return {S, S.from_rel(s)};
}

std::function<std::string(double, const Vec&)> collision_guard(const System& sys, double ratio) {
  return [red = sys.to_reduced, M = sys.M, ratio](double, const Vec& y) -> std::string {
    const Config3 X = red(y).X;
    const double k = std::sqrt(mass_norm_sq(X, M));
    Eigen::Index j;
    X.cwiseAbs().minCoeff(&j);
    if (std::abs(X(j)) >= ratio * k) return {};
    static const char* pairs[] = {"12", "31", "23"};
    return std::string("binary collision ") + pairs[j] + " approached";
  };
}

System with_clock(const System& sys) {
  const int d = sys.dim;
  System S = sys;
  S.dim = d + 1;
  S.fields.push_back(F("t_phys", d, 1, false));
  auto ext = [d](const Vec& y, double t) {
    Vec o(d + 1);
    o << y, t;
    return o;
  };
  S.rhs = [f = sys.rhs, rate = sys.time_rate, ext, d](const Vec& y) { return ext(f(y.head(d)), rate(y.head(d))); };
  S.hamiltonian = [f = sys.hamiltonian, d](const Vec& y) { return f(y.head(d)); };
  S.curvature = [f = sys.curvature, ext, d](const Vec& y) { return ext(f(y.head(d)), 0); };
  if (sys.gauge)
    S.gauge = [g = sys.gauge, d](Vec& y) {
      Vec x = y.head(d);
      g(x);
      y.head(d) = x;
    };
  S.sample = [f = sys.sample, ext](Rng& g) { return ext(f(g), 0); };
  S.from_rel = [f = sys.from_rel, ext](const RelState& s) { return ext(f(s), 0); };
  if (sys.from_reduced)
    S.from_reduced = [f = sys.from_reduced, ext](const RedState& s, unsigned b) { return ext(f(s, b), 0); };
  if (sys.from_rel_branch)
    S.from_rel_branch = [f = sys.from_rel_branch, ext](const RelState& s, unsigned b) { return ext(f(s, b), 0); };
  S.to_reduced = [f = sys.to_reduced, d](const Vec& y) { return f(y.head(d)); };
  if (sys.to_rel) S.to_rel = [f = sys.to_rel, d](const Vec& y) { return f(y.head(d)); };
  S.time_rate = [f = sys.time_rate, d](const Vec& y) { return f(y.head(d)); };
  for (auto& inv : S.invariants) inv.fn = [f = inv.fn, d](const Vec& y) { return f(y.head(d)); };
  for (auto& ev : S.events) ev.fn = [f = ev.fn, d](double t, const Vec& y) { return f(t, y.head(d)); };
  return S;
}

RelState random_rel_state(Rng& g, const Masses& M, double min_ratio) {
  for (;;) {
    RelState s;
    s.Q(0) = crandn(g);
    s.Q(1) = crandn(g);
    s.Q(2) = -s.Q(0) - s.Q(1);
    const double mx = s.Q.cwiseAbs().maxCoeff(), mn = s.Q.cwiseAbs().minCoeff();
    if (mn < min_ratio * mx) continue;
    s.P = CoConfig3(crandn(g), crandn(g), crandn(g)) * 0.8;
    s.P = project_translation(s.P, M);
    return s;
  }
}

// ---- serialization

nlohmann::json state_to_json(const System& sys, const Vec& y) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : sys.fields) {
    auto entry = [&](int k) -> nlohmann::json {
      if (f.complex) return {y(f.offset + 2 * k), y(f.offset + 2 * k + 1)};
      return y(f.offset + k);
    };
    if (f.count == 1) {
      j[f.name] = entry(0);
    } else {
      nlohmann::json a = nlohmann::json::array();
      for (int k = 0; k < f.count; ++k) a.push_back(entry(k));
      j[f.name] = a;
    }
  }
  return j;
}

Vec state_from_json(const System& sys, const nlohmann::json& j) {
  Vec y = Vec::Zero(sys.dim);
  for (const auto& f : sys.fields) {
    if (!j.contains(f.name)) throw invalid_state("state: missing field '" + f.name + "' for chart " + sys.name);
    const auto& v = j.at(f.name);
    auto read = [&](const nlohmann::json& e, int k) {
      if (f.complex) {
        if (!e.is_array() || e.size() != 2)
          throw invalid_state("state: field '" + f.name + "' expects [re, im] entries");
        y(f.offset + 2 * k) = e[0].get<double>();
        y(f.offset + 2 * k + 1) = e[1].get<double>();
      } else {
        if (!e.is_number()) throw invalid_state("state: field '" + f.name + "' expects numbers");
        y(f.offset + k) = e.get<double>();
      }
    };
    if (f.count == 1) {
      read(v, 0);
    } else {
      if (!v.is_array() || int(v.size()) != f.count)
        throw invalid_state("state: field '" + f.name + "' expects " + std::to_string(f.count) + " entries");
      for (int k = 0; k < f.count; ++k) read(v[k], k);
    }
  }
  return y;
}

std::vector<std::string> csv_columns(const System& sys) {
  std::vector<std::string> c;
  for (const auto& f : sys.fields) {
    for (int k = 0; k < f.count; ++k) {
      const std::string base = f.count == 1 ? f.name : f.name + "_" + std::to_string(k);
      if (f.complex) {
        c.push_back(base + "_re");
        c.push_back(base + "_im");
      } else {
        c.push_back(base);
      }
    }
  }
  return c;
}

namespace {

std::vector<double> residual_row(const System& sys, const Vec& y, const std::vector<double>& inv0) {
  std::vector<double> row;
  for (size_t k = 0; k < sys.invariants.size(); ++k) {
    const double g = sys.invariants[k].fn(y);
    row.push_back(sys.invariants[k].drift ? std::abs(g - inv0[k]) : std::abs(g));
  }
  return row;
}

}  // namespace

void write_jsonl(std::ostream& os, const System& sys, const Trajectory& tr, bool use_samples) {
  const auto& ts = use_samples ? tr.sample_t : tr.times;
  const auto& ys = use_samples ? tr.samples : tr.states;
  std::vector<double> inv0;
  if (!tr.states.empty())
    for (const auto& inv : sys.invariants) inv0.push_back(inv.fn(tr.states.front()));
  for (size_t i = 0; i < ts.size(); ++i) {
    nlohmann::json rec;
    rec["t"] = ts[i];
    rec["state"] = state_to_json(sys, ys[i]);
    const auto row = residual_row(sys, ys[i], inv0);
    nlohmann::json res = nlohmann::json::object();
    for (size_t k = 0; k < row.size(); ++k) res[sys.invariants[k].name] = row[k];
    rec["res"] = res;
    os << rec.dump() << '\n';
  }
}

void write_csv(std::ostream& os, const System& sys, const Trajectory& tr, bool use_samples) {
  const auto& ts = use_samples ? tr.sample_t : tr.times;
  const auto& ys = use_samples ? tr.samples : tr.states;
  os << "t";
  for (const auto& c : csv_columns(sys)) os << ',' << c;
  for (const auto& inv : sys.invariants) os << ",res_" << inv.name;
  os << '\n';
  std::vector<double> inv0;
  if (!tr.states.empty())
    for (const auto& inv : sys.invariants) inv0.push_back(inv.fn(tr.states.front()));
  os.precision(17);
  for (size_t i = 0; i < ts.size(); ++i) {
    os << ts[i];
    for (Eigen::Index k = 0; k < ys[i].size(); ++k) os << ',' << ys[i](k);
    for (double r : residual_row(sys, ys[i], inv0)) os << ',' << r;
    os << '\n';
  }
}

}  // namespace threebody
