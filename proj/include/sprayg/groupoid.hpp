#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sprayg/algebroid.hpp"
#include "sprayg/flow.hpp"
#include "sprayg/realization.hpp"
#include "sprayg/report.hpp"
#include "sprayg/sampler.hpp"

namespace sprayg {

inline constexpr double kTargetConsistencyLimit = 1e-4;

inline std::vector<double> source(const FiberElement& a) { return a.x; }

inline std::vector<double> target(const SprayModel& m, const FiberElement& a, const SolverConfig& cfg) {
  return flow_spray(m, a, 1.0, cfg).value().final.x;
}

inline FiberElement inverse(const SprayModel& m, const FiberElement& a, const SolverConfig& cfg) {
  FiberElement end = flow_spray(m, a, 1.0, cfg).value().final;
  for (auto& c : end.u) c = -c;
  return end;
}

inline FiberElement zero_at(std::span<const double> x, int r) {
  return {std::vector<double>(x.begin(), x.end()), std::vector<double>(static_cast<std::size_t>(r), 0.0)};
}

// Moves the fiber coordinates of a to the base point y (global frame).
inline FiberElement rebase(const FiberElement& a, std::span<const double> y) {
  return {std::vector<double>(y.begin(), y.end()), a.u};
}

namespace detail {

// Drive callback: from the source flow state z, produce the right-hand side w (target rank)
// and the base point the target of k is expected to track.
using Drive = std::function<void(const double* z, double* w, double* expected_base)>;

struct TranslationCurve {
  FiberElement final;
  std::vector<FiberElement> samples;
};

// dk/dt = Theta_target(k)^{-1} w(phi_source^t(a)), k(0) = k0 over a fixed base point.
inline TranslationCurve solve_translation(const SprayModel& tgt, std::span<const double> base,
                                          std::span<const double> k0, const SprayModel& src,
                                          const FiberElement& a, const Drive& drive, const SolverConfig& cfg,
                                          std::span<const double> sample_times = {}) {
  const int Ns = src.dim(), ns = src.n(), rt = tgt.r(), nt = tgt.n();
  std::vector<double> y = flatten(a);
  y.insert(y.end(), k0.begin(), k0.end());
  FlowSystem flow(src, 0);
  std::vector<double> w(static_cast<std::size_t>(rt)), expected(static_cast<std::size_t>(nt));
  FiberElement kpt{std::vector<double>(base.begin(), base.end()), std::vector<double>(static_cast<std::size_t>(rt))};
  const bool track = nt > 0;

  auto rhs = [&](double t, const double* s, double* ds, int stage) {
    flow(t, s, ds, 0);
    drive(s, w.data(), expected.data());
    std::copy(s + Ns, s + Ns + rt, kpt.u.begin());
    ThetaMatrix th = theta_matrix(tgt, kpt, cfg, cfg.inner_rk_steps);
    if (stage == 0 && track) {
      double gap = dist_inf(th.y, expected);
      if (gap > kTargetConsistencyLimit)
        throw ConsistencyError("target of k_t drifted from the flow base by " + std::to_string(gap) +
                               " at t=" + std::to_string(t));
    }
    Vector dk = th.lu.solve(Eigen::Map<const Vector>(w.data(), rt));
    for (int i = 0; i < rt; ++i) ds[Ns + i] = dk[i];
  };

  TranslationCurve out;
  out.samples.resize(sample_times.size());
  auto grid = step_grid(1.0, cfg.rk_steps, sample_times);
  rk4_run(grid, y, rhs, [&](std::size_t s, const std::vector<double>& st) {
    if (s > 0) guard_state(src, cfg, st.data(), grid[s].t);
    for (int idx : grid[s].samples)
      out.samples[static_cast<std::size_t>(idx)] = {kpt.x, std::vector<double>(st.begin() + Ns, st.end())};
  });
  (void)ns;
  out.final = {kpt.x, std::vector<double>(y.begin() + Ns, y.end())};
  return out;
}

inline Drive identity_drive(const SprayModel& m) {
  const int n = m.n(), r = m.r();
  return [n, r](const double* z, double* w, double* expected) {
    std::copy(z, z + n, expected);
    std::copy(z + n, z + n + r, w);
  };
}

inline void require_composable(std::span<const double> sa, std::span<const double> tb, double tol,
                               const char* what) {
  double gap = dist_inf(sa, tb);
  if (gap > tol) throw NotComposable(std::string(what) + ": base mismatch " + std::to_string(gap));
}

inline FiberElement multiply_unchecked(const SprayModel& m, const FiberElement& a, const FiberElement& b,
                                       const SolverConfig& cfg) {
  return solve_translation(m, b.x, b.u, m, a, identity_drive(m), cfg).final;
}

}  // namespace detail

inline FiberElement multiply(const SprayModel& m, const FiberElement& a, const FiberElement& b,
                             const SolverConfig& cfg) {
  if (m.n() > 0) detail::require_composable(a.x, target(m, b, cfg), cfg.compose_tol, "multiply");
  return detail::multiply_unchecked(m, a, b, cfg);
}

inline std::vector<std::pair<double, FiberElement>> multiply_curve(const SprayModel& m, const FiberElement& a,
                                                                   const FiberElement& b, const SolverConfig& cfg,
                                                                   std::span<const double> sample_times) {
  if (m.n() > 0) detail::require_composable(a.x, target(m, b, cfg), cfg.compose_tol, "multiply_curve");
  auto curve = detail::solve_translation(m, b.x, b.u, m, a, detail::identity_drive(m), cfg, sample_times);
  std::vector<std::pair<double, FiberElement>> out;
  for (std::size_t i = 0; i < sample_times.size(); ++i) out.emplace_back(sample_times[i], curve.samples[i]);
  return out;
}

inline FiberElement division(const SprayModel& m, const FiberElement& g, const FiberElement& h,
                             const SolverConfig& cfg) {
  detail::require_composable(g.x, h.x, cfg.compose_tol, "division");
  FiberElement ih = inverse(m, h, cfg);
  // tau(iota(h)) equals sigma(h) up to integration error; re-base g there
  return detail::multiply_unchecked(m, rebase(g, target(m, ih, cfg)), ih, cfg);
}

// (a, b) with sigma(a) = tau(b) exactly in floating point.
inline std::pair<FiberElement, FiberElement> composable_pair(const SprayModel& m, const Sampler& s, Rng& g,
                                                             const SolverConfig& cfg) {
  FiberElement b = s.point(g);
  FiberElement a{target(m, b, cfg), s.fiber(g)};
  return {a, b};
}

inline VerificationReport verify_axioms(const SprayModel& m, const Sampler& sampler, const SolverConfig& cfg) {
  const int r = m.r();
  ResidualAccumulator unit_r("unit_right", 1e-9), unit_l("unit_left", 1e-9), src("source_of_product", 1e-6),
      tgt("target_of_product", 1e-6), inv2("inverse_involution", 1e-6), inv_l("inverse_left", 1e-6),
      inv_r("inverse_right", 1e-6), assoc("associativity", 1e-6), resc("rescaling", 1e-6);
  Rng g = sampler.rng(Stream::axioms);
  Rng g3 = sampler.rng(Stream::associativity);
  const double half[] = {0.5};
  for (int k = 0; k < sampler.count(); ++k) {
    auto [a, b] = composable_pair(m, sampler, g, cfg);
    unit_r.add(dist_inf(multiply(m, a, zero_at(a.x, r), cfg), a));
    std::vector<double> tb = target(m, b, cfg);
    unit_l.add(dist_inf(multiply(m, zero_at(tb, r), b, cfg), b));

    FiberElement ab = detail::multiply_unchecked(m, a, b, cfg);
    src.add(dist_inf(ab.x, b.x));
    tgt.add(dist_inf(target(m, ab, cfg), target(m, a, cfg)));

    FiberElement ia = inverse(m, a, cfg);
    inv2.add(dist_inf(inverse(m, ia, cfg), a));
    inv_l.add(dist_inf(detail::multiply_unchecked(m, ia, a, cfg), zero_at(a.x, r)));
    FiberElement a_re = rebase(a, target(m, ia, cfg));
    FiberElement right = detail::multiply_unchecked(m, a_re, ia, cfg);
    inv_r.add(dist_inf(right, zero_at(ia.x, r)));

    auto curve = detail::solve_translation(m, b.x, b.u, m, a, detail::identity_drive(m), cfg, half);
    FiberElement half_a = scaled(a, 0.5);
    resc.add(dist_inf(curve.samples[0], detail::multiply_unchecked(m, half_a, b, cfg)));

    FiberElement c = sampler.point(g3);
    FiberElement bb{target(m, c, cfg), sampler.fiber(g3)};
    FiberElement aa{target(m, bb, cfg), sampler.fiber(g3)};
    FiberElement lhs = detail::multiply_unchecked(m, detail::multiply_unchecked(m, aa, bb, cfg), c, cfg);
    FiberElement bc = detail::multiply_unchecked(m, bb, c, cfg);
    FiberElement rhs = detail::multiply_unchecked(m, rebase(aa, target(m, bc, cfg)), bc, cfg);
    assoc.add(dist_inf(lhs, rhs));
  }
  VerificationReport rep;
  for (auto* acc : {&unit_r, &unit_l, &src, &tgt, &inv2, &inv_l, &inv_r, &resc, &assoc}) rep.add(*acc);
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Morphisms

struct MorphismSpec {
  AlgebroidSpec source;
  AlgebroidSpec target;
  std::vector<Expression> base_map;    // n2 expressions in source coordinates
  std::vector<Expression> bundle_map;  // [beta * r1 + alpha]

  const Expression& phi(int beta, int alpha) const {
    return bundle_map[static_cast<std::size_t>(beta * source.rank + alpha)];
  }

  static MorphismSpec identity(const AlgebroidSpec& s) {
    MorphismSpec m{s, s, {}, {}};
    for (int i = 0; i < s.base_dim; ++i) m.base_map.push_back(s.coordinate(i));
    for (int b = 0; b < s.rank; ++b)
      for (int a = 0; a < s.rank; ++a) m.bundle_map.push_back(Expression::constant(a == b ? 1.0 : 0.0));
    return m;
  }
};

// g o f for f: A1 -> A2, g: A2 -> A3.
inline MorphismSpec compose(const MorphismSpec& g, const MorphismSpec& f) {
  MorphismSpec out{f.source, g.target, {}, {}};
  for (const auto& e : g.base_map) out.base_map.push_back(e.substitute(f.base_map, f.source.coords));
  const int r1 = f.source.rank, r2 = f.target.rank, r3 = g.target.rank;
  for (int c = 0; c < r3; ++c)
    for (int a = 0; a < r1; ++a) {
      Expression acc = Expression::constant(0.0);
      for (int b = 0; b < r2; ++b)
        acc += g.phi(c, b).substitute(f.base_map, f.source.coords) * f.phi(b, a);
      out.bundle_map.push_back(acc);
    }
  return out;
}

inline VerificationReport check_morphism(const MorphismSpec& f, const Sampler& sampler, double tol = 1e-8) {
  const AlgebroidSpec& A = f.source;
  const AlgebroidSpec& B = f.target;
  const int n1 = A.base_dim, r1 = A.rank, n2 = B.base_dim, r2 = B.rank;
  std::vector<Expression> anchor_res, bracket_res;
  auto at_f = [&](const Expression& e) { return e.substitute(f.base_map, A.coords); };
  for (int k = 0; k < n2; ++k)
    for (int a = 0; a < r1; ++a) {
      Expression lhs = Expression::constant(0.0);
      for (int j = 0; j < n1; ++j) lhs += f.base_map[static_cast<std::size_t>(k)].differentiate(j) * A.rho(j, a);
      Expression rhs = Expression::constant(0.0);
      for (int b = 0; b < r2; ++b) rhs += at_f(B.rho(k, b)) * f.phi(b, a);
      anchor_res.push_back(lhs - rhs);
    }
  for (int a = 0; a < r1; ++a)
    for (int b = a + 1; b < r1; ++b)
      for (int g = 0; g < r2; ++g) {
        Expression lhs = Expression::constant(0.0);
        for (int d = 0; d < r1; ++d) lhs += f.phi(g, d) * A.c(d, a, b);
        Expression rhs = anchor_derivative(A, b, f.phi(g, a)) - anchor_derivative(A, a, f.phi(g, b));
        for (int mu = 0; mu < r2; ++mu)
          for (int nu = 0; nu < r2; ++nu) {
            Expression cc = B.c(g, mu, nu);
            if (cc.is_zero()) continue;
            rhs += at_f(cc) * f.phi(mu, a) * f.phi(nu, b);
          }
        bracket_res.push_back(lhs - rhs);
      }
  auto pts = sampler.base_points(Stream::morphism);
  VerificationReport rep;
  rep.add(residual_over_points("morphism_anchor", tol, ExprTable(anchor_res), pts));
  rep.add(residual_over_points("morphism_bracket", tol, ExprTable(bracket_res), pts));
  return rep;
}

inline FiberElement integrate_morphism(const MorphismSpec& f, const SprayModel& m1, const SprayModel& m2,
                                       const FiberElement& a, const SolverConfig& cfg) {
  const int n1 = m1.n(), r1 = m1.r(), n2 = m2.n(), r2 = m2.r();
  ExprTable base(f.base_map), bundle(f.bundle_map);
  std::vector<double> y0 = base.evaluate(a.x);
  auto phi = std::make_shared<std::vector<double>>(static_cast<std::size_t>(r1 * r2));
  detail::Drive drive = [=, &base, &bundle](const double* z, double* w, double* expected) {
    std::span<const double> x(z, static_cast<std::size_t>(n1));
    bundle.evaluate(x, phi->data());
    if (n2 > 0) base.evaluate(x, expected);
    for (int b = 0; b < r2; ++b) {
      double acc = 0.0;
      for (int al = 0; al < r1; ++al) acc += (*phi)[static_cast<std::size_t>(b * r1 + al)] * z[n1 + al];
      w[b] = acc;
    }
  };
  std::vector<double> k0(static_cast<std::size_t>(r2), 0.0);
  return detail::solve_translation(m2, y0, k0, m1, a, drive, cfg).final;
}

inline FiberElement spray_exponential(const SprayModel& v1, const SprayModel& v2, const FiberElement& a,
                                      const SolverConfig& cfg) {
  if (v1.n() != v2.n() || v1.r() != v2.r()) throw SchemaError("sprays live on different algebroids");
  std::vector<double> k0(a.u.size(), 0.0);
  return detail::solve_translation(v2, a.x, k0, v1, a, detail::identity_drive(v1), cfg).final;
}

// ---------------------------------------------------------------------------------------------
// Cocycles and representations

inline VerificationReport check_cocycle(const AlgebroidSpec& s, std::span<const Expression> c,
                                        const Sampler& sampler, double tol = 1e-10) {
  std::vector<Expression> res;
  for (int a = 0; a < s.rank; ++a)
    for (int b = a + 1; b < s.rank; ++b) {
      Expression lhs = Expression::constant(0.0);
      for (int g = 0; g < s.rank; ++g) lhs += s.c(g, a, b) * c[static_cast<std::size_t>(g)];
      res.push_back(lhs + anchor_derivative(s, a, c[static_cast<std::size_t>(b)]) -
                    anchor_derivative(s, b, c[static_cast<std::size_t>(a)]));
    }
  VerificationReport rep;
  rep.add(residual_over_points("cocycle_condition", tol, ExprTable(res), sampler.base_points(Stream::cocycle)));
  return rep;
}

// Integral over [0,1] of a linear-in-u function c(x) u along the flow.
inline double integrate_linear_along_flow(const SprayModel& m, const ExprTable& c, const FiberElement& a,
                                          const SolverConfig& cfg) {
  Quadrature q = gauss_legendre(cfg.quad_nodes);
  FlowResult fr = flow_spray(m, a, 1.0, cfg, q.nodes);
  fr.value();
  std::vector<double> cv(c.size());
  double total = 0.0;
  for (std::size_t j = 0; j < q.nodes.size(); ++j) {
    const FiberElement& z = fr.samples[j].state;
    c.evaluate(z.x, cv.data());
    double v = 0.0;
    for (std::size_t al = 0; al < cv.size(); ++al) v += cv[al] * z.u[al];
    total += q.weights[j] * v;
  }
  return total;
}

inline double integrate_cocycle(const SprayModel& m, std::span<const Expression> c, const FiberElement& a,
                                const SolverConfig& cfg) {
  return integrate_linear_along_flow(m, ExprTable(c), a, cfg);
}

struct RepresentationSpec {
  int rank = 0;                 // m = rank of E
  std::vector<Expression> f;    // [(row * rank + col) * r + alpha]

  static RepresentationSpec trivial(int m, int r) {
    return {m, std::vector<Expression>(static_cast<std::size_t>(m * m * r), Expression::constant(0.0))};
  }
  const Expression& coeff(int row, int col, int alpha, int r) const {
    return f[static_cast<std::size_t>((row * rank + col) * r + alpha)];
  }
  Expression& coeff(int row, int col, int alpha, int r) {
    return f[static_cast<std::size_t>((row * rank + col) * r + alpha)];
  }
};

inline VerificationReport check_representation(const AlgebroidSpec& s, const RepresentationSpec& rep,
                                               const Sampler& sampler, double tol = 1e-10) {
  const int r = s.rank, M = rep.rank;
  std::vector<Expression> res;
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b)
      for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
          Expression e = anchor_derivative(s, b, rep.coeff(i, j, a, r)) - anchor_derivative(s, a, rep.coeff(i, j, b, r));
          for (int k = 0; k < M; ++k)
            e += rep.coeff(i, k, a, r) * rep.coeff(k, j, b, r) - rep.coeff(i, k, b, r) * rep.coeff(k, j, a, r);
          for (int g = 0; g < r; ++g) e -= s.c(g, a, b) * rep.coeff(i, j, g, r);
          res.push_back(e);
        }
  VerificationReport out;
  out.add(residual_over_points("representation_flatness", tol, ExprTable(res),
                               sampler.base_points(Stream::representation)));
  return out;
}

struct Transport {
  std::vector<Matrix> samples;
  Matrix final;
  FiberElement end;
};

inline Transport integrate_representation(const SprayModel& m, const RepresentationSpec& rep, const FiberElement& a,
                                          const SolverConfig& cfg, std::span<const double> sample_times = {}) {
  const int n = m.n(), r = m.r(), N = m.dim(), M = rep.rank;
  ExprTable coeffs(rep.f);
  std::vector<double> fv(coeffs.size()), F(static_cast<std::size_t>(M * M));
  std::vector<double> y = flatten(a);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) y.push_back(i == j ? 1.0 : 0.0);
  detail::FlowSystem flow(m, 0);
  auto rhs = [&](double t, const double* s, double* ds, int) {
    flow(t, s, ds, 0);
    coeffs.evaluate(std::span<const double>(s, static_cast<std::size_t>(n)), fv.data());
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        double acc = 0.0;
        for (int al = 0; al < r; ++al) acc += fv[static_cast<std::size_t>((i * M + j) * r + al)] * s[n + al];
        F[static_cast<std::size_t>(i * M + j)] = acc;
      }
    const double* T = s + N;
    double* dT = ds + N;
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        double acc = 0.0;
        for (int k = 0; k < M; ++k) acc += F[static_cast<std::size_t>(i * M + k)] * T[k * M + j];
        dT[i * M + j] = acc;
      }
  };
  auto unpack = [&](const std::vector<double>& st) {
    Matrix T(M, M);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) T(i, j) = st[static_cast<std::size_t>(N + i * M + j)];
    return T;
  };
  Transport out;
  out.samples.resize(sample_times.size());
  auto grid = step_grid(1.0, cfg.rk_steps, sample_times);
  rk4_run(grid, y, rhs, [&](std::size_t s, const std::vector<double>& st) {
    if (s > 0) detail::guard_state(m, cfg, st.data(), grid[s].t);
    for (int idx : grid[s].samples) out.samples[static_cast<std::size_t>(idx)] = unpack(st);
  });
  out.final = unpack(y);
  out.end = split_point(std::span<const double>(y.data(), static_cast<std::size_t>(N)), static_cast<std::size_t>(n));
  return out;
}

// ---------------------------------------------------------------------------------------------
// Cochains and the van Est map

// p = 1 cochain: r coefficients; p = 2 cochain: antisymmetric, packed over pairs a < b.
struct Cochain {
  int degree = 1;
  std::vector<Expression> coeffs;

  Expression value(int a, int b, int r) const {
    if (a == b) return Expression::constant(0.0);
    if (a < b) return coeffs[static_cast<std::size_t>(pair_index(a, b, r))];
    return -coeffs[static_cast<std::size_t>(pair_index(b, a, r))];
  }
};

// Chevalley-Eilenberg differential of a 1-cochain: (d alpha)(a,b) = rho_b alpha_a - rho_a alpha_b - alpha([a,b]).
inline Cochain chevalley_eilenberg(const AlgebroidSpec& s, const Cochain& alpha) {
  if (alpha.degree != 1) throw std::invalid_argument("only 1-cochains are differentiated");
  Cochain out{2, {}};
  const int r = s.rank;
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b) {
      std::vector<Expression> br = bracket_sections(s, frame_section(s, a), frame_section(s, b));
      Expression e = anchor_derivative(s, b, alpha.coeffs[static_cast<std::size_t>(a)]) -
                     anchor_derivative(s, a, alpha.coeffs[static_cast<std::size_t>(b)]);
      for (int g = 0; g < r; ++g) e -= alpha.coeffs[static_cast<std::size_t>(g)] * br[static_cast<std::size_t>(g)];
      out.coeffs.push_back(e);
    }
  return out;
}

inline double van_est_integrate(const SprayModel& m, const Cochain& alpha, std::span<const FiberElement> arrows,
                                const SolverConfig& cfg) {
  const int r = m.r();
  if (alpha.degree == 1) {
    if (arrows.size() != 1) throw std::invalid_argument("degree-1 van Est needs one arrow");
    return integrate_linear_along_flow(m, ExprTable(alpha.coeffs), arrows[0], cfg);
  }
  if (alpha.degree != 2 || arrows.size() != 2) throw std::invalid_argument("van Est supports p = 1, 2");
  const FiberElement& g1 = arrows[0];
  const FiberElement& g2 = arrows[1];
  if (m.n() > 0) detail::require_composable(g1.x, target(m, g2, cfg), cfg.compose_tol, "van_est_integrate");

  std::vector<Expression> full;
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) full.push_back(alpha.value(a, b, r));
  ExprTable table(full);
  std::vector<double> av(table.size());

  Quadrature q = gauss_legendre(cfg.quad_nodes);
  // gamma(t1, t2) = t2 * mu(t1 g1, g2) = t2 * k(t1); d/dt1 k solves Theta(k) dk = phi^{t1}(g1)
  auto curve = detail::solve_translation(m, g2.x, g2.u, m, g1, detail::identity_drive(m), cfg, q.nodes);
  FlowResult fr = flow_spray(m, g1, 1.0, cfg, q.nodes);
  fr.value();
  double total = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const FiberElement& k = curve.samples[i];
    ThetaMatrix thk = theta_matrix(m, k, cfg, cfg.inner_rk_steps);
    Vector dk = thk.lu.solve(to_eigen(fr.samples[i].state.u));
    for (std::size_t j = 0; j < q.nodes.size(); ++j) {
      const double t2 = q.nodes[j];
      FiberElement gam = scaled(k, t2);
      ThetaMatrix th = theta_matrix(m, gam, cfg, cfg.inner_rk_steps);
      Vector w1 = th.matrix * (t2 * dk);
      Vector w2 = th.matrix * to_eigen(k.u);
      table.evaluate(th.y, av.data());
      double v = 0.0;
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) v += av[static_cast<std::size_t>(a * r + b)] * w1[a] * w2[b];
      total += q.weights[i] * q.weights[j] * v;
    }
  }
  return total;
}

// Groupoid coboundary of a function on arrows: (delta F)(g, h) = F(mu(g, h)) - F(g) - F(h).
inline double groupoid_coboundary(double f_g, double f_h, double f_gh) { return f_gh - f_g - f_h; }

}  // namespace sprayg
