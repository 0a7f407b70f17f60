#pragma once

#include <string>
#include <vector>

#include "sprayg/algebroid.hpp"
#include "sprayg/flow.hpp"
#include "sprayg/forms.hpp"
#include "sprayg/groupoid.hpp"
#include "sprayg/realization.hpp"
#include "sprayg/report.hpp"
#include "sprayg/sampler.hpp"

namespace sprayg {

struct PoissonSpec {
  int n = 0;
  NameList coords;
  Box domain;
  std::vector<Expression> pi;  // packed i < j

  static PoissonSpec zero(int n, std::vector<std::string> names = {}) {
    PoissonSpec p;
    p.n = n;
    if (names.empty())
      for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i + 1));
    p.coords = make_names(std::move(names));
    p.domain.min.assign(static_cast<std::size_t>(n), -1.0);
    p.domain.max.assign(static_cast<std::size_t>(n), 1.0);
    p.pi.assign(static_cast<std::size_t>(pair_count(n)), Expression::constant(0.0));
    return p;
  }

  Expression at(int i, int j) const {
    if (i == j) return Expression::constant(0.0);
    if (i < j) return pi[static_cast<std::size_t>(pair_index(i, j, n))];
    return -pi[static_cast<std::size_t>(pair_index(j, i, n))];
  }
  void set(int i, int j, Expression e) {
    if (i < j)
      pi[static_cast<std::size_t>(pair_index(i, j, n))] = std::move(e);
    else
      pi[static_cast<std::size_t>(pair_index(j, i, n))] = -e;
  }
  Expression parse(const std::string& s) const { return parse_expression(s, coords); }
};

// Anchor pi#(a) = pi(a, .), i.e. rho^i_a = pi^{a i}; C^g_{ab} = -d_g pi^{ab} (right-handed bracket).
inline AlgebroidSpec cotangent_algebroid(const PoissonSpec& p, const std::string& name = "cotangent") {
  AlgebroidSpec s = AlgebroidSpec::zero(name, p.n, p.n, *p.coords);
  s.coords = p.coords;
  s.domain = p.domain;
  for (int i = 0; i < p.n; ++i)
    for (int a = 0; a < p.n; ++a) s.set_rho(i, a, p.at(a, i));
  for (int a = 0; a < p.n; ++a)
    for (int b = a + 1; b < p.n; ++b)
      for (int g = 0; g < p.n; ++g) s.set_c(g, a, b, -p.at(a, b).differentiate(g));
  return s;
}

// Canonical form on T*M in (dx, dp) ordering: w0((v,a),(w,b)) = <b|v> - <a|w>.
inline Matrix canonical_omega(int n) {
  Matrix O = Matrix::Zero(2 * n, 2 * n);
  O.topRightCorner(n, n) = Matrix::Identity(n, n);
  O.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  return O;
}

inline Matrix tangent_matrix(const FlowSample& s, int N) {
  Matrix D(N, static_cast<Eigen::Index>(s.tangents.size()));
  for (std::size_t j = 0; j < s.tangents.size(); ++j) {
    auto v = flatten(s.tangents[j]);
    for (int i = 0; i < N; ++i) D(i, static_cast<Eigen::Index>(j)) = v[static_cast<std::size_t>(i)];
  }
  return D;
}

struct SymplecticData {
  Matrix W;        // w_a(X, Y) = X^T W Y
  Matrix dtau;     // n x 2n, base block of D phi^1
  FiberElement end;
};

// w = int_0^1 (phi^t)^* w0 dt together with D tau from the same variational flow.
inline SymplecticData symplectic_data(const SprayModel& m, const FiberElement& a, const SolverConfig& cfg) {
  const int n = m.n(), N = m.dim();
  if (m.r() != n) throw SchemaError("symplectic form needs a cotangent algebroid");
  Quadrature q = gauss_legendre(cfg.quad_nodes);
  std::vector<double> times = q.nodes;
  times.push_back(1.0);
  auto tangents = coordinate_tangents(n, n);
  FlowResult fr = variational_flow(m, a, tangents, 1.0, cfg, times);
  fr.value();
  const Matrix O = canonical_omega(n);
  SymplecticData out;
  out.W = Matrix::Zero(N, N);
  for (std::size_t j = 0; j < q.nodes.size(); ++j) {
    Matrix D = tangent_matrix(fr.samples[j], N);
    out.W += q.weights[j] * (D.transpose() * O * D);
  }
  Matrix D1 = tangent_matrix(fr.samples.back(), N);
  out.dtau = D1.topRows(n);
  out.end = fr.final;
  return out;
}

inline Matrix symplectic_form(const SprayModel& m, const FiberElement& a, const SolverConfig& cfg) {
  return symplectic_data(m, a, cfg).W;
}

// Zero-section closed form <b|v> - <a|w> + pi(a,b) as a matrix.
inline Matrix zero_section_omega(const PoissonSpec& p, std::span<const double> x) {
  const int n = p.n;
  Matrix W = canonical_omega(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) W(n + a, n + b) = p.at(a, b).evaluate(x);
  return W;
}

inline void require_conditioned(const Matrix& W, const SolverConfig& cfg, Eigen::PartialPivLU<Matrix>& lu) {
  lu.compute(W);
  double rc = lu.rcond();
  if (!(rc > 0.0 && 1.0 / rc <= cfg.condition_bound))
    throw IllConditioned("symplectic form near-singular (rcond " + std::to_string(rc) + ")");
}

// dk/dt = fiber part of W(k)^{-1} D tau_k^T u(phi^t(a)).
inline FiberElement multiply_fast(const SprayModel& m, const FiberElement& a, const FiberElement& b,
                                  const SolverConfig& cfg) {
  const int n = m.n(), N = m.dim();
  if (n > 0) detail::require_composable(a.x, target(m, b, cfg), cfg.compose_tol, "multiply_fast");
  std::vector<double> y = flatten(a);
  y.insert(y.end(), b.u.begin(), b.u.end());
  detail::FlowSystem flow(m, 0);
  FiberElement k{b.x, b.u};
  Eigen::PartialPivLU<Matrix> lu;
  auto rhs = [&](double t, const double* s, double* ds, int stage) {
    flow(t, s, ds, 0);
    std::copy(s + N, s + N + n, k.u.begin());
    SymplecticData sd = symplectic_data(m, k, cfg);
    if (stage == 0) {
      double gap = dist_inf(sd.end.x, std::span<const double>(s, static_cast<std::size_t>(n)));
      if (gap > kTargetConsistencyLimit)
        throw ConsistencyError("target of k_t drifted from the flow base by " + std::to_string(gap));
    }
    require_conditioned(sd.W, cfg, lu);
    Vector xi = Eigen::Map<const Vector>(s + n, n);
    Vector X = lu.solve(sd.dtau.transpose() * xi);
    for (int i = 0; i < n; ++i) ds[N + i] = X[n + i];
  };
  auto grid = step_grid(1.0, cfg.rk_steps, {});
  rk4_run(grid, y, rhs, [&](std::size_t s, const std::vector<double>& st) {
    if (s > 0) detail::guard_state(m, cfg, st.data(), grid[s].t);
  });
  return {b.x, std::vector<double>(y.begin() + N, y.end())};
}

inline Matrix fd_dtau(const SprayModel& m, const FiberElement& a, const SolverConfig& cfg) {
  const int n = m.n(), N = m.dim();
  Matrix D(n, N);
  auto basis = coordinate_tangents(n, m.r());
  for (int j = 0; j < N; ++j) {
    auto col = fd_target_push(m, a, basis[static_cast<std::size_t>(j)], cfg);
    for (int i = 0; i < n; ++i) D(i, j) = col[static_cast<std::size_t>(i)];
  }
  return D;
}

// X(w(Y,Z)) - Y(w(X,Z)) + Z(w(X,Y)) for constant coordinate fields, central differences of W.
inline double fd_closedness(const std::function<Matrix(const FiberElement&)>& W, const FiberElement& a,
                            const TangentAtA& X, const TangentAtA& Y, const TangentAtA& Z, double h) {
  Vector x = to_eigen(flatten(X)), y = to_eigen(flatten(Y)), z = to_eigen(flatten(Z));
  auto dir = [&](const TangentAtA& v) {
    return Matrix((W(displaced(a, v, h)) - W(displaced(a, v, -h))) / (2.0 * h));
  };
  Matrix dX = dir(X), dY = dir(Y), dZ = dir(Z);
  return y.dot(dX * z) - x.dot(dY * z) + x.dot(dZ * y);
}

inline VerificationReport check_realization(const PoissonSpec& p, const SprayModel& m, const Sampler& sampler,
                                           const SolverConfig& cfg) {
  const int n = m.n();
  ResidualAccumulator push("realization_pushforward", 1e-5), mc("maurer_cartan_compatibility", 1e-4),
      zero("symplectic_zero_section", 1e-9), anti("symplectic_antisymmetry", 1e-13),
      closed("symplectic_closed", 1e-4), cond("symplectic_condition", cfg.condition_bound);
  Rng g = sampler.rng(Stream::poisson);
  Matrix pisharp(n, n);
  auto Wfun = [&](const FiberElement& z) { return symplectic_form(m, z, cfg); };
  for (int s = 0; s < sampler.count(); ++s) {
    FiberElement a = sampler.point(g);
    SymplecticData sd = symplectic_data(m, a, cfg);
    anti.add((sd.W + sd.W.transpose()).cwiseAbs().maxCoeff());
    Eigen::PartialPivLU<Matrix> lu(sd.W);
    double rc = lu.rcond();
    cond.add(rc > 0 ? 1.0 / rc : INFINITY);
    Matrix Pi = lu.inverse().transpose();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) pisharp(i, j) = p.at(j, i).evaluate(a.x);
    push.add((Pi.topLeftCorner(n, n) - pisharp).cwiseAbs().maxCoeff());

    ThetaMatrix th = theta_matrix(m, a, cfg);
    Matrix Dt = fd_dtau(m, a, cfg);
    double worst = 0.0;
    for (int v = 0; v < n; ++v) {
      Vector e = Vector::Zero(2 * n);
      e[n + v] = 1.0;
      Vector res = Dt.transpose() * th.matrix.col(v) + sd.W.transpose() * e;
      worst = std::max(worst, res.cwiseAbs().maxCoeff());
    }
    mc.add(worst);

    FiberElement z = zero_at(a.x, n);
    zero.add((symplectic_form(m, z, cfg) - zero_section_omega(p, a.x)).cwiseAbs().maxCoeff());

    TangentAtA X = random_tangent(g, n, n), Y = random_tangent(g, n, n), Z = random_tangent(g, n, n);
    closed.add(std::abs(fd_closedness(Wfun, a, X, Y, Z, cfg.fd_step)));
  }
  VerificationReport rep;
  for (auto* acc : {&zero, &anti, &closed, &cond, &push, &mc}) rep.add(*acc);
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Closed IM 2-forms and Poisson-Nijenhuis

// N^i_a with l(d/dx^a) = N^i_a d/dx^i on TM; on covectors (l p)_a = N^i_a p_i.
struct ClosedIM2Spec {
  int n = 0;
  std::vector<Expression> N;  // [i * n + a]

  static ClosedIM2Spec identity(int n, double c = 1.0) {
    ClosedIM2Spec l{n, {}};
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a) l.N.push_back(Expression::constant(i == a ? c : 0.0));
    return l;
  }
  const Expression& at(int i, int a) const { return N[static_cast<std::size_t>(i * n + a)]; }
};

// The IM form (-l, 0) on the cotangent algebroid.
inline IMFormSpec closed_im2_form(const ClosedIM2Spec& l) {
  IMFormSpec im = IMFormSpec::zero(2, l.n, l.n);
  for (int a = 0; a < l.n; ++a)
    for (int al = 0; al < l.n; ++al) im.l[static_cast<std::size_t>(a * l.n + al)] = -l.at(al, a);
  return im;
}

class OmegaL {
 public:
  OmegaL(const SprayModel& m, const ClosedIM2Spec& l) : m_(m), n_(l.n) {
    std::vector<Expression> dN;
    for (int j = 0; j < n_; ++j)
      for (const auto& e : l.N) dN.push_back(e.differentiate(j));
    N_ = ExprTable(l.N);
    dN_ = ExprTable(dN);
  }

  // D Phi_l at (x, p): [[I, 0], [d_j (N^i_a p_i), N^i_a]].
  Matrix phi_jacobian(const FiberElement& z) const {
    const int n = n_;
    std::vector<double> Nv = N_.evaluate(z.x), dNv = dN_.evaluate(z.x);
    Matrix J = Matrix::Zero(2 * n, 2 * n);
    J.topLeftCorner(n, n) = Matrix::Identity(n, n);
    for (int a = 0; a < n; ++a) {
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += dNv[static_cast<std::size_t>(j * n * n + i * n + a)] * z.u[static_cast<std::size_t>(i)];
        J(n + a, j) = s;
      }
      for (int i = 0; i < n; ++i) J(n + a, n + i) = Nv[static_cast<std::size_t>(i * n + a)];
    }
    return J;
  }

  Matrix matrix(const FiberElement& a, const SolverConfig& cfg) const {
    const int N = 2 * n_;
    Quadrature q = gauss_legendre(cfg.quad_nodes);
    FlowResult fr = variational_flow(m_, a, coordinate_tangents(n_, n_), 1.0, cfg, q.nodes);
    fr.value();
    const Matrix O = canonical_omega(n_);
    Matrix W = Matrix::Zero(N, N);
    for (std::size_t j = 0; j < q.nodes.size(); ++j) {
      Matrix D = phi_jacobian(fr.samples[j].state) * tangent_matrix(fr.samples[j], N);
      W += q.weights[j] * (D.transpose() * O * D);
    }
    return W;
  }

  // w_{L^2} = w(L L ., .), with w_L = w(L ., .): W_{L^2} = W_L W^{-1} W_L.
  Matrix squared_matrix(const FiberElement& a, const SolverConfig& cfg) const {
    Matrix W = symplectic_form(m_, a, cfg);
    Eigen::PartialPivLU<Matrix> lu;
    require_conditioned(W, cfg, lu);
    Matrix WL = matrix(a, cfg);
    return WL * lu.solve(WL);
  }

 private:
  const SprayModel& m_;
  int n_;
  ExprTable N_, dN_;
};

inline double omega_L(const SprayModel& m, const ClosedIM2Spec& l, const FiberElement& a,
                      std::span<const TangentAtA> tangents, const SolverConfig& cfg) {
  if (tangents.size() != 2) throw SchemaError("omega_L takes two tangents");
  Matrix W = OmegaL(m, l).matrix(a, cfg);
  return to_eigen(flatten(tangents[0])).dot(W * to_eigen(flatten(tangents[1])));
}

inline FormEvaluator omega_L_evaluator(const SprayModel& m, const ClosedIM2Spec& l, const SolverConfig& cfg) {
  auto om = std::make_shared<OmegaL>(m, l);
  return [om, cfg](const FiberElement& a, std::span<const TangentAtA> t) {
    Matrix W = om->matrix(a, cfg);
    return to_eigen(flatten(t[0])).dot(W * to_eigen(flatten(t[1])));
  };
}

// Symbolic T_l(d_a, d_b)^i, packed [(a<b pair) * n + i].
inline std::vector<Expression> torsion_expressions(const ClosedIM2Spec& l) {
  const int n = l.n;
  std::vector<Expression> out;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int i = 0; i < n; ++i) {
        Expression e = Expression::constant(0.0);
        for (int j = 0; j < n; ++j) {
          e += l.at(j, a) * l.at(i, b).differentiate(j) - l.at(j, b) * l.at(i, a).differentiate(j);
          e -= l.at(i, j) * (l.at(j, b).differentiate(a) - l.at(j, a).differentiate(b));
        }
        out.push_back(e);
      }
  return out;
}

inline std::vector<double> nijenhuis_torsion(const ClosedIM2Spec& l, std::span<const double> x,
                                             std::span<const double> v, std::span<const double> w) {
  const int n = l.n;
  std::vector<double> T = ExprTable(torsion_expressions(l)).evaluate(x);
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      double c = v[static_cast<std::size_t>(a)] * w[static_cast<std::size_t>(b)] -
                 v[static_cast<std::size_t>(b)] * w[static_cast<std::size_t>(a)];
      if (c == 0.0) continue;
      for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] += c * T[static_cast<std::size_t>(pair_index(a, b, n) * n + i)];
    }
  return out;
}

inline VerificationReport check_pn(const PoissonSpec& p, const ClosedIM2Spec& l, const SprayModel& m,
                                   const Sampler& sampler, const SolverConfig& cfg, double tol = 1e-6) {
  const int n = p.n;
  std::vector<Expression> sym;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      Expression e = Expression::constant(0.0);
      for (int i = 0; i < n; ++i) e += l.at(k, i) * p.at(i, j) - p.at(k, i) * l.at(j, i);
      sym.push_back(e);
    }
  VerificationReport rep;
  auto pts = sampler.base_points(Stream::pn);
  rep.add(residual_over_points("pn_symmetry", tol, ExprTable(sym), pts));
  VerificationReport im = check_im_equations(m.spec(), closed_im2_form(l), sampler, tol);
  rep.append(im, "pn_");
  rep.add(residual_over_points("nijenhuis_torsion", tol, ExprTable(torsion_expressions(l)), pts));

  OmegaL om(m, l);
  ResidualAccumulator closed("omega_L2_closed", tol);
  Rng g = sampler.rng(Stream::pn);
  auto W2 = [&](const FiberElement& z) { return om.squared_matrix(z, cfg); };
  for (const auto& x : pts) {
    FiberElement a{x, sampler.fiber(g)};
    TangentAtA X = random_tangent(g, n, n), Y = random_tangent(g, n, n), Z = random_tangent(g, n, n);
    closed.add(std::abs(fd_closedness(W2, a, X, Y, Z, cfg.fd_step)));
  }
  rep.add(closed);
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Trivialized Jacobi structures

struct JacobiSpec {
  PoissonSpec poisson;
  std::vector<Expression> R;

  int n() const { return poisson.n; }
};

// Frame e0 = j^1(1), e_i = (0, dx^i); fiber coordinates (u0, p_1..p_n).
inline AlgebroidSpec jacobi_algebroid(const JacobiSpec& j, const std::string& name = "jacobi") {
  const int n = j.n(), r = n + 1;
  const PoissonSpec& p = j.poisson;
  AlgebroidSpec s = AlgebroidSpec::zero(name, n, r, *p.coords);
  s.coords = p.coords;
  s.domain = p.domain;
  for (int i = 0; i < n; ++i) {
    s.set_rho(i, 0, -j.R[static_cast<std::size_t>(i)]);
    for (int a = 0; a < n; ++a) s.set_rho(i, a + 1, p.at(a, i));
  }
  for (int b = 0; b < n; ++b)
    for (int k = 0; k < n; ++k) s.set_c(k + 1, 0, b + 1, j.R[static_cast<std::size_t>(b)].differentiate(k));
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      s.set_c(0, a + 1, b + 1, p.at(a, b));
      for (int k = 0; k < n; ++k) {
        Expression e = -p.at(a, b).differentiate(k);
        if (b == k) e -= j.R[static_cast<std::size_t>(a)];
        if (a == k) e += j.R[static_cast<std::size_t>(b)];
        s.set_c(k + 1, a + 1, b + 1, e);
      }
    }
  return s;
}

// [pi,pi] - 2 R^pi and [pi, R] in coordinates.
inline VerificationReport check_jacobi_structure(const JacobiSpec& j, const Sampler& sampler, double tol = 1e-8) {
  const int n = j.n();
  const PoissonSpec& p = j.poisson;
  std::vector<Expression> e1, e2;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c) {
        int idx[3] = {a, b, c};
        Expression e = Expression::constant(0.0);
        for (int s = 0; s < 3; ++s) {
          int i = idx[s], jj = idx[(s + 1) % 3], k = idx[(s + 2) % 3];
          for (int l = 0; l < n; ++l) e += p.at(l, k) * p.at(i, jj).differentiate(l);
          e += j.R[static_cast<std::size_t>(i)] * p.at(jj, k);
        }
        e1.push_back(e);
      }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      Expression e = Expression::constant(0.0);
      for (int l = 0; l < n; ++l) {
        e += j.R[static_cast<std::size_t>(l)] * p.at(a, b).differentiate(l);
        e -= p.at(l, b) * j.R[static_cast<std::size_t>(a)].differentiate(l);
        e -= p.at(a, l) * j.R[static_cast<std::size_t>(b)].differentiate(l);
      }
      e2.push_back(e);
    }
  auto pts = sampler.base_points(Stream::contact);
  VerificationReport rep;
  rep.add(residual_over_points("jacobi_schouten", tol, ExprTable(e1), pts));
  rep.add(residual_over_points("jacobi_R_invariance", tol, ExprTable(e2), pts));
  return rep;
}

inline Expression jacobi_bracket(const JacobiSpec& j, const Expression& u, const Expression& v) {
  const int n = j.n();
  Expression out = Expression::constant(0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Expression pab = j.poisson.at(a, b);
      if (!pab.is_zero()) out -= pab * u.differentiate(a) * v.differentiate(b);
    }
  for (int i = 0; i < n; ++i) {
    const Expression& R = j.R[static_cast<std::size_t>(i)];
    if (R.is_zero()) continue;
    out += R * (u * v.differentiate(i) - v * u.differentiate(i));
  }
  return out;
}

inline std::vector<Expression> jet(const Expression& u, int n) {
  std::vector<Expression> out{u};
  for (int i = 0; i < n; ++i) out.push_back(u.differentiate(i));
  return out;
}

// [j^1 u, j^1 v] = j^1 {u, v} on a fixed family of polynomial test functions.
inline VerificationReport check_jet_bracket(const JacobiSpec& j, const AlgebroidSpec& s, const Sampler& sampler,
                                            double tol = 1e-8) {
  const int n = j.n();
  std::vector<Expression> funcs{Expression::constant(1.0)};
  Rng g = sampler.rng(Stream::contact);
  for (int i = 0; i < n; ++i) funcs.push_back(s.coordinate(i));
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k) funcs.push_back(s.coordinate(i) * s.coordinate(k));
  for (int t = 0; t < 3; ++t) {
    Expression f = Expression::constant(g.uniform(-1, 1));
    for (int i = 0; i < n; ++i) {
      f += Expression::constant(g.uniform(-1, 1)) * s.coordinate(i);
      for (int k = i; k < n; ++k) f += Expression::constant(g.uniform(-1, 1)) * s.coordinate(i) * s.coordinate(k);
      f += Expression::constant(g.uniform(-1, 1)) * pow(s.coordinate(i), 3);
    }
    funcs.push_back(f);
  }
  std::vector<Expression> res;
  for (std::size_t a = 0; a < funcs.size(); ++a)
    for (std::size_t b = a + 1; b < funcs.size(); ++b) {
      auto lhs = bracket_sections(s, jet(funcs[a], n), jet(funcs[b], n));
      auto rhs = jet(jacobi_bracket(j, funcs[a], funcs[b]), n);
      for (std::size_t c = 0; c < lhs.size(); ++c) res.push_back(lhs[c] - rhs[c]);
    }
  VerificationReport rep;
  rep.add(residual_over_points("jet_bracket", tol, ExprTable(res), sampler.base_points(Stream::contact)));
  return rep;
}

// Rank-1 representation (u, a) -> <R, a> and the canonical Spencer data with Lambda = du0 - p dx.
inline RepresentationSpec jacobi_representation(const JacobiSpec& j) {
  const int n = j.n(), r = n + 1;
  RepresentationSpec rep = RepresentationSpec::trivial(1, r);
  for (int i = 0; i < n; ++i) rep.coeff(0, 0, i + 1, r) = -j.R[static_cast<std::size_t>(i)];
  return rep;
}

inline SpencerSpec jacobi_spencer(const JacobiSpec& j) {
  const int n = j.n(), r = n + 1;
  SpencerSpec sp = SpencerSpec::zero(1, n, r, jacobi_representation(j));
  sp.l[0] = Expression::constant(1.0);
  for (int i = 0; i < n; ++i) sp.D[static_cast<std::size_t>(i * r + i + 1)] = Expression::constant(-1.0);
  return sp;
}

// Cocycle <R, a> as coefficients on the frame.
inline std::vector<Expression> jacobi_cocycle(const JacobiSpec& j) {
  std::vector<Expression> c{Expression::constant(0.0)};
  for (const auto& e : j.R) c.push_back(e);
  return c;
}

// int_0^1 exp(c(t)) (du0 - p dx)(D phi^t v) dt with c' = <R(x), p> integrated alongside the flow.
inline double jacobi_contact_form(const SprayModel& m, const JacobiSpec& j, const FiberElement& a,
                                  const TangentAtA& v, const SolverConfig& cfg) {
  const int n = m.n(), N = m.dim();
  ExprTable R(j.R);
  std::vector<double> Rv(static_cast<std::size_t>(n));
  std::vector<double> y = flatten(a);
  auto fv = flatten(v);
  y.insert(y.end(), fv.begin(), fv.end());
  y.push_back(0.0);
  detail::FlowSystem flow(m, 1);
  auto rhs = [&](double t, const double* s, double* ds, int) {
    flow(t, s, ds, 0);
    R.evaluate(std::span<const double>(s, static_cast<std::size_t>(n)), Rv.data());
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += Rv[static_cast<std::size_t>(i)] * s[n + 1 + i];
    ds[2 * N] = c;
  };
  Quadrature q = gauss_legendre(cfg.quad_nodes);
  double total = 0.0;
  auto grid = step_grid(1.0, cfg.rk_steps, q.nodes);
  rk4_run(grid, y, rhs, [&](std::size_t s, const std::vector<double>& st) {
    if (s > 0) detail::guard_state(m, cfg, st.data(), grid[s].t);
    for (int idx : grid[s].samples) {
      const double* d = st.data() + N;
      double lam = d[n];
      for (int i = 0; i < n; ++i) lam -= st[static_cast<std::size_t>(n + 1 + i)] * d[i];
      total += q.weights[static_cast<std::size_t>(idx)] * std::exp(st[static_cast<std::size_t>(2 * N)]) * lam;
    }
  });
  return total;
}

inline FormEvaluator contact_evaluator(const SprayModel& m, const JacobiSpec& j, const SolverConfig& cfg) {
  return [&m, &j, cfg](const FiberElement& a, std::span<const TangentAtA> t) {
    return jacobi_contact_form(m, j, a, t[0], cfg);
  };
}

// Transport of the Jacobi representation along b, i.e. the scalar action of b.
inline double jacobi_action(const SprayModel& m, const JacobiSpec& j, const FiberElement& b, const SolverConfig& cfg) {
  return integrate_representation(m, jacobi_representation(j), b, cfg).final(0, 0);
}

inline VerificationReport check_contact(const SprayModel& m, const JacobiSpec& j, const Sampler& sampler,
                                        const SolverConfig& cfg, double margin = 1e-3) {
  const int n = m.n(), r = m.r(), N = m.dim();
  FormEvaluator w = contact_evaluator(m, j, cfg);
  ResidualAccumulator corank("contact_corank", 1.0 / margin), nondeg("contact_nondegeneracy", 1.0 / margin),
      mult("contact_multiplicativity", 1e-4);
  auto basis = coordinate_tangents(n, r);
  Rng g = sampler.rng(Stream::contact);
  for (int s = 0; s < sampler.count(); ++s) {
    FiberElement a = sampler.point(g);
    Vector row(N);
    for (int i = 0; i < N; ++i) row[i] = jacobi_contact_form(m, j, a, basis[static_cast<std::size_t>(i)], cfg);
    // inverse of the smallest nonzero singular value of the 1 x N form: corank 1 iff the row is nonzero
    const double nrm = row.norm();
    corank.add(nrm > 0 ? 1.0 / nrm : INFINITY);

    Matrix dw(N, N);
    for (int i = 0; i < N; ++i) {
      for (int k = i; k < N; ++k) {
        TangentAtA pair[2] = {basis[static_cast<std::size_t>(i)], basis[static_cast<std::size_t>(k)]};
        double v = i == k ? 0.0 : fd_exterior_derivative(w, a, pair, cfg.fd_step);
        dw(i, k) = v;
        dw(k, i) = -v;
      }
    }
    Eigen::JacobiSVD<Matrix> svd(row.transpose(), Eigen::ComputeFullV);
    Matrix K = svd.matrixV().rightCols(N - 1);
    double det = (K.transpose() * dw * K).determinant();
    nondeg.add(det != 0.0 ? 1.0 / std::abs(det) : INFINITY);
  }
  Rng gm = sampler.rng(Stream::forms);
  for (int s = 0; s < sampler.count(); ++s) {
    ComposableTangents ct = sample_composable_tangents(m, sampler, gm, 1, cfg);
    FiberElement ab = multiply(m, ct.a, ct.b, cfg);
    TangentAtA dmu = fd_multiply_differential(m, ct.a, ct.b, ct.U[0], ct.W[0], cfg);
    const double act = jacobi_action(m, j, ct.b, cfg);
    mult.add(std::abs(w(ab, std::span(&dmu, 1)) - w(ct.a, ct.U) / act - w(ct.b, ct.W)));
  }
  VerificationReport rep;
  rep.add(corank);
  rep.add(nondeg);
  rep.add(mult);
  return rep;
}

}  // namespace sprayg
