#pragma once

#include <string>
#include <vector>

#include "sprayg/errors.hpp"
#include "sprayg/expr.hpp"
#include "sprayg/report.hpp"
#include "sprayg/sampler.hpp"
#include "sprayg/types.hpp"

namespace sprayg {

// Packed index of the pair a<b among r frame elements.
inline int pair_index(int a, int b, int r) { return a * r - a * (a + 1) / 2 + (b - a - 1); }
inline int pair_count(int r) { return r * (r - 1) / 2; }
// Packed index of a<=b.
inline int sym_index(int a, int b, int r) { return a * r - a * (a - 1) / 2 + (b - a); }
inline int sym_count(int r) { return r * (r + 1) / 2; }

struct AlgebroidSpec {
  std::string name;
  int base_dim = 0;
  int rank = 0;
  NameList coords;
  Box domain;
  std::vector<Expression> anchor;     // [i * rank + a]
  std::vector<Expression> structure;  // [pair_index(a, b) * rank + g], a < b

  static AlgebroidSpec zero(std::string name, int n, int r, std::vector<std::string> coord_names = {}) {
    AlgebroidSpec s;
    s.name = std::move(name);
    s.base_dim = n;
    s.rank = r;
    if (coord_names.empty())
      for (int i = 0; i < n; ++i) coord_names.push_back("x" + std::to_string(i + 1));
    s.coords = make_names(std::move(coord_names));
    s.domain.min.assign(static_cast<std::size_t>(n), -1.0);
    s.domain.max.assign(static_cast<std::size_t>(n), 1.0);
    s.anchor.assign(static_cast<std::size_t>(n * r), Expression::constant(0.0));
    s.structure.assign(static_cast<std::size_t>(pair_count(r) * r), Expression::constant(0.0));
    return s;
  }

  const Expression& rho(int i, int a) const { return anchor[static_cast<std::size_t>(i * rank + a)]; }
  void set_rho(int i, int a, Expression e) { anchor[static_cast<std::size_t>(i * rank + a)] = std::move(e); }

  Expression c(int g, int a, int b) const {
    if (a == b) return Expression::constant(0.0);
    if (a < b) return structure[static_cast<std::size_t>(pair_index(a, b, rank) * rank + g)];
    return -structure[static_cast<std::size_t>(pair_index(b, a, rank) * rank + g)];
  }

  void set_c(int g, int a, int b, Expression e) {
    if (a == b) {
      if (e.is_zero()) return;
      throw SchemaError("structure function C^" + std::to_string(g + 1) + "_{" + std::to_string(a + 1) +
                        std::to_string(a + 1) + "} must vanish (antisymmetry)");
    }
    if (a < b)
      structure[static_cast<std::size_t>(pair_index(a, b, rank) * rank + g)] = std::move(e);
    else
      structure[static_cast<std::size_t>(pair_index(b, a, rank) * rank + g)] = -e;
  }

  Expression parse(const std::string& src) const { return parse_expression(src, coords); }
  Expression coordinate(int i) const { return Expression::variable(i, coords); }
};

struct SpraySpec {
  int rank = 0;
  std::vector<Expression> christoffel;  // [sym_index(a, b) * rank + g], a <= b

  static SpraySpec zero(int r) {
    SpraySpec s;
    s.rank = r;
    s.christoffel.assign(static_cast<std::size_t>(sym_count(r) * r), Expression::constant(0.0));
    return s;
  }

  const Expression& gamma(int g, int a, int b) const {
    if (a > b) std::swap(a, b);
    return christoffel[static_cast<std::size_t>(sym_index(a, b, rank) * rank + g)];
  }

  void set_gamma(int g, int a, int b, Expression e) {
    if (a > b) std::swap(a, b);
    christoffel[static_cast<std::size_t>(sym_index(a, b, rank) * rank + g)] = std::move(e);
  }

  bool is_zero() const {
    for (const auto& e : christoffel)
      if (!e.is_zero()) return false;
    return true;
  }
};

// Numerical values of the coordinate data at one base point.
struct Geometry {
  std::vector<double> rho;     // [i*r + a]
  std::vector<double> drho;    // [(j*n + i)*r + a] = d_j rho^i_a
  std::vector<double> c;       // [(g*r + a)*r + b]
  std::vector<double> gamma;   // [(g*r + a)*r + b], symmetric in a, b
  std::vector<double> dgamma;  // [((j*r + g)*r + a)*r + b]
};

// Compiled evaluators for an algebroid together with a spray; the object every numerical routine consumes.
class SprayModel {
 public:
  enum Need : unsigned { anchor = 1, anchor_deriv = 2, structure = 4, spray = 8, spray_deriv = 16, all = 31 };

  SprayModel(AlgebroidSpec spec, SpraySpec spray_spec) : spec_(std::move(spec)), spray_(std::move(spray_spec)) {
    if (spray_.rank != spec_.rank) throw SchemaError("spray rank does not match algebroid rank");
    const int n = spec_.base_dim, r = spec_.rank;
    std::vector<Expression> rho, drho, c, gamma, dgamma;
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < r; ++a) rho.push_back(spec_.rho(i, a));
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (int a = 0; a < r; ++a) drho.push_back(spec_.rho(i, a).differentiate(j));
    for (int g = 0; g < r; ++g)
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) c.push_back(spec_.c(g, a, b));
    for (int g = 0; g < r; ++g)
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) gamma.push_back(spray_.gamma(g, a, b));
    for (int j = 0; j < n; ++j)
      for (int g = 0; g < r; ++g)
        for (int a = 0; a < r; ++a)
          for (int b = 0; b < r; ++b) dgamma.push_back(spray_.gamma(g, a, b).differentiate(j));
    rho_ = ExprTable(rho);
    drho_ = ExprTable(drho);
    c_ = ExprTable(c);
    gamma_ = ExprTable(gamma);
    dgamma_ = ExprTable(dgamma);
    spray_zero_ = spray_.is_zero();
  }

  const AlgebroidSpec& spec() const { return spec_; }
  const SpraySpec& spray_spec() const { return spray_; }
  int n() const { return spec_.base_dim; }
  int r() const { return spec_.rank; }
  int dim() const { return spec_.base_dim + spec_.rank; }
  bool spray_is_zero() const { return spray_zero_; }
  const Box& domain() const { return spec_.domain; }

  Geometry make_geometry() const {
    const std::size_t n = static_cast<std::size_t>(this->n()), r = static_cast<std::size_t>(this->r());
    Geometry g;
    g.rho.resize(n * r);
    g.drho.resize(n * n * r);
    g.c.resize(r * r * r);
    g.gamma.resize(r * r * r);
    g.dgamma.resize(n * r * r * r);
    return g;
  }

  void evaluate(std::span<const double> x, Geometry& g, unsigned need) const {
    if (need & anchor) rho_.evaluate(x, g.rho.data());
    if (need & anchor_deriv) drho_.evaluate(x, g.drho.data());
    if (need & structure) c_.evaluate(x, g.c.data());
    if (need & spray) gamma_.evaluate(x, g.gamma.data());
    if (need & spray_deriv) dgamma_.evaluate(x, g.dgamma.data());
  }

 private:
  AlgebroidSpec spec_;
  SpraySpec spray_;
  ExprTable rho_, drho_, c_, gamma_, dgamma_;
  bool spray_zero_ = true;
};

// V(z) into out (length n+r); g must hold anchor and spray values at z's base point.
inline void spray_vector(const Geometry& g, int n, int r, const double* u, double* out) {
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int a = 0; a < r; ++a) s += g.rho[static_cast<std::size_t>(i * r + a)] * u[a];
    out[i] = s;
  }
  for (int c = 0; c < r; ++c) {
    double s = 0.0;
    const double* G = &g.gamma[static_cast<std::size_t>(c * r * r)];
    for (int a = 0; a < r; ++a) {
      double t = 0.0;
      for (int b = 0; b < r; ++b) t += G[a * r + b] * u[b];
      s += t * u[a];
    }
    out[n + c] = s;
  }
}

// DV(z), row-major (n+r)x(n+r); g needs anchor, anchor_deriv, spray, spray_deriv.
inline void spray_jacobian_into(const Geometry& g, int n, int r, const double* u, double* J) {
  const int N = n + r;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      const double* d = &g.drho[static_cast<std::size_t>((j * n + i) * r)];
      for (int a = 0; a < r; ++a) s += d[a] * u[a];
      J[i * N + j] = s;
    }
    for (int a = 0; a < r; ++a) J[i * N + n + a] = g.rho[static_cast<std::size_t>(i * r + a)];
  }
  for (int c = 0; c < r; ++c) {
    for (int j = 0; j < n; ++j) {
      const double* d = &g.dgamma[static_cast<std::size_t>((j * r + c) * r * r)];
      double s = 0.0;
      for (int a = 0; a < r; ++a) {
        double t = 0.0;
        for (int b = 0; b < r; ++b) t += d[a * r + b] * u[b];
        s += t * u[a];
      }
      J[(n + c) * N + j] = s;
    }
    const double* G = &g.gamma[static_cast<std::size_t>(c * r * r)];
    for (int b = 0; b < r; ++b) {
      double s = 0.0;
      for (int a = 0; a < r; ++a) s += G[b * r + a] * u[a];
      J[(n + c) * N + n + b] = 2.0 * s;
    }
  }
}

inline TangentAtA spray_field(const SprayModel& m, const FiberElement& a) {
  Geometry g = m.make_geometry();
  m.evaluate(a.x, g, SprayModel::anchor | SprayModel::spray);
  std::vector<double> out(static_cast<std::size_t>(m.dim()));
  spray_vector(g, m.n(), m.r(), a.u.data(), out.data());
  return split_tangent(out, static_cast<std::size_t>(m.n()));
}

inline Matrix spray_jacobian(const SprayModel& m, const FiberElement& a) {
  Geometry g = m.make_geometry();
  m.evaluate(a.x, g, SprayModel::all);
  const int N = m.dim();
  std::vector<double> J(static_cast<std::size_t>(N * N));
  spray_jacobian_into(g, m.n(), m.r(), a.u.data(), J.data());
  Matrix out(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) out(i, j) = J[static_cast<std::size_t>(i * N + j)];
  return out;
}

// rho_a acting on a function by symbolic differentiation.
inline Expression anchor_derivative(const AlgebroidSpec& s, int a, const Expression& h) {
  Expression out = Expression::constant(0.0);
  for (int i = 0; i < s.base_dim; ++i) {
    const Expression& r = s.rho(i, a);
    if (r.is_zero()) continue;
    out += r * h.differentiate(i);
  }
  return out;
}

// Directional derivative of h along a vector field X (components in base coordinates).
inline Expression vector_field_apply(std::span<const Expression> X, const Expression& h) {
  Expression out = Expression::constant(0.0);
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (X[i].is_zero()) continue;
    out += X[i] * h.differentiate(static_cast<int>(i));
  }
  return out;
}

inline std::vector<Expression> bracket_sections(const AlgebroidSpec& s, std::span<const Expression> f,
                                                std::span<const Expression> g) {
  const int r = s.rank;
  std::vector<Expression> out(static_cast<std::size_t>(r), Expression::constant(0.0));
  for (int c = 0; c < r; ++c) {
    Expression acc = Expression::constant(0.0);
    for (int a = 0; a < r; ++a) {
      if (f[a].is_zero()) continue;
      for (int b = 0; b < r; ++b) {
        if (g[b].is_zero() || a == b) continue;
        Expression cc = s.c(c, a, b);
        if (cc.is_zero()) continue;
        acc += f[a] * g[b] * cc;
      }
    }
    // right-handed Leibniz rule: [f, h g] = h [f, g] - rho(f)(h) g
    for (int a = 0; a < r; ++a)
      if (!f[a].is_zero()) acc -= f[a] * anchor_derivative(s, a, g[c]);
    for (int b = 0; b < r; ++b)
      if (!g[b].is_zero()) acc += g[b] * anchor_derivative(s, b, f[c]);
    out[static_cast<std::size_t>(c)] = acc;
  }
  return out;
}

inline std::vector<Expression> frame_section(const AlgebroidSpec& s, int a) {
  std::vector<Expression> e(static_cast<std::size_t>(s.rank), Expression::constant(0.0));
  e[static_cast<std::size_t>(a)] = Expression::constant(1.0);
  return e;
}

// Max |value| over a list of expressions at each base point, as a residual record.
inline CheckRecord residual_over_points(const std::string& name, double tol, const ExprTable& table,
                                        const std::vector<std::vector<double>>& points) {
  ResidualAccumulator acc(name, tol);
  std::vector<double> buf(table.size());
  for (const auto& x : points) {
    table.evaluate(x, buf.data());
    acc.add(norm_inf(buf));
  }
  return acc.finish();
}

inline VerificationReport check_jacobi(const AlgebroidSpec& s, const Sampler& sampler, double tol = 1e-10) {
  const int n = s.base_dim, r = s.rank;
  std::vector<Expression> anchor_res, jacobi_res;
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b)
      for (int i = 0; i < n; ++i) {
        Expression lhs = Expression::constant(0.0);
        for (int g = 0; g < r; ++g) {
          Expression cc = s.c(g, a, b);
          if (!cc.is_zero()) lhs += cc * s.rho(i, g);
        }
        // the anchor reverses brackets: rho([e_a, e_b]) = -[rho_a, rho_b]
        Expression rhs = anchor_derivative(s, b, s.rho(i, a)) - anchor_derivative(s, a, s.rho(i, b));
        anchor_res.push_back(lhs - rhs);
      }
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b)
      for (int c = b + 1; c < r; ++c) {
        auto ea = frame_section(s, a), eb = frame_section(s, b), ec = frame_section(s, c);
        auto t1 = bracket_sections(s, ea, bracket_sections(s, eb, ec));
        auto t2 = bracket_sections(s, eb, bracket_sections(s, ec, ea));
        auto t3 = bracket_sections(s, ec, bracket_sections(s, ea, eb));
        for (int g = 0; g < r; ++g)
          jacobi_res.push_back(t1[static_cast<std::size_t>(g)] + t2[static_cast<std::size_t>(g)] +
                               t3[static_cast<std::size_t>(g)]);
      }
  auto pts = sampler.base_points(Stream::jacobi);
  VerificationReport rep;
  rep.add(residual_over_points("anchor_morphism", tol, ExprTable(anchor_res), pts));
  rep.add(residual_over_points("jacobi_identity", tol, ExprTable(jacobi_res), pts));
  return rep;
}

}  // namespace sprayg
