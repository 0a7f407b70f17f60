#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sprayg/algebroid.hpp"
#include "sprayg/flow.hpp"
#include "sprayg/groupoid.hpp"
#include "sprayg/report.hpp"
#include "sprayg/sampler.hpp"

namespace sprayg {

// Strictly increasing p-subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> combinations(int n, int p) {
  std::vector<std::vector<int>> out;
  if (p < 0 || p > n) return out;
  std::vector<int> c(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) c[static_cast<std::size_t>(i)] = i;
  for (;;) {
    out.push_back(c);
    int i = p - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == n - p + i) --i;
    if (i < 0) break;
    ++c[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < p; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

inline int combination_index(const std::vector<std::vector<int>>& combos, const std::vector<int>& c) {
  for (std::size_t i = 0; i < combos.size(); ++i)
    if (combos[i] == c) return static_cast<int>(i);
  return -1;
}

// Sorts idx in place; returns the permutation sign, or 0 on a repeated index.
inline int sort_with_sign(std::vector<int>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (idx[i - 1] == idx[i]) return 0;
  return sign;
}

// Determinant of the k x k block M(rows, cols) for k small.
inline double det_block(const double* M, int ld, std::span<const int> cols) {
  const int k = static_cast<int>(cols.size());
  auto e = [&](int i, int j) { return M[i * ld + cols[static_cast<std::size_t>(j)]]; };
  switch (k) {
    case 0: return 1.0;
    case 1: return e(0, 0);
    case 2: return e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0);
    case 3:
      return e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
             e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
    default: {
      Matrix S(k, k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) S(i, j) = e(i, j);
      return S.determinant();
    }
  }
}

// ---------------------------------------------------------------------------------------------
// Symbolic differential forms on the base box

struct BaseForm {
  int n = 0;
  int degree = 0;
  std::vector<Expression> c;  // indexed by combinations(n, degree)

  static BaseForm zero(int n, int p) {
    return {n, p, std::vector<Expression>(combinations(n, p).size(), Expression::constant(0.0))};
  }

  // Coefficient of dx^{idx} for an arbitrary index list (sign from sorting).
  Expression at(std::vector<int> idx) const {
    int s = sort_with_sign(idx);
    if (s == 0) return Expression::constant(0.0);
    int k = combination_index(combinations(n, degree), idx);
    return s > 0 ? c[static_cast<std::size_t>(k)] : -c[static_cast<std::size_t>(k)];
  }

  bool is_zero() const {
    for (const auto& e : c)
      if (!e.is_zero()) return false;
    return true;
  }

  BaseForm& operator+=(const BaseForm& o) {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
    return *this;
  }
  BaseForm& operator-=(const BaseForm& o) {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
    return *this;
  }
  friend BaseForm operator+(BaseForm a, const BaseForm& b) { return a += b; }
  friend BaseForm operator-(BaseForm a, const BaseForm& b) { return a -= b; }
  friend BaseForm operator*(const Expression& f, BaseForm a) {
    for (auto& e : a.c) e = f * e;
    return a;
  }
};

inline BaseForm exterior_derivative(const BaseForm& w) {
  BaseForm out = BaseForm::zero(w.n, w.degree + 1);
  auto combos = combinations(w.n, w.degree + 1);
  for (std::size_t k = 0; k < combos.size(); ++k) {
    const auto& J = combos[k];
    Expression acc = Expression::constant(0.0);
    for (std::size_t s = 0; s < J.size(); ++s) {
      std::vector<int> rest;
      for (std::size_t t = 0; t < J.size(); ++t)
        if (t != s) rest.push_back(J[t]);
      Expression d = w.at(rest).differentiate(J[s]);
      if (d.is_zero()) continue;
      if (s % 2 == 0)
        acc += d;
      else
        acc -= d;
    }
    out.c[k] = acc;
  }
  return out;
}

// Contraction with a vector field X (components in base coordinates), X in the first slot.
inline BaseForm interior(std::span<const Expression> X, const BaseForm& w) {
  if (w.degree == 0) return BaseForm::zero(w.n, 0);
  BaseForm out = BaseForm::zero(w.n, w.degree - 1);
  auto combos = combinations(w.n, w.degree - 1);
  for (std::size_t k = 0; k < combos.size(); ++k) {
    Expression acc = Expression::constant(0.0);
    for (int j = 0; j < w.n; ++j) {
      if (X[static_cast<std::size_t>(j)].is_zero()) continue;
      std::vector<int> idx{j};
      idx.insert(idx.end(), combos[k].begin(), combos[k].end());
      Expression e = w.at(idx);
      if (!e.is_zero()) acc += X[static_cast<std::size_t>(j)] * e;
    }
    out.c[k] = acc;
  }
  return out;
}

inline BaseForm lie_derivative(std::span<const Expression> X, const BaseForm& w) {
  if (w.degree == 0) return interior(X, exterior_derivative(w));
  return exterior_derivative(interior(X, w)) + interior(X, exterior_derivative(w));
}

// df wedge w for a function f.
inline BaseForm wedge_differential(const Expression& f, const BaseForm& w) {
  BaseForm out = BaseForm::zero(w.n, w.degree + 1);
  if (w.degree + 1 > w.n) return out;
  auto combos = combinations(w.n, w.degree + 1);
  for (std::size_t k = 0; k < combos.size(); ++k) {
    const auto& J = combos[k];
    Expression acc = Expression::constant(0.0);
    for (std::size_t s = 0; s < J.size(); ++s) {
      std::vector<int> rest;
      for (std::size_t t = 0; t < J.size(); ++t)
        if (t != s) rest.push_back(J[t]);
      Expression term = f.differentiate(J[s]) * w.at(rest);
      if (term.is_zero()) continue;
      if (s % 2 == 0)
        acc += term;
      else
        acc -= term;
    }
    out.c[k] = acc;
  }
  return out;
}

inline std::vector<Expression> anchor_field(const AlgebroidSpec& s, int a) {
  std::vector<Expression> X;
  for (int i = 0; i < s.base_dim; ++i) X.push_back(s.rho(i, a));
  return X;
}

// -rho_a: the field through which sections act on forms under the right-handed bracket.
inline std::vector<Expression> acting_field(const AlgebroidSpec& s, int a) {
  std::vector<Expression> X;
  for (int i = 0; i < s.base_dim; ++i) X.push_back(-s.rho(i, a));
  return X;
}

inline double evaluate_base_form(const BaseForm& w, std::span<const double> x,
                                 std::span<const std::vector<double>> vectors) {
  const int k = w.degree;
  std::vector<double> M;
  for (const auto& v : vectors) M.insert(M.end(), v.begin(), v.end());
  auto combos = combinations(w.n, k);
  double total = 0.0;
  for (std::size_t j = 0; j < combos.size(); ++j) {
    if (w.c[j].is_zero()) continue;
    total += w.c[j].evaluate(x) * det_block(M.data(), w.n, combos[j]);
  }
  return total;
}

// ---------------------------------------------------------------------------------------------
// IM forms and linear forms

struct IMFormSpec {
  int degree = 2;
  int base_dim = 0;
  int rank = 0;
  std::vector<Expression> l;   // [I * rank + alpha], I over combinations(n, k-1)
  std::vector<Expression> nu;  // [J * rank + alpha], J over combinations(n, k)

  static IMFormSpec zero(int k, int n, int r) {
    IMFormSpec s{k, n, r, {}, {}};
    s.l.assign(combinations(n, k - 1).size() * static_cast<std::size_t>(r), Expression::constant(0.0));
    s.nu.assign(combinations(n, k).size() * static_cast<std::size_t>(r), Expression::constant(0.0));
    return s;
  }

  BaseForm l_form(int a) const {
    BaseForm f = BaseForm::zero(base_dim, degree - 1);
    for (std::size_t I = 0; I < f.c.size(); ++I) f.c[I] = l[I * static_cast<std::size_t>(rank) + static_cast<std::size_t>(a)];
    return f;
  }
  BaseForm nu_form(int a) const {
    BaseForm f = BaseForm::zero(base_dim, degree);
    for (std::size_t J = 0; J < f.c.size(); ++J) f.c[J] = nu[J * static_cast<std::size_t>(rank) + static_cast<std::size_t>(a)];
    return f;
  }
  void set_l(int a, const BaseForm& f) {
    for (std::size_t I = 0; I < f.c.size(); ++I) l[I * static_cast<std::size_t>(rank) + static_cast<std::size_t>(a)] = f.c[I];
  }
  void set_nu(int a, const BaseForm& f) {
    for (std::size_t J = 0; J < f.c.size(); ++J) nu[J * static_cast<std::size_t>(rank) + static_cast<std::size_t>(a)] = f.c[J];
  }
};

// Anchor pullback of a base form: (i_rho(.) w, i_rho(.) dw).
inline IMFormSpec anchor_pullback_im_form(const AlgebroidSpec& s, const BaseForm& w) {
  IMFormSpec im = IMFormSpec::zero(w.degree, s.base_dim, s.rank);
  BaseForm dw = w.degree < s.base_dim ? exterior_derivative(w) : BaseForm::zero(s.base_dim, w.degree + 1);
  for (int a = 0; a < s.rank; ++a) {
    auto X = anchor_field(s, a);
    im.set_l(a, interior(X, w));
    im.set_nu(a, interior(X, dw));
  }
  return im;
}

// d_IM(l, nu) = (nu, 0).
inline IMFormSpec im_differential(const IMFormSpec& im) {
  IMFormSpec out = IMFormSpec::zero(im.degree + 1, im.base_dim, im.rank);
  out.l = im.nu;
  return out;
}

// Compiled linear form on A with m components:
//   Lambda^m = l^m_{I,a} du^a ^ dx^I + u^a B^m_{J,a} dx^J (+ u^a d_j l^m_{I,a} dx^j ^ dx^I when with_dl).
class LinearForm {
 public:
  LinearForm() = default;
  LinearForm(int n, int r, int k, int m, std::span<const Expression> l, std::span<const Expression> b, bool with_dl)
      : n_(n), r_(r), k_(k), m_(m), Is_(combinations(n, k - 1)), Js_(combinations(n, k)), with_dl_(with_dl) {
    l_ = ExprTable(l);
    b_ = ExprTable(b);
    if (with_dl) {
      std::vector<Expression> dl;
      for (int j = 0; j < n; ++j)
        for (const auto& e : l) dl.push_back(e.differentiate(j));
      dl_ = ExprTable(dl);
    }
    lv_.resize(l_.size());
    bv_.resize(b_.size());
    dlv_.resize(dl_.size());
  }

  static LinearForm from_im(const IMFormSpec& im) {
    return LinearForm(im.base_dim, im.rank, im.degree, 1, im.l, im.nu, true);
  }

  int degree() const { return k_; }
  int components() const { return m_; }

  void evaluate(const FiberElement& a, std::span<const TangentAtA> t, double* out) const {
    const int N = n_ + r_;
    M_.assign(static_cast<std::size_t>(k_ * N), 0.0);
    for (int i = 0; i < k_; ++i) {
      const auto& ti = t[static_cast<std::size_t>(i)];
      for (int j = 0; j < n_; ++j) M_[static_cast<std::size_t>(i * N + j)] = ti.dx[static_cast<std::size_t>(j)];
      for (int al = 0; al < r_; ++al) M_[static_cast<std::size_t>(i * N + n_ + al)] = ti.du[static_cast<std::size_t>(al)];
    }
    l_.evaluate(a.x, lv_.data());
    b_.evaluate(a.x, bv_.data());
    if (with_dl_) dl_.evaluate(a.x, dlv_.data());
    const std::size_t nI = Is_.size(), nJ = Js_.size();
    std::vector<int>& cols = cols_;
    for (int c = 0; c < m_; ++c) {
      double total = 0.0;
      for (std::size_t J = 0; J < nJ; ++J) {
        double coef = 0.0;
        for (int al = 0; al < r_; ++al) coef += a.u[static_cast<std::size_t>(al)] * bv_[(c * nJ + J) * r_ + al];
        if (coef != 0.0) total += coef * det_block(M_.data(), N, Js_[J]);
      }
      for (std::size_t I = 0; I < nI; ++I) {
        for (int al = 0; al < r_; ++al) {
          double coef = lv_[(c * nI + I) * r_ + al];
          if (coef == 0.0) continue;
          cols.assign(1, n_ + al);
          cols.insert(cols.end(), Is_[I].begin(), Is_[I].end());
          total += coef * det_block(M_.data(), N, cols);
        }
        if (!with_dl_) continue;
        for (int j = 0; j < n_; ++j) {
          double coef = 0.0;
          const std::size_t base = (static_cast<std::size_t>(j) * m_ * nI + c * nI + I) * r_;
          for (int al = 0; al < r_; ++al) coef += a.u[static_cast<std::size_t>(al)] * dlv_[base + al];
          if (coef == 0.0) continue;
          cols.assign(1, j);
          cols.insert(cols.end(), Is_[I].begin(), Is_[I].end());
          total += coef * det_block(M_.data(), N, cols);
        }
      }
      out[c] = total;
    }
  }

  double evaluate(const FiberElement& a, std::span<const TangentAtA> t) const {
    double v = 0.0;
    evaluate(a, t, &v);
    return v;
  }

 private:
  int n_ = 0, r_ = 0, k_ = 0, m_ = 1;
  std::vector<std::vector<int>> Is_, Js_;
  bool with_dl_ = false;
  ExprTable l_, b_, dl_;
  mutable std::vector<double> lv_, bv_, dlv_, M_;
  mutable std::vector<int> cols_;
};

inline double linear_form_eval(const IMFormSpec& im, const FiberElement& a, std::span<const TangentAtA> tangents) {
  if (static_cast<int>(tangents.size()) != im.degree) throw SchemaError("need one tangent per form degree");
  return LinearForm::from_im(im).evaluate(a, tangents);
}

inline VerificationReport check_im_equations(const AlgebroidSpec& s, const IMFormSpec& im, const Sampler& sampler,
                                             double tol = 1e-10) {
  const int r = s.rank;
  std::vector<Expression> sym, lbr, nubr;
  std::vector<BaseForm> L, Nu, dL, dNu;
  std::vector<std::vector<Expression>> X;
  for (int a = 0; a < r; ++a) {
    L.push_back(im.l_form(a));
    Nu.push_back(im.nu_form(a));
    dL.push_back(exterior_derivative(L.back()));
    dNu.push_back(im.degree < s.base_dim ? exterior_derivative(Nu.back())
                                         : BaseForm::zero(s.base_dim, im.degree + 1));
    X.push_back(acting_field(s, a));
  }
  for (int a = 0; a < r; ++a)
    for (int b = a; b < r; ++b) {
      if (im.degree >= 2) {
        BaseForm e = interior(X[a], L[b]) + interior(X[b], L[a]);
        sym.insert(sym.end(), e.c.begin(), e.c.end());
      }
      if (a == b) continue;
      BaseForm lhs_l = BaseForm::zero(s.base_dim, im.degree - 1), lhs_nu = BaseForm::zero(s.base_dim, im.degree);
      for (int g = 0; g < r; ++g) {
        Expression cc = s.c(g, a, b);
        if (cc.is_zero()) continue;
        lhs_l += cc * L[g];
        lhs_nu += cc * Nu[g];
      }
      BaseForm e2 = lhs_l - (lie_derivative(X[a], L[b]) - interior(X[b], dL[a]) - interior(X[b], Nu[a]));
      BaseForm e3 = lhs_nu - (lie_derivative(X[a], Nu[b]) - interior(X[b], dNu[a]));
      lbr.insert(lbr.end(), e2.c.begin(), e2.c.end());
      nubr.insert(nubr.end(), e3.c.begin(), e3.c.end());
    }
  auto pts = sampler.base_points(Stream::forms);
  VerificationReport rep;
  rep.add(residual_over_points("im_symmetry", tol, ExprTable(sym), pts));
  rep.add(residual_over_points("im_l_bracket", tol, ExprTable(lbr), pts));
  rep.add(residual_over_points("im_nu_bracket", tol, ExprTable(nubr), pts));
  return rep;
}

// Quadrature of w(t) * Lambda(phi^t(a); D phi^t tangents) with per-node weights supplied by the caller.
inline void integrate_linear_form(const SprayModel& m, const LinearForm& form, const FiberElement& a,
                                  std::span<const TangentAtA> tangents, const SolverConfig& cfg, double* out,
                                  const std::function<void(std::size_t, const double*, double*)>& post = {}) {
  if (static_cast<int>(tangents.size()) != form.degree()) throw SchemaError("need one tangent per form degree");
  Quadrature q = gauss_legendre(cfg.quad_nodes);
  FlowResult fr = variational_flow(m, a, tangents, 1.0, cfg, q.nodes);
  fr.value();
  const int mc = form.components();
  std::vector<double> val(static_cast<std::size_t>(mc)), tmp(static_cast<std::size_t>(mc));
  std::fill(out, out + mc, 0.0);
  for (std::size_t j = 0; j < q.nodes.size(); ++j) {
    const FlowSample& s = fr.samples[j];
    form.evaluate(s.state, s.tangents, val.data());
    if (post) {
      post(j, val.data(), tmp.data());
      std::swap(val, tmp);
    }
    for (int c = 0; c < mc; ++c) out[c] += q.weights[j] * val[static_cast<std::size_t>(c)];
  }
}

inline double integrate_im_form(const SprayModel& m, const IMFormSpec& im, const FiberElement& a,
                                std::span<const TangentAtA> tangents, const SolverConfig& cfg) {
  double v = 0.0;
  integrate_linear_form(m, LinearForm::from_im(im), a, tangents, cfg, &v);
  return v;
}

using FormEvaluator = std::function<double(const FiberElement&, std::span<const TangentAtA>)>;

inline FormEvaluator im_form_evaluator(const SprayModel& m, const IMFormSpec& im, const SolverConfig& cfg) {
  auto form = std::make_shared<LinearForm>(LinearForm::from_im(im));
  return [&m, form, cfg](const FiberElement& a, std::span<const TangentAtA> t) {
    double v = 0.0;
    integrate_linear_form(m, *form, a, t, cfg, &v);
    return v;
  };
}

// Linear form itself, evaluated without integration (the negative control).
inline FormEvaluator linear_form_evaluator(const IMFormSpec& im) {
  auto form = std::make_shared<LinearForm>(LinearForm::from_im(im));
  return [form](const FiberElement& a, std::span<const TangentAtA> t) { return form->evaluate(a, t); };
}

// ---------------------------------------------------------------------------------------------
// Finite-difference geometry on A

inline FiberElement displaced(const FiberElement& a, const TangentAtA& v, double h) {
  FiberElement out = a;
  for (std::size_t i = 0; i < out.x.size(); ++i) out.x[i] += h * v.dx[i];
  for (std::size_t i = 0; i < out.u.size(); ++i) out.u[i] += h * v.du[i];
  return out;
}

inline TangentAtA difference_quotient(const FiberElement& p, const FiberElement& m, double h) {
  TangentAtA t{std::vector<double>(p.x.size()), std::vector<double>(p.u.size())};
  for (std::size_t i = 0; i < p.x.size(); ++i) t.dx[i] = (p.x[i] - m.x[i]) / (2.0 * h);
  for (std::size_t i = 0; i < p.u.size(); ++i) t.du[i] = (p.u[i] - m.u[i]) / (2.0 * h);
  return t;
}

// Central-difference exterior derivative of a k-form evaluator, tangents extended as constant fields.
inline double fd_exterior_derivative(const FormEvaluator& w, const FiberElement& a, std::span<const TangentAtA> t,
                                     double h) {
  const std::size_t k1 = t.size();
  double total = 0.0;
  std::vector<TangentAtA> rest;
  for (std::size_t i = 0; i < k1; ++i) {
    rest.clear();
    for (std::size_t j = 0; j < k1; ++j)
      if (j != i) rest.push_back(t[j]);
    double d = (w(displaced(a, t[i], h), rest) - w(displaced(a, t[i], -h), rest)) / (2.0 * h);
    total += (i % 2 == 0) ? d : -d;
  }
  return total;
}

// Composable data for d(mu): tangents W at b and U at a with dq(U) = D tau_b(W).
struct ComposableTangents {
  FiberElement a, b;
  std::vector<TangentAtA> U, W;
};

inline std::vector<double> fd_target_push(const SprayModel& m, const FiberElement& b, const TangentAtA& W,
                                          const SolverConfig& cfg) {
  const double h = cfg.fd_step;
  auto p = target(m, displaced(b, W, h), cfg);
  auto q = target(m, displaced(b, W, -h), cfg);
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = (p[i] - q[i]) / (2.0 * h);
  return out;
}

inline TangentAtA random_tangent(Rng& g, int n, int r) {
  return {g.cube(static_cast<std::size_t>(n), 1.0), g.cube(static_cast<std::size_t>(r), 1.0)};
}

inline ComposableTangents sample_composable_tangents(const SprayModel& m, const Sampler& s, Rng& g, int k,
                                                     const SolverConfig& cfg) {
  ComposableTangents ct;
  auto [a, b] = composable_pair(m, s, g, cfg);
  ct.a = a;
  ct.b = b;
  for (int i = 0; i < k; ++i) {
    TangentAtA W = random_tangent(g, m.n(), m.r());
    TangentAtA U{fd_target_push(m, b, W, cfg), g.cube(static_cast<std::size_t>(m.r()), 1.0)};
    ct.U.push_back(U);
    ct.W.push_back(W);
  }
  return ct;
}

// d mu (U, W) by central differences along b + eW, a_e = (tau(b_e), u_a + e du_U).
inline TangentAtA fd_multiply_differential(const SprayModel& m, const FiberElement& a, const FiberElement& b,
                                           const TangentAtA& U, const TangentAtA& W, const SolverConfig& cfg) {
  const double h = cfg.fd_step;
  auto at = [&](double e) {
    FiberElement be = displaced(b, W, e);
    FiberElement ae{target(m, be, cfg), a.u};
    for (std::size_t i = 0; i < ae.u.size(); ++i) ae.u[i] += e * U.du[i];
    return multiply(m, ae, be, cfg);
  };
  return difference_quotient(at(h), at(-h), h);
}

inline VerificationReport check_multiplicativity(const SprayModel& m, const FormEvaluator& w, int k,
                                                 const Sampler& sampler, const SolverConfig& cfg,
                                                 const std::string& name = "multiplicativity", double tol = 1e-4) {
  ResidualAccumulator acc(name, tol);
  Rng g = sampler.rng(Stream::forms);
  for (int s = 0; s < sampler.count(); ++s) {
    ComposableTangents ct = sample_composable_tangents(m, sampler, g, k, cfg);
    FiberElement ab = multiply(m, ct.a, ct.b, cfg);
    std::vector<TangentAtA> dmu;
    for (int i = 0; i < k; ++i) dmu.push_back(fd_multiply_differential(m, ct.a, ct.b, ct.U[i], ct.W[i], cfg));
    acc.add(std::abs(w(ab, dmu) - w(ct.a, ct.U) - w(ct.b, ct.W)));
  }
  VerificationReport rep;
  rep.add(acc);
  return rep;
}

struct RecoveredIM {
  std::vector<std::vector<double>> points;
  std::vector<std::vector<double>> l;   // per point, [I * r + alpha]
  std::vector<std::vector<double>> nu;  // per point, [J * r + alpha]
};

inline TangentAtA base_direction(int n, int r, int i) {
  TangentAtA t{std::vector<double>(static_cast<std::size_t>(n), 0.0), std::vector<double>(static_cast<std::size_t>(r), 0.0)};
  t.dx[static_cast<std::size_t>(i)] = 1.0;
  return t;
}

inline TangentAtA fiber_direction(int n, int r, int a) {
  TangentAtA t{std::vector<double>(static_cast<std::size_t>(n), 0.0), std::vector<double>(static_cast<std::size_t>(r), 0.0)};
  t.du[static_cast<std::size_t>(a)] = 1.0;
  return t;
}

// l(a) = u^*(i_a w), nu(a) = u^*(i_a dw) at zero-section points.
inline RecoveredIM differentiate_mult_form(const SprayModel& m, const FormEvaluator& w, int k,
                                           const std::vector<std::vector<double>>& points, const SolverConfig& cfg) {
  const int n = m.n(), r = m.r();
  RecoveredIM out;
  auto Is = combinations(n, k - 1), Js = combinations(n, k);
  for (const auto& x : points) {
    FiberElement z = zero_at(x, r);
    std::vector<double> l(Is.size() * static_cast<std::size_t>(r)), nu(Js.size() * static_cast<std::size_t>(r));
    for (int al = 0; al < r; ++al) {
      for (std::size_t I = 0; I < Is.size(); ++I) {
        std::vector<TangentAtA> t{fiber_direction(n, r, al)};
        for (int i : Is[I]) t.push_back(base_direction(n, r, i));
        l[I * r + al] = w(z, t);
      }
      for (std::size_t J = 0; J < Js.size(); ++J) {
        std::vector<TangentAtA> t{fiber_direction(n, r, al)};
        for (int i : Js[J]) t.push_back(base_direction(n, r, i));
        nu[J * r + al] = fd_exterior_derivative(w, z, t, cfg.fd_step);
      }
    }
    out.points.push_back(x);
    out.l.push_back(std::move(l));
    out.nu.push_back(std::move(nu));
  }
  return out;
}

inline VerificationReport check_im_round_trip(const SprayModel& m, const IMFormSpec& im, const Sampler& sampler,
                                              const SolverConfig& cfg, double tol = 1e-5) {
  auto pts = sampler.base_points(Stream::forms);
  RecoveredIM rec = differentiate_mult_form(m, im_form_evaluator(m, im, cfg), im.degree, pts, cfg);
  ExprTable lt(im.l), nt(im.nu);
  ResidualAccumulator rl("roundtrip_l", tol), rn("roundtrip_nu", tol);
  for (std::size_t p = 0; p < pts.size(); ++p) {
    rl.add(dist_inf(rec.l[p], lt.evaluate(pts[p])));
    rn.add(dist_inf(rec.nu[p], nt.evaluate(pts[p])));
  }
  VerificationReport rep;
  rep.add(rl);
  rep.add(rn);
  return rep;
}

// Integrating d_IM(l, nu) = (nu, 0) agrees with the FD exterior derivative of the integral of (l, nu).
inline VerificationReport check_chain_map(const SprayModel& m, const IMFormSpec& im, const Sampler& sampler,
                                          const SolverConfig& cfg, double tol = 1e-4) {
  IMFormSpec dim = im_differential(im);
  FormEvaluator w = im_form_evaluator(m, im, cfg);
  ResidualAccumulator acc("chain_map", tol);
  Rng g = sampler.rng(Stream::tangents);
  for (int s = 0; s < sampler.count(); ++s) {
    FiberElement a = sampler.point(g);
    std::vector<TangentAtA> t;
    for (int i = 0; i <= im.degree; ++i) t.push_back(random_tangent(g, m.n(), m.r()));
    acc.add(std::abs(integrate_im_form(m, dim, a, t, cfg) - fd_exterior_derivative(w, a, t, cfg.fd_step)));
  }
  VerificationReport rep;
  rep.add(acc);
  return rep;
}

// (1/e) w(e a; Dm_e t) -> Lambda(a; t); defect ratio when halving e.
inline VerificationReport linearization_check(const SprayModel& m, const IMFormSpec& im, const Sampler& sampler,
                                              const SolverConfig& cfg) {
  FormEvaluator w = im_form_evaluator(m, im, cfg);
  LinearForm lam = LinearForm::from_im(im);
  ResidualAccumulator defect("linearization_defect", 0.1), rate("linearization_rate", 0.625);
  Rng g = sampler.rng(Stream::tangents);
  for (int s = 0; s < sampler.count(); ++s) {
    FiberElement a = sampler.point(g);
    std::vector<TangentAtA> t;
    for (int i = 0; i < im.degree; ++i) t.push_back(random_tangent(g, m.n(), m.r()));
    const double target_value = lam.evaluate(a, t);
    double d[2];
    const double eps[2] = {0.1, 0.05};
    for (int e = 0; e < 2; ++e) {
      std::vector<TangentAtA> te = t;
      for (auto& v : te)
        for (auto& c : v.du) c *= eps[e];
      d[e] = std::abs(w(scaled(a, eps[e]), te) / eps[e] - target_value);
    }
    defect.add(d[1]);
    rate.add(d[0] < 1e-12 ? 0.0 : d[1] / d[0]);
  }
  VerificationReport rep;
  rep.add(defect);
  rep.add(rate);
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Spencer operators with coefficients in a representation

struct SpencerSpec {
  int degree = 1;
  int base_dim = 0;
  int rank = 0;
  RepresentationSpec rep;
  std::vector<Expression> l;  // [(c * nI + I) * rank + alpha]
  std::vector<Expression> D;  // [(c * nJ + J) * rank + alpha]

  static SpencerSpec zero(int k, int n, int r, RepresentationSpec rep) {
    SpencerSpec s{k, n, r, std::move(rep), {}, {}};
    const std::size_t m = static_cast<std::size_t>(s.rep.rank);
    s.l.assign(m * combinations(n, k - 1).size() * static_cast<std::size_t>(r), Expression::constant(0.0));
    s.D.assign(m * combinations(n, k).size() * static_cast<std::size_t>(r), Expression::constant(0.0));
    return s;
  }

  BaseForm l_form(int c, int a) const { return slice(l, degree - 1, c, a); }
  BaseForm d_form(int c, int a) const { return slice(D, degree, c, a); }

  // Trivial coefficients: D = dl + nu.
  static SpencerSpec from_im(const IMFormSpec& im) {
    SpencerSpec s = zero(im.degree, im.base_dim, im.rank, RepresentationSpec::trivial(1, im.rank));
    s.l = im.l;
    for (int a = 0; a < im.rank; ++a) {
      BaseForm dl = exterior_derivative(im.l_form(a)) + im.nu_form(a);
      for (std::size_t J = 0; J < dl.c.size(); ++J) s.D[J * im.rank + a] = dl.c[J];
    }
    return s;
  }

 private:
  BaseForm slice(const std::vector<Expression>& v, int p, int c, int a) const {
    BaseForm f = BaseForm::zero(base_dim, p);
    const std::size_t nc = f.c.size();
    for (std::size_t I = 0; I < nc; ++I) f.c[I] = v[(c * nc + I) * rank + a];
    return f;
  }
};

inline VerificationReport check_spencer_equations(const AlgebroidSpec& s, const SpencerSpec& sp,
                                                  const Sampler& sampler, double tol = 1e-8) {
  const int r = s.rank, M = sp.rep.rank, n = s.base_dim;
  std::vector<Expression> dbr, lbr, sym;
  std::vector<std::vector<Expression>> X;
  for (int a = 0; a < r; ++a) X.push_back(acting_field(s, a));
  auto lie_l = [&](int a, int b, int c) {
    BaseForm out = lie_derivative(X[a], sp.l_form(c, b));
    for (int d = 0; d < M; ++d) {
      const Expression& f = sp.rep.coeff(c, d, a, r);
      if (!f.is_zero()) out += f * sp.l_form(d, b);
    }
    return out;
  };
  auto lie_D = [&](int a, int b, int c) {
    BaseForm out = lie_derivative(X[a], sp.d_form(c, b));
    for (int d = 0; d < M; ++d) {
      const Expression& f = sp.rep.coeff(c, d, a, r);
      if (!f.is_zero()) out += f * sp.d_form(d, b);
    }
    return out;
  };
  for (int a = 0; a < r; ++a)
    for (int b = a; b < r; ++b)
      for (int c = 0; c < M; ++c) {
        if (sp.degree >= 2) {
          BaseForm e = interior(X[a], sp.l_form(c, b)) + interior(X[b], sp.l_form(c, a));
          sym.insert(sym.end(), e.c.begin(), e.c.end());
        }
        if (a == b) continue;
        BaseForm lhs_l = BaseForm::zero(n, sp.degree - 1), lhs_D = BaseForm::zero(n, sp.degree);
        for (int g = 0; g < r; ++g) {
          Expression cc = s.c(g, a, b);
          if (cc.is_zero()) continue;
          lhs_l += cc * sp.l_form(c, g);
          lhs_D += cc * sp.d_form(c, g);
          if (sp.degree <= n) lhs_D += wedge_differential(cc, sp.l_form(c, g));
        }
        BaseForm e2 = lhs_l - (lie_l(a, b, c) - interior(X[b], sp.d_form(c, a)));
        BaseForm e1 = lhs_D - (lie_D(a, b, c) - lie_D(b, a, c));
        dbr.insert(dbr.end(), e1.c.begin(), e1.c.end());
        lbr.insert(lbr.end(), e2.c.begin(), e2.c.end());
      }
  auto pts = sampler.base_points(Stream::forms);
  VerificationReport rep;
  rep.add(residual_over_points("spencer_D_bracket", tol, ExprTable(dbr), pts));
  rep.add(residual_over_points("spencer_l_bracket", tol, ExprTable(lbr), pts));
  rep.add(residual_over_points("spencer_symmetry", tol, ExprTable(sym), pts));
  auto flat = check_representation(s, sp.rep, sampler, tol).checks();
  for (auto& rec : flat) rep.add(rec);
  return rep;
}

inline LinearForm spencer_linear_form(const SpencerSpec& sp) {
  return LinearForm(sp.base_dim, sp.rank, sp.degree, sp.rep.rank, sp.l, sp.D, false);
}

// Value in E over q(a): quadrature of T(t)^{-1} Lambda_{(l,D)}(phi^t(a); D phi^t tangents).
inline std::vector<double> integrate_spencer(const SprayModel& m, const SpencerSpec& sp, const FiberElement& a,
                                             std::span<const TangentAtA> tangents, const SolverConfig& cfg) {
  Quadrature q = gauss_legendre(cfg.quad_nodes);
  Transport tr = integrate_representation(m, sp.rep, a, cfg, q.nodes);
  std::vector<Eigen::PartialPivLU<Matrix>> inv;
  for (const auto& T : tr.samples) inv.emplace_back(T);
  const int M = sp.rep.rank;
  std::vector<double> out(static_cast<std::size_t>(M));
  integrate_linear_form(m, spencer_linear_form(sp), a, tangents, cfg, out.data(),
                        [&](std::size_t j, const double* in, double* res) {
                          Vector v = inv[j].solve(Eigen::Map<const Vector>(in, M));
                          for (int c = 0; c < M; ++c) res[c] = v[c];
                        });
  return out;
}

}  // namespace sprayg
