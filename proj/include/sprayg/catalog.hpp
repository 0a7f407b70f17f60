#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sprayg/algebroid.hpp"
#include "sprayg/forms.hpp"
#include "sprayg/groupoid.hpp"
#include "sprayg/poisson.hpp"

namespace sprayg {

// Which closed-form group law, if any, backs an entry.
enum class LieOracle { none, abelian, heisenberg, so3, sl2, affine2, tangent };

struct CatalogEntry {
  std::string name;
  std::string description;
  AlgebroidSpec algebroid;
  SpraySpec spray;
  std::optional<SpraySpec> alt_spray;  // second spray for exponential checks
  std::optional<PoissonSpec> poisson;
  std::optional<JacobiSpec> jacobi;
  std::vector<IMFormSpec> im_forms;
  std::vector<BaseForm> pullback_forms;  // base forms whose anchor pullbacks are in im_forms
  std::vector<std::vector<Expression>> cocycles;
  std::vector<RepresentationSpec> representations;
  std::vector<MorphismSpec> morphisms;
  std::vector<SpencerSpec> spencer;
  std::vector<ClosedIM2Spec> closed_im2;
  std::vector<Cochain> vanest_cochains;
  LieOracle oracle = LieOracle::none;
};

namespace detail {

inline Expression k(double v) { return Expression::constant(v); }

inline RepresentationSpec constant_rep(int r, const std::vector<Matrix>& gens) {
  const int m = static_cast<int>(gens[0].rows());
  RepresentationSpec rep = RepresentationSpec::trivial(m, r);
  for (int a = 0; a < r; ++a)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) rep.coeff(i, j, a, r) = k(gens[static_cast<std::size_t>(a)](i, j));
  return rep;
}

inline MorphismSpec constant_morphism(const AlgebroidSpec& s, const Matrix& phi) {
  MorphismSpec m = MorphismSpec::identity(s);
  for (int b = 0; b < s.rank; ++b)
    for (int a = 0; a < s.rank; ++a) m.bundle_map[static_cast<std::size_t>(b * s.rank + a)] = k(phi(b, a));
  return m;
}

// Unit-size anchors move chains of three sampled arrows about 0.6 from their start.
inline void widen_domain(CatalogEntry& e, double half) {
  const auto n = static_cast<std::size_t>(e.algebroid.base_dim);
  e.algebroid.domain.min.assign(n, -half);
  e.algebroid.domain.max.assign(n, half);
  if (e.poisson) e.poisson->domain = e.algebroid.domain;
  if (e.jacobi) e.jacobi->poisson.domain = e.algebroid.domain;
}

inline std::vector<Expression> constants(std::initializer_list<double> v) {
  std::vector<Expression> out;
  for (double c : v) out.push_back(k(c));
  return out;
}

inline void lie_algebra_extras(CatalogEntry& e) {
  const int r = e.algebroid.rank;
  SpraySpec alt = SpraySpec::zero(r);
  alt.set_gamma(0, 0, r - 1, k(0.25));
  alt.set_gamma(r - 1, 0, 0, k(-0.5));
  e.alt_spray = alt;
  e.morphisms.push_back(MorphismSpec::identity(e.algebroid));
}

inline CatalogEntry abelian(int n, int r) {
  CatalogEntry e;
  e.name = n == 0 ? "abelian" + std::to_string(r) : "abelian" + std::to_string(n) + "x" + std::to_string(r);
  e.description = "abelian Lie algebra bundle, rho = 0, C = 0";
  e.algebroid = AlgebroidSpec::zero(e.name, n, r);
  e.spray = SpraySpec::zero(r);
  e.oracle = n == 0 ? LieOracle::abelian : LieOracle::none;
  std::vector<Expression> c;
  for (int a = 0; a < r; ++a) c.push_back(k(0.5 + 0.25 * a));
  e.cocycles.push_back(c);
  Matrix J(2, 2);
  J << 0, -1, 1, 0;
  std::vector<Matrix> gens;
  for (int a = 0; a < r; ++a) gens.push_back((0.5 + 0.3 * a) * J);
  e.representations.push_back(constant_rep(r, gens));
  Matrix phi = Matrix::Identity(r, r);
  for (int a = 0; a + 1 < r; ++a) phi(a, a + 1) = 0.5;
  e.morphisms.push_back(constant_morphism(e.algebroid, phi));
  IMFormSpec im = IMFormSpec::zero(1, n, r);
  for (int a = 0; a < r; ++a) im.l[static_cast<std::size_t>(a)] = k(1.0 - 0.5 * a);
  e.im_forms.push_back(im);
  if (n == 0) {
    e.vanest_cochains.push_back({1, c});
    SpraySpec alt = SpraySpec::zero(r);
    alt.set_gamma(0, 0, 0, k(0.5));
    e.alt_spray = alt;
  }
  return e;
}

inline CatalogEntry heisenberg3() {
  CatalogEntry e;
  e.name = "heisenberg3";
  e.description = "Heisenberg algebra, [e1,e2] = e3";
  e.algebroid = AlgebroidSpec::zero(e.name, 0, 3);
  e.algebroid.set_c(2, 0, 1, k(1));
  e.spray = SpraySpec::zero(3);
  e.oracle = LieOracle::heisenberg;
  e.cocycles.push_back(constants({0.7, -0.4, 0.0}));
  Matrix E12 = Matrix::Zero(3, 3), E23 = Matrix::Zero(3, 3), E13 = Matrix::Zero(3, 3);
  E12(0, 1) = 1;
  E23(1, 2) = 1;
  E13(0, 2) = 1;
  e.representations.push_back(constant_rep(3, {E12, E23, E13}));
  lie_algebra_extras(e);
  Matrix phi = Matrix::Zero(3, 3);
  phi(0, 0) = 2.0;
  phi(1, 1) = 1.0;
  phi(2, 2) = 2.0;
  phi(1, 0) = 0.5;
  e.morphisms.push_back(constant_morphism(e.algebroid, phi));
  IMFormSpec im = IMFormSpec::zero(1, 0, 3);
  im.l = constants({0.3, 1.1, 0.0});
  e.im_forms.push_back(im);
  e.vanest_cochains.push_back({1, constants({0.7, -0.4, 0.9})});
  return e;
}

inline Matrix so3_generator(int a) {
  Matrix L = Matrix::Zero(3, 3);
  for (int b = 0; b < 3; ++b)
    for (int c = 0; c < 3; ++c) {
      int s = (a == b || b == c || a == c) ? 0 : (((b - a + 3) % 3 == 1) ? 1 : -1);
      L(b, c) = -s;
    }
  return L;
}

inline CatalogEntry so3() {
  CatalogEntry e;
  e.name = "so3";
  e.description = "rotation algebra, C^c_{ab} = eps_{abc}";
  e.algebroid = AlgebroidSpec::zero(e.name, 0, 3);
  e.algebroid.set_c(2, 0, 1, k(1));
  e.algebroid.set_c(0, 1, 2, k(1));
  e.algebroid.set_c(1, 2, 0, k(1));
  e.spray = SpraySpec::zero(3);
  e.oracle = LieOracle::so3;
  e.representations.push_back(constant_rep(3, {so3_generator(0), so3_generator(1), so3_generator(2)}));
  lie_algebra_extras(e);
  Matrix Q = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 2).normalized()).toRotationMatrix();
  e.morphisms.push_back(constant_morphism(e.algebroid, Q));
  e.vanest_cochains.push_back({1, constants({0.7, -0.4, 0.9})});
  return e;
}

inline CatalogEntry sl2() {
  CatalogEntry e;
  e.name = "sl2";
  e.description = "sl(2,R) in the basis h, e, f";
  e.algebroid = AlgebroidSpec::zero(e.name, 0, 3);
  e.algebroid.set_c(1, 0, 1, k(2));
  e.algebroid.set_c(2, 0, 2, k(-2));
  e.algebroid.set_c(0, 1, 2, k(1));
  e.spray = SpraySpec::zero(3);
  e.oracle = LieOracle::sl2;
  Matrix h(2, 2), E(2, 2), F(2, 2);
  h << 1, 0, 0, -1;
  E << 0, 1, 0, 0;
  F << 0, 0, 1, 0;
  e.representations.push_back(constant_rep(3, {h, E, F}));
  lie_algebra_extras(e);
  return e;
}

inline CatalogEntry affine2() {
  CatalogEntry e;
  e.name = "affine2";
  e.description = "affine algebra of the line, [e1,e2] = e2";
  e.algebroid = AlgebroidSpec::zero(e.name, 0, 2);
  e.algebroid.set_c(1, 0, 1, k(1));
  e.spray = SpraySpec::zero(2);
  e.oracle = LieOracle::affine2;
  e.cocycles.push_back(constants({1.0, 0.0}));
  Matrix A(2, 2), B(2, 2);
  A << 1, 0, 0, 0;
  B << 0, 1, 0, 0;
  e.representations.push_back(constant_rep(2, {A, B}));
  lie_algebra_extras(e);
  e.vanest_cochains.push_back({1, constants({0.6, -0.8})});
  return e;
}

inline CatalogEntry tangent_euclidean(int n) {
  CatalogEntry e;
  e.name = "tangent_euclidean" + std::to_string(n);
  e.description = "tangent algebroid of R^n with the flat geodesic spray";
  e.algebroid = AlgebroidSpec::zero(e.name, n, n);
  for (int i = 0; i < n; ++i) e.algebroid.set_rho(i, i, k(1));
  // room for the morphism's base map to push sampled points outward
  e.algebroid.domain.min.assign(static_cast<std::size_t>(n), -2.0);
  e.algebroid.domain.max.assign(static_cast<std::size_t>(n), 2.0);
  e.spray = SpraySpec::zero(n);
  e.oracle = LieOracle::tangent;
  const AlgebroidSpec& s = e.algebroid;
  // df for f = x1^2/2 + sin(x_n)
  Expression f = Expression::constant(0.5) * pow(s.coordinate(0), 2) + apply(Op::sin, s.coordinate(n - 1));
  std::vector<Expression> c;
  for (int i = 0; i < n; ++i) c.push_back(f.differentiate(i));
  e.cocycles.push_back(c);
  // tangent map of the diffeomorphism x1 -> x1 + 0.1 x_n^2
  MorphismSpec m = MorphismSpec::identity(s);
  m.base_map[0] = s.coordinate(0) + Expression::constant(0.1) * pow(s.coordinate(n - 1), 2);
  if (n > 1) m.bundle_map[static_cast<std::size_t>(0 * n + (n - 1))] = Expression::constant(0.2) * s.coordinate(n - 1);
  else m.bundle_map[0] = Expression::constant(1.0) + Expression::constant(0.2) * s.coordinate(0);
  e.morphisms.push_back(m);
  BaseForm w = BaseForm::zero(n, 1);
  w.c[0] = s.coordinate(n - 1);
  if (n > 1) w.c[1] = apply(Op::cos, s.coordinate(0));
  e.pullback_forms.push_back(w);
  e.im_forms.push_back(anchor_pullback_im_form(s, w));
  SpraySpec alt = SpraySpec::zero(n);
  alt.set_gamma(0, 0, 0, s.coordinate(n - 1) * Expression::constant(0.3));
  e.alt_spray = alt;
  return e;
}

inline void poisson_extras(CatalogEntry& e, const PoissonSpec& p) {
  e.poisson = p;
  IMFormSpec canon = closed_im2_form(ClosedIM2Spec::identity(p.n));
  e.im_forms.push_back(canon);
  e.closed_im2.push_back(ClosedIM2Spec::identity(p.n, 0.5));
  // cocycle of the Hamiltonian vector field of x1: c_a = pi^{1a}
  std::vector<Expression> c;
  for (int a = 0; a < p.n; ++a) c.push_back(p.at(0, a));
  e.cocycles.push_back(c);
}

inline CatalogEntry constant_symplectic2() {
  CatalogEntry e;
  e.name = "constant_symplectic2";
  e.description = "cotangent algebroid of the constant symplectic structure on R^2";
  PoissonSpec p = PoissonSpec::zero(2);
  p.set(0, 1, k(1));
  e.algebroid = cotangent_algebroid(p, e.name);
  e.spray = SpraySpec::zero(2);
  poisson_extras(e, p);
  widen_domain(e, 2.0);
  return e;
}

inline CatalogEntry lie_poisson_so3() {
  CatalogEntry e;
  e.name = "lie_poisson_so3";
  e.description = "Lie-Poisson structure on so(3)*, pi^{ij} = eps_{ijk} x_k";
  PoissonSpec p = PoissonSpec::zero(3);
  p.set(0, 1, p.parse("x3"));
  p.set(1, 2, p.parse("x1"));
  p.set(2, 0, p.parse("x2"));
  e.algebroid = cotangent_algebroid(p, e.name);
  e.spray = SpraySpec::zero(3);
  poisson_extras(e, p);
  // the cotangent bracket here is C = -eps, so the coadjoint generators enter with a sign
  e.representations.push_back(constant_rep(3, {-so3_generator(0), -so3_generator(1), -so3_generator(2)}));
  return e;
}

inline CatalogEntry quadratic_poisson2() {
  CatalogEntry e;
  e.name = "quadratic_poisson2";
  e.description = "quadratic Poisson structure pi = x1 x2 d1 ^ d2";
  PoissonSpec p = PoissonSpec::zero(2);
  p.set(0, 1, p.parse("x1*x2"));
  e.algebroid = cotangent_algebroid(p, e.name);
  e.spray = SpraySpec::zero(2);
  poisson_extras(e, p);
  return e;
}

inline CatalogEntry anchor_pullback_form() {
  CatalogEntry e;
  e.name = "anchor_pullback_form";
  e.description = "quadratic Poisson cotangent algebroid with a curved spray and anchor-pullback IM forms";
  PoissonSpec p = PoissonSpec::zero(2);
  p.set(0, 1, p.parse("x1*x2"));
  e.algebroid = cotangent_algebroid(p, e.name);
  const AlgebroidSpec& s = e.algebroid;
  e.spray = SpraySpec::zero(2);
  e.spray.set_gamma(0, 0, 0, s.parse("0.3"));
  e.spray.set_gamma(1, 0, 1, s.parse("0.2*x1"));
  e.spray.set_gamma(1, 1, 1, s.parse("-0.1*x2"));
  e.poisson = p;
  BaseForm w1 = BaseForm::zero(2, 1);
  w1.c[0] = s.parse("x2");
  w1.c[1] = s.parse("sin(x1)");
  BaseForm w2 = BaseForm::zero(2, 2);
  w2.c[0] = s.parse("x1*x2");
  for (const BaseForm& w : {w1, w2}) {
    e.pullback_forms.push_back(w);
    e.im_forms.push_back(anchor_pullback_im_form(s, w));
  }
  e.alt_spray = SpraySpec::zero(2);
  return e;
}

inline JacobiSpec jacobi_r2_spec() {
  PoissonSpec p = PoissonSpec::zero(2);
  p.set(0, 1, p.parse("1+0.25*x2^2"));
  return {p, {p.parse("0.5"), p.parse("0")}};
}

inline CatalogEntry jacobi_r2() {
  CatalogEntry e;
  e.name = "jacobi_r2";
  e.description = "trivialized Jacobi structure on R^2: pi = (1 + x2^2/4) d1 ^ d2, R = d1/2";
  JacobiSpec j = jacobi_r2_spec();
  e.algebroid = jacobi_algebroid(j, e.name);
  e.spray = SpraySpec::zero(3);
  e.jacobi = j;
  e.cocycles.push_back(jacobi_cocycle(j));
  e.representations.push_back(jacobi_representation(j));
  e.spencer.push_back(jacobi_spencer(j));
  widen_domain(e, 2.0);
  return e;
}

}  // namespace detail

inline std::vector<std::string> catalog_names() {
  return {"abelian3",         "abelian2x2",          "heisenberg3",        "so3",
          "sl2",              "affine2",             "tangent_euclidean2", "constant_symplectic2",
          "lie_poisson_so3",  "quadratic_poisson2",  "anchor_pullback_form", "jacobi_r2"};
}

// Parametric names abelian<r>, abelian<n>x<r>, tangent_euclidean<n> accept sizes 1..6.
inline CatalogEntry catalog_entry(const std::string& name) {
  auto parse_size = [&](const std::string& s) {
    if (s.empty() || s.size() > 1 || s[0] < '1' || s[0] > '6') throw SchemaError("unknown catalog entry '" + name + "'");
    return s[0] - '0';
  };
  if (name == "heisenberg3") return detail::heisenberg3();
  if (name == "so3") return detail::so3();
  if (name == "sl2") return detail::sl2();
  if (name == "affine2") return detail::affine2();
  if (name == "constant_symplectic2") return detail::constant_symplectic2();
  if (name == "lie_poisson_so3") return detail::lie_poisson_so3();
  if (name == "quadratic_poisson2") return detail::quadratic_poisson2();
  if (name == "anchor_pullback_form") return detail::anchor_pullback_form();
  if (name == "jacobi_r2") return detail::jacobi_r2();
  if (name.rfind("tangent_euclidean", 0) == 0) return detail::tangent_euclidean(parse_size(name.substr(17)));
  if (name.rfind("abelian", 0) == 0) {
    std::string rest = name.substr(7);
    auto x = rest.find('x');
    if (x == std::string::npos) return detail::abelian(0, parse_size(rest));
    return detail::abelian(parse_size(rest.substr(0, x)), parse_size(rest.substr(x + 1)));
  }
  throw SchemaError("unknown catalog entry '" + name + "'");
}

}  // namespace sprayg
