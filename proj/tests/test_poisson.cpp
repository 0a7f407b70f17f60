#include <cmath>

#include "catch_amalgamated.hpp"
#include "oracles.hpp"
#include "sprayg/suite.hpp"

using namespace sprayg;

namespace {

SolverConfig defaults() { return SolverConfig{}; }

SprayModel model(const CatalogEntry& e) { return SprayModel(e.algebroid, e.spray); }

Sampler small(const CatalogEntry& e, int count, double scale = 0.3) {
  return Sampler(42, e.algebroid.domain, e.algebroid.rank, scale, count);
}

// Torsion of l on coordinate fields with every derivative of N taken by central differences.
std::vector<double> fd_torsion(const ClosedIM2Spec& l, std::vector<double> x, int a, int b) {
  const int n = l.n;
  const double h = 1e-5;
  auto N = [&](int i, int c, const std::vector<double>& y) { return l.at(i, c).evaluate(y); };
  auto dN = [&](int j, int i, int c) {
    std::vector<double> p = x, q = x;
    p[static_cast<std::size_t>(j)] += h;
    q[static_cast<std::size_t>(j)] -= h;
    return (N(i, c, p) - N(i, c, q)) / (2 * h);
  };
  std::vector<double> T(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      T[static_cast<std::size_t>(i)] += N(j, a, x) * dN(j, i, b) - N(j, b, x) * dN(j, i, a) -
                                        N(i, j, x) * (dN(a, j, b) - dN(b, j, a));
  return T;
}

}  // namespace

TEST_CASE("cotangent algebroid of a Poisson structure") {
  auto e = catalog_entry("lie_poisson_so3");
  const AlgebroidSpec& s = e.algebroid;
  const double x[] = {0.3, -0.7, 0.2};
  // rho^i_a = pi^{ai}
  CHECK(s.rho(0, 1).evaluate(x) == Catch::Approx(-0.2));
  CHECK(s.rho(1, 0).evaluate(x) == Catch::Approx(0.2));
  CHECK(s.rho(2, 1).evaluate(x) == Catch::Approx(0.3));
  // C^g_{ab} = -d_g pi^{ab}
  CHECK(s.c(2, 0, 1).evaluate(x) == -1.0);
  CHECK(s.c(0, 1, 2).evaluate(x) == -1.0);
  CHECK(check_jacobi(s, small(e, 20)).all_pass());
}

TEST_CASE("symplectic form of the spray groupoid") {
  for (const char* name : {"lie_poisson_so3", "quadratic_poisson2", "constant_symplectic2"}) {
    auto e = catalog_entry(name);
    REQUIRE(e.poisson);
    SprayModel m = model(e);
    Sampler s = small(e, 5);
    double zero = 0.0, anti = 0.0;
    for (const auto& a : s.points(Stream::user)) {
      Matrix W0 = symplectic_form(m, zero_at(a.x, m.r()), defaults());
      zero = std::max(zero, (W0 - oracle::poisson_zero_section(*e.poisson, a.x)).cwiseAbs().maxCoeff());
      Matrix W = symplectic_form(m, a, defaults());
      anti = std::max(anti, (W + W.transpose()).cwiseAbs().maxCoeff());
    }
    INFO(name);
    CHECK(zero <= 1e-9);
    CHECK(anti <= 1e-13);
  }
  // a constant structure has a translation-invariant groupoid form
  auto c = catalog_entry("constant_symplectic2");
  SprayModel mc = model(c);
  FiberElement a{{0.4, -0.3}, {0.6, 0.2}};
  Matrix W = symplectic_form(mc, a, defaults());
  CHECK((W - oracle::poisson_zero_section(*c.poisson, a.x)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(symplectic_form(model(catalog_entry("so3")), FiberElement{{}, {0.1, 0.2, 0.3}}, defaults()),
                  SchemaError);
}

TEST_CASE("realization checks and the fast multiplication") {
  for (const char* name : {"lie_poisson_so3", "quadratic_poisson2", "anchor_pullback_form"}) {
    auto e = catalog_entry(name);
    SprayModel m = model(e);
    INFO(name);
    auto rep = check_realization(*e.poisson, m, small(e, 3), defaults());
    CHECK(rep.all_pass());
    CHECK(check_fast_multiply(m, small(e, 3), defaults()).all_pass());
  }
  auto e = catalog_entry("lie_poisson_so3");
  SprayModel m = model(e);
  FiberElement b{{0.2, 0.1, -0.3}, {0.3, -0.2, 0.25}};
  FiberElement a{target(m, b, defaults()), {-0.1, 0.35, 0.2}};
  CHECK(dist_inf(multiply_fast(m, a, b, defaults()), multiply(m, a, b, defaults())) <= 1e-6);
  FiberElement far{{0.9, 0.9, 0.9}, {0.0, 0.0, 0.0}};
  CHECK_THROWS_AS(multiply_fast(m, far, b, defaults()), NotComposable);
}

TEST_CASE("integrated closed IM 2-forms") {
  auto e = catalog_entry("lie_poisson_so3");
  SprayModel m = model(e);
  FiberElement a{{0.2, -0.1, 0.4}, {0.3, 0.1, -0.2}};
  Matrix W = symplectic_form(m, a, defaults());
  // l = id integrates to the groupoid symplectic form, and scaling l scales the result
  CHECK((OmegaL(m, ClosedIM2Spec::identity(3)).matrix(a, defaults()) - W).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((OmegaL(m, ClosedIM2Spec::identity(3, 0.5)).matrix(a, defaults()) - 0.5 * W).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((OmegaL(m, ClosedIM2Spec::identity(3, 0.5)).squared_matrix(a, defaults()) - 0.25 * W).cwiseAbs().maxCoeff() <=
        1e-10);
  std::vector<TangentAtA> t{{{1, 0, 0}, {0, 0.5, 0}}, {{0, 0, 1}, {0.2, 0, 0}}};
  const double direct = to_eigen(flatten(t[0])).dot(W * to_eigen(flatten(t[1])));
  CHECK(omega_L(m, ClosedIM2Spec::identity(3), a, t, defaults()) == Catch::Approx(direct).margin(1e-12));
  CHECK_THROWS_AS(omega_L(m, ClosedIM2Spec::identity(3), a, std::span(t.data(), 1), defaults()), SchemaError);
  auto ev = omega_L_evaluator(m, ClosedIM2Spec::identity(3), defaults());
  CHECK(ev(a, t) == Catch::Approx(direct).margin(1e-12));
}

TEST_CASE("Nijenhuis torsion") {
  AlgebroidSpec s = AlgebroidSpec::zero("r2", 2, 2);
  ClosedIM2Spec diag{2, {s.parse("x1"), s.parse("0"), s.parse("0"), s.parse("x1")}};
  const double x[] = {0.7, -0.4};
  std::vector<double> e1{1, 0}, e2{0, 1};
  // f times the identity is torsion free
  CHECK(norm_inf(nijenhuis_torsion(diag, x, e1, e2)) <= 1e-14);
  ClosedIM2Spec gen{2, {s.parse("x1"), s.parse("x2^2"), s.parse("0.5*x1*x2"), s.parse("1")}};
  auto T = nijenhuis_torsion(gen, x, e1, e2);
  CHECK(norm_inf(T) > 0.01);
  CHECK(dist_inf(T, fd_torsion(gen, {0.7, -0.4}, 0, 1)) <= 1e-8);
  // bilinear and alternating
  std::vector<double> v{0.3, 1.2}, w{-0.5, 0.4};
  auto Tvw = nijenhuis_torsion(gen, x, v, w), Twv = nijenhuis_torsion(gen, x, w, v);
  const double det = v[0] * w[1] - v[1] * w[0];
  for (int i = 0; i < 2; ++i) {
    CHECK(Tvw[i] == Catch::Approx(-Twv[i]));
    CHECK(Tvw[i] == Catch::Approx(det * T[i]));
  }
}

TEST_CASE("Poisson-Nijenhuis checks") {
  auto e = catalog_entry("lie_poisson_so3");
  SprayModel m = model(e);
  auto rep = check_pn(*e.poisson, ClosedIM2Spec::identity(3, 0.5), m, small(e, 3), defaults());
  CHECK(rep.all_pass());
  // a non-compatible l on the same structure
  const AlgebroidSpec& s = e.algebroid;
  ClosedIM2Spec bad = ClosedIM2Spec::identity(3);
  bad.N[0] = s.parse("1 + x1");
  auto neg = check_pn(*e.poisson, bad, m, small(e, 3), defaults());
  CHECK_FALSE(neg.all_pass());
  CHECK_FALSE(neg.find("pn_symmetry")->pass);
}

TEST_CASE("Jacobi structures") {
  auto e = catalog_entry("jacobi_r2");
  REQUIRE(e.jacobi);
  const JacobiSpec& j = *e.jacobi;
  CHECK(check_jacobi_structure(j, small(e, 20)).all_pass());
  CHECK(check_jacobi(e.algebroid, small(e, 20)).all_pass());
  CHECK(check_jet_bracket(j, e.algebroid, small(e, 10)).all_pass());
  // {1, x1} = R^1
  const double x[] = {0.1, 0.2};
  CHECK(jacobi_bracket(j, Expression::constant(1.0), e.algebroid.coordinate(0)).evaluate(x) == Catch::Approx(0.5));
  // rho(e0) = -R
  CHECK(e.algebroid.rho(0, 0).evaluate(x) == -0.5);

  JacobiSpec bad = j;
  bad.R[1] = bad.poisson.parse("0.3");  // R no longer preserves pi
  CHECK_FALSE(check_jacobi_structure(bad, small(e, 20)).all_pass());

  SprayModel m = model(e);
  auto contact = check_contact(m, j, small(e, 2), defaults());
  CHECK(contact.all_pass());
  CHECK(contact.find("contact_corank")->max_residual <= 1e3);
  CHECK(check_contact_spencer(m, j, small(e, 3), defaults()).all_pass());
  CHECK(check_cocycle(e.algebroid, e.cocycles[0], small(e, 20)).all_pass());
}
