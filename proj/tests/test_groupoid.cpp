#include <cmath>

#include "catch_amalgamated.hpp"
#include "oracles.hpp"
#include "sprayg/suite.hpp"

using namespace sprayg;

namespace {

SolverConfig defaults() { return SolverConfig{}; }

SprayModel model(const CatalogEntry& e) { return SprayModel(e.algebroid, e.spray); }

FiberElement lie(std::vector<double> u) { return {{}, std::move(u)}; }

}  // namespace

TEST_CASE("source, target and inverse") {
  auto t = catalog_entry("tangent_euclidean2");
  SprayModel mt = model(t);
  FiberElement a{{0.1, -0.2}, {0.3, 0.25}};
  CHECK(source(a) == a.x);
  auto y = target(mt, a, defaults());
  CHECK(std::abs(y[0] - 0.4) <= 1e-14);
  CHECK(std::abs(y[1] - 0.05) <= 1e-14);
  FiberElement ia = inverse(mt, a, defaults());
  CHECK(dist_inf(ia.x, y) == 0.0);
  CHECK(ia.u == std::vector<double>{-0.3, -0.25});

  auto so3 = catalog_entry("so3");
  FiberElement b = lie({0.4, -0.1, 0.7});
  CHECK(inverse(model(so3), b, defaults()).u == std::vector<double>{-0.4, 0.1, -0.7});
}

TEST_CASE("multiplication against closed-form group laws") {
  auto so3 = catalog_entry("so3");
  SprayModel ms = model(so3);
  Rng g(17, 3);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    auto a = g.ball(3, 0.5), b = g.ball(3, 0.5);
    worst = std::max(worst, dist_inf(multiply(ms, lie(a), lie(b), defaults()).u, oracle::so3_product(a, b)));
  }
  CHECK(worst <= 1e-6);

  auto h = catalog_entry("heisenberg3");
  SprayModel mh = model(h);
  worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    auto a = g.ball(3, 1.0), b = g.ball(3, 1.0);
    worst = std::max(worst, dist_inf(multiply(mh, lie(a), lie(b), defaults()).u, oracle::heisenberg_product(a, b)));
  }
  CHECK(worst <= 1e-8);

  auto ab = catalog_entry("abelian3");
  FiberElement s = multiply(model(ab), lie({0.1, 0.2, 0.3}), lie({-0.4, 0.5, 1.0}), defaults());
  CHECK(dist_inf(s.u, std::vector<double>{-0.3, 0.7, 1.3}) <= 1e-14);

  // pair groupoid law of the flat tangent spray: (y, v) (x, u) = (x, u + v) when y = x + u
  auto t = catalog_entry("tangent_euclidean2");
  SprayModel mt = model(t);
  FiberElement b{{0.1, -0.3}, {0.2, 0.15}};
  FiberElement a{{0.3, -0.15}, {-0.25, 0.4}};
  FiberElement p = multiply(mt, a, b, defaults());
  CHECK(dist_inf(p.x, b.x) <= 1e-14);
  CHECK(dist_inf(p.u, std::vector<double>{-0.05, 0.55}) <= 1e-8);
}

TEST_CASE("non-composable arrows are rejected") {
  auto t = catalog_entry("tangent_euclidean2");
  SprayModel mt = model(t);
  FiberElement b{{0.0, 0.0}, {0.2, 0.0}};
  FiberElement a{{0.5, 0.0}, {0.1, 0.1}};
  CHECK_THROWS_AS(multiply(mt, a, b, defaults()), NotComposable);
  CHECK_THROWS_AS(division(mt, a, b, defaults()), NotComposable);
}

TEST_CASE("multiplication curve and division") {
  auto so3 = catalog_entry("so3");
  SprayModel ms = model(so3);
  std::vector<double> a{0.3, -0.2, 0.1}, b{-0.1, 0.4, 0.25};
  const double ts[] = {0.25, 0.5, 1.0};
  auto curve = multiply_curve(ms, lie(a), lie(b), defaults(), ts);
  REQUIRE(curve.size() == 3);
  for (const auto& [t, k] : curve)
    CHECK(dist_inf(k.u, oracle::so3_product(scaled(a, t), b)) <= 1e-6);

  FiberElement d = division(ms, lie(a), lie(b), defaults());
  CHECK(dist_inf(d.u, oracle::so3_product(a, scaled(b, -1.0))) <= 1e-6);
  CHECK(dist_inf(multiply(ms, d, lie(b), defaults()).u, a) <= 1e-6);

  auto lp = catalog_entry("lie_poisson_so3");
  SprayModel ml = model(lp);
  FiberElement g{{0.2, -0.1, 0.3}, {0.2, 0.1, -0.3}}, h{{0.2, -0.1, 0.3}, {-0.15, 0.2, 0.1}};
  FiberElement q = division(ml, g, h, defaults());
  CHECK(dist_inf(target(ml, h, defaults()), q.x) <= 1e-6);
  FiberElement back = detail::multiply_unchecked(ml, rebase(q, target(ml, h, defaults())), h, defaults());
  CHECK(dist_inf(back, g) <= 1e-6);
}

TEST_CASE("groupoid axioms on representative entries") {
  for (const char* name : {"so3", "heisenberg3", "tangent_euclidean2", "lie_poisson_so3", "anchor_pullback_form"}) {
    auto e = catalog_entry(name);
    SprayModel m = model(e);
    Sampler s(42, e.algebroid.domain, e.algebroid.rank, 0.3, 3);
    auto rep = verify_axioms(m, s, defaults());
    INFO(name);
    CHECK(rep.all_pass());
    CHECK(rep.find("associativity")->max_residual <= 1e-6);
  }
}

TEST_CASE("morphisms") {
  for (const auto& name : catalog_names()) {
    auto e = catalog_entry(name);
    Sampler s(42, e.algebroid.domain, e.algebroid.rank, 0.2, 20);
    for (const auto& f : e.morphisms) {
      INFO(name);
      CHECK(check_morphism(f, s).all_pass());
      // composition with the identity changes nothing
      auto id = MorphismSpec::identity(f.target);
      auto g = compose(id, f);
      for (const auto& x : s.base_points(Stream::user)) {
        for (std::size_t k = 0; k < g.bundle_map.size(); ++k)
          CHECK(std::abs(g.bundle_map[k].evaluate(x) - f.bundle_map[k].evaluate(x)) <= 1e-14);
      }
    }
  }

  // a linear map that does not respect the Heisenberg bracket
  auto h = catalog_entry("heisenberg3");
  MorphismSpec bad = MorphismSpec::identity(h.algebroid);
  bad.bundle_map[0] = Expression::constant(3.0);
  Sampler s(1, h.algebroid.domain, 3, 0.2, 5);
  CHECK_FALSE(check_morphism(bad, s).all_pass());

  // the catalog's scaling morphism integrates to phi(a) in exponential coordinates
  SprayModel mh = model(h);
  const MorphismSpec& f = h.morphisms.back();
  std::vector<double> a{0.3, -0.5, 0.2};
  FiberElement img = integrate_morphism(f, mh, mh, lie(a), defaults());
  std::vector<double> expect{2.0 * a[0], 0.5 * a[0] + a[1], 2.0 * a[2]};
  CHECK(dist_inf(img.u, expect) <= 1e-8);
}

TEST_CASE("spray exponential") {
  auto e = catalog_entry("so3");
  SprayModel m = model(e);
  FiberElement a = lie({0.2, -0.3, 0.4});
  CHECK(dist_inf(spray_exponential(m, m, a, defaults()), a) <= 1e-8);
  REQUIRE(e.alt_spray);
  SprayModel m2(e.algebroid, *e.alt_spray);
  FiberElement ea = spray_exponential(m, m2, a, defaults());
  CHECK(dist_inf(ea, a) > 1e-4);
  // exp relates the two flows: phi_2(exp a) and phi_1(a) reach the same group element
  FiberElement back = spray_exponential(m2, m, ea, defaults());
  CHECK(dist_inf(back, a) <= 1e-6);
  CHECK_THROWS_AS(spray_exponential(m, model(catalog_entry("abelian2x2")), a, defaults()), SchemaError);
  Sampler s(42, e.algebroid.domain, 3, 0.3, 3);
  CHECK(check_exponential(m, m2, s, defaults()).all_pass());
}

TEST_CASE("cocycles integrate to additive functions") {
  auto h = catalog_entry("heisenberg3");
  SprayModel mh = model(h);
  std::vector<double> a{0.3, 0.2, -0.4};
  const auto& c = h.cocycles[0];
  CHECK(std::abs(integrate_cocycle(mh, c, lie(a), defaults()) - (0.7 * 0.3 - 0.4 * 0.2)) <= 1e-14);
  for (const auto& name : catalog_names()) {
    auto e = catalog_entry(name);
    SprayModel m = model(e);
    Sampler s(42, e.algebroid.domain, e.algebroid.rank, 0.2, 3);
    for (const auto& cc : e.cocycles) {
      INFO(name);
      CHECK(check_cocycle(e.algebroid, cc, s.with_count(20)).all_pass());
      CHECK(check_cocycle_additive(m, cc, s, defaults()).all_pass());
    }
  }
  // e3 pairs with [e1, e2], so this is not closed
  std::vector<Expression> bad = {Expression::constant(0.0), Expression::constant(0.0), Expression::constant(1.0)};
  CHECK_FALSE(check_cocycle(h.algebroid, bad, Sampler(1, h.algebroid.domain, 3, 0.2, 3)).all_pass());
}

TEST_CASE("representations integrate to actions") {
  // abelian3 acts on R^2 by rotations with rates 0.5, 0.8, 1.1
  auto e = catalog_entry("abelian3");
  SprayModel m = model(e);
  std::vector<double> a{0.4, -0.2, 0.3};
  Transport tr = integrate_representation(m, e.representations[0], lie(a), defaults());
  const double ang = 0.5 * a[0] + 0.8 * a[1] + 1.1 * a[2];
  Matrix R(2, 2);
  R << std::cos(ang), -std::sin(ang), std::sin(ang), std::cos(ang);
  CHECK((tr.final - R).cwiseAbs().maxCoeff() <= 1e-8);

  for (const auto& name : catalog_names()) {
    auto c = catalog_entry(name);
    SprayModel mc = model(c);
    Sampler s(42, c.algebroid.domain, c.algebroid.rank, 0.2, 3);
    for (const auto& rep : c.representations) {
      INFO(name);
      CHECK(check_representation(c.algebroid, rep, s.with_count(20)).all_pass());
      CHECK(check_representation_action(mc, rep, s, defaults()).all_pass());
    }
  }
}

TEST_CASE("van Est of a Heisenberg 1-cochain") {
  auto h = catalog_entry("heisenberg3");
  SprayModel m = model(h);
  Cochain alpha = h.vanest_cochains[0];
  Cochain d = chevalley_eilenberg(h.algebroid, alpha);
  REQUIRE(d.degree == 2);
  const double none[1] = {0.0};
  // d alpha(e1, e2) = -alpha([e1, e2]) = -alpha_3
  CHECK(d.value(0, 1, 3).evaluate(std::span<const double>(none, 0)) == Catch::Approx(-0.9));
  Rng g(3, 9);
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    FiberElement arrows[2] = {lie(g.ball(3, 0.8)), lie(g.ball(3, 0.8))};
    const auto& a = arrows[0].u;
    const auto& b = arrows[1].u;
    const double expect = -0.5 * 0.9 * (a[0] * b[1] - a[1] * b[0]);
    worst = std::max(worst, std::abs(van_est_integrate(m, d, arrows, defaults()) - expect));
  }
  CHECK(worst <= 1e-6);
  Sampler s(42, h.algebroid.domain, 3, 0.3, 3);
  CHECK(check_van_est(m, h.algebroid, alpha, s, defaults()).all_pass());
  CHECK(groupoid_coboundary(1.0, 2.0, 4.5) == 1.5);
}
