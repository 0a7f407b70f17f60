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

// w = (1 + x1^2) dx1 ^ dx2 ^ dx3 on the Lie-Poisson base
BaseForm volume_form(const AlgebroidSpec& s) {
  BaseForm w = BaseForm::zero(3, 3);
  w.c[0] = s.parse("1 + x1^2");
  return w;
}

}  // namespace

TEST_CASE("linear form evaluation") {
  auto h = catalog_entry("heisenberg3");
  std::vector<TangentAtA> t{{{}, {0.5, -2.0, 7.0}}};
  CHECK(linear_form_eval(h.im_forms[0], FiberElement{{}, {1.0, 1.0, 1.0}}, t) == Catch::Approx(0.3 * 0.5 - 1.1 * 2.0));

  // l = x, nu = 1/4 on a rank-one bundle over the line: d(x u) + u nu dx
  AlgebroidSpec s = AlgebroidSpec::zero("line", 1, 1);
  IMFormSpec im = IMFormSpec::zero(1, 1, 1);
  im.l[0] = s.coordinate(0);
  im.nu[0] = Expression::constant(0.25);
  std::vector<TangentAtA> v{{{0.5}, {0.7}}};
  CHECK(linear_form_eval(im, FiberElement{{2.0}, {3.0}}, v) == Catch::Approx(2.0 * 0.7 + 3.0 * 0.5 + 0.25 * 3.0 * 0.5));
  // alternating in the tangents
  auto a = catalog_entry("anchor_pullback_form");
  const IMFormSpec& im2 = a.im_forms[1];
  FiberElement p{{0.3, -0.2}, {0.4, 0.1}};
  std::vector<TangentAtA> t2{{{0.1, 0.2}, {0.3, -0.4}}, {{-0.5, 0.6}, {0.7, 0.8}}};
  std::vector<TangentAtA> t2r{t2[1], t2[0]};
  CHECK(linear_form_eval(im2, p, t2) == Catch::Approx(-linear_form_eval(im2, p, t2r)));
  CHECK_THROWS_AS(linear_form_eval(im2, p, v), SchemaError);
}

TEST_CASE("IM equations hold for catalog forms and fail when corrupted") {
  for (const auto& name : catalog_names()) {
    auto e = catalog_entry(name);
    for (const auto& im : e.im_forms) {
      INFO(name);
      CHECK(check_im_equations(e.algebroid, im, small(e, 20)).all_pass());
    }
  }
  auto e = catalog_entry("anchor_pullback_form");
  IMFormSpec bad = e.im_forms[0];
  bad.l[0] = bad.l[0] + e.algebroid.parse("0.5*x2^2");
  CHECK_FALSE(check_im_equations(e.algebroid, bad, small(e, 20)).all_pass());
  IMFormSpec bad_nu = e.im_forms[1];
  bad_nu.nu[0] = Expression::constant(1.0);
  CHECK_FALSE(check_im_equations(e.algebroid, bad_nu, small(e, 20)).all_pass());
}

TEST_CASE("integrated IM forms on the zero section match the closed form") {
  Rng g(8, 8);
  auto check_entry = [&](const CatalogEntry& e, const IMFormSpec& im) {
    SprayModel m = model(e);
    Sampler s = small(e, 4);
    double worst = 0.0;
    for (const auto& x : s.base_points(Stream::user)) {
      std::vector<TangentAtA> t;
      for (int i = 0; i < im.degree; ++i) t.push_back(random_tangent(g, m.n(), m.r()));
      const double got = integrate_im_form(m, im, zero_at(x, m.r()), t, defaults());
      worst = std::max(worst, std::abs(got - oracle::im_zero_section(e.algebroid, im, x, t)));
    }
    return worst;
  };
  auto a = catalog_entry("anchor_pullback_form");
  CHECK(check_entry(a, a.im_forms[0]) <= 1e-10);
  CHECK(check_entry(a, a.im_forms[1]) <= 1e-10);
  auto h = catalog_entry("heisenberg3");
  CHECK(check_entry(h, h.im_forms[0]) <= 1e-12);
  auto lp = catalog_entry("lie_poisson_so3");
  IMFormSpec im3 = anchor_pullback_im_form(lp.algebroid, volume_form(lp.algebroid));
  REQUIRE(im3.degree == 3);
  CHECK(check_im_equations(lp.algebroid, im3, small(lp, 10)).all_pass());
  CHECK(check_entry(lp, im3) <= 1e-10);
}

TEST_CASE("anchor pullbacks integrate to target minus source") {
  for (const char* name : {"anchor_pullback_form", "tangent_euclidean2"}) {
    auto e = catalog_entry(name);
    SprayModel m = model(e);
    for (const auto& w : e.pullback_forms) {
      INFO(name << " degree " << w.degree);
      auto rep = check_pullback_form(m, e.algebroid, w, small(e, 5), defaults());
      CHECK(rep.all_pass());
    }
  }
  auto lp = catalog_entry("lie_poisson_so3");
  CHECK(check_pullback_form(model(lp), lp.algebroid, volume_form(lp.algebroid), small(lp, 3), defaults()).all_pass());
}

TEST_CASE("multiplicativity and its negative control") {
  auto e = catalog_entry("anchor_pullback_form");
  SprayModel m = model(e);
  for (const auto& im : e.im_forms) {
    auto rep = check_multiplicativity(m, im_form_evaluator(m, im, defaults()), im.degree, small(e, 3), defaults());
    CHECK(rep.all_pass());
    // the linear form itself is not multiplicative on a curved spray groupoid
    auto neg = check_multiplicativity(m, linear_form_evaluator(im), im.degree, small(e, 3), defaults());
    CHECK_FALSE(neg.all_pass());
    CHECK(neg.find("multiplicativity")->max_residual > 1e-3);
  }
}

TEST_CASE("differentiation recovers the IM form") {
  auto e = catalog_entry("anchor_pullback_form");
  SprayModel m = model(e);
  for (const auto& im : e.im_forms) {
    auto rt = check_im_round_trip(m, im, small(e, 3), defaults());
    CHECK(rt.all_pass());
    CHECK(rt.find("roundtrip_l")->max_residual <= 1e-5);
    CHECK(rt.find("roundtrip_nu")->max_residual <= 1e-5);
    CHECK(check_chain_map(m, im, small(e, 3), defaults()).all_pass());
  }
  auto so3 = catalog_entry("lie_poisson_so3");
  SprayModel ms = model(so3);
  CHECK(check_im_round_trip(ms, so3.im_forms[0], small(so3, 2), defaults()).all_pass());
}

TEST_CASE("linearization at the zero section") {
  auto e = catalog_entry("anchor_pullback_form");
  SprayModel m = model(e);
  auto rep = linearization_check(m, e.im_forms[1], small(e, 3, 0.8), defaults());
  CHECK(rep.all_pass());
}

TEST_CASE("Spencer operators") {
  auto e = catalog_entry("anchor_pullback_form");
  SprayModel m = model(e);
  for (const auto& im : e.im_forms) {
    SpencerSpec sp = SpencerSpec::from_im(im);
    CHECK(check_spencer_equations(e.algebroid, sp, small(e, 10)).all_pass());
    CHECK(check_spencer_trivial(m, im, small(e, 3), defaults()).all_pass());
  }
  auto j = catalog_entry("jacobi_r2");
  REQUIRE_FALSE(j.spencer.empty());
  CHECK(check_spencer_equations(j.algebroid, j.spencer[0], small(j, 20)).all_pass());
  // shifting D alone breaks the compatibility equations
  SpencerSpec bad = j.spencer[0];
  for (auto& c : bad.D) c = c + Expression::constant(0.75);
  CHECK_FALSE(check_spencer_equations(j.algebroid, bad, small(j, 20)).all_pass());
}
