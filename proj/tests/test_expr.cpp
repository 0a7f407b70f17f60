#include <cmath>
#include <random>
#include <string>

#include "catch_amalgamated.hpp"
#include "oracles.hpp"
#include "sprayg/expr.hpp"

using namespace sprayg;

namespace {

NameList xy() { return make_names({"x1", "x2"}); }

// Random source strings over the full grammar. Denominators and log/sqrt arguments are kept
// away from zero so most draws evaluate; the rest raise DomainError and are skipped.
std::string random_expr(std::mt19937_64& g, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  auto leaf = [&]() -> std::string {
    if (g() % 2) return g() % 2 ? "x1" : "x2";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", c(g));
    return std::string("(") + buf + ")";
  };
  switch (pick(g)) {
    case 0:
    case 1:
      return leaf();
    case 2:
      return "(" + random_expr(g, depth - 1) + " + " + random_expr(g, depth - 1) + ")";
    case 3:
      return "(" + random_expr(g, depth - 1) + " - " + random_expr(g, depth - 1) + ")";
    case 4:
      return "(" + random_expr(g, depth - 1) + " * " + random_expr(g, depth - 1) + ")";
    case 5:
      return "(" + random_expr(g, depth - 1) + " / (1.5 + (" + random_expr(g, depth - 1) + ")^2))";
    case 6:
      return "(" + random_expr(g, depth - 1) + ")^" + std::to_string(g() % 4);
    case 7: {
      static const char* f[] = {"sin", "cos", "tanh", "sinh", "cosh"};
      return std::string(f[g() % 5]) + "(" + random_expr(g, depth - 1) + ")";
    }
    case 8: {
      static const char* f[] = {"log", "sqrt"};
      return std::string(f[g() % 2]) + "(1.2 + (" + random_expr(g, depth - 1) + ")^2)";
    }
    default:
      return "-" + random_expr(g, depth - 1);
  }
}

}  // namespace

TEST_CASE("parse and evaluate the documented cases") {
  auto e = parse_expression("x1^2*sin(x2)", xy());
  const double p[] = {2.0, M_PI / 2};
  CHECK(e.evaluate(p) == Catch::Approx(4.0).epsilon(1e-15));
  CHECK_THROWS_AS(parse_expression("x3", xy()), UnknownIdentifier);
  const double any[] = {0.3, -0.7};
  CHECK(parse_expression("1+2*3", xy()).evaluate(any) == 7.0);
  const double zero[] = {0.0, 0.0};
  CHECK_THROWS_AS(parse_expression("log(x1)", xy()).evaluate(zero), DomainError);
  CHECK(parse_expression("exp(x1)-1", xy()).evaluate(zero) == 0.0);
}

TEST_CASE("grammar corners") {
  const double p[] = {3.0, 2.0};
  CHECK(parse_expression("-x1^2", xy()).evaluate(p) == -9.0);
  CHECK_THROWS_AS(parse_expression("2^3^1", xy()), SyntaxError);
  CHECK(parse_expression("x1 - x2 - 1", xy()).evaluate(p) == 0.0);
  CHECK(parse_expression("x1 / x2 / 2", xy()).evaluate(p) == 0.75);
  CHECK(parse_expression("--x1", xy()).evaluate(p) == 3.0);
  CHECK(parse_expression("1.5e1 + x2", xy()).evaluate(p) == 17.0);
  CHECK_THROWS_AS(parse_expression("x1^-1", xy()), SyntaxError);
  CHECK_THROWS_AS(parse_expression("x1^1.5", xy()), SyntaxError);
  CHECK_THROWS_AS(parse_expression("(x1", xy()), SyntaxError);
  CHECK_THROWS_AS(parse_expression("x1 +", xy()), SyntaxError);
  CHECK_THROWS_AS(parse_expression("foo(x1)", xy()), UnknownIdentifier);
  const double q[] = {-1.0, 0.0};
  CHECK_THROWS_AS(parse_expression("sqrt(x1)", xy()).evaluate(q), DomainError);
  CHECK_THROWS_AS(parse_expression("1/x2", xy()).evaluate(q), DomainError);
}

TEST_CASE("symbolic derivatives") {
  auto e = parse_expression("x1^2*sin(x2)", xy());
  auto d1 = e.differentiate(0);
  const double p[] = {0.0, 1.0};
  CHECK(d1.evaluate(p) == 0.0);
  const double q[] = {0.7, 0.4};
  CHECK(d1.evaluate(q) == Catch::Approx(2 * 0.7 * std::sin(0.4)).epsilon(1e-14));
  CHECK(parse_expression("x1", xy()).differentiate(1).is_zero());

  auto ex = parse_expression("exp(x1^2)", make_names({"x1"}));
  const double one[] = {1.0};
  const double d = ex.differentiate(0).evaluate(one);
  CHECK(std::abs(d - 2.0 * std::exp(1.0)) <= 1e-12);
  auto f = [&](double t) {
    const double z[] = {t};
    return ex.evaluate(z);
  };
  CHECK(std::abs(d - oracle::central_difference(f, 1.0, 1e-6)) <= 1e-8);
}

TEST_CASE("pretty-print round trip is idempotent") {
  std::mt19937_64 g(7);
  for (int k = 0; k < 300; ++k) {
    auto e = parse_expression(random_expr(g, 5), xy());
    std::string once = e.to_string();
    std::string twice = parse_expression(once, xy()).to_string();
    REQUIRE(once == twice);
  }
}

TEST_CASE("symbolic derivative matches central differences on random expressions") {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int tested = 0;
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    auto e = parse_expression(random_expr(g, 5), xy());
    const int i = static_cast<int>(g() % 2);
    std::vector<double> x{u(g), u(g)};
    try {
      auto d = e.differentiate(i);
      const double exact = d.evaluate(x);
      auto f = [&](double t) {
        std::vector<double> y = x;
        y[static_cast<std::size_t>(i)] = t;
        return e.evaluate(y);
      };
      const double fd = oracle::central_difference(f, x[static_cast<std::size_t>(i)], 1e-6);
      worst = std::max(worst, std::abs(exact - fd) / (1.0 + std::abs(exact)));
      ++tested;
    } catch (const DomainError&) {
    }
  }
  INFO("tested " << tested << ", worst scaled error " << worst);
  CHECK(tested > 900);
  CHECK(worst <= 1e-5);
}

TEST_CASE("compiled tables agree with tree evaluation") {
  std::mt19937_64 g(3);
  std::vector<Expression> es;
  for (int k = 0; k < 50; ++k) es.push_back(parse_expression(random_expr(g, 4), xy()));
  ExprTable t(es);
  const double x[] = {0.31, -0.57};
  std::vector<double> v = t.evaluate(x);
  for (std::size_t k = 0; k < es.size(); ++k) {
    double direct;
    try {
      direct = es[k].evaluate(x);
    } catch (const DomainError&) {
      continue;
    }
    CHECK(v[k] == Catch::Approx(direct).epsilon(1e-14).margin(1e-300));
  }
}
