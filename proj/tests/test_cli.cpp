#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "sprayg/cli.hpp"
#include "sprayg/config.hpp"

using namespace sprayg;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string text;
  Json doc;
};

Run run(CliOptions o) {
  std::ostringstream out;
  int code = run_command(o, out);
  Run r{code, out.str(), {}};
  r.doc = Json::parse(r.text);
  return r;
}

CliOptions opts(std::string config, std::string command) {
  CliOptions o;
  o.config = std::move(config);
  o.command = std::move(command);
  return o;
}

fs::path scratch_file(const std::string& name, const std::string& text) {
  fs::path p = fs::temp_directory_path() / ("sprayg_test_" + name);
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("config schema errors") {
  CHECK_THROWS_AS(load_config_text(R"({"base_dim": 0})"), SchemaError);
  CHECK_THROWS_AS(load_config_text(R"({"base_dim": 0, "rank": 2, "solver": {"rk_stepz": 3}})"), SchemaError);
  CHECK_THROWS_AS(load_config_text(R"({"base_dim": 0, "rank": 2, "solver": {"rk_steps": 0}})"), std::exception);
  CHECK_THROWS_AS(load_config_text(R"({"base_dim": 1, "rank": 1, "anchor": [["1"]],
      "domain": {"min": [1], "max": [0]}})"),
                  SchemaError);
  CHECK_THROWS_AS(load_config_text(R"({"base_dim": 2, "poisson": {"pi": ["x1"]}, "anchor": [[1, 0], [0, 1]]})"),
                  SchemaError);
  CHECK_THROWS_AS(load_config_text(R"({"base_dim": 0, "rank": 2,
      "structure": [{"alpha": 3, "beta": 1, "coeffs": [0, 1]}]})"),
                  SchemaError);
  CHECK_THROWS_AS(load_config_text(R"({"base_dim": 2, "poisson": {"pi": ["x1", "x2"]}})"), SchemaError);
  CHECK_THROWS_AS(load_config_text(R"({"catalog": "nope"})"), SchemaError);
  CHECK_THROWS_AS(load_config_text(R"({"catalog": "abelian9"})"), SchemaError);

  auto c = load_config_text(R"({"catalog": "so3", "run": {"seed": 5, "samples": 7}, "solver": {"rk_steps": 40}})");
  CHECK(c.entry.name == "so3");
  CHECK(c.run.seed == 5);
  CHECK(c.run.samples == 7);
  CHECK(c.solver.rk_steps == 40);

  auto p = load_config_text(R"({"base_dim": 2, "coords": ["q", "p"], "poisson": {"pi": ["q*p"]}})");
  REQUIRE(p.entry.poisson);
  const double x[] = {2.0, 3.0};
  CHECK(p.entry.poisson->at(1, 0).evaluate(x) == -6.0);
  CHECK(p.entry.algebroid.rank == 2);
}

TEST_CASE("sample configs load and pass the algebraic checks") {
  const char* dir = std::getenv("SPRAYG_CONFIG_DIR");
  REQUIRE(dir != nullptr);
  int seen = 0;
  for (const auto& f : fs::directory_iterator(dir)) {
    if (f.path().extension() != ".json") continue;
    ++seen;
    Run r = run(opts(f.path().string(), "check"));
    INFO(f.path().string() << "\n" << r.text);
    CHECK(r.code == exit_pass);
    CHECK(r.doc.at("pass").get<bool>());
  }
  CHECK(seen >= 3);
}

TEST_CASE("sampler determinism") {
  Box dom{{-1.0, 0.0}, {1.0, 2.0}};
  Sampler s(11, dom, 3, 0.4, 25);
  auto p1 = s.points(Stream::user), p2 = s.points(Stream::user);
  REQUIRE(p1.size() == 25);
  for (std::size_t k = 0; k < p1.size(); ++k) {
    CHECK(p1[k].x == p2[k].x);
    CHECK(p1[k].u == p2[k].u);
    CHECK(norm_inf(p1[k].u) <= 0.4);
    CHECK(p1[k].x[0] >= -0.8);
    CHECK(p1[k].x[0] <= 0.8);
    CHECK(p1[k].x[1] >= 0.2);
    CHECK(p1[k].x[1] <= 1.8);
  }
  CHECK(s.points(Stream::theta)[0].x != p1[0].x);
  CHECK(Sampler(12, dom, 3, 0.4, 25).points(Stream::user)[0].x != p1[0].x);
  for (const auto& a : s.with_scale(0.0).points(Stream::user)) CHECK(norm_inf(a.u) == 0.0);
  CHECK(s.with_count(4).base_points(Stream::jacobi).size() == 4);
}

TEST_CASE("FNV-1a hash") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("exit codes") {
  CHECK(run(opts("", "catalog")).code == exit_pass);
  Run unknown = run(opts("catalog:so3", "frobnicate"));
  CHECK(unknown.code == exit_input_error);
  CHECK(unknown.doc.at("error").at("kind") == "SchemaError");
  Run missing = run(opts("/nonexistent/sprayg.json", "check"));
  CHECK(missing.code == exit_input_error);
  auto bad_json = scratch_file("bad.json", "{\"base_dim\": 1, ");
  CHECK(run(opts(bad_json.string(), "check")).doc.at("error").at("kind") == "SchemaError");
  auto bad_expr = scratch_file("expr.json", R"({"base_dim": 1, "rank": 1, "anchor": [["x1 +"]]})");
  Run se = run(opts(bad_expr.string(), "check"));
  CHECK(se.code == exit_input_error);
  CHECK(se.doc.at("error").at("kind") == "SyntaxError");

  // three brackets that violate the Jacobi identity: verification fails
  auto broken = scratch_file("broken.json", R"({"base_dim": 0, "rank": 3, "structure": [
      {"alpha": 1, "beta": 2, "coeffs": [0, 1, 0]},
      {"alpha": 2, "beta": 3, "coeffs": [1, 0, 0]},
      {"alpha": 1, "beta": 3, "coeffs": [0, 0, 1]}]})");
  Run fails = run(opts(broken.string(), "check"));
  CHECK(fails.code == exit_verification_failed);
  CHECK_FALSE(fails.doc.at("pass").get<bool>());

  // du/dt = u^2 from u = 4 blows up before t = 1
  auto blow = scratch_file("blow.json", R"({"base_dim": 0, "rank": 1,
      "christoffel": [{"alpha": 1, "beta": 1, "coeffs": [1]}], "inputs": {"a": {"u": [4]}}})");
  Run b = run(opts(blow.string(), "flow"));
  CHECK(b.code == exit_numerical_failure);
  CHECK(b.doc.at("error").at("kind") == "Blowup");

  CliOptions neg = opts("catalog:so3", "check");
  neg.samples = 0;
  CHECK(run(neg).code == exit_input_error);
}

TEST_CASE("reports are deterministic and hashed") {
  CliOptions o = opts("catalog:heisenberg3", "multiply");
  Run a = run(o), b = run(o);
  CHECK(a.code == exit_pass);
  CHECK(a.text == b.text);
  CHECK(a.doc.at("tool_version") == kToolVersion);
  CHECK(a.doc.at("entry") == "heisenberg3");
  o.seed = 99;
  Run c = run(o);
  CHECK(c.doc.at("config_hash") != a.doc.at("config_hash"));
  CHECK(c.doc.at("result") != a.doc.at("result"));

  CliOptions v = opts("catalog:abelian3", "verify");
  v.samples = 4;
  Run v1 = run(v), v2 = run(v);
  CHECK(v1.code == exit_pass);
  CHECK(v1.text == v2.text);
}

TEST_CASE("explicit inputs and output files") {
  auto cfg = scratch_file("inputs.json", R"({"catalog": "heisenberg3",
      "inputs": {"a": {"u": [0.3, -0.2, 0.1]}, "b": {"u": [0.1, 0.4, -0.3]}}})");
  Run r = run(opts(cfg.string(), "multiply"));
  REQUIRE(r.code == exit_pass);
  auto u = r.doc.at("result").at("u").get<std::vector<double>>();
  // a + b + [a, b] / 2 with [e1, e2] = e3
  CHECK(std::abs(u[0] - 0.4) <= 1e-12);
  CHECK(std::abs(u[1] - 0.2) <= 1e-12);
  CHECK(std::abs(u[2] - (-0.2 + 0.5 * (0.3 * 0.4 + 0.2 * 0.1))) <= 1e-8);

  auto half = scratch_file("half.json", R"({"catalog": "heisenberg3", "inputs": {"a": {"u": [0.3, -0.2, 0.1]}}})");
  CHECK(run(opts(half.string(), "multiply")).code == exit_input_error);

  CliOptions o = opts("catalog:so3", "check");
  o.samples = 5;
  fs::path json = fs::temp_directory_path() / "sprayg_test_out.json";
  fs::path csv = fs::temp_directory_path() / "sprayg_test_out.csv";
  o.out = json.string();
  o.csv = csv.string();
  std::ostringstream sink;
  CHECK(run_command(o, sink) == exit_pass);
  std::ifstream jf(json);
  Json doc = Json::parse(jf);
  CHECK(doc.at("pass").get<bool>());
  std::ifstream cf(csv);
  std::string header;
  std::getline(cf, header);
  CHECK(header.find("check") != std::string::npos);
}
