#include "sprayg/cli.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sprayg/bch.hpp"
#include "sprayg/config.hpp"
#include "sprayg/suite.hpp"

namespace sprayg {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

struct Context {
  LoadedConfig cfg;
  std::string hash;
  std::string command;
};

Json read_document(const std::string& spec) {
  const std::string prefix = "catalog:";
  if (spec.rfind(prefix, 0) == 0) return Json{{"catalog", spec.substr(prefix.size())}};
  std::ifstream in(spec);
  if (!in) throw SchemaError("cannot read config file '" + spec + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
}

std::string settings_key(const LoadedConfig& c) {
  char buf[256];
  const SolverConfig& s = c.solver;
  std::snprintf(buf, sizeof buf, "|seed=%llu|scale=%.17g|samples=%d|rk=%d|inner=%d|quad=%d|fd=%.17g|ct=%.17g|cb=%.17g|bn=%.17g",
                static_cast<unsigned long long>(c.run.seed), c.run.scale, c.run.samples, s.rk_steps,
                s.inner_rk_steps, s.quad_nodes, s.fd_step, s.compose_tol, s.condition_bound, s.blowup_norm);
  return buf;
}

Context load(const CliOptions& o) {
  if (o.config.empty()) throw SchemaError("--config is required");
  Json doc = read_document(o.config);
  Context ctx;
  ctx.cfg = load_config(doc);
  ctx.command = o.command;
  if (o.seed) ctx.cfg.run.seed = *o.seed;
  if (o.scale) ctx.cfg.run.scale = *o.scale;
  if (o.samples) ctx.cfg.run.samples = *o.samples;
  if (o.rk_steps) ctx.cfg.solver.rk_steps = *o.rk_steps;
  if (o.quad_nodes) ctx.cfg.solver.quad_nodes = *o.quad_nodes;
  ctx.cfg.solver.validate();
  if (ctx.cfg.run.samples < 1) throw SchemaError("--samples must be positive");
  if (!(ctx.cfg.run.scale >= 0.0)) throw SchemaError("--scale must be non-negative");
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a(doc.dump() + settings_key(ctx.cfg))));
  ctx.hash = hex;
  return ctx;
}

Sampler make_sampler(const Context& c) {
  const AlgebroidSpec& s = c.cfg.entry.algebroid;
  return Sampler(c.cfg.run.seed, s.domain, s.rank, c.cfg.run.scale, c.cfg.run.samples);
}

Json header(const Context& c) {
  Json j;
  j["tool_version"] = kToolVersion;
  j["config_hash"] = c.hash;
  j["command"] = c.command;
  j["entry"] = c.cfg.entry.name;
  return j;
}

Json to_json(const FiberElement& a) { return Json{{"x", a.x}, {"u", a.u}}; }

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

// Explicit inputs from the config's "inputs" section, else seeded draws.
class Inputs {
 public:
  Inputs(const Context& c, const SprayModel& m)
      : c_(c), m_(m), sampler_(make_sampler(c)), rng_(sampler_.rng(Stream::inputs)) {}

  bool has(const char* key) const { return c_.cfg.inputs.is_object() && c_.cfg.inputs.contains(key); }

  FiberElement element(const char* key) {
    if (!has(key)) return sampler_.point(rng_);
    return parse_element(c_.cfg.inputs.at(key), key);
  }

  std::vector<double> fiber(const char* key) {
    if (!has(key)) return sampler_.fiber(rng_);
    return config_detail::double_list(c_.cfg.inputs.at(key), static_cast<std::size_t>(m_.r()),
                                      std::string("inputs.") + key);
  }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    return config_detail::to_double(c_.cfg.inputs.at(key), std::string("inputs.") + key);
  }

  // b sampled, a re-based at tau(b), unless both are given.
  std::pair<FiberElement, FiberElement> composable(const SolverConfig& cfg) {
    if (has("a") && has("b")) return {element("a"), element("b")};
    if (has("a") || has("b")) throw SchemaError("inputs: give both a and b, or neither");
    return composable_pair(m_, sampler_, rng_, cfg);
  }

  std::vector<TangentAtA> tangents(int k) {
    std::vector<TangentAtA> out;
    if (has("tangents")) {
      const Json& t = c_.cfg.inputs.at("tangents");
      config_detail::array_of(t, static_cast<std::size_t>(k), "inputs.tangents");
      for (const auto& e : t) {
        TangentAtA v;
        v.dx = config_detail::double_list(config_detail::field(e, "dx", "inputs.tangents"),
                                          static_cast<std::size_t>(m_.n()), "inputs.tangents.dx");
        v.du = config_detail::double_list(config_detail::field(e, "du", "inputs.tangents"),
                                          static_cast<std::size_t>(m_.r()), "inputs.tangents.du");
        out.push_back(std::move(v));
      }
      return out;
    }
    for (int i = 0; i < k; ++i) out.push_back(sampler_.tangent(rng_));
    return out;
  }

 private:
  FiberElement parse_element(const Json& j, const std::string& key) const {
    FiberElement a;
    const std::string w = "inputs." + key;
    a.x = m_.n() > 0 ? config_detail::double_list(config_detail::field(j, "x", w), static_cast<std::size_t>(m_.n()),
                                                  w + ".x")
                     : std::vector<double>{};
    a.u = config_detail::double_list(config_detail::field(j, "u", w), static_cast<std::size_t>(m_.r()), w + ".u");
    return a;
  }

  const Context& c_;
  const SprayModel& m_;
  Sampler sampler_;
  Rng rng_;
};

void emit(const CliOptions& o, std::ostream& out, const Json& doc) {
  const std::string text = doc.dump(2) + "\n";
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw SchemaError("cannot write '" + o.out + "'");
  f << text;
}

void emit_csv(const CliOptions& o, const VerificationReport& rep) {
  if (o.csv.empty()) return;
  std::ofstream f(o.csv, std::ios::binary);
  if (!f) throw SchemaError("cannot write '" + o.csv + "'");
  f << rep.to_csv();
}

int report_result(const CliOptions& o, std::ostream& out, const Context& c, const VerificationReport& rep,
                  Json extra = {}) {
  Json doc = header(c);
  doc["checks"] = rep.checks_json();
  doc["pass"] = rep.all_pass();
  if (!extra.is_null())
    for (auto it = extra.begin(); it != extra.end(); ++it) doc[it.key()] = *it;
  emit(o, out, doc);
  emit_csv(o, rep);
  return rep.all_pass() ? exit_pass : exit_verification_failed;
}

int cmd_catalog(const CliOptions& o, std::ostream& out) {
  Json doc;
  doc["tool_version"] = kToolVersion;
  doc["command"] = "catalog";
  Json list = Json::array();
  for (const auto& name : catalog_names()) {
    CatalogEntry e = catalog_entry(name);
    list.push_back({{"name", name},
                    {"description", e.description},
                    {"base_dim", e.algebroid.base_dim},
                    {"rank", e.algebroid.rank}});
  }
  doc["entries"] = list;
  emit(o, out, doc);
  return exit_pass;
}

int cmd_check(const CliOptions& o, std::ostream& out, const Context& c) {
  const CatalogEntry& e = c.cfg.entry;
  Sampler s = make_sampler(c);
  VerificationReport rep;
  rep.append(check_jacobi(e.algebroid, s), "algebroid.");
  if (e.jacobi) {
    rep.append(check_jacobi_structure(*e.jacobi, s), "jacobi.");
    rep.append(check_jet_bracket(*e.jacobi, e.algebroid, s), "jacobi.");
  }
  for (std::size_t i = 0; i < e.im_forms.size(); ++i)
    rep.append(check_im_equations(e.algebroid, e.im_forms[i], s), "im_form" + std::to_string(i + 1) + ".");
  for (std::size_t i = 0; i < e.cocycles.size(); ++i)
    rep.append(check_cocycle(e.algebroid, e.cocycles[i], s), "cocycle" + std::to_string(i + 1) + ".");
  for (std::size_t i = 0; i < e.representations.size(); ++i)
    rep.append(check_representation(e.algebroid, e.representations[i], s),
               "representation" + std::to_string(i + 1) + ".");
  for (std::size_t i = 0; i < e.spencer.size(); ++i)
    rep.append(check_spencer_equations(e.algebroid, e.spencer[i], s), "spencer" + std::to_string(i + 1) + ".");
  for (std::size_t i = 0; i < e.morphisms.size(); ++i)
    rep.append(check_morphism(e.morphisms[i], s), "morphism" + std::to_string(i + 1) + ".");
  return report_result(o, out, c, rep);
}

int cmd_flow(const CliOptions& o, std::ostream& out, const Context& c, const SprayModel& m) {
  Inputs in(c, m);
  FiberElement a = in.element("a");
  const double t = in.number("t", 1.0);
  FlowResult fr = flow_spray(m, a, t, c.cfg.solver);
  fr.value();
  Json doc = header(c);
  doc["input"] = {{"a", to_json(a)}, {"t", t}};
  doc["result"] = to_json(fr.final);
  doc["diagnostics"] = {{"status", to_string(fr.status)}, {"rk_steps", c.cfg.solver.rk_steps}};
  emit(o, out, doc);
  return exit_pass;
}

int cmd_theta(const CliOptions& o, std::ostream& out, const Context& c, const SprayModel& m) {
  Inputs in(c, m);
  FiberElement a = in.element("a");
  std::vector<double> v = in.fiber("v");
  ThetaMatrix th = theta_matrix(m, a, c.cfg.solver);
  ThetaApplyResult w = theta_apply(m, a, v, c.cfg.solver);
  Json doc = header(c);
  doc["input"] = {{"a", to_json(a)}, {"v", v}};
  doc["result"] = {{"w", w.w}, {"target", w.y}, {"matrix", matrix_json(th.matrix)}};
  doc["diagnostics"] = {{"base_residual", w.base_residual}, {"condition", th.condition}};
  emit(o, out, doc);
  return exit_pass;
}

int cmd_multiply(const CliOptions& o, std::ostream& out, const Context& c, const SprayModel& m) {
  Inputs in(c, m);
  auto [a, b] = in.composable(c.cfg.solver);
  FiberElement ab = multiply(m, a, b, c.cfg.solver);
  Json doc = header(c);
  doc["input"] = {{"a", to_json(a)}, {"b", to_json(b)}};
  doc["result"] = to_json(ab);
  Json diag;
  diag["composability_gap"] = m.n() > 0 ? dist_inf(a.x, target(m, b, c.cfg.solver)) : 0.0;
  diag["target_gap"] = m.n() > 0 ? dist_inf(target(m, ab, c.cfg.solver), target(m, a, c.cfg.solver)) : 0.0;
  if (c.cfg.entry.poisson) diag["multiply_fast_gap"] = dist_inf(ab, multiply_fast(m, a, b, c.cfg.solver));
  doc["diagnostics"] = diag;
  emit(o, out, doc);
  return exit_pass;
}

int cmd_divide(const CliOptions& o, std::ostream& out, const Context& c, const SprayModel& m) {
  Inputs in(c, m);
  FiberElement g = in.element("g");
  // h defaults to a fresh fiber over the same base point
  FiberElement h = in.has("h") ? in.element("h") : FiberElement{g.x, in.fiber("h")};
  FiberElement q = division(m, g, h, c.cfg.solver);
  Json doc = header(c);
  doc["input"] = {{"g", to_json(g)}, {"h", to_json(h)}};
  doc["result"] = to_json(q);
  doc["diagnostics"] = {{"reconstruction_gap", dist_inf(detail::multiply_unchecked(m, q, h, c.cfg.solver), g)}};
  emit(o, out, doc);
  return exit_pass;
}

int cmd_exp(const CliOptions& o, std::ostream& out, const Context& c, const SprayModel& m) {
  const CatalogEntry& e = c.cfg.entry;
  if (!e.alt_spray) throw SchemaError("exp needs a second spray (alt_christoffel)");
  SprayModel m2(e.algebroid, *e.alt_spray);
  Inputs in(c, m);
  FiberElement a = in.element("a");
  FiberElement ea = spray_exponential(m, m2, a, c.cfg.solver);
  Json doc = header(c);
  doc["input"] = {{"a", to_json(a)}};
  doc["result"] = to_json(ea);
  doc["diagnostics"] = {{"target_gap", dist_inf(target(m2, ea, c.cfg.solver), target(m, a, c.cfg.solver))}};
  emit(o, out, doc);
  return exit_pass;
}

int cmd_verify(const CliOptions& o, std::ostream& out, const Context& c) {
  return report_result(o, out, c, verify_suite(c.cfg.entry, make_sampler(c), c.cfg.solver));
}

int cmd_bch(const CliOptions& o, std::ostream& out, const Context& c, const SprayModel& m) {
  const CatalogEntry& e = c.cfg.entry;
  if (e.oracle == LieOracle::none || e.oracle == LieOracle::tangent || m.n() != 0)
    throw SchemaError("bch needs a Lie algebra entry with a closed-form group law");
  LieGroupOracle oracle(e.oracle, m.r());
  ConstantBracket br(e.algebroid);
  Sampler s = make_sampler(c);
  Rng g = s.rng(Stream::bch);
  ResidualAccumulator acc("bch_spray_vs_oracle", 1e-6);
  ResidualAccumulator nil("bch_spray_vs_order2", INFINITY);
  Json rows = Json::array();
  for (int k = 0; k < s.count(); ++k) {
    std::vector<double> a = s.fiber(g), b = s.fiber(g);
    BchRow row = bch_row(m, oracle, br, a, b, c.cfg.solver);
    acc.add(row.spray_error);
    Vector z2 = dynkin_truncations(br, to_eigen(a), to_eigen(b))[1];
    const double gap2 = dist_inf(row.spray, to_std(z2));
    nil.add(gap2);
    rows.push_back({{"a", row.a},
                    {"b", row.b},
                    {"spray", row.spray},
                    {"oracle", row.oracle},
                    {"spray_error", row.spray_error},
                    {"dynkin_error", row.dynkin_error},
                    {"spray_minus_order2", gap2}});
  }
  VerificationReport rep;
  rep.add(acc);
  // a + b + [a,b]/2 is exact on two-step nilpotent algebras
  if (e.oracle == LieOracle::heisenberg || e.oracle == LieOracle::abelian) {
    CheckRecord rec = nil.finish();
    rec.tolerance = 1e-8;
    rec.pass = rec.max_residual <= rec.tolerance;
    rep.add(rec);
  }
  return report_result(o, out, c, rep, Json{{"table", rows}});
}

int cmd_integrate_form(const CliOptions& o, std::ostream& out, const Context& c, const SprayModel& m) {
  const CatalogEntry& e = c.cfg.entry;
  Inputs in(c, m);
  std::string kind = "im";
  int index = 0;
  if (in.has("form")) {
    const Json& f = c.cfg.inputs.at("form");
    kind = config_detail::field(f, "kind", "inputs.form").get<std::string>();
    if (f.contains("index")) index = config_detail::to_int(f.at("index"), "inputs.form.index") - 1;
  } else if (e.im_forms.empty()) {
    kind = !e.spencer.empty() ? "spencer" : e.jacobi ? "contact" : "im";
  }
  auto pick = [&](std::size_t size, const char* what) {
    if (index < 0 || static_cast<std::size_t>(index) >= size)
      throw SchemaError(std::string("inputs.form.index: no ") + what + " with that index");
    return static_cast<std::size_t>(index);
  };
  FiberElement a = in.element("a");
  Json value;
  std::vector<TangentAtA> t;
  if (kind == "im") {
    const IMFormSpec& im = e.im_forms[pick(e.im_forms.size(), "IM form")];
    t = in.tangents(im.degree);
    value = integrate_im_form(m, im, a, t, c.cfg.solver);
  } else if (kind == "spencer") {
    const SpencerSpec& sp = e.spencer[pick(e.spencer.size(), "Spencer operator")];
    t = in.tangents(sp.degree);
    value = integrate_spencer(m, sp, a, t, c.cfg.solver);
  } else if (kind == "contact") {
    if (!e.jacobi) throw SchemaError("contact form needs a jacobi section");
    t = in.tangents(1);
    value = jacobi_contact_form(m, *e.jacobi, a, t[0], c.cfg.solver);
  } else if (kind == "omega_L") {
    const ClosedIM2Spec& l = e.closed_im2[pick(e.closed_im2.size(), "closed IM 2-form")];
    t = in.tangents(2);
    value = omega_L_evaluator(m, l, c.cfg.solver)(a, t);
  } else {
    throw SchemaError("inputs.form.kind must be im, spencer, contact or omega_L");
  }
  Json tj = Json::array();
  for (const auto& v : t) tj.push_back({{"dx", v.dx}, {"du", v.du}});
  Json doc = header(c);
  doc["input"] = {{"a", to_json(a)}, {"tangents", tj}, {"form", {{"kind", kind}, {"index", index + 1}}}};
  doc["result"] = value;
  emit(o, out, doc);
  return exit_pass;
}

int cmd_vanest(const CliOptions& o, std::ostream& out, const Context& c, const SprayModel& m) {
  const CatalogEntry& e = c.cfg.entry;
  if (e.vanest_cochains.empty()) throw SchemaError("vanest needs at least one cochain (vanest section)");
  Inputs in(c, m);
  auto [a, b] = in.composable(c.cfg.solver);
  FiberElement ab = multiply(m, a, b, c.cfg.solver);
  Json list = Json::array();
  VerificationReport rep;
  for (std::size_t i = 0; i < e.vanest_cochains.size(); ++i) {
    const Cochain& alpha = e.vanest_cochains[i];
    Json item{{"degree", alpha.degree}};
    if (alpha.degree == 1) {
      const double fa = van_est_integrate(m, alpha, std::span(&a, 1), c.cfg.solver);
      const double fb = van_est_integrate(m, alpha, std::span(&b, 1), c.cfg.solver);
      const double fab = van_est_integrate(m, alpha, std::span(&ab, 1), c.cfg.solver);
      FiberElement pair[2] = {a, b};
      const double psi_d = van_est_integrate(m, chevalley_eilenberg(e.algebroid, alpha), pair, c.cfg.solver);
      const double delta = groupoid_coboundary(fa, fb, fab);
      item["psi"] = {{"a", fa}, {"b", fb}, {"ab", fab}};
      item["psi_of_d_alpha"] = psi_d;
      item["coboundary_of_psi"] = delta;
      ResidualAccumulator acc("vanest" + std::to_string(i + 1) + ".coboundary_identity", 1e-4);
      acc.add(std::abs(psi_d + delta));
      rep.add(acc);
    } else {
      FiberElement pair[2] = {a, b};
      item["psi"] = van_est_integrate(m, alpha, pair, c.cfg.solver);
    }
    list.push_back(item);
  }
  return report_result(o, out, c, rep,
                       Json{{"input", {{"a", to_json(a)}, {"b", to_json(b)}}}, {"cochains", list}});
}

int dispatch(const CliOptions& o, std::ostream& out) {
  if (o.command == "catalog") return cmd_catalog(o, out);
  Context c = load(o);
  if (o.command == "check") return cmd_check(o, out, c);
  if (o.command == "verify") return cmd_verify(o, out, c);
  SprayModel m(c.cfg.entry.algebroid, c.cfg.entry.spray);
  if (o.command == "flow") return cmd_flow(o, out, c, m);
  if (o.command == "theta") return cmd_theta(o, out, c, m);
  if (o.command == "multiply") return cmd_multiply(o, out, c, m);
  if (o.command == "divide") return cmd_divide(o, out, c, m);
  if (o.command == "exp") return cmd_exp(o, out, c, m);
  if (o.command == "bch") return cmd_bch(o, out, c, m);
  if (o.command == "integrate-form") return cmd_integrate_form(o, out, c, m);
  if (o.command == "vanest") return cmd_vanest(o, out, c, m);
  throw SchemaError("unknown command '" + o.command + "'");
}

}  // namespace

int run_command(const CliOptions& options, std::ostream& out) {
  auto fail = [&](const std::string& kind, const std::string& message, int code) {
    Json doc;
    doc["tool_version"] = kToolVersion;
    doc["command"] = options.command;
    doc["error"] = {{"kind", kind}, {"message", message}};
    try {
      emit(options, out, doc);
    } catch (const std::exception&) {
      out << doc.dump(2) << "\n";
    }
    return code;
  };
  try {
    return dispatch(options, out);
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), e.error_class() == ErrorClass::input ? exit_input_error : exit_numerical_failure);
  } catch (const nlohmann::json::exception& e) {
    return fail("SchemaError", e.what(), exit_input_error);
  } catch (const std::invalid_argument& e) {
    return fail("SchemaError", e.what(), exit_input_error);
  }
}

}  // namespace sprayg
