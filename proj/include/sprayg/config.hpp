#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sprayg/catalog.hpp"

namespace sprayg {

using Json = nlohmann::ordered_json;

// Everything the CLI needs from one config document. Index fields in JSON are 1-based.
struct RunSettings {
  std::uint64_t seed = 42;
  double scale = 0.2;
  int samples = 100;
};

struct LoadedConfig {
  CatalogEntry entry;
  SolverConfig solver;
  RunSettings run;
  Json inputs;  // optional explicit arguments for single evaluations
};

namespace config_detail {

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline int to_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw SchemaError(where + ": expected an integer");
  return j.get<int>();
}

inline double to_double(const Json& j, const std::string& where) {
  if (!j.is_number()) throw SchemaError(where + ": expected a number");
  return j.get<double>();
}

inline Expression to_expr(const Json& j, const NameList& names, const std::string& where) {
  if (j.is_number()) return Expression::constant(j.get<double>());
  if (!j.is_string()) throw SchemaError(where + ": expected an expression string");
  return parse_expression(j.get<std::string>(), names);
}

inline const Json& array_of(const Json& j, std::size_t size, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + ": expected an array");
  if (j.size() != size)
    throw SchemaError(where + ": expected " + std::to_string(size) + " entries, got " + std::to_string(j.size()));
  return j;
}

inline std::vector<Expression> expr_list(const Json& j, std::size_t size, const NameList& names,
                                         const std::string& where) {
  array_of(j, size, where);
  std::vector<Expression> out;
  for (std::size_t i = 0; i < size; ++i) out.push_back(to_expr(j[i], names, where + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<double> double_list(const Json& j, std::size_t size, const std::string& where) {
  array_of(j, size, where);
  std::vector<double> out;
  for (std::size_t i = 0; i < size; ++i) out.push_back(to_double(j[i], where));
  return out;
}

inline int index1(const Json& j, int upper, const std::string& where) {
  int v = to_int(j, where);
  if (v < 1 || v > upper)
    throw SchemaError(where + ": index " + std::to_string(v) + " outside 1.." + std::to_string(upper));
  return v - 1;
}

inline std::vector<std::string> coord_names(const Json& doc, int n) {
  std::vector<std::string> names;
  if (doc.contains("coords")) {
    const Json& c = array_of(doc.at("coords"), static_cast<std::size_t>(n), "coords");
    for (const auto& e : c) {
      if (!e.is_string()) throw SchemaError("coords: expected identifier strings");
      names.push_back(e.get<std::string>());
    }
  } else {
    for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i + 1));
  }
  return names;
}

inline Box read_domain(const Json& doc, int n) {
  Box b;
  b.min.assign(static_cast<std::size_t>(n), -1.0);
  b.max.assign(static_cast<std::size_t>(n), 1.0);
  if (!doc.contains("domain")) return b;
  const Json& d = doc.at("domain");
  b.min = double_list(field(d, "min", "domain"), static_cast<std::size_t>(n), "domain.min");
  b.max = double_list(field(d, "max", "domain"), static_cast<std::size_t>(n), "domain.max");
  for (int i = 0; i < n; ++i)
    if (!(b.min[static_cast<std::size_t>(i)] < b.max[static_cast<std::size_t>(i)]))
      throw SchemaError("domain: min must be below max in every coordinate");
  return b;
}

inline PoissonSpec read_poisson(const Json& sec, const std::vector<std::string>& names, const Box& dom,
                                const std::string& where) {
  const int n = static_cast<int>(names.size());
  PoissonSpec p = PoissonSpec::zero(n, names);
  p.domain = dom;
  const Json& pi = array_of(field(sec, "pi", where), static_cast<std::size_t>(pair_count(n)), where + ".pi");
  for (int i = 0, k = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++k)
      p.set(i, j, to_expr(pi[static_cast<std::size_t>(k)], p.coords, where + ".pi"));
  return p;
}

// Entries {alpha, beta, coeffs[r]}; returns (alpha, beta, coeffs) zero-based.
struct PairEntry {
  int a, b;
  std::vector<Expression> coeffs;
};

inline std::vector<PairEntry> pair_entries(const Json& list, int r, const NameList& names, const std::string& where) {
  if (!list.is_array()) throw SchemaError(where + ": expected an array");
  std::vector<PairEntry> out;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string w = where + "[" + std::to_string(k) + "]";
    const Json& e = list[k];
    out.push_back({index1(field(e, "alpha", w), r, w + ".alpha"), index1(field(e, "beta", w), r, w + ".beta"),
                   expr_list(field(e, "coeffs", w), static_cast<std::size_t>(r), names, w + ".coeffs")});
  }
  return out;
}

inline std::size_t choose(int n, int k) { return combinations(n, k).size(); }

// Per-alpha rows of form coefficients in lexicographic multi-index order.
inline void read_form_rows(const Json& rows, int r, int n, int degree, const NameList& names, const std::string& where,
                           const std::function<void(int alpha, int idx, Expression)>& put) {
  const std::size_t width = degree >= 0 && degree <= n ? choose(n, degree) : 0;
  array_of(rows, static_cast<std::size_t>(r), where);
  for (int a = 0; a < r; ++a) {
    auto row = expr_list(rows[static_cast<std::size_t>(a)], width, names, where + "[" + std::to_string(a) + "]");
    for (std::size_t i = 0; i < width; ++i) put(a, static_cast<int>(i), row[i]);
  }
}

inline IMFormSpec read_im_form(const Json& e, const AlgebroidSpec& s, const std::string& where) {
  const int n = s.base_dim, r = s.rank;
  const int k = to_int(field(e, "degree", where), where + ".degree");
  if (k < 1 || k > n + 1) throw SchemaError(where + ".degree: must lie in 1.." + std::to_string(n + 1));
  IMFormSpec im = IMFormSpec::zero(k, n, r);
  read_form_rows(field(e, "l", where), r, n, k - 1, s.coords, where + ".l",
                 [&](int a, int I, Expression x) { im.l[static_cast<std::size_t>(I * r + a)] = std::move(x); });
  if (e.contains("nu") && k <= n)
    read_form_rows(e.at("nu"), r, n, k, s.coords, where + ".nu",
                   [&](int a, int J, Expression x) { im.nu[static_cast<std::size_t>(J * r + a)] = std::move(x); });
  return im;
}

inline RepresentationSpec read_representation(const Json& e, const AlgebroidSpec& s, const std::string& where) {
  const int r = s.rank;
  const int m = to_int(field(e, "rank", where), where + ".rank");
  if (m < 1) throw SchemaError(where + ".rank: must be positive");
  RepresentationSpec rep = RepresentationSpec::trivial(m, r);
  const Json& f = array_of(field(e, "f", where), static_cast<std::size_t>(r), where + ".f");
  for (int a = 0; a < r; ++a) {
    const std::string w = where + ".f[" + std::to_string(a) + "]";
    const Json& mat = array_of(f[static_cast<std::size_t>(a)], static_cast<std::size_t>(m), w);
    for (int i = 0; i < m; ++i) {
      auto row = expr_list(mat[static_cast<std::size_t>(i)], static_cast<std::size_t>(m), s.coords, w);
      for (int j = 0; j < m; ++j) rep.coeff(i, j, a, r) = row[static_cast<std::size_t>(j)];
    }
  }
  return rep;
}

inline SpencerSpec read_spencer(const Json& e, const AlgebroidSpec& s, const std::vector<RepresentationSpec>& reps,
                                const std::string& where) {
  const int n = s.base_dim, r = s.rank;
  const int k = to_int(field(e, "degree", where), where + ".degree");
  if (k < 1 || k > n + 1) throw SchemaError(where + ".degree: must lie in 1.." + std::to_string(n + 1));
  RepresentationSpec rep = RepresentationSpec::trivial(1, r);
  if (e.contains("representation"))
    rep = reps[static_cast<std::size_t>(
        index1(e.at("representation"), static_cast<int>(reps.size()), where + ".representation"))];
  SpencerSpec sp = SpencerSpec::zero(k, n, r, rep);
  const int M = rep.rank;
  const int nI = static_cast<int>(choose(n, k - 1)), nJ = k <= n ? static_cast<int>(choose(n, k)) : 0;
  const Json& l = array_of(field(e, "l", where), static_cast<std::size_t>(M), where + ".l");
  for (int c = 0; c < M; ++c)
    read_form_rows(l[static_cast<std::size_t>(c)], r, n, k - 1, s.coords, where + ".l",
                   [&](int a, int I, Expression x) { sp.l[static_cast<std::size_t>((c * nI + I) * r + a)] = x; });
  if (e.contains("D") && nJ > 0) {
    const Json& D = array_of(e.at("D"), static_cast<std::size_t>(M), where + ".D");
    for (int c = 0; c < M; ++c)
      read_form_rows(D[static_cast<std::size_t>(c)], r, n, k, s.coords, where + ".D",
                     [&](int a, int J, Expression x) { sp.D[static_cast<std::size_t>((c * nJ + J) * r + a)] = x; });
  }
  return sp;
}

inline MorphismSpec read_morphism(const Json& e, const AlgebroidSpec& s, const std::string& where) {
  MorphismSpec m = MorphismSpec::identity(s);
  const int n = s.base_dim, r = s.rank;
  if (e.contains("base_map")) m.base_map = expr_list(e.at("base_map"), static_cast<std::size_t>(n), s.coords, where + ".base_map");
  const Json& B = array_of(field(e, "bundle_map", where), static_cast<std::size_t>(r), where + ".bundle_map");
  for (int b = 0; b < r; ++b) {
    auto row = expr_list(B[static_cast<std::size_t>(b)], static_cast<std::size_t>(r), s.coords, where + ".bundle_map");
    for (int a = 0; a < r; ++a) m.bundle_map[static_cast<std::size_t>(b * r + a)] = row[static_cast<std::size_t>(a)];
  }
  return m;
}

inline Cochain read_cochain(const Json& e, const AlgebroidSpec& s, const std::string& where) {
  const int p = to_int(field(e, "degree", where), where + ".degree");
  const int r = s.rank;
  if (p == 1) return {1, expr_list(field(e, "coeffs", where), static_cast<std::size_t>(r), s.coords, where + ".coeffs")};
  if (p == 2)
    return {2, expr_list(field(e, "coeffs", where), static_cast<std::size_t>(pair_count(r)), s.coords,
                         where + ".coeffs")};
  throw SchemaError(where + ".degree: only 1- and 2-cochains are supported");
}

inline void read_solver(const Json& doc, SolverConfig& cfg) {
  if (!doc.contains("solver")) return;
  const Json& s = doc.at("solver");
  if (!s.is_object()) throw SchemaError("solver: expected an object");
  for (auto it = s.begin(); it != s.end(); ++it) {
    const std::string& k = it.key();
    const std::string w = "solver." + k;
    if (k == "rk_steps") cfg.rk_steps = to_int(*it, w);
    else if (k == "inner_rk_steps") cfg.inner_rk_steps = to_int(*it, w);
    else if (k == "quad_nodes") cfg.quad_nodes = to_int(*it, w);
    else if (k == "fd_step") cfg.fd_step = to_double(*it, w);
    else if (k == "compose_tol") cfg.compose_tol = to_double(*it, w);
    else if (k == "condition_bound") cfg.condition_bound = to_double(*it, w);
    else if (k == "blowup_norm") cfg.blowup_norm = to_double(*it, w);
    else throw SchemaError("solver: unknown setting '" + k + "'");
  }
  cfg.validate();
}

inline void read_run(const Json& doc, RunSettings& run) {
  if (!doc.contains("run")) return;
  const Json& s = doc.at("run");
  if (s.contains("seed")) {
    if (!s.at("seed").is_number_unsigned() && !s.at("seed").is_number_integer())
      throw SchemaError("run.seed: expected an integer");
    run.seed = s.at("seed").get<std::uint64_t>();
  }
  if (s.contains("scale")) run.scale = to_double(s.at("scale"), "run.scale");
  if (s.contains("samples")) run.samples = to_int(s.at("samples"), "run.samples");
}

inline CatalogEntry read_model(const Json& doc) {
  CatalogEntry e;
  e.name = doc.contains("name") && doc.at("name").is_string() ? doc.at("name").get<std::string>() : "config";
  e.description = "loaded from config";

  if (doc.contains("jacobi") || doc.contains("poisson")) {
    const bool jac = doc.contains("jacobi");
    const Json& sec = jac ? doc.at("jacobi") : doc.at("poisson");
    const int n = to_int(field(doc, "base_dim", "config"), "base_dim");
    auto names = coord_names(doc, n);
    Box dom = read_domain(doc, n);
    PoissonSpec p = read_poisson(sec, names, dom, jac ? "jacobi" : "poisson");
    if (jac) {
      JacobiSpec j{p, expr_list(field(sec, "R", "jacobi"), static_cast<std::size_t>(n), p.coords, "jacobi.R")};
      e.algebroid = jacobi_algebroid(j, e.name);
      e.jacobi = j;
      e.spencer.push_back(jacobi_spencer(j));
      e.representations.push_back(jacobi_representation(j));
      e.cocycles.push_back(jacobi_cocycle(j));
    } else {
      e.algebroid = cotangent_algebroid(p, e.name);
      e.poisson = p;
    }
    if (doc.contains("anchor") || doc.contains("structure"))
      throw SchemaError("anchor/structure are derived from the poisson or jacobi section; do not give both");
  } else {
    const int n = to_int(field(doc, "base_dim", "config"), "base_dim");
    const int r = to_int(field(doc, "rank", "config"), "rank");
    if (n < 0 || r < 1) throw SchemaError("base_dim must be >= 0 and rank >= 1");
    e.algebroid = AlgebroidSpec::zero(e.name, n, r, coord_names(doc, n));
    e.algebroid.domain = read_domain(doc, n);
    if (doc.contains("anchor")) {
      const Json& A = array_of(doc.at("anchor"), static_cast<std::size_t>(n), "anchor");
      for (int i = 0; i < n; ++i) {
        auto row = expr_list(A[static_cast<std::size_t>(i)], static_cast<std::size_t>(r), e.algebroid.coords,
                             "anchor[" + std::to_string(i) + "]");
        for (int a = 0; a < r; ++a) e.algebroid.set_rho(i, a, row[static_cast<std::size_t>(a)]);
      }
    } else if (n > 0) {
      throw SchemaError("config: missing field 'anchor'");
    }
    if (doc.contains("structure"))
      for (auto& pe : pair_entries(doc.at("structure"), r, e.algebroid.coords, "structure")) {
        if (pe.a == pe.b) {
          for (int g = 0; g < r; ++g)
            if (!pe.coeffs[static_cast<std::size_t>(g)].is_zero())
              throw SchemaError("structure: C^" + std::to_string(g + 1) + "_{" + std::to_string(pe.a + 1) +
                                std::to_string(pe.a + 1) + "} must vanish (antisymmetry)");
          continue;
        }
        for (int g = 0; g < r; ++g) e.algebroid.set_c(g, pe.a, pe.b, pe.coeffs[static_cast<std::size_t>(g)]);
      }
  }

  const AlgebroidSpec& s = e.algebroid;
  const int r = s.rank;
  e.spray = SpraySpec::zero(r);
  if (doc.contains("christoffel"))
    for (auto& pe : pair_entries(doc.at("christoffel"), r, s.coords, "christoffel"))
      for (int g = 0; g < r; ++g) e.spray.set_gamma(g, pe.a, pe.b, pe.coeffs[static_cast<std::size_t>(g)]);
  if (doc.contains("alt_christoffel")) {
    e.alt_spray = SpraySpec::zero(r);
    for (auto& pe : pair_entries(doc.at("alt_christoffel"), r, s.coords, "alt_christoffel"))
      for (int g = 0; g < r; ++g) e.alt_spray->set_gamma(g, pe.a, pe.b, pe.coeffs[static_cast<std::size_t>(g)]);
  }

  auto each = [&](const char* key, auto&& fn) {
    if (!doc.contains(key)) return;
    const Json& list = doc.at(key);
    if (!list.is_array()) throw SchemaError(std::string(key) + ": expected an array");
    for (std::size_t k = 0; k < list.size(); ++k) fn(list[k], std::string(key) + "[" + std::to_string(k) + "]");
  };
  each("im_forms", [&](const Json& j, const std::string& w) { e.im_forms.push_back(read_im_form(j, s, w)); });
  each("pullback_forms", [&](const Json& j, const std::string& w) {
    const int k = to_int(field(j, "degree", w), w + ".degree");
    if (k < 1 || k > s.base_dim) throw SchemaError(w + ".degree: must lie in 1.." + std::to_string(s.base_dim));
    BaseForm f = BaseForm::zero(s.base_dim, k);
    f.c = expr_list(field(j, "coeffs", w), choose(s.base_dim, k), s.coords, w + ".coeffs");
    e.pullback_forms.push_back(f);
    e.im_forms.push_back(anchor_pullback_im_form(s, f));
  });
  each("cocycles", [&](const Json& j, const std::string& w) {
    e.cocycles.push_back(expr_list(j, static_cast<std::size_t>(r), s.coords, w));
  });
  each("representations",
       [&](const Json& j, const std::string& w) { e.representations.push_back(read_representation(j, s, w)); });
  each("spencer", [&](const Json& j, const std::string& w) {
    e.spencer.push_back(read_spencer(j, s, e.representations, w));
  });
  each("morphisms", [&](const Json& j, const std::string& w) { e.morphisms.push_back(read_morphism(j, s, w)); });
  each("vanest", [&](const Json& j, const std::string& w) { e.vanest_cochains.push_back(read_cochain(j, s, w)); });
  each("closed_im2", [&](const Json& j, const std::string& w) {
    if (!e.poisson) throw SchemaError(w + ": closed IM 2-forms need a poisson section");
    const int n = s.base_dim;
    ClosedIM2Spec l = ClosedIM2Spec::identity(n, 0.0);
    const Json& N = array_of(field(j, "N", w), static_cast<std::size_t>(n), w + ".N");
    for (int i = 0; i < n; ++i) {
      auto row = expr_list(N[static_cast<std::size_t>(i)], static_cast<std::size_t>(n), s.coords, w + ".N");
      for (int a = 0; a < n; ++a) l.N[static_cast<std::size_t>(i * n + a)] = row[static_cast<std::size_t>(a)];
    }
    e.closed_im2.push_back(l);
  });
  return e;
}

}  // namespace config_detail

// Accepts either a full model document or {"catalog": NAME, ...overrides}.
inline LoadedConfig load_config(const Json& doc) {
  if (!doc.is_object()) throw SchemaError("config must be a JSON object");
  LoadedConfig out;
  if (doc.contains("catalog")) {
    if (!doc.at("catalog").is_string()) throw SchemaError("catalog: expected an entry name");
    out.entry = catalog_entry(doc.at("catalog").get<std::string>());
  } else {
    out.entry = config_detail::read_model(doc);
  }
  config_detail::read_solver(doc, out.solver);
  config_detail::read_run(doc, out.run);
  if (doc.contains("inputs")) out.inputs = doc.at("inputs");
  if (out.run.samples < 1) throw SchemaError("run.samples must be positive");
  if (!(out.run.scale >= 0.0)) throw SchemaError("run.scale must be non-negative");
  return out;
}

inline LoadedConfig load_config_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  return load_config(doc);
}

}  // namespace sprayg
