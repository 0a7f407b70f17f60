#pragma once

#include <algorithm>
#include <string>

#include "sprayg/catalog.hpp"

namespace sprayg {

// Integrated counterparts of the infinitesimal checks: the objects built by the
// spray groupoid must respect its multiplication.

inline VerificationReport check_morphism_multiplicative(const MorphismSpec& f, const SprayModel& m1,
                                                        const SprayModel& m2, const Sampler& sampler,
                                                        const SolverConfig& cfg, double tol = 1e-6) {
  ResidualAccumulator acc("morphism_multiplicative", tol);
  Rng g = sampler.rng(Stream::morphism);
  for (int s = 0; s < sampler.count(); ++s) {
    auto [a, b] = composable_pair(m1, sampler, g, cfg);
    FiberElement fab = integrate_morphism(f, m1, m2, multiply(m1, a, b, cfg), cfg);
    FiberElement fa = integrate_morphism(f, m1, m2, a, cfg);
    FiberElement fb = integrate_morphism(f, m1, m2, b, cfg);
    // the images are composable up to integration error, so skip the tolerance check
    acc.add(dist_inf(fab, detail::multiply_unchecked(m2, fa, fb, cfg)));
  }
  VerificationReport rep;
  rep.add(acc);
  return rep;
}

inline VerificationReport check_cocycle_additive(const SprayModel& m, std::span<const Expression> c,
                                                 const Sampler& sampler, const SolverConfig& cfg, double tol = 1e-6) {
  ResidualAccumulator acc("cocycle_additive", tol);
  Rng g = sampler.rng(Stream::cocycle);
  for (int s = 0; s < sampler.count(); ++s) {
    auto [a, b] = composable_pair(m, sampler, g, cfg);
    FiberElement ab = multiply(m, a, b, cfg);
    acc.add(std::abs(integrate_cocycle(m, c, ab, cfg) - integrate_cocycle(m, c, a, cfg) -
                     integrate_cocycle(m, c, b, cfg)));
  }
  VerificationReport rep;
  rep.add(acc);
  return rep;
}

inline VerificationReport check_representation_action(const SprayModel& m, const RepresentationSpec& rep,
                                                      const Sampler& sampler, const SolverConfig& cfg,
                                                      double tol = 1e-6) {
  ResidualAccumulator acc("representation_action", tol);
  Rng g = sampler.rng(Stream::representation);
  for (int s = 0; s < sampler.count(); ++s) {
    auto [a, b] = composable_pair(m, sampler, g, cfg);
    FiberElement ab = multiply(m, a, b, cfg);
    Matrix d = integrate_representation(m, rep, ab, cfg).final -
               integrate_representation(m, rep, a, cfg).final * integrate_representation(m, rep, b, cfg).final;
    acc.add(d.cwiseAbs().maxCoeff());
  }
  VerificationReport out;
  out.add(acc);
  return out;
}

// The exponential between two spray groupoids of the same algebroid is multiplicative.
inline VerificationReport check_exponential(const SprayModel& m1, const SprayModel& m2, const Sampler& sampler,
                                            const SolverConfig& cfg, double tol = 1e-6) {
  ResidualAccumulator acc("exponential_multiplicative", tol), unit("exponential_unit", 1e-12);
  Rng g = sampler.rng(Stream::exponential);
  for (int s = 0; s < sampler.count(); ++s) {
    auto [a, b] = composable_pair(m1, sampler, g, cfg);
    FiberElement e_ab = spray_exponential(m1, m2, multiply(m1, a, b, cfg), cfg);
    FiberElement ea = spray_exponential(m1, m2, a, cfg);
    FiberElement eb = spray_exponential(m1, m2, b, cfg);
    acc.add(dist_inf(e_ab, detail::multiply_unchecked(m2, ea, eb, cfg)));
    unit.add(dist_inf(spray_exponential(m1, m2, zero_at(a.x, m1.r()), cfg), zero_at(a.x, m1.r())));
  }
  VerificationReport rep;
  rep.add(acc);
  rep.add(unit);
  return rep;
}

// Integrated anchor pullback of a base form equals tau^* w - sigma^* w.
inline VerificationReport check_pullback_form(const SprayModel& m, const AlgebroidSpec& s, const BaseForm& w,
                                              const Sampler& sampler, const SolverConfig& cfg, double tol = 1e-6) {
  IMFormSpec im = anchor_pullback_im_form(s, w);
  ResidualAccumulator acc("pullback_difference", tol);
  Rng g = sampler.rng(Stream::tangents);
  for (int k = 0; k < sampler.count(); ++k) {
    FiberElement a = sampler.point(g);
    std::vector<TangentAtA> t;
    std::vector<std::vector<double>> pushed, base;
    for (int i = 0; i < w.degree; ++i) {
      t.push_back(random_tangent(g, m.n(), m.r()));
      pushed.push_back(fd_target_push(m, a, t.back(), cfg));
      base.push_back(t.back().dx);
    }
    double rhs = evaluate_base_form(w, target(m, a, cfg), pushed) - evaluate_base_form(w, a.x, base);
    acc.add(std::abs(integrate_im_form(m, im, a, t, cfg) - rhs));
  }
  VerificationReport rep;
  rep.add(acc);
  return rep;
}

// Spencer data with trivial coefficients integrates exactly like the IM form it came from.
inline VerificationReport check_spencer_trivial(const SprayModel& m, const IMFormSpec& im, const Sampler& sampler,
                                                const SolverConfig& cfg, double tol = 1e-10) {
  SpencerSpec sp = SpencerSpec::from_im(im);
  ResidualAccumulator acc("spencer_trivial_coefficients", tol);
  Rng g = sampler.rng(Stream::tangents);
  for (int k = 0; k < sampler.count(); ++k) {
    FiberElement a = sampler.point(g);
    std::vector<TangentAtA> t;
    for (int i = 0; i < im.degree; ++i) t.push_back(random_tangent(g, m.n(), m.r()));
    acc.add(std::abs(integrate_spencer(m, sp, a, t, cfg)[0] - integrate_im_form(m, im, a, t, cfg)));
  }
  VerificationReport rep;
  rep.add(acc);
  return rep;
}

inline VerificationReport check_fast_multiply(const SprayModel& m, const Sampler& sampler, const SolverConfig& cfg,
                                              double tol = 1e-5) {
  ResidualAccumulator acc("multiply_fast_agreement", tol);
  Rng g = sampler.rng(Stream::poisson);
  for (int s = 0; s < sampler.count(); ++s) {
    auto [a, b] = composable_pair(m, sampler, g, cfg);
    acc.add(dist_inf(multiply(m, a, b, cfg), multiply_fast(m, a, b, cfg)));
  }
  VerificationReport rep;
  rep.add(acc);
  return rep;
}

// Closed-form contact expression against the Spencer integration of the canonical data.
inline VerificationReport check_contact_spencer(const SprayModel& m, const JacobiSpec& j, const Sampler& sampler,
                                                const SolverConfig& cfg, double tol = 1e-6) {
  SpencerSpec sp = jacobi_spencer(j);
  ResidualAccumulator acc("contact_vs_spencer", tol);
  Rng g = sampler.rng(Stream::contact);
  for (int k = 0; k < sampler.count(); ++k) {
    FiberElement a = sampler.point(g);
    TangentAtA t = random_tangent(g, m.n(), m.r());
    acc.add(std::abs(integrate_spencer(m, sp, a, std::span(&t, 1), cfg)[0] - jacobi_contact_form(m, j, a, t, cfg)));
  }
  VerificationReport rep;
  rep.add(acc);
  return rep;
}

// |Psi(d alpha)(g, h) + delta Psi(alpha)(g, h)| over composable pairs.
inline VerificationReport check_van_est(const SprayModel& m, const AlgebroidSpec& s, const Cochain& alpha,
                                        const Sampler& sampler, const SolverConfig& cfg, double tol = 1e-4) {
  ResidualAccumulator acc("van_est_coboundary", tol);
  Cochain dalpha = chevalley_eilenberg(s, alpha);
  Rng g = sampler.rng(Stream::vanest);
  for (int k = 0; k < sampler.count(); ++k) {
    auto [a, b] = composable_pair(m, sampler, g, cfg);
    FiberElement ab = multiply(m, a, b, cfg);
    const double fa = van_est_integrate(m, alpha, std::span(&a, 1), cfg);
    const double fb = van_est_integrate(m, alpha, std::span(&b, 1), cfg);
    const double fab = van_est_integrate(m, alpha, std::span(&ab, 1), cfg);
    FiberElement pair[2] = {a, b};
    acc.add(std::abs(van_est_integrate(m, dalpha, pair, cfg) + groupoid_coboundary(fa, fb, fab)));
  }
  VerificationReport rep;
  rep.add(acc);
  return rep;
}

// Sample counts: the algebraic checks and the groupoid axioms use the requested count;
// the integrated and finite-difference checks are capped.
struct SuiteBudget {
  int heavy = 20;
  int very_heavy = 5;
};

inline VerificationReport verify_suite(const CatalogEntry& e, const Sampler& sampler, const SolverConfig& cfg,
                                       SuiteBudget budget = {}) {
  SprayModel m(e.algebroid, e.spray);
  const int count = sampler.count();
  const Sampler heavy = sampler.with_count(std::min(count, budget.heavy));
  const Sampler very_heavy = sampler.with_count(std::min(count, budget.very_heavy));
  VerificationReport rep;
  auto add = [&](const VerificationReport& r, const std::string& prefix) { rep.append(r, prefix); };

  add(check_jacobi(e.algebroid, sampler), "algebroid.");
  add(check_flow_properties(m, heavy, cfg), "flow.");
  add(check_theta_identities(m, heavy, cfg), "theta.");
  add(verify_axioms(m, sampler, cfg), "groupoid.");
  if (e.alt_spray) {
    SprayModel m2(e.algebroid, *e.alt_spray);
    add(check_exponential(m, m2, heavy, cfg), "groupoid.");
  }
  for (std::size_t i = 0; i < e.morphisms.size(); ++i) {
    const std::string p = "morphism" + std::to_string(i + 1) + ".";
    add(check_morphism(e.morphisms[i], sampler), p);
    SprayModel m2(e.morphisms[i].target, e.spray);
    add(check_morphism_multiplicative(e.morphisms[i], m, m2, heavy, cfg), p);
  }
  for (std::size_t i = 0; i < e.cocycles.size(); ++i) {
    const std::string p = "cocycle" + std::to_string(i + 1) + ".";
    add(check_cocycle(e.algebroid, e.cocycles[i], sampler), p);
    add(check_cocycle_additive(m, e.cocycles[i], heavy, cfg), p);
  }
  for (std::size_t i = 0; i < e.representations.size(); ++i) {
    const std::string p = "representation" + std::to_string(i + 1) + ".";
    add(check_representation(e.algebroid, e.representations[i], sampler), p);
    add(check_representation_action(m, e.representations[i], heavy, cfg), p);
  }
  for (std::size_t i = 0; i < e.im_forms.size(); ++i) {
    const std::string p = "im_form" + std::to_string(i + 1) + ".";
    const IMFormSpec& im = e.im_forms[i];
    add(check_im_equations(e.algebroid, im, sampler), p);
    add(check_multiplicativity(m, im_form_evaluator(m, im, cfg), im.degree, heavy, cfg), p);
    add(check_im_round_trip(m, im, very_heavy, cfg), p);
    add(check_chain_map(m, im, very_heavy, cfg), p);
    add(check_spencer_trivial(m, im, very_heavy, cfg), p);
  }
  for (std::size_t i = 0; i < e.pullback_forms.size(); ++i)
    add(check_pullback_form(m, e.algebroid, e.pullback_forms[i], heavy, cfg),
        "pullback" + std::to_string(i + 1) + ".");
  for (std::size_t i = 0; i < e.spencer.size(); ++i)
    add(check_spencer_equations(e.algebroid, e.spencer[i], sampler), "spencer" + std::to_string(i + 1) + ".");
  if (e.poisson) {
    add(check_realization(*e.poisson, m, very_heavy, cfg), "poisson.");
    add(check_fast_multiply(m, very_heavy, cfg), "poisson.");
    for (std::size_t i = 0; i < e.closed_im2.size(); ++i)
      add(check_pn(*e.poisson, e.closed_im2[i], m, very_heavy, cfg), "pn" + std::to_string(i + 1) + ".");
  }
  if (e.jacobi) {
    add(check_jacobi_structure(*e.jacobi, sampler), "jacobi.");
    add(check_jet_bracket(*e.jacobi, e.algebroid, sampler), "jacobi.");
    add(check_contact(m, *e.jacobi, very_heavy, cfg), "jacobi.");
    add(check_contact_spencer(m, *e.jacobi, heavy, cfg), "jacobi.");
  }
  for (std::size_t i = 0; i < e.vanest_cochains.size(); ++i)
    if (e.vanest_cochains[i].degree == 1)
      add(check_van_est(m, e.algebroid, e.vanest_cochains[i], very_heavy, cfg), "vanest" + std::to_string(i + 1) + ".");
  return rep;
}

}  // namespace sprayg
