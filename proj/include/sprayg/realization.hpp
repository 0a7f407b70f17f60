#pragma once

#include <string>
#include <vector>

#include "sprayg/algebroid.hpp"
#include "sprayg/flow.hpp"
#include "sprayg/report.hpp"
#include "sprayg/sampler.hpp"

namespace sprayg {

inline constexpr double kBaseCompatibilityLimit = 1e-4;

struct ThetaMatrix {
  std::vector<double> x;  // q(a)
  std::vector<double> y;  // tau(a)
  Matrix matrix;
  Eigen::PartialPivLU<Matrix> lu;
  double condition = 1.0;
  double condition_bound = 1e8;
  double base_residual = 0.0;
  FiberElement end;  // phi^1(a)
};

struct ThetaApplyResult {
  std::vector<double> w;
  std::vector<double> y;
  double base_residual = 0.0;
};

namespace detail {

struct ThetaRun {
  Matrix B;  // r x k, columns theta_a(v_j)
  FiberElement end;
  double base_residual = 0.0;
};

// Morphism ODE along the flow: b' = du + C(u, b), integrated jointly with the flow and its variation.
inline ThetaRun integrate_theta(const SprayModel& m, const FiberElement& a, const Matrix& V, int steps,
                                const SolverConfig& cfg) {
  const int n = m.n(), r = m.r(), N = n + r;
  const int k = static_cast<int>(V.cols());
  const int off_b = N + k * N;
  std::vector<double> y(static_cast<std::size_t>(off_b + k * r), 0.0);
  for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = a.x[static_cast<std::size_t>(i)];
  for (int i = 0; i < r; ++i) y[static_cast<std::size_t>(n + i)] = a.u[static_cast<std::size_t>(i)];
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < r; ++i) y[static_cast<std::size_t>(N + j * N + n + i)] = V(i, j);

  Geometry g = m.make_geometry();
  std::vector<double> J(static_cast<std::size_t>(N * N)), A(static_cast<std::size_t>(r * r));
  const bool trivial_flow = (n == 0 && m.spray_is_zero());
  unsigned need = SprayModel::structure;
  if (!trivial_flow) need |= SprayModel::all;

  auto rhs = [&](double, const double* s, double* ds, int) {
    m.evaluate(std::span<const double>(s, static_cast<std::size_t>(n)), g, need);
    const double* u = s + n;
    if (trivial_flow) {
      std::fill(ds, ds + off_b, 0.0);
    } else {
      spray_vector(g, n, r, u, ds);
      spray_jacobian_into(g, n, r, u, J.data());
      for (int j = 0; j < k; ++j) {
        const double* d = s + N + j * N;
        double* out = ds + N + j * N;
        for (int i = 0; i < N; ++i) {
          const double* row = &J[static_cast<std::size_t>(i * N)];
          double acc = 0.0;
          for (int l = 0; l < N; ++l) acc += row[l] * d[l];
          out[i] = acc;
        }
      }
    }
    // A_u[c][d] = C^c_{a d} u^a
    for (int c = 0; c < r; ++c)
      for (int d = 0; d < r; ++d) {
        double acc = 0.0;
        for (int aa = 0; aa < r; ++aa) acc += g.c[static_cast<std::size_t>((c * r + aa) * r + d)] * u[aa];
        A[static_cast<std::size_t>(c * r + d)] = acc;
      }
    for (int j = 0; j < k; ++j) {
      const double* du = s + N + j * N + n;
      const double* b = s + off_b + j * r;
      double* out = ds + off_b + j * r;
      for (int c = 0; c < r; ++c) {
        double acc = du[c];
        for (int d = 0; d < r; ++d) acc += A[static_cast<std::size_t>(c * r + d)] * b[d];
        out[c] = acc;
      }
    }
  };

  double base_res = 0.0;
  Geometry gb = m.make_geometry();
  auto after = [&](std::size_t s, const std::vector<double>& st) {
    if (s > 0) guard_state(m, cfg, st.data(), 0.0);
    if (n == 0) return;
    m.evaluate(std::span<const double>(st.data(), static_cast<std::size_t>(n)), gb, SprayModel::anchor);
    for (int j = 0; j < k; ++j) {
      const double* dx = st.data() + N + j * N;
      const double* b = st.data() + off_b + j * r;
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int c = 0; c < r; ++c) acc += gb.rho[static_cast<std::size_t>(i * r + c)] * b[c];
        base_res = std::max(base_res, std::abs(dx[i] - acc));
      }
    }
  };

  auto grid = step_grid(1.0, steps, {});
  rk4_run(grid, y, rhs, after);

  ThetaRun out;
  out.B.resize(r, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < r; ++i) out.B(i, j) = y[static_cast<std::size_t>(off_b + j * r + i)];
  out.end = split_point(std::span<const double>(y.data(), static_cast<std::size_t>(N)), static_cast<std::size_t>(n));
  out.base_residual = base_res;
  return out;
}

inline void require_base_compatible(double residual) {
  if (residual > kBaseCompatibilityLimit)
    throw ConsistencyError("base-compatibility residual " + std::to_string(residual) + " exceeds limit");
}

}  // namespace detail

inline ThetaApplyResult theta_apply(const SprayModel& m, const FiberElement& a, std::span<const double> v,
                                    const SolverConfig& cfg, int steps = 0) {
  Matrix V = to_eigen(v);
  auto run = detail::integrate_theta(m, a, V, steps > 0 ? steps : cfg.rk_steps, cfg);
  detail::require_base_compatible(run.base_residual);
  return {to_std(run.B.col(0)), run.end.x, run.base_residual};
}

inline ThetaMatrix theta_matrix(const SprayModel& m, const FiberElement& a, const SolverConfig& cfg, int steps = 0) {
  const int r = m.r();
  auto run = detail::integrate_theta(m, a, Matrix::Identity(r, r), steps > 0 ? steps : cfg.rk_steps, cfg);
  detail::require_base_compatible(run.base_residual);
  ThetaMatrix th;
  th.x = a.x;
  th.y = run.end.x;
  th.matrix = std::move(run.B);
  th.end = std::move(run.end);
  th.base_residual = run.base_residual;
  th.condition_bound = cfg.condition_bound;
  th.lu.compute(th.matrix);
  double rc = r == 0 ? 1.0 : th.lu.rcond();
  th.condition = rc > 0 ? 1.0 / rc : INFINITY;
  if (!(th.condition <= cfg.condition_bound))
    throw IllConditioned("theta matrix condition estimate " + std::to_string(th.condition) + " exceeds bound");
  return th;
}

inline std::vector<double> theta_inverse_apply(const ThetaMatrix& th, std::span<const double> w) {
  if (!(th.condition <= th.condition_bound))
    throw IllConditioned("theta matrix condition estimate " + std::to_string(th.condition) + " exceeds bound");
  Vector v = th.lu.solve(to_eigen(w));
  return to_std(v);
}

inline VerificationReport check_theta_identities(const SprayModel& m, const Sampler& sampler,
                                                 const SolverConfig& cfg) {
  ResidualAccumulator euler("theta_euler_identity", 1e-7), compat("theta_base_compatibility", 1e-6),
      zero("theta_zero_section", 1e-12);
  const double ts[] = {0.25, 0.5, 1.0};
  for (const FiberElement& a : sampler.points(Stream::theta)) {
    FlowResult fr = flow_spray(m, a, 1.0, cfg, ts);
    fr.value();
    double worst = 0.0, base = 0.0;
    for (int k = 0; k < 3; ++k) {
      FiberElement ta = scaled(a, ts[k]);
      auto th = theta_apply(m, ta, a.u, cfg);
      worst = std::max(worst, dist_inf(th.w, fr.samples[static_cast<std::size_t>(k)].state.u));
      base = std::max(base, th.base_residual);
    }
    euler.add(worst);
    compat.add(base);
    FiberElement z{a.x, std::vector<double>(a.u.size(), 0.0)};
    auto th0 = theta_matrix(m, z, cfg);
    zero.add((th0.matrix - Matrix::Identity(m.r(), m.r())).cwiseAbs().maxCoeff());
  }
  VerificationReport rep;
  rep.add(euler);
  rep.add(compat);
  rep.add(zero);
  return rep;
}

}  // namespace sprayg
