#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "sprayg/algebroid.hpp"
#include "sprayg/errors.hpp"
#include "sprayg/report.hpp"
#include "sprayg/sampler.hpp"
#include "sprayg/types.hpp"

namespace sprayg {

struct SolverConfig {
  int rk_steps = 64;
  int inner_rk_steps = 32;
  int quad_nodes = 16;
  double fd_step = 1e-5;
  double compose_tol = 1e-9;
  double condition_bound = 1e8;
  double blowup_norm = 1e6;

  void validate() const {
    if (rk_steps <= 0 || inner_rk_steps <= 0 || quad_nodes <= 0 || quad_nodes > 64 || !(fd_step > 0) ||
        !(compose_tol > 0) || !(condition_bound > 0) || !(blowup_norm > 0))
      throw SchemaError("solver settings must be positive (quad_nodes at most 64)");
  }
};

enum class FlowStatus { ok, blowup, left_domain };

inline const char* to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::ok: return "ok";
    case FlowStatus::blowup: return "blowup";
    default: return "left_domain";
  }
}

struct FlowSample {
  double t = 0.0;
  FiberElement state;
  std::vector<TangentAtA> tangents;
};

struct FlowResult {
  FiberElement final;
  std::vector<FlowSample> samples;
  FlowStatus status = FlowStatus::ok;
  std::string message;

  const FlowResult& value() const {
    if (status == FlowStatus::blowup) throw Blowup(message);
    if (status == FlowStatus::left_domain) throw LeftDomain(message);
    return *this;
  }
};

struct GridNode {
  double t = 0.0;
  std::vector<int> samples;
};

// Uniform RK4 grid on [0, t_end] with every sample time inserted as a node.
inline std::vector<GridNode> step_grid(double t_end, int steps, std::span<const double> sample_times) {
  std::vector<GridNode> grid;
  grid.reserve(static_cast<std::size_t>(steps) + sample_times.size() + 1);
  for (int k = 0; k <= steps; ++k) grid.push_back({t_end * k / steps, {}});
  const double sign = t_end < 0 ? -1.0 : 1.0;
  const double eps = 1e-13 * std::max(1.0, std::abs(t_end));
  for (std::size_t s = 0; s < sample_times.size(); ++s) {
    const double ts = sample_times[s];
    if (sign * ts < -eps || sign * (ts - t_end) > eps)
      throw std::invalid_argument("sample time outside the integration interval");
    auto it = std::lower_bound(grid.begin(), grid.end(), ts,
                               [&](const GridNode& g, double v) { return sign * g.t < sign * v - eps; });
    if (it != grid.end() && std::abs(it->t - ts) <= eps) {
      it->samples.push_back(static_cast<int>(s));
    } else {
      it = grid.insert(it, GridNode{ts, {}});
      it->samples.push_back(static_cast<int>(s));
    }
  }
  return grid;
}

// Classical RK4 over the grid. rhs(t, y, dy, stage); after_step(node_index, y) may throw to abort.
template <class Rhs, class AfterStep>
void rk4_run(const std::vector<GridNode>& grid, std::vector<double>& y, Rhs&& rhs, AfterStep&& after_step) {
  const std::size_t N = y.size();
  std::vector<double> k1(N), k2(N), k3(N), k4(N), tmp(N);
  after_step(std::size_t{0}, y);
  for (std::size_t s = 1; s < grid.size(); ++s) {
    const double t0 = grid[s - 1].t, h = grid[s].t - t0;
    rhs(t0, y.data(), k1.data(), 0);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(t0 + 0.5 * h, tmp.data(), k2.data(), 1);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(t0 + 0.5 * h, tmp.data(), k3.data(), 2);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(t0 + h, tmp.data(), k4.data(), 3);
    for (std::size_t i = 0; i < N; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    after_step(s, y);
  }
}

namespace detail {

// State z = (x, u) followed by m tangent blocks, each of length n + r.
struct FlowSystem {
  const SprayModel& model;
  int tangents;
  Geometry g;
  std::vector<double> J;

  FlowSystem(const SprayModel& m, int k)
      : model(m), tangents(k), g(m.make_geometry()), J(static_cast<std::size_t>(m.dim() * m.dim())) {}

  void operator()(double, const double* y, double* dy, int) {
    const int n = model.n(), r = model.r(), N = n + r;
    unsigned need = SprayModel::anchor | SprayModel::spray;
    if (tangents > 0) need |= SprayModel::anchor_deriv | SprayModel::spray_deriv;
    model.evaluate(std::span<const double>(y, static_cast<std::size_t>(n)), g, need);
    spray_vector(g, n, r, y + n, dy);
    if (tangents == 0) return;
    spray_jacobian_into(g, n, r, y + n, J.data());
    for (int k = 0; k < tangents; ++k) {
      const double* d = y + N * (k + 1);
      double* out = dy + N * (k + 1);
      for (int i = 0; i < N; ++i) {
        double s = 0.0;
        const double* row = &J[static_cast<std::size_t>(i * N)];
        for (int j = 0; j < N; ++j) s += row[j] * d[j];
        out[i] = s;
      }
    }
  }
};

inline void guard_state(const SprayModel& m, const SolverConfig& cfg, const double* y, double t) {
  const std::size_t N = static_cast<std::size_t>(m.dim());
  double nrm = norm_inf(std::span<const double>(y, N));
  if (!(nrm <= cfg.blowup_norm))
    throw Blowup("state norm " + std::to_string(nrm) + " exceeds blowup bound at t=" + std::to_string(t));
  if (!m.domain().contains(std::span<const double>(y, static_cast<std::size_t>(m.n()))))
    throw LeftDomain("base point left the domain box at t=" + std::to_string(t));
}

inline FlowResult run_flow(const SprayModel& m, const FiberElement& a, std::span<const TangentAtA> tangents,
                           double t_end, const SolverConfig& cfg, std::span<const double> sample_times) {
  const int n = m.n(), N = m.dim();
  if (static_cast<int>(a.x.size()) != n || static_cast<int>(a.u.size()) != m.r())
    throw SchemaError("fiber element has wrong dimensions");
  const int k = static_cast<int>(tangents.size());
  std::vector<double> y = flatten(a);
  for (const auto& t : tangents) {
    auto f = flatten(t);
    if (static_cast<int>(f.size()) != N) throw SchemaError("tangent vector has wrong dimensions");
    y.insert(y.end(), f.begin(), f.end());
  }
  FlowResult res;
  res.samples.resize(sample_times.size());
  auto grid = step_grid(t_end, cfg.rk_steps, sample_times);
  FlowSystem sys(m, k);
  try {
    guard_state(m, cfg, y.data(), 0.0);
    rk4_run(grid, y, sys, [&](std::size_t s, const std::vector<double>& state) {
      if (s > 0) guard_state(m, cfg, state.data(), grid[s].t);
      for (int idx : grid[s].samples) {
        FlowSample& fs = res.samples[static_cast<std::size_t>(idx)];
        fs.t = grid[s].t;
        fs.state = split_point(std::span<const double>(state.data(), static_cast<std::size_t>(N)),
                               static_cast<std::size_t>(n));
        for (int j = 0; j < k; ++j)
          fs.tangents.push_back(split_tangent(
              std::span<const double>(state.data() + N * (j + 1), static_cast<std::size_t>(N)),
              static_cast<std::size_t>(n)));
      }
    });
  } catch (const Blowup& e) {
    res.status = FlowStatus::blowup;
    res.message = e.what();
  } catch (const LeftDomain& e) {
    res.status = FlowStatus::left_domain;
    res.message = e.what();
  }
  res.final = split_point(std::span<const double>(y.data(), static_cast<std::size_t>(N)),
                          static_cast<std::size_t>(n));
  return res;
}

}  // namespace detail

inline FlowResult flow_spray(const SprayModel& m, const FiberElement& a, double t_end, const SolverConfig& cfg,
                             std::span<const double> sample_times = {}) {
  return detail::run_flow(m, a, {}, t_end, cfg, sample_times);
}

inline FlowResult variational_flow(const SprayModel& m, const FiberElement& a,
                                   std::span<const TangentAtA> initial_tangents, double t_end,
                                   const SolverConfig& cfg, std::span<const double> sample_times) {
  return detail::run_flow(m, a, initial_tangents, t_end, cfg, sample_times);
}

// Final tangents of the variational flow at t_end, as columns of a matrix.
inline Matrix flow_differential(const SprayModel& m, const FiberElement& a, std::span<const TangentAtA> tangents,
                                double t_end, const SolverConfig& cfg, FiberElement* end_state = nullptr) {
  const double t[] = {t_end};
  FlowResult fr = variational_flow(m, a, tangents, t_end, cfg, t);
  fr.value();
  const int N = m.dim();
  Matrix D(N, static_cast<Eigen::Index>(tangents.size()));
  for (std::size_t j = 0; j < tangents.size(); ++j) {
    auto v = flatten(fr.samples[0].tangents[j]);
    for (int i = 0; i < N; ++i) D(i, static_cast<Eigen::Index>(j)) = v[static_cast<std::size_t>(i)];
  }
  if (end_state) *end_state = fr.final;
  return D;
}

inline std::vector<TangentAtA> coordinate_tangents(int n, int r) {
  std::vector<TangentAtA> out;
  for (int k = 0; k < n + r; ++k) {
    TangentAtA t{std::vector<double>(static_cast<std::size_t>(n), 0.0),
                 std::vector<double>(static_cast<std::size_t>(r), 0.0)};
    if (k < n)
      t.dx[static_cast<std::size_t>(k)] = 1.0;
    else
      t.du[static_cast<std::size_t>(k - n)] = 1.0;
    out.push_back(std::move(t));
  }
  return out;
}

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule mapped to [0, 1], nodes ascending.
inline Quadrature gauss_legendre(int count) {
  if (count < 1 || count > 64) throw std::invalid_argument("quadrature node count must be in [1, 64]");
  Quadrature q;
  q.nodes.resize(static_cast<std::size_t>(count));
  q.weights.resize(static_cast<std::size_t>(count));
  const int m = (count + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= count; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = count * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) {
        // one more pass to refresh the derivative at the converged root
        p0 = 1.0;
        p1 = 0.0;
        for (int k = 1; k <= count; ++k) {
          double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = count * (z * p0 - p1) / (z * z - 1.0);
        break;
      }
    }
    double w = 2.0 / ((1.0 - z * z) * dp * dp);
    // z descends from near 1; store mirrored pairs ascending on [0,1]
    q.nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - z);
    q.nodes[static_cast<std::size_t>(count - 1 - i)] = 0.5 * (1.0 + z);
    q.weights[static_cast<std::size_t>(i)] = 0.5 * w;
    q.weights[static_cast<std::size_t>(count - 1 - i)] = 0.5 * w;
  }
  if (count % 2 == 1) q.nodes[static_cast<std::size_t>(count / 2)] = 0.5;
  return q;
}

// Homogeneity phi^1(s a) = s phi^s(a) and the A-path condition x' = rho(x) u along sampled trajectories.
inline VerificationReport check_flow_properties(const SprayModel& m, const Sampler& sampler, const SolverConfig& cfg) {
  ResidualAccumulator homog("flow_homogeneity", 1e-8), apath("flow_a_path", 1e-4);
  Rng g = sampler.rng(Stream::homogeneity);
  const double h = 1e-4;
  const double times[] = {0.5 - h, 0.5, 0.5 + h};
  for (int k = 0; k < sampler.count(); ++k) {
    FiberElement a = sampler.point(g);
    for (double s : {0.5, -1.0, 2.0}) {
      FlowResult lhs = flow_spray(m, scaled(a, s), 1.0, cfg);
      FlowResult rhs = flow_spray(m, a, s, cfg);
      // both sides must exist for the identity to say anything
      if (lhs.status != FlowStatus::ok || rhs.status != FlowStatus::ok) continue;
      homog.add(dist_inf(lhs.final, scaled(rhs.final, s)));
    }
    FlowResult fr = flow_spray(m, a, 1.0, cfg, times);
    if (fr.status != FlowStatus::ok) continue;
    TangentAtA v = spray_field(m, fr.samples[1].state);
    double worst = 0.0;
    for (std::size_t i = 0; i < v.dx.size(); ++i) {
      double d = (fr.samples[2].state.x[i] - fr.samples[0].state.x[i]) / (2.0 * h);
      worst = std::max(worst, std::abs(d - v.dx[i]));
    }
    apath.add(worst);
  }
  VerificationReport rep;
  rep.add(homog);
  rep.add(apath);
  return rep;
}

}  // namespace sprayg
