#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sprayg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Box {
  std::vector<double> min, max;

  bool contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < x.size() && i < min.size(); ++i)
      if (!(x[i] >= min[i] && x[i] <= max[i])) return false;
    return true;
  }
};

struct FiberElement {
  std::vector<double> x;
  std::vector<double> u;
};

struct TangentAtA {
  std::vector<double> dx;
  std::vector<double> du;
};

inline double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double c : v) m = std::max(m, std::abs(c));
  return m;
}

inline double dist_inf(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double dist_inf(const FiberElement& a, const FiberElement& b) {
  return std::max(dist_inf(a.x, b.x), dist_inf(a.u, b.u));
}

inline std::vector<double> scaled(std::span<const double> v, double s) {
  std::vector<double> out(v.begin(), v.end());
  for (auto& c : out) c *= s;
  return out;
}

inline FiberElement scaled(const FiberElement& a, double s) { return {a.x, scaled(a.u, s)}; }

inline std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vector to_eigen(std::span<const double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

// Flatten (x, u) and (dx, du) into product coordinates.
inline std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline std::vector<double> flatten(const FiberElement& a) { return concat(a.x, a.u); }
inline std::vector<double> flatten(const TangentAtA& t) { return concat(t.dx, t.du); }

inline FiberElement split_point(std::span<const double> z, std::size_t n) {
  return {std::vector<double>(z.begin(), z.begin() + static_cast<long>(n)),
          std::vector<double>(z.begin() + static_cast<long>(n), z.end())};
}

inline TangentAtA split_tangent(std::span<const double> z, std::size_t n) {
  return {std::vector<double>(z.begin(), z.begin() + static_cast<long>(n)),
          std::vector<double>(z.begin() + static_cast<long>(n), z.end())};
}

}  // namespace sprayg
