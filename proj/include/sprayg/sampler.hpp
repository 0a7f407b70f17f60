#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sprayg/types.hpp"

namespace sprayg {

// Stream ids keep each check's draws independent of the others.
enum class Stream : std::uint64_t {
  jacobi = 1,
  theta,
  homogeneity,
  axioms,
  associativity,
  morphism,
  cocycle,
  representation,
  exponential,
  forms,
  tangents,
  poisson,
  contact,
  vanest,
  bch,
  pn,
  inputs,
  user = 1000
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// mt19937_64 seeded from splitmix64(seed, stream); doubles from the top 53 bits.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (stream * 0xD1B54A32D192ED03ull);
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s)),
                      static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s))};
    eng_.seed(seq);
  }

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in the closed ball of the given radius, by rejection from the cube.
  std::vector<double> ball(std::size_t dim, double radius) {
    std::vector<double> v(dim, 0.0);
    if (dim == 0 || radius == 0.0) return v;
    for (;;) {
      double n2 = 0.0;
      for (auto& c : v) {
        c = uniform(-1.0, 1.0);
        n2 += c * c;
      }
      if (n2 <= 1.0) break;
    }
    for (auto& c : v) c *= radius;
    return v;
  }

  std::vector<double> cube(std::size_t dim, double half) {
    std::vector<double> v(dim);
    for (auto& c : v) c = uniform(-half, half);
    return v;
  }

 private:
  std::mt19937_64 eng_;
};

class Sampler {
 public:
  Sampler(std::uint64_t seed, Box domain, int rank, double scale, int count)
      : seed_(seed), domain_(std::move(domain)), rank_(rank), scale_(scale), count_(count) {}

  std::uint64_t seed() const { return seed_; }
  double scale() const { return scale_; }
  int count() const { return count_; }
  int rank() const { return rank_; }
  const Box& domain() const { return domain_; }

  Sampler with_count(int count) const { return Sampler(seed_, domain_, rank_, scale_, count); }
  Sampler with_scale(double scale) const { return Sampler(seed_, domain_, rank_, scale, count_); }

  Rng rng(Stream s) const { return Rng(seed_, static_cast<std::uint64_t>(s)); }

  std::vector<double> base_point(Rng& g) const {
    std::size_t n = domain_.min.size();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.5 * (domain_.min[i] + domain_.max[i]);
      double h = 0.5 * (domain_.max[i] - domain_.min[i]) * 0.8;
      x[i] = g.uniform(c - h, c + h);
    }
    return x;
  }

  std::vector<double> fiber(Rng& g) const { return g.ball(static_cast<std::size_t>(rank_), scale_); }

  FiberElement point(Rng& g) const {
    FiberElement a;
    a.x = base_point(g);
    a.u = fiber(g);
    return a;
  }

  TangentAtA tangent(Rng& g) const {
    TangentAtA t;
    t.dx = g.cube(domain_.min.size(), 1.0);
    t.du = g.cube(static_cast<std::size_t>(rank_), 1.0);
    return t;
  }

  std::vector<std::vector<double>> base_points(Stream s) const {
    Rng g = rng(s);
    std::vector<std::vector<double>> out;
    for (int k = 0; k < count_; ++k) out.push_back(base_point(g));
    return out;
  }

  std::vector<FiberElement> points(Stream s) const {
    Rng g = rng(s);
    std::vector<FiberElement> out;
    for (int k = 0; k < count_; ++k) out.push_back(point(g));
    return out;
  }

 private:
  std::uint64_t seed_;
  Box domain_;
  int rank_;
  double scale_;
  int count_;
};

}  // namespace sprayg
