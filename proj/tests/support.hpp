#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "nilscope/heisenberg.hpp"
#include "nilscope/nilsequence.hpp"
#include "nilscope/regularity.hpp"

namespace nilscope::testing {

inline GroupElement random_element(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  const double x = u(rng);
  const double y = u(rng);
  return {x, y, u(rng)};
}

inline NilPoint random_point(std::mt19937_64& rng) { return reduce(random_element(rng, 0.0, 1.0)); }

inline GroupElement random_lattice(std::mt19937_64& rng, int bound) {
  std::uniform_int_distribution<int> u(-bound, bound);
  const int a = u(rng);
  const int b = u(rng);
  return {double(a), double(b), double(u(rng))};
}

/// max coordinate difference; 0 for equal elements
inline double sup_diff(const GroupElement& a, const GroupElement& b) {
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

/// Coordinatewise distance on the unit cube modulo 1, so that 0.999999 and
/// 0 compare as close.
inline double wrapped_diff(const NilPoint& p, const NilPoint& q) {
  return std::max({circle_dist(p.x() - q.x()), circle_dist(p.y() - q.y()), circle_dist(p.z() - q.z())});
}

inline SequenceSample uniform_sequence(std::uint64_t seed, std::int64_t N) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SequenceSample s;
  s.first_index = -N;
  s.values.resize(static_cast<std::size_t>(2 * N + 1));
  for (auto& v : s.values) v = {u(rng), 0.0};
  s.origin = "uniform";
  return s;
}

inline SequenceSample constant_sequence(Complex c, std::int64_t N) {
  SequenceSample s;
  s.first_index = -N;
  s.values.assign(static_cast<std::size_t>(2 * N + 1), c);
  s.origin = "constant";
  return s;
}

// Piecewise-constant sequence on a small alphabet: long runs make the
// hypothesis hold often enough for violations to appear at N = 200.
inline SequenceSample blocky_sequence(std::mt19937_64& rng, std::int64_t half) {
  std::uniform_int_distribution<int> len(1, 6), sym(0, 3);
  SequenceSample s;
  s.first_index = -half;
  while (static_cast<std::int64_t>(s.values.size()) < 2 * half + 1) {
    const double v = 0.3 * sym(rng);
    for (int i = len(rng); i > 0 && static_cast<std::int64_t>(s.values.size()) < 2 * half + 1; --i) {
      s.values.emplace_back(v, 0.0);
    }
  }
  return s;
}

inline RegularityParams params(int order, double eps, double delta, std::int64_t M, std::int64_t S) {
  RegularityParams p;
  p.order = order;
  p.eps = eps;
  p.delta = delta;
  p.M = M;
  p.shift_max = S;
  return p;
}

}  // namespace nilscope::testing
