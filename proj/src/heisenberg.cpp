#include "nilscope/heisenberg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace nilscope {

namespace {

struct Split {
  double shift;  // integer-valued
  double frac;   // in [0, 1)
};

// v + shift == frac with frac in [0, 1).
Split split_floor(double v) {
  double shift = -std::floor(v);
  double frac = v + shift;
  if (frac >= 1.0) {
    // v was a tiny negative number that rounded up to 1.0.
    frac = 0.0;
    shift -= 1.0;
  }
  return {shift, frac};
}

bool in_unit(double v) { return v >= 0.0 && v < 1.0; }

}  // namespace

NilPoint NilPoint::canonical(double x, double y, double z) {
  if (!in_unit(x) || !in_unit(y) || !in_unit(z)) {
    throw std::domain_error("NilPoint coordinates must lie in [0,1): (" + std::to_string(x) +
                            ", " + std::to_string(y) + ", " + std::to_string(z) + ")");
  }
  return NilPoint(x, y, z);
}

GroupElement mul(const GroupElement& a, const GroupElement& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z + a.x * b.y};
}

GroupElement inv(const GroupElement& a) { return {-a.x, -a.y, -a.z + a.x * a.y}; }

GroupElement commutator(const GroupElement& a, const GroupElement& b) {
  return {0.0, 0.0, a.x * b.y - a.y * b.x};
}

NilPoint reduce(const GroupElement& g) {
  const Split sx = split_floor(g.x);
  const Split sy = split_floor(g.y);
  // g . (a, b, c) = (x + a, y + b, z + c + x b)
  const Split sz = split_floor(g.z + g.x * sy.shift);
  return NilPoint(sx.frac, sy.frac, sz.frac);
}

double sym_norm(const GroupElement& g) {
  const double zc = g.z - 0.5 * g.x * g.y;
  return std::max({std::abs(g.x), std::abs(g.y), std::abs(zc)});
}

double circle_dist(double t) { return std::abs(t - std::nearbyint(t)); }

double dist(const NilPoint& p, const NilPoint& q) {
  const GroupElement gp = lift(p);
  const GroupElement gq = lift(q);
  double best = std::numeric_limits<double>::infinity();
  for (int a = -1; a <= 1; ++a) {
    const double hx = gp.x - gq.x - a;
    if (std::abs(hx) >= best) continue;
    for (int b = -1; b <= 1; ++b) {
      const double hy = gp.y - gq.y - b;
      if (std::abs(hy) >= best) continue;
      // g_p (g_q (a, b, 0))^-1 = (hx, hy, wz), expanded so that p == q gives exactly 0
      const double wz = (gp.z - gq.z - gq.x * b) - (gq.y + b) * hx;
      // right-multiplying by a central lattice element only shifts z by an integer
      const double zc = wz - 0.5 * hx * hy;
      const double n = std::max({std::abs(hx), std::abs(hy), circle_dist(zc)});
      best = std::min(best, n);
    }
  }
  return best;
}

}  // namespace nilscope
