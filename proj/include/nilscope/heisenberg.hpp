#pragma once

// Continuous Heisenberg group in upper-triangular coordinates, its integer
// lattice, and the nilmanifold X = G / Gamma.
//
// Group law: (x, y, z) . (x', y', z') = (x + x', y + y', z + z' + x y').
// Gamma is the set of integer-coordinate elements; the commutator subgroup
// is the center {(0, 0, z)}.

namespace nilscope {

struct GroupElement {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

/// A point of X = G / Gamma, stored as its canonical coset representative
/// with every coordinate in [0, 1). Only `reduce` and `canonical` produce one.
class NilPoint {
 public:
  NilPoint() = default;

  /// Accepts coordinates that are already canonical; throws
  /// std::domain_error otherwise.
  static NilPoint canonical(double x, double y, double z);

  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

  friend bool operator==(const NilPoint&, const NilPoint&) = default;

 private:
  NilPoint(double x, double y, double z) : x_(x), y_(y), z_(z) {}
  friend NilPoint reduce(const GroupElement& g);

  double x_{0.0};
  double y_{0.0};
  double z_{0.0};
};

inline constexpr GroupElement kIdentity{};

GroupElement mul(const GroupElement& a, const GroupElement& b);
GroupElement inv(const GroupElement& a);

/// a b a^-1 b^-1; always central, equal to (0, 0, x_a y_b - y_a x_b).
GroupElement commutator(const GroupElement& a, const GroupElement& b);

/// Canonical representative g . gamma (gamma in Gamma) with coordinates in
/// [0, 1). Half-open convention: a coordinate that rounds to 1.0 is wrapped
/// to 0.0 together with the matching lattice correction.
NilPoint reduce(const GroupElement& g);

/// The canonical representative viewed as a group element.
inline GroupElement lift(const NilPoint& p) { return {p.x(), p.y(), p.z()}; }

/// max(|x|, |y|, |z - xy/2|). Satisfies sym_norm(g) == sym_norm(inv(g)).
double sym_norm(const GroupElement& g);

/// Right-invariant gauge on X:
///   D(p, q) = min over gamma of sym_norm(g_p . (g_q . gamma)^-1).
/// Horizontal lattice shifts range over {-1, 0, 1}^2 (the only ones that can
/// be optimal for canonical representatives) and the central shift is chosen
/// in closed form, so the minimum is exact over all of Gamma. The value lies
/// in [0, 1/2] and dominates the flat sup-distance of the torus projections.
/// Left translation is not an isometry for this gauge.
double dist(const NilPoint& p, const NilPoint& q);

/// Distance to the nearest integer, in [0, 1/2].
double circle_dist(double t);

}  // namespace nilscope
