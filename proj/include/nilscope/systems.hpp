#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "nilscope/heisenberg.hpp"

namespace nilscope {

enum class SystemKind { heisenberg, torus_rotation };

std::string to_string(SystemKind kind);
SystemKind system_kind_from_string(const std::string& name);

inline constexpr int kMaxTorusDims = 2;

/// Point of the torus T^dims, coordinates in [0, 1). Unused trailing
/// coordinates stay 0.
struct TorusPoint {
  std::array<double, kMaxTorusDims> coords{};
  int dims{2};

  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;
};

TorusPoint make_torus_point(std::initializer_list<double> coords);

/// Flat sup-distance on the torus.
double torus_dist(const TorusPoint& a, const TorusPoint& b);

/// An integer relation p*alpha + q*beta = r found by bounded search.
struct IntegerRelation {
  std::int64_t p;
  std::int64_t q;
  std::int64_t r;
};

struct SystemSpec {
  SystemKind kind{SystemKind::heisenberg};
  double alpha{0.0};
  double beta{0.0};
  double gamma0{0.0};
  int dims{2};

  /// alpha = sqrt(2) - 1, beta = sqrt(3) - 1, gamma0 = 0.
  static SystemSpec default_heisenberg();
  static SystemSpec heisenberg(double alpha, double beta, double gamma0 = 0.0);
  static SystemSpec torus_rotation(double alpha, double beta = 0.0, int dims = 2);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// The translation element t = (alpha, beta, gamma0).
  GroupElement translation() const { return {alpha, beta, gamma0}; }
};

/// Searches |p|, |q| <= bound (not both zero) for p*alpha + q*beta within
/// tol of an integer. The default bound makes the product of the
/// two coefficients' ranges 10^6.
std::optional<IntegerRelation> find_integer_relation(double alpha, double beta,
                                                     std::int64_t bound = 1000,
                                                     double tol = 1e-9);

/// True when 1, alpha, beta (or 1, alpha for a circle rotation) satisfy a
/// small integer relation, i.e. the base rotation is not minimal.
bool flag_rationally_dependent(const SystemSpec& spec);

/// t^n in closed form: (n alpha, n beta, n gamma0 + n(n-1)/2 alpha beta).
/// Valid for negative n; agrees with inv(t^-n).
GroupElement translation_power(const SystemSpec& spec, std::int64_t n);

/// T p = reduce(t . g_p). Requires a heisenberg spec.
NilPoint step(const SystemSpec& spec, const NilPoint& p);

/// T^n e = reduce(t^n).
NilPoint orbit_point(const SystemSpec& spec, std::int64_t n);

/// Projection onto the maximal equicontinuous factor G / G_2 Gamma = T^2.
TorusPoint factor_pi(const NilPoint& p);

/// Componentwise translation by (alpha, beta) mod 1. Requires a torus spec.
TorusPoint rotation_step(const SystemSpec& spec, const TorusPoint& p);

/// Heisenberg nilsystem (X, T) with T x = t x.
class HeisenbergSystem {
 public:
  using point_type = NilPoint;

  explicit HeisenbergSystem(SystemSpec spec);

  const SystemSpec& spec() const { return spec_; }

  NilPoint step(const NilPoint& p) const { return reduce(mul(t_, lift(p))); }
  NilPoint iterate(const NilPoint& p, std::int64_t n) const;
  double distance(const NilPoint& a, const NilPoint& b) const { return dist(a, b); }
  TorusPoint project(const NilPoint& p) const { return factor_pi(p); }
  NilPoint base_point() const { return NilPoint{}; }

  /// Left translation by a small group element.
  NilPoint perturb(const NilPoint& p, const GroupElement& offset) const {
    return reduce(mul(offset, lift(p)));
  }

 private:
  SystemSpec spec_;
  GroupElement t_;
};

/// Minimal rotation of T^dims by (alpha[, beta]).
class RotationSystem {
 public:
  using point_type = TorusPoint;

  explicit RotationSystem(SystemSpec spec);

  const SystemSpec& spec() const { return spec_; }

  TorusPoint step(const TorusPoint& p) const { return iterate(p, 1); }
  TorusPoint iterate(const TorusPoint& p, std::int64_t n) const;
  double distance(const TorusPoint& a, const TorusPoint& b) const { return torus_dist(a, b); }
  TorusPoint project(const TorusPoint& p) const { return p; }
  TorusPoint base_point() const;

  TorusPoint perturb(const TorusPoint& p, const GroupElement& offset) const;

 private:
  SystemSpec spec_;
};

}  // namespace nilscope
