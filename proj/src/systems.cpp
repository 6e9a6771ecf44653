#include "nilscope/systems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nilscope {

namespace {

double wrap_unit(double v) {
  double f = v - std::floor(v);
  return f >= 1.0 ? 0.0 : f;
}

// reduce(t^n . g_p) evaluated in extended precision: the central coordinate
// of t^n grows like n^2 and cancels against the lattice correction.
NilPoint power_times(const SystemSpec& spec, std::int64_t n, const NilPoint& p) {
  using ld = long double;
  const ld dn = static_cast<ld>(n);
  const ld tri = static_cast<ld>(n) * static_cast<ld>(n - 1) / 2;
  const ld a = spec.alpha, b = spec.beta;
  const ld x = dn * a + p.x();
  const ld y = dn * b + p.y();
  const ld z = dn * static_cast<ld>(spec.gamma0) + tri * a * b + p.z() + dn * a * p.y();
  const ld ys = -std::floor(y);
  const ld zr = z + x * ys;
  const double xf = static_cast<double>(x - std::floor(x));
  const double yf = static_cast<double>(y + ys);
  const double zf = static_cast<double>(zr - std::floor(zr));
  // wrap values that rounded to 1.0 in the final narrowing
  return reduce({xf, yf >= 1.0 ? yf - 1.0 : yf, zf});
}

void require_kind(const SystemSpec& spec, SystemKind kind, const char* op) {
  if (spec.kind != kind) {
    throw std::invalid_argument(std::string(op) + " requires a " + to_string(kind) + " system");
  }
}

}  // namespace

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::heisenberg:
      return "heisenberg";
    case SystemKind::torus_rotation:
      return "torus_rotation";
  }
  return "unknown";
}

SystemKind system_kind_from_string(const std::string& name) {
  if (name == "heisenberg") return SystemKind::heisenberg;
  if (name == "torus_rotation" || name == "torus-rotation" || name == "torus") {
    return SystemKind::torus_rotation;
  }
  throw std::invalid_argument("system: unknown kind '" + name + "'");
}

TorusPoint make_torus_point(std::initializer_list<double> coords) {
  if (coords.size() == 0 || coords.size() > kMaxTorusDims) {
    throw std::invalid_argument("TorusPoint: dimension must be 1 or 2");
  }
  TorusPoint p;
  p.dims = static_cast<int>(coords.size());
  std::size_t i = 0;
  for (double c : coords) p.coords[i++] = wrap_unit(c);
  return p;
}

double torus_dist(const TorusPoint& a, const TorusPoint& b) {
  double d = 0.0;
  for (int i = 0; i < a.dims; ++i) d = std::max(d, circle_dist(a.coords[i] - b.coords[i]));
  return d;
}

SystemSpec SystemSpec::default_heisenberg() {
  return heisenberg(std::sqrt(2.0) - 1.0, std::sqrt(3.0) - 1.0, 0.0);
}

SystemSpec SystemSpec::heisenberg(double alpha, double beta, double gamma0) {
  SystemSpec s;
  s.kind = SystemKind::heisenberg;
  s.alpha = alpha;
  s.beta = beta;
  s.gamma0 = gamma0;
  s.dims = 2;
  return s;
}

SystemSpec SystemSpec::torus_rotation(double alpha, double beta, int dims) {
  SystemSpec s;
  s.kind = SystemKind::torus_rotation;
  s.alpha = alpha;
  s.beta = beta;
  s.gamma0 = 0.0;
  s.dims = dims;
  return s;
}

void SystemSpec::validate() const {
  if (!std::isfinite(alpha)) throw std::invalid_argument("alpha: must be finite");
  if (!std::isfinite(beta)) throw std::invalid_argument("beta: must be finite");
  if (!std::isfinite(gamma0)) throw std::invalid_argument("gamma0: must be finite");
  if (kind == SystemKind::torus_rotation && (dims < 1 || dims > kMaxTorusDims)) {
    throw std::invalid_argument("dims: torus dimension must be 1 or 2");
  }
}

std::optional<IntegerRelation> find_integer_relation(double alpha, double beta,
                                                     std::int64_t bound, double tol) {
  for (std::int64_t p = 0; p <= bound; ++p) {
    const double pa = static_cast<double>(p) * alpha;
    for (std::int64_t q = (p == 0 ? 1 : -bound); q <= bound; ++q) {
      const double v = pa + static_cast<double>(q) * beta;
      const double r = std::nearbyint(v);
      if (std::abs(v - r) <= tol) {
        return IntegerRelation{p, q, static_cast<std::int64_t>(r)};
      }
    }
  }
  return std::nullopt;
}

bool flag_rationally_dependent(const SystemSpec& spec) {
  if (spec.kind == SystemKind::torus_rotation && spec.dims == 1) {
    // denominators up to 10^6 for a single frequency
    for (std::int64_t q = 1; q <= 1'000'000; ++q) {
      const double v = static_cast<double>(q) * spec.alpha;
      if (std::abs(v - std::nearbyint(v)) <= 1e-9) return true;
    }
    return false;
  }
  return find_integer_relation(spec.alpha, spec.beta).has_value();
}

GroupElement translation_power(const SystemSpec& spec, std::int64_t n) {
  const double dn = static_cast<double>(n);
  // n(n-1)/2 is an exact integer for |n| < 2^26
  const double tri = static_cast<double>(n * (n - 1) / 2);
  return {dn * spec.alpha, dn * spec.beta, dn * spec.gamma0 + tri * spec.alpha * spec.beta};
}

NilPoint step(const SystemSpec& spec, const NilPoint& p) {
  require_kind(spec, SystemKind::heisenberg, "step");
  return reduce(mul(spec.translation(), lift(p)));
}

NilPoint orbit_point(const SystemSpec& spec, std::int64_t n) {
  require_kind(spec, SystemKind::heisenberg, "orbit_point");
  return power_times(spec, n, NilPoint{});
}

TorusPoint factor_pi(const NilPoint& p) {
  TorusPoint t;
  t.dims = 2;
  t.coords = {p.x(), p.y()};
  return t;
}

TorusPoint rotation_step(const SystemSpec& spec, const TorusPoint& p) {
  require_kind(spec, SystemKind::torus_rotation, "rotation_step");
  return RotationSystem(spec).step(p);
}

HeisenbergSystem::HeisenbergSystem(SystemSpec spec) : spec_(spec), t_(spec.translation()) {
  require_kind(spec_, SystemKind::heisenberg, "HeisenbergSystem");
  spec_.validate();
}

NilPoint HeisenbergSystem::iterate(const NilPoint& p, std::int64_t n) const {
  if (n == 0) return p;
  return power_times(spec_, n, p);
}

RotationSystem::RotationSystem(SystemSpec spec) : spec_(spec) {
  require_kind(spec_, SystemKind::torus_rotation, "RotationSystem");
  spec_.validate();
}

TorusPoint RotationSystem::iterate(const TorusPoint& p, std::int64_t n) const {
  const double dn = static_cast<double>(n);
  TorusPoint out = p;
  out.dims = spec_.dims;
  const std::array<double, kMaxTorusDims> rot{spec_.alpha, spec_.beta};
  for (int i = 0; i < spec_.dims; ++i) out.coords[i] = wrap_unit(p.coords[i] + wrap_unit(dn * rot[i]));
  return out;
}

TorusPoint RotationSystem::base_point() const {
  TorusPoint p;
  p.dims = spec_.dims;
  return p;
}

TorusPoint RotationSystem::perturb(const TorusPoint& p, const GroupElement& offset) const {
  TorusPoint out = p;
  out.coords[0] = wrap_unit(p.coords[0] + offset.x);
  if (spec_.dims > 1) out.coords[1] = wrap_unit(p.coords[1] + offset.y);
  return out;
}

}  // namespace nilscope
