#include "nilscope/nilsequence.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nilscope {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Complex e(double t) {
  const double f = t - std::floor(t);
  return std::polar(1.0, kTwoPi * f);
}

Complex theta(int m, int j_trunc, double x, double y, double z) {
  const double am = std::abs(static_cast<double>(m));
  Complex phi{0.0, 0.0};
  for (int j = -j_trunc; j <= j_trunc; ++j) {
    const double s = y + j;
    phi += std::exp(-std::numbers::pi * am * s * s) * e(static_cast<double>(m) * j * x);
  }
  return e(static_cast<double>(m) * z) * phi;
}

}  // namespace

std::string to_string(ObservableKind kind) {
  switch (kind) {
    case ObservableKind::distance_to_base:
      return "distance-to-base";
    case ObservableKind::vertical_theta:
      return "vertical-theta";
    case ObservableKind::torus_character:
      return "torus-character";
  }
  return "unknown";
}

ObservableKind observable_kind_from_string(const std::string& name) {
  if (name == "distance-to-base" || name == "distance_to_base") return ObservableKind::distance_to_base;
  if (name == "vertical-theta" || name == "vertical_theta") return ObservableKind::vertical_theta;
  if (name == "torus-character" || name == "torus_character") return ObservableKind::torus_character;
  throw std::invalid_argument("observable: unknown kind '" + name + "'");
}

ObservableSpec ObservableSpec::distance_to(const NilPoint& base) {
  ObservableSpec o;
  o.kind = ObservableKind::distance_to_base;
  o.base = base;
  return o;
}

ObservableSpec ObservableSpec::theta(int m_freq, int j_trunc) {
  ObservableSpec o;
  o.kind = ObservableKind::vertical_theta;
  o.m_freq = m_freq;
  o.j_trunc = j_trunc;
  return o;
}

ObservableSpec ObservableSpec::character(int k1, int k2) {
  ObservableSpec o;
  o.kind = ObservableKind::torus_character;
  o.k1 = k1;
  o.k2 = k2;
  return o;
}

void ObservableSpec::validate() const {
  if (kind == ObservableKind::vertical_theta) {
    if (m_freq == 0) throw std::invalid_argument("m_freq: must be nonzero for vertical-theta");
    if (j_trunc < 3) throw std::invalid_argument("j_trunc: must be >= 3");
  }
}

std::string ObservableSpec::describe() const {
  std::ostringstream os;
  os << to_string(kind);
  switch (kind) {
    case ObservableKind::distance_to_base:
      os << "(base=" << base.x() << "," << base.y() << "," << base.z() << ")";
      break;
    case ObservableKind::vertical_theta:
      os << "(m=" << m_freq << ",J=" << j_trunc << ")";
      break;
    case ObservableKind::torus_character:
      os << "(k1=" << k1 << ",k2=" << k2 << ")";
      break;
  }
  return os.str();
}

Complex eval_observable(const ObservableSpec& obs, const NilPoint& p) {
  switch (obs.kind) {
    case ObservableKind::distance_to_base:
      return {dist(p, obs.base), 0.0};
    case ObservableKind::torus_character:
      return e(obs.k1 * p.x() + obs.k2 * p.y());
    case ObservableKind::vertical_theta:
      return theta(obs.m_freq, obs.j_trunc, p.x(), p.y(), p.z());
  }
  return {};
}

Complex eval_observable_on_group(const ObservableSpec& obs, const GroupElement& g) {
  switch (obs.kind) {
    case ObservableKind::vertical_theta:
      return theta(obs.m_freq, obs.j_trunc, g.x, g.y, g.z);
    case ObservableKind::torus_character:
      return e(obs.k1 * g.x + obs.k2 * g.y);
    case ObservableKind::distance_to_base:
      return eval_observable(obs, reduce(g));
  }
  return {};
}

Complex eval_observable(const ObservableSpec& obs, const TorusPoint& p) {
  if (obs.kind != ObservableKind::torus_character) {
    throw std::invalid_argument("observable: only torus-character is defined on a torus");
  }
  const double y = p.dims > 1 ? p.coords[1] : 0.0;
  return e(obs.k1 * p.coords[0] + obs.k2 * y);
}

double observable_bound(const ObservableSpec& obs) {
  switch (obs.kind) {
    case ObservableKind::distance_to_base:
      return 0.5;
    case ObservableKind::torus_character:
      return 1.0;
    case ObservableKind::vertical_theta: {
      const double am = std::abs(static_cast<double>(obs.m_freq));
      double s = 0.0;
      for (int k = 0; k <= obs.j_trunc + 1; ++k) s += std::exp(-std::numbers::pi * am * k * k);
      return 2.0 * s;
    }
  }
  return 0.0;
}

SequenceSample generate_from(const SystemSpec& spec, const ObservableSpec& obs,
                             const NilPoint& start, std::int64_t N, int workers) {
  if (N < 1) throw std::invalid_argument("N: must be >= 1");
  obs.validate();
  const HeisenbergSystem sys(spec);
  SequenceSample out;
  out.first_index = -N;
  out.values.resize(static_cast<std::size_t>(2 * N + 1));
  out.origin = "heisenberg(alpha=" + std::to_string(spec.alpha) + ",beta=" +
               std::to_string(spec.beta) + ",gamma0=" + std::to_string(spec.gamma0) + ") " +
               obs.describe();
#pragma omp parallel for schedule(static) num_threads(std::max(1, workers))
  for (std::int64_t n = -N; n <= N; ++n) {
    out.values[static_cast<std::size_t>(n + N)] = eval_observable(obs, sys.iterate(start, n));
  }
  return out;
}

SequenceSample generate(const SystemSpec& spec, const ObservableSpec& obs, std::int64_t N,
                        int workers) {
  spec.validate();
  if (spec.kind == SystemKind::heisenberg) return generate_from(spec, obs, NilPoint{}, N, workers);

  if (N < 1) throw std::invalid_argument("N: must be >= 1");
  obs.validate();
  const RotationSystem sys(spec);
  SequenceSample out;
  out.first_index = -N;
  out.values.resize(static_cast<std::size_t>(2 * N + 1));
  out.origin = "torus_rotation(alpha=" + std::to_string(spec.alpha) + ",beta=" +
               std::to_string(spec.beta) + ",dims=" + std::to_string(spec.dims) + ") " +
               obs.describe();
  const TorusPoint origin = sys.base_point();
  for (std::int64_t n = -N; n <= N; ++n) {
    out.values[static_cast<std::size_t>(n + N)] = eval_observable(obs, sys.iterate(origin, n));
  }
  return out;
}

SequenceSample quadratic_phase(double alpha, std::int64_t N) {
  if (N < 1) throw std::invalid_argument("N: must be >= 1");
  SequenceSample out;
  out.first_index = -N;
  out.values.resize(static_cast<std::size_t>(2 * N + 1));
  out.origin = "quadratic-phase(alpha=" + std::to_string(alpha) + ")";
  for (std::int64_t n = -N; n <= N; ++n) {
    const long double t = static_cast<long double>(n) * static_cast<long double>(n) * alpha;
    const double frac = static_cast<double>(t - std::floor(t));
    out.values[static_cast<std::size_t>(n + N)] = std::polar(1.0, kTwoPi * frac);
  }
  return out;
}

}  // namespace nilscope
