#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "nilscope/systems.hpp"

namespace nilscope {

using Complex = std::complex<double>;

enum class ObservableKind { distance_to_base, vertical_theta, torus_character };
std::string to_string(ObservableKind kind);
ObservableKind observable_kind_from_string(const std::string& name);

struct ObservableSpec {
  ObservableKind kind{ObservableKind::torus_character};
  NilPoint base{};
  int m_freq{1};
  int j_trunc{6};
  int k1{1};
  int k2{0};

  static ObservableSpec distance_to(const NilPoint& base);
  static ObservableSpec theta(int m_freq, int j_trunc = 6);
  static ObservableSpec character(int k1, int k2);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  std::string describe() const;
};

/// Evaluates f on X. For vertical_theta,
///   F(x, y, z) = e(m z) * sum_{|j| <= J} exp(-pi |m| (y + j)^2) e(m j x),
/// with e(t) = exp(2 pi i t). The theta factor satisfies
/// phi(x, y + 1) = e(-m x) phi(x, y), so F is right-Gamma-invariant.
Complex eval_observable(const ObservableSpec& obs, const NilPoint& p);

/// The same formulas on an arbitrary (unreduced) group element; used to
/// measure how well the truncated theta sum respects Gamma-invariance.
Complex eval_observable_on_group(const ObservableSpec& obs, const GroupElement& g);

/// Torus observables; only torus_character is defined on a bare torus.
Complex eval_observable(const ObservableSpec& obs, const TorusPoint& p);

/// sup |f| over X (an upper bound for the theta family).
double observable_bound(const ObservableSpec& obs);

/// u_n for n in [-N, N]; values[n + N] holds u_n.
struct SequenceSample {
  std::int64_t first_index{0};
  std::vector<Complex> values;
  std::string origin;

  std::int64_t last_index() const {
    return first_index + static_cast<std::int64_t>(values.size()) - 1;
  }
  bool contains(std::int64_t n) const { return n >= first_index && n <= last_index(); }
  const Complex& at(std::int64_t n) const {
    return values[static_cast<std::size_t>(n - first_index)];
  }
  std::size_t size() const { return values.size(); }
};

/// u_n = f(T^n e), n in [-N, N].
SequenceSample generate(const SystemSpec& spec, const ObservableSpec& obs, std::int64_t N,
                        int workers = 1);

/// u_n = f(T^n start), n in [-N, N]; heisenberg systems only.
SequenceSample generate_from(const SystemSpec& spec, const ObservableSpec& obs,
                             const NilPoint& start, std::int64_t N, int workers = 1);

/// u_n = exp(2 pi i n^2 alpha), n in [-N, N].
SequenceSample quadratic_phase(double alpha, std::int64_t N);

}  // namespace nilscope
