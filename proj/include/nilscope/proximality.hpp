#pragma once

// Witness searches for the regionally proximal relation RP, the double
// relation RP2 and its strong (dissymmetric) variant RPDS.
//
// Each search minimizes the max of the relation's defining distances over
// perturbed points x' = delta_i x, y' = delta_j y (left translation by a
// fixed low-discrepancy offset set) and over the time shifts. The result is
// a certificate when small and an empirical floor otherwise.

#include <cstdint>
#include <string>
#include <vector>

#include "nilscope/cubes.hpp"
#include "nilscope/systems.hpp"

namespace nilscope {

enum class Relation { RP, RP2, RPDS };
std::string to_string(Relation r);

struct SearchBudget {
  std::int64_t n_max{128};
  int perturb_samples{24};
  double perturb_radius{0.04};
  std::int64_t time_cap_ms{60'000};
  /// Offset into the low-discrepancy sequence; 0 reproduces the defaults.
  std::uint64_t seed{0};
  int workers{1};

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

template <class P>
struct WitnessRecord {
  Relation relation{Relation::RP};
  double eps_achieved{0.0};
  std::int64_t m{0};
  std::int64_t n{0};
  P x{};
  P y{};
  P x_prime{};
  P y_prime{};
  /// false when the time cap stopped the scan early
  bool exhausted{true};
  std::int64_t n_max{0};
};

/// Offsets delta with sym_norm(delta) <= radius: the identity first, then
/// points of the additive recurrence with the plastic-number generalization
/// of the golden ratio. `dims` = 3 for the Heisenberg group, 1 or 2 for tori.
std::vector<GroupElement> perturbation_offsets(int count, double radius, int dims,
                                               std::uint64_t seed = 0);

template <class System>
WitnessRecord<typename System::point_type> rp_search(const System& sys,
                                                     const typename System::point_type& x,
                                                     const typename System::point_type& y,
                                                     const SearchBudget& budget);

template <class System>
WitnessRecord<typename System::point_type> rp2_search(const System& sys,
                                                      const typename System::point_type& x,
                                                      const typename System::point_type& y,
                                                      const SearchBudget& budget);

template <class System>
WitnessRecord<typename System::point_type> rpds_search(const System& sys,
                                                       const typename System::point_type& x,
                                                       const typename System::point_type& y,
                                                       const SearchBudget& budget);

template <class P>
struct CubeCertificate {
  Oct<P> oct;
  PpedFit fit;
};

/// Builds (x, y, a, a, b, b, c, c) with a = T^m x', b = T^n x',
/// c = T^{m+n} x' from an RP2 record and scores it with pped_residual at the
/// record's horizon. Throws std::invalid_argument for other relations.
template <class System>
CubeCertificate<typename System::point_type> witness_to_cube(
    const WitnessRecord<typename System::point_type>& record, const System& sys, int workers = 1);

}  // namespace nilscope
