#pragma once

// Window-limited arithmetic-regularity tests for bounded complex sequences.
//
// Order 1 (almost periodic): whenever |u_{i+m} - u_i| < delta and
// |u_{i+n} - u_i| < delta for all i in [k-M, k+M], require
// |u_{k+m+n} - u_k| < eps.
//
// Order 2 (2-step nilsequence): whenever the six shifts m, n, m+n, p, m+p,
// n+p all move u by less than delta on [k-M, k+M], require
// |u_{k+m+n+p} - u_k| < eps.
//
// Verdicts are relative to the sample window: no index outside it is ever
// read, and "no violation" is not a proof about the full sequence.

#include <cstdint>
#include <optional>
#include <vector>

#include "nilscope/nilsequence.hpp"

namespace nilscope {

struct RegularityParams {
  int order{2};
  double eps{0.3};
  double delta{0.05};
  std::int64_t M{5};
  std::int64_t shift_max{10};
  /// Inclusive k range; defaults to the largest range whose accesses stay
  /// inside the sample window.
  std::optional<std::int64_t> k_lo;
  std::optional<std::int64_t> k_hi;
};

struct KRange {
  std::int64_t lo{0};
  std::int64_t hi{-1};
  std::int64_t size() const { return hi >= lo ? hi - lo + 1 : 0; }
};

/// False when the conclusion shift (m+n, or m+n+p) is 0 or coincides with
/// a hypothesis shift, in which case the hypothesis alone implies the
/// conclusion whenever delta <= eps.
bool is_informative(int order, std::int64_t m, std::int64_t n, std::int64_t p);

/// Half-width of the index neighbourhood a test touches around k.
std::int64_t access_margin(int order, std::int64_t M, std::int64_t shift_max);

/// Validates params against the window and resolves the k range. Throws
/// std::invalid_argument / std::out_of_range naming the offending field.
KRange resolve_k_range(const SequenceSample& u, const RegularityParams& params);

struct Violation {
  std::int64_t k{0};
  std::int64_t m{0};
  std::int64_t n{0};
  std::int64_t p{0};  // 0 for order-1 tests
  double gap{0.0};    // |u_{k+m+n(+p)} - u_k| - eps

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct RegularityReport {
  int order{2};
  double eps{0.0};
  double delta{0.0};
  std::int64_t M{0};
  std::int64_t shift_max{0};
  KRange k_range;
  /// sorted by (m, n, p, k)
  std::vector<Violation> violations;
  /// (tuple, k) pairs satisfying the hypothesis; the conclusion was checked for each
  std::uint64_t hypothesis_count{0};
  /// hypothesis hits whose conclusion is not already one of the hypothesis
  /// conditions (see is_informative)
  std::uint64_t informative_count{0};
  /// (tuple, k) pairs examined
  std::uint64_t scanned{0};
  std::int64_t elapsed_ms{0};
  bool vacuous{true};
};

/// mask[k - range.lo] is true iff max_{i in [k-M, k+M]} |u_{i+s} - u_i| < delta.
/// One pass for the differences, then a monotone-queue sliding maximum.
std::vector<bool> shift_mask(const SequenceSample& u, std::int64_t s, double delta,
                             std::int64_t M, const KRange& range);

/// Same mask over the largest k range for which every access is in the window.
std::vector<bool> shift_mask(const SequenceSample& u, std::int64_t s, double delta,
                             std::int64_t M);

/// k range used by the two-argument shift_mask.
KRange shift_mask_range(const SequenceSample& u, std::int64_t s, std::int64_t M);

/// Direct double loop; oracle for shift_mask.
std::vector<bool> shift_mask_naive(const SequenceSample& u, std::int64_t s, double delta,
                                   std::int64_t M, const KRange& range);

/// Bit-parallel engine. Masks are built once per distinct shift value and
/// shared read-only; shift tuples are split across `workers` threads and the
/// report does not depend on the worker count.
RegularityReport test_order1(const SequenceSample& u, const RegularityParams& params,
                             int workers = 1);
RegularityReport test_order2(const SequenceSample& u, const RegularityParams& params,
                             int workers = 1);

/// Dispatches on params.order.
RegularityReport run_regularity(const SequenceSample& u, const RegularityParams& params,
                                int workers = 1);

/// Serial reference: loops over every (tuple, k, i) directly.
RegularityReport naive_test(const SequenceSample& u, const RegularityParams& params);

struct CalibrationEntry {
  std::int64_t M{0};
  double delta{0.0};
  std::size_t violations{0};
  std::uint64_t hypothesis_count{0};
};

struct CalibrationResult {
  std::int64_t M{0};
  double delta{0.0};
  bool clean{false};  // some grid point had zero violations
  RegularityReport report;
  std::vector<CalibrationEntry> grid;
};

/// Scans the (M, delta) grid. Picks the zero-violation pair with the largest
/// hypothesis_count, or failing that the pair with fewest violations. Ties go
/// to the smaller M, then the larger delta.
CalibrationResult calibrate(const SequenceSample& u, int order, double eps,
                            const std::vector<std::int64_t>& M_grid,
                            const std::vector<double>& delta_grid, std::int64_t shift_max,
                            int workers = 1);

struct ShiftMetric {
  double value{0.0};
  /// 2^(1 - tail) * sup |u - v| over the window: bound on the omitted terms
  double truncation_bound{0.0};
  std::int64_t tail{0};
};

/// sum_{|n| <= tail} 2^{-|n|} |u_n - v_n|. The windows must match; tail is
/// clamped to the symmetric part of the window.
ShiftMetric shift_metric(const SequenceSample& u, const SequenceSample& v, std::int64_t tail);

}  // namespace nilscope
