#include "nilscope/regularity.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>

namespace nilscope {

namespace {

using Words = std::vector<std::uint64_t>;

std::int64_t words_for(std::int64_t bits) { return (bits + 63) / 64; }

void require_in_window(const SequenceSample& u, std::int64_t lo, std::int64_t hi, const char* field) {
  if (lo < u.first_index || hi > u.last_index()) {
    throw std::out_of_range(std::string(field) + ": accesses [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "] leave the sample window [" +
                            std::to_string(u.first_index) + ", " + std::to_string(u.last_index()) +
                            "]");
  }
}

// Calls emit(j, below) for j in [0, count), where below says whether
// max(d[j .. j + width - 1]) < threshold. Monotone queue of indices whose
// values strictly decrease from front to back.
template <class Emit>
void sliding_max_below(const std::vector<double>& d, std::int64_t width, std::int64_t count,
                       double threshold, Emit&& emit) {
  std::vector<std::int64_t> queue(static_cast<std::size_t>(d.size()));
  std::size_t head = 0, tail = 0;
  auto push = [&](std::int64_t i) {
    while (tail > head && d[static_cast<std::size_t>(queue[tail - 1])] <= d[static_cast<std::size_t>(i)]) --tail;
    queue[tail++] = i;
  };
  for (std::int64_t i = 0; i < width - 1; ++i) push(i);
  for (std::int64_t j = 0; j < count; ++j) {
    push(j + width - 1);
    while (queue[head] < j) ++head;
    emit(j, d[static_cast<std::size_t>(queue[head])] < threshold);
  }
}

// d_i = |u_{i+s} - u_i| for i in [range.lo - M, range.hi + M]
std::vector<double> shifted_differences(const SequenceSample& u, std::int64_t s, std::int64_t M,
                                        const KRange& range) {
  const std::int64_t lo = range.lo - M;
  const std::int64_t len = range.size() + 2 * M;
  std::vector<double> d(static_cast<std::size_t>(len));
  for (std::int64_t t = 0; t < len; ++t) d[static_cast<std::size_t>(t)] = std::abs(u.at(lo + t + s) - u.at(lo + t));
  return d;
}

void check_mask_args(const SequenceSample& u, std::int64_t s, std::int64_t M, const KRange& range) {
  if (M < 0) throw std::out_of_range("M: must be >= 0");
  if (range.size() <= 0) throw std::out_of_range("k_range: empty");
  require_in_window(u, range.lo - M + std::min<std::int64_t>(0, s), range.hi + M + std::max<std::int64_t>(0, s),
                    "shift");
}

Words mask_words(const SequenceSample& u, std::int64_t s, double delta, std::int64_t M,
                 const KRange& range) {
  Words w(static_cast<std::size_t>(words_for(range.size())), 0);
  if (s == 0) {
    // d is identically zero
    if (delta > 0.0) {
      for (std::int64_t j = 0; j < range.size(); ++j) w[static_cast<std::size_t>(j >> 6)] |= std::uint64_t{1} << (j & 63);
    }
    return w;
  }
  const auto d = shifted_differences(u, s, M, range);
  sliding_max_below(d, 2 * M + 1, range.size(), delta, [&](std::int64_t j, bool below) {
    if (below) w[static_cast<std::size_t>(j >> 6)] |= std::uint64_t{1} << (j & 63);
  });
  return w;
}

// Masks for every shift in [-max_shift, max_shift], indexed by s + max_shift.
std::vector<Words> build_masks(const SequenceSample& u, std::int64_t max_shift, double delta,
                               std::int64_t M, const KRange& range, int workers) {
  std::vector<Words> masks(static_cast<std::size_t>(2 * max_shift + 1));
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, workers))
  for (std::int64_t s = -max_shift; s <= max_shift; ++s) {
    masks[static_cast<std::size_t>(s + max_shift)] = mask_words(u, s, delta, M, range);
  }
  return masks;
}

bool violation_order(const Violation& a, const Violation& b) {
  return std::tie(a.m, a.n, a.p, a.k) < std::tie(b.m, b.n, b.p, b.k);
}

void finish(RegularityReport& r, std::chrono::steady_clock::time_point t0) {
  std::sort(r.violations.begin(), r.violations.end(), violation_order);
  r.vacuous = r.hypothesis_count == 0;
  r.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
}

RegularityReport blank_report(const RegularityParams& p, const KRange& kr) {
  RegularityReport r;
  r.order = p.order;
  r.eps = p.eps;
  r.delta = p.delta;
  r.M = p.M;
  r.shift_max = p.shift_max;
  r.k_range = kr;
  return r;
}

struct Tally {
  std::vector<Violation> violations;
  std::uint64_t hypotheses{0};
  std::uint64_t informative{0};
};

// Checks the conclusion for every k whose bit is set in `hyp`.
void conclude(const SequenceSample& u, const Words& hyp, const KRange& kr, std::int64_t total,
              double eps, std::int64_t m, std::int64_t n, std::int64_t p, bool informative,
              Tally& tally) {
  const std::uint64_t before = tally.hypotheses;
  for (std::size_t w = 0; w < hyp.size(); ++w) {
    std::uint64_t bits = hyp[w];
    while (bits) {
      const int b = std::countr_zero(bits);
      bits &= bits - 1;
      const std::int64_t k = kr.lo + static_cast<std::int64_t>(w) * 64 + b;
      ++tally.hypotheses;
      const double c = std::abs(u.at(k + total) - u.at(k));
      if (!(c < eps)) tally.violations.push_back({k, m, n, p, c - eps});
    }
  }
  if (informative) tally.informative += tally.hypotheses - before;
}

void merge(RegularityReport& r, const Tally& t) {
  r.violations.insert(r.violations.end(), t.violations.begin(), t.violations.end());
  r.hypothesis_count += t.hypotheses;
  r.informative_count += t.informative;
}

void check_order(const RegularityParams& p, int order) {
  if (p.order != order) {
    throw std::invalid_argument("order: this test requires order " + std::to_string(order));
  }
}

}  // namespace

bool is_informative(int order, std::int64_t m, std::int64_t n, std::int64_t p) {
  if (order == 1) return m != 0 && n != 0 && m + n != 0;
  for (std::int64_t s : {m, n, p, m + n, m + p, n + p, m + n + p}) {
    if (s == 0) return false;
  }
  return true;
}

std::int64_t access_margin(int order, std::int64_t M, std::int64_t shift_max) {
  if (order == 1) return std::max(M + shift_max, 2 * shift_max);
  return std::max(M + 2 * shift_max, 3 * shift_max);
}

KRange resolve_k_range(const SequenceSample& u, const RegularityParams& params) {
  if (params.order != 1 && params.order != 2) throw std::invalid_argument("order: must be 1 or 2");
  if (!(params.eps > 0.0)) throw std::invalid_argument("eps: must be > 0");
  if (!(params.delta > 0.0)) throw std::invalid_argument("delta: must be > 0");
  if (params.M < 0) throw std::invalid_argument("M: must be >= 0");
  if (params.shift_max < 0) throw std::invalid_argument("shift_max: must be >= 0");
  if (u.size() == 0) throw std::invalid_argument("sequence: empty");
  const std::int64_t margin = access_margin(params.order, params.M, params.shift_max);
  KRange r{u.first_index + margin, u.last_index() - margin};
  if (params.k_lo) {
    if (*params.k_lo < r.lo) {
      throw std::out_of_range("k_lo: " + std::to_string(*params.k_lo) + " is below the smallest valid k " +
                              std::to_string(r.lo));
    }
    r.lo = *params.k_lo;
  }
  if (params.k_hi) {
    if (*params.k_hi > r.hi) {
      throw std::out_of_range("k_hi: " + std::to_string(*params.k_hi) + " is above the largest valid k " +
                              std::to_string(r.hi));
    }
    r.hi = *params.k_hi;
  }
  if (r.size() <= 0) {
    throw std::out_of_range("k_range: empty; the window of " + std::to_string(u.size()) +
                            " samples is too short for M and shift_max");
  }
  return r;
}

KRange shift_mask_range(const SequenceSample& u, std::int64_t s, std::int64_t M) {
  if (M < 0) throw std::out_of_range("M: must be >= 0");
  KRange r{u.first_index + M + std::max<std::int64_t>(0, -s), u.last_index() - M - std::max<std::int64_t>(0, s)};
  if (r.size() <= 0) throw std::out_of_range("shift: |s| + 2M exceeds the sample window");
  return r;
}

std::vector<bool> shift_mask(const SequenceSample& u, std::int64_t s, double delta,
                             std::int64_t M, const KRange& range) {
  check_mask_args(u, s, M, range);
  const Words w = mask_words(u, s, delta, M, range);
  std::vector<bool> out(static_cast<std::size_t>(range.size()));
  for (std::int64_t j = 0; j < range.size(); ++j) out[static_cast<std::size_t>(j)] = (w[static_cast<std::size_t>(j >> 6)] >> (j & 63)) & 1U;
  return out;
}

std::vector<bool> shift_mask(const SequenceSample& u, std::int64_t s, double delta,
                             std::int64_t M) {
  return shift_mask(u, s, delta, M, shift_mask_range(u, s, M));
}

std::vector<bool> shift_mask_naive(const SequenceSample& u, std::int64_t s, double delta,
                                   std::int64_t M, const KRange& range) {
  check_mask_args(u, s, M, range);
  std::vector<bool> out(static_cast<std::size_t>(range.size()));
  for (std::int64_t k = range.lo; k <= range.hi; ++k) {
    bool ok = true;
    for (std::int64_t i = k - M; i <= k + M && ok; ++i) ok = std::abs(u.at(i + s) - u.at(i)) < delta;
    out[static_cast<std::size_t>(k - range.lo)] = ok;
  }
  return out;
}

RegularityReport test_order1(const SequenceSample& u, const RegularityParams& params, int workers) {
  const auto t0 = std::chrono::steady_clock::now();
  check_order(params, 1);
  const KRange kr = resolve_k_range(u, params);
  const std::int64_t S = params.shift_max;
  const auto masks = build_masks(u, S, params.delta, params.M, kr, workers);
  const auto mask = [&](std::int64_t s) -> const Words& { return masks[static_cast<std::size_t>(s + S)]; };
  const std::size_t nw = static_cast<std::size_t>(words_for(kr.size()));

  RegularityReport report = blank_report(params, kr);
  const std::int64_t side = 2 * S + 1;
  report.scanned = static_cast<std::uint64_t>(side * side) * static_cast<std::uint64_t>(kr.size());

#pragma omp parallel num_threads(std::max(1, workers))
  {
    Tally tally;
    Words hyp(nw);
#pragma omp for schedule(dynamic, 1) nowait
    for (std::int64_t m = -S; m <= S; ++m) {
      const Words& wm = mask(m);
      for (std::int64_t n = -S; n <= S; ++n) {
        const Words& wn = mask(n);
        std::uint64_t any = 0;
        for (std::size_t w = 0; w < nw; ++w) any |= (hyp[w] = wm[w] & wn[w]);
        if (any) conclude(u, hyp, kr, m + n, params.eps, m, n, 0, is_informative(1, m, n, 0), tally);
      }
    }
#pragma omp critical(nilscope_reg1_merge)
    merge(report, tally);
  }
  finish(report, t0);
  return report;
}

RegularityReport test_order2(const SequenceSample& u, const RegularityParams& params, int workers) {
  const auto t0 = std::chrono::steady_clock::now();
  check_order(params, 2);
  const KRange kr = resolve_k_range(u, params);
  const std::int64_t S = params.shift_max;
  const std::int64_t span = 2 * S;
  const auto masks = build_masks(u, span, params.delta, params.M, kr, workers);
  const auto mask = [&](std::int64_t s) -> const Words& { return masks[static_cast<std::size_t>(s + span)]; };
  const std::size_t nw = static_cast<std::size_t>(words_for(kr.size()));

  RegularityReport report = blank_report(params, kr);
  const std::uint64_t side = static_cast<std::uint64_t>(2 * S + 1);
  report.scanned = side * side * side * static_cast<std::uint64_t>(kr.size());

#pragma omp parallel num_threads(std::max(1, workers))
  {
    Tally tally;
    Words mn(nw), hyp(nw);
#pragma omp for schedule(dynamic, 1) nowait
    for (std::int64_t m = -S; m <= S; ++m) {
      const Words& wm = mask(m);
      for (std::int64_t n = -S; n <= S; ++n) {
        const Words& wn = mask(n);
        const Words& wmn = mask(m + n);
        std::uint64_t any = 0;
        for (std::size_t w = 0; w < nw; ++w) any |= (mn[w] = wm[w] & wn[w] & wmn[w]);
        if (!any) continue;
        for (std::int64_t p = -S; p <= S; ++p) {
          const Words& wp = mask(p);
          const Words& wmp = mask(m + p);
          const Words& wnp = mask(n + p);
          std::uint64_t any2 = 0;
          for (std::size_t w = 0; w < nw; ++w) any2 |= (hyp[w] = mn[w] & wp[w] & wmp[w] & wnp[w]);
          if (any2) conclude(u, hyp, kr, m + n + p, params.eps, m, n, p, is_informative(2, m, n, p), tally);
        }
      }
    }
#pragma omp critical(nilscope_reg2_merge)
    merge(report, tally);
  }
  finish(report, t0);
  return report;
}

RegularityReport run_regularity(const SequenceSample& u, const RegularityParams& params, int workers) {
  if (params.order == 1) return test_order1(u, params, workers);
  if (params.order == 2) return test_order2(u, params, workers);
  throw std::invalid_argument("order: must be 1 or 2");
}

RegularityReport naive_test(const SequenceSample& u, const RegularityParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  const KRange kr = resolve_k_range(u, params);
  const std::int64_t S = params.shift_max;
  const std::int64_t M = params.M;
  RegularityReport report = blank_report(params, kr);

  const auto moves_little = [&](std::int64_t k, std::int64_t s) {
    for (std::int64_t i = k - M; i <= k + M; ++i) {
      if (!(std::abs(u.at(i + s) - u.at(i)) < params.delta)) return false;
    }
    return true;
  };
  const auto check = [&](std::int64_t k, std::int64_t total, std::int64_t m, std::int64_t n, std::int64_t p) {
    ++report.hypothesis_count;
    if (is_informative(params.order, m, n, p)) ++report.informative_count;
    const double c = std::abs(u.at(k + total) - u.at(k));
    if (!(c < params.eps)) report.violations.push_back({k, m, n, p, c - params.eps});
  };

  for (std::int64_t m = -S; m <= S; ++m) {
    for (std::int64_t n = -S; n <= S; ++n) {
      if (params.order == 1) {
        for (std::int64_t k = kr.lo; k <= kr.hi; ++k) {
          ++report.scanned;
          if (moves_little(k, m) && moves_little(k, n)) check(k, m + n, m, n, 0);
        }
        continue;
      }
      for (std::int64_t p = -S; p <= S; ++p) {
        for (std::int64_t k = kr.lo; k <= kr.hi; ++k) {
          ++report.scanned;
          if (moves_little(k, m) && moves_little(k, n) && moves_little(k, m + n) &&
              moves_little(k, p) && moves_little(k, m + p) && moves_little(k, n + p)) {
            check(k, m + n + p, m, n, p);
          }
        }
      }
    }
  }
  finish(report, t0);
  return report;
}

CalibrationResult calibrate(const SequenceSample& u, int order, double eps,
                            const std::vector<std::int64_t>& M_grid,
                            const std::vector<double>& delta_grid, std::int64_t shift_max,
                            int workers) {
  if (M_grid.empty()) throw std::invalid_argument("M_grid: must be nonempty");
  if (delta_grid.empty()) throw std::invalid_argument("delta_grid: must be nonempty");

  CalibrationResult result;
  std::optional<std::size_t> chosen;
  const auto preferred = [&](const CalibrationEntry& a, const CalibrationEntry& b) {
    // a strictly preferred over b
    const bool a_clean = a.violations == 0, b_clean = b.violations == 0;
    if (a_clean != b_clean) return a_clean;
    if (a_clean) {
      if (a.hypothesis_count != b.hypothesis_count) return a.hypothesis_count > b.hypothesis_count;
    } else if (a.violations != b.violations) {
      return a.violations < b.violations;
    }
    if (a.M != b.M) return a.M < b.M;
    return a.delta > b.delta;
  };

  std::vector<RegularityReport> reports;
  for (std::int64_t M : M_grid) {
    for (double delta : delta_grid) {
      RegularityParams p;
      p.order = order;
      p.eps = eps;
      p.delta = delta;
      p.M = M;
      p.shift_max = shift_max;
      reports.push_back(run_regularity(u, p, workers));
      const auto& r = reports.back();
      result.grid.push_back({M, delta, r.violations.size(), r.hypothesis_count});
      if (!chosen || preferred(result.grid.back(), result.grid[*chosen])) chosen = result.grid.size() - 1;
    }
  }
  const auto& best = result.grid[*chosen];
  result.M = best.M;
  result.delta = best.delta;
  result.clean = best.violations == 0;
  result.report = std::move(reports[*chosen]);
  return result;
}

ShiftMetric shift_metric(const SequenceSample& u, const SequenceSample& v, std::int64_t tail) {
  if (u.first_index != v.first_index || u.size() != v.size()) {
    throw std::invalid_argument("shift_metric: sequences must share the same index window");
  }
  if (tail < 0) throw std::invalid_argument("tail: must be >= 0");
  const std::int64_t reach = std::min(-u.first_index, u.last_index());
  if (reach < 0) throw std::invalid_argument("shift_metric: window must contain index 0");
  ShiftMetric out;
  out.tail = std::min(tail, reach);
  for (std::int64_t n = -out.tail; n <= out.tail; ++n) {
    out.value += std::ldexp(std::abs(u.at(n) - v.at(n)), -static_cast<int>(std::abs(n)));
  }
  double sup = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sup = std::max(sup, std::abs(u.values[i] - v.values[i]));
  out.truncation_bound = std::ldexp(sup, 1 - static_cast<int>(out.tail));
  return out;
}

}  // namespace nilscope
