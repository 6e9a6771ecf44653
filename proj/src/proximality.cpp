#include "nilscope/proximality.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace nilscope {

std::string to_string(Relation r) {
  switch (r) {
    case Relation::RP:
      return "RP";
    case Relation::RP2:
      return "RP2";
    case Relation::RPDS:
      return "RPDS";
  }
  return "unknown";
}

void SearchBudget::validate() const {
  if (n_max < 1) throw std::invalid_argument("n_max: must be positive");
  if (perturb_samples < 1) throw std::invalid_argument("perturb_samples: must be positive");
  if (!(perturb_radius > 0.0) || !std::isfinite(perturb_radius)) {
    throw std::invalid_argument("perturb_radius: must be positive");
  }
  if (time_cap_ms < 1) throw std::invalid_argument("time_cap_ms: must be positive");
  if (workers < 1) throw std::invalid_argument("workers: must be positive");
}

std::vector<GroupElement> perturbation_offsets(int count, double radius, int dims,
                                               std::uint64_t seed) {
  if (dims < 1 || dims > 3) throw std::invalid_argument("perturbation_offsets: dims must be 1..3");
  // phi_d is the positive root of x^(d+1) = x + 1
  double phi = 2.0;
  for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (dims + 1));
  std::array<double, 3> step{};
  for (int k = 0; k < dims; ++k) step[k] = std::pow(1.0 / phi, k + 1);

  std::vector<GroupElement> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  if (count <= 0) return out;
  out.push_back(kIdentity);
  for (std::uint64_t i = seed + 1; static_cast<int>(out.size()) < count; ++i) {
    std::array<double, 3> u{};
    for (int k = 0; k < dims; ++k) {
      const double t = 0.5 + static_cast<double>(i) * step[k];
      u[k] = radius * (2.0 * (t - std::floor(t)) - 1.0);
    }
    // central part chosen so that sym_norm(delta) = max |u_k|
    out.push_back({u[0], u[1], dims == 3 ? u[2] + 0.5 * u[0] * u[1] : 0.0});
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlack = 1e-12;

template <class System>
int offset_dims(const System& sys) {
  if constexpr (std::is_same_v<System, HeisenbergSystem>) {
    (void)sys;
    return 3;
  } else {
    return sys.spec().dims;
  }
}

struct Key {
  double eps{kInf};
  std::int64_t m{0};
  std::int64_t n{0};
  int i{0};
  int j{0};
};

// eps, then shell |m| + |n|, then (m, n), then offset indices
bool better(const Key& a, const Key& b) {
  if (a.eps != b.eps) return a.eps < b.eps;
  return std::make_tuple(std::abs(a.m) + std::abs(a.n), a.m, a.n, a.i, a.j) <
         std::make_tuple(std::abs(b.m) + std::abs(b.n), b.m, b.n, b.i, b.j);
}

// Perturbed points and their orbits over [-span, span].
template <class System>
struct Cloud {
  using P = typename System::point_type;

  Cloud(const System& sys, const P& center, const std::vector<GroupElement>& offsets,
        std::int64_t span)
      : span(span) {
    const std::size_t len = static_cast<std::size_t>(2 * span + 1);
    points.reserve(offsets.size());
    anchor.reserve(offsets.size());
    orbits.resize(offsets.size());
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      points.push_back(sys.perturb(center, offsets[i]));
      anchor.push_back(sys.distance(points.back(), center));
      orbits[i].resize(len);
      for (std::int64_t k = -span; k <= span; ++k) orbits[i][at(k)] = sys.iterate(points[i], k);
    }
  }

  std::size_t at(std::int64_t k) const { return static_cast<std::size_t>(k + span); }
  const P& orbit(std::size_t i, std::int64_t k) const { return orbits[i][at(k)]; }

  std::int64_t span;
  std::vector<P> points;
  std::vector<double> anchor;  // d(x', x)
  std::vector<std::vector<P>> orbits;
};

template <class System>
WitnessRecord<typename System::point_type> make_record(
    Relation rel, const Key& best, const typename System::point_type& x,
    const typename System::point_type& y, const Cloud<System>& cx, const Cloud<System>& cy,
    bool exhausted, std::int64_t n_max) {
  WitnessRecord<typename System::point_type> r;
  r.relation = rel;
  r.eps_achieved = best.eps;
  r.m = best.m;
  r.n = best.n;
  r.x = x;
  r.y = y;
  r.x_prime = cx.points[static_cast<std::size_t>(best.i)];
  r.y_prime = cy.points[static_cast<std::size_t>(best.j)];
  r.exhausted = exhausted;
  r.n_max = n_max;
  return r;
}

class Deadline {
 public:
  explicit Deadline(std::int64_t cap_ms)
      : end_(Clock::now() + std::chrono::milliseconds(cap_ms)) {}
  bool expired() {
    if (hit_.load(std::memory_order_relaxed)) return true;
    if (Clock::now() >= end_) {
      hit_.store(true, std::memory_order_relaxed);
      return true;
    }
    return false;
  }
  bool hit() const { return hit_.load(); }

 private:
  Clock::time_point end_;
  std::atomic<bool> hit_{false};
};

// Shared driver for RP and RP2: both only depend on D_ij(k) = d(T^k x'_i, T^k y'_j).
template <class System, class PairScan>
WitnessRecord<typename System::point_type> pair_search(Relation rel, const System& sys,
                                                       const typename System::point_type& x,
                                                       const typename System::point_type& y,
                                                       const SearchBudget& budget,
                                                       std::int64_t span, PairScan&& scan) {
  budget.validate();
  const auto offsets = perturbation_offsets(budget.perturb_samples, budget.perturb_radius,
                                            offset_dims(sys), budget.seed);
  const Cloud<System> cx(sys, x, offsets, span);
  const Cloud<System> cy(sys, y, offsets, span);
  const int s = static_cast<int>(offsets.size());
  const std::int64_t pairs = static_cast<std::int64_t>(s) * s;
  Deadline deadline(budget.time_cap_ms);

  Key best;
#pragma omp parallel num_threads(budget.workers)
  {
    Key local;
    std::vector<double> d(static_cast<std::size_t>(2 * span + 1));
#pragma omp for schedule(dynamic, 1) nowait
    for (std::int64_t ij = 0; ij < pairs; ++ij) {
      if (deadline.expired()) continue;
      const int i = static_cast<int>(ij / s);
      const int j = static_cast<int>(ij % s);
      const double base = std::max(cx.anchor[static_cast<std::size_t>(i)], cy.anchor[static_cast<std::size_t>(j)]);
      // horizontal mismatch is invariant under the dynamics
      const double lb = torus_dist(sys.project(cx.points[static_cast<std::size_t>(i)]),
                                   sys.project(cy.points[static_cast<std::size_t>(j)]));
      if (std::max(base, lb) > local.eps + kSlack) continue;
      for (std::int64_t k = -span; k <= span; ++k) {
        d[static_cast<std::size_t>(k + span)] = sys.distance(cx.orbit(static_cast<std::size_t>(i), k),
                                                             cy.orbit(static_cast<std::size_t>(j), k));
      }
      scan(i, j, base, d, local);
    }
#pragma omp critical(nilscope_prox_merge)
    if (better(local, best)) best = local;
  }
  return make_record<System>(rel, best, x, y, cx, cy, !deadline.hit(), budget.n_max);
}

}  // namespace

template <class System>
WitnessRecord<typename System::point_type> rp_search(const System& sys,
                                                     const typename System::point_type& x,
                                                     const typename System::point_type& y,
                                                     const SearchBudget& budget) {
  const std::int64_t nm = budget.n_max;
  return pair_search(Relation::RP, sys, x, y, budget, nm,
                     [nm](int i, int j, double base, const std::vector<double>& d, Key& local) {
                       for (std::int64_t n = -nm; n <= nm; ++n) {
                         const Key k{std::max(base, d[static_cast<std::size_t>(n + nm)]), 0, n, i, j};
                         if (better(k, local)) local = k;
                       }
                     });
}

template <class System>
WitnessRecord<typename System::point_type> rp2_search(const System& sys,
                                                      const typename System::point_type& x,
                                                      const typename System::point_type& y,
                                                      const SearchBudget& budget) {
  const std::int64_t nm = budget.n_max;
  const std::int64_t span = 2 * nm;
  return pair_search(
      Relation::RP2, sys, x, y, budget, span,
      [nm, span](int i, int j, double base, const std::vector<double>& d, Key& local) {
        const auto at = [&](std::int64_t k) { return d[static_cast<std::size_t>(k + span)]; };
        for (std::int64_t m = -nm; m <= nm; ++m) {
          const double dm = std::max(base, at(m));
          if (dm > local.eps + kSlack) continue;
          for (std::int64_t n = -nm; n <= nm; ++n) {
            const Key k{std::max({dm, at(n), at(m + n)}), m, n, i, j};
            if (better(k, local)) local = k;
          }
        }
      });
}

template <class System>
WitnessRecord<typename System::point_type> rpds_search(const System& sys,
                                                       const typename System::point_type& x,
                                                       const typename System::point_type& y,
                                                       const SearchBudget& budget) {
  budget.validate();
  const std::int64_t nm = budget.n_max;
  const std::int64_t span = 2 * nm;
  const auto offsets = perturbation_offsets(budget.perturb_samples, budget.perturb_radius,
                                            offset_dims(sys), budget.seed);
  const Cloud<System> cx(sys, x, offsets, span);
  const Cloud<System> cy(sys, y, offsets, span);
  const std::size_t s = offsets.size();

  // e[i][k] = d(T^k x'_i, y), f[j][k] = d(T^k y'_j, y)
  std::vector<std::vector<double>> e(s), f(s);
#pragma omp parallel for schedule(static) num_threads(budget.workers)
  for (std::size_t i = 0; i < s; ++i) {
    e[i].resize(static_cast<std::size_t>(2 * span + 1));
    f[i].resize(static_cast<std::size_t>(2 * span + 1));
    for (std::int64_t k = -span; k <= span; ++k) {
      e[i][cx.at(k)] = sys.distance(cx.orbit(i, k), y);
      f[i][cy.at(k)] = sys.distance(cy.orbit(i, k), y);
    }
  }

  Deadline deadline(budget.time_cap_ms);
  Key best;
#pragma omp parallel num_threads(budget.workers)
  {
    Key local;
    std::vector<double> side_a(s), side_b(s);
#pragma omp for schedule(dynamic, 1) nowait
    for (std::int64_t m = -nm; m <= nm; ++m) {
      if (deadline.expired()) continue;
      for (std::int64_t n = -nm; n <= nm; ++n) {
        double best_a = kInf, best_b = kInf;
        for (std::size_t i = 0; i < s; ++i) {
          const auto& ei = e[i];
          side_a[i] = std::max({cx.anchor[i], ei[cx.at(m)], ei[cx.at(n)], ei[cx.at(m + n)]});
          best_a = std::min(best_a, side_a[i]);
          const auto& fi = f[i];
          side_b[i] = std::max({cy.anchor[i], fi[cy.at(m)], fi[cy.at(n)], fi[cy.at(m + n)]});
          best_b = std::min(best_b, side_b[i]);
        }
        const double eps = std::max(best_a, best_b);
        if (eps > local.eps + kSlack) continue;
        int bi = 0, bj = 0;
        while (side_a[static_cast<std::size_t>(bi)] > eps) ++bi;
        while (side_b[static_cast<std::size_t>(bj)] > eps) ++bj;
        const Key k{eps, m, n, bi, bj};
        if (better(k, local)) local = k;
      }
    }
#pragma omp critical(nilscope_rpds_merge)
    if (better(local, best)) best = local;
  }
  return make_record<System>(Relation::RPDS, best, x, y, cx, cy, !deadline.hit(), nm);
}

template <class System>
CubeCertificate<typename System::point_type> witness_to_cube(
    const WitnessRecord<typename System::point_type>& record, const System& sys, int workers) {
  if (record.relation != Relation::RP2) {
    throw std::invalid_argument("witness_to_cube: record must be an RP2 witness, got " +
                                to_string(record.relation));
  }
  const auto a = sys.iterate(record.x_prime, record.m);
  const auto b = sys.iterate(record.x_prime, record.n);
  const auto c = sys.iterate(record.x_prime, record.m + record.n);
  CubeCertificate<typename System::point_type> cert;
  cert.oct = {record.x, record.y, a, a, b, b, c, c};
  cert.fit = pped_residual(sys, cert.oct, std::max<std::int64_t>(1, record.n_max), workers);
  return cert;
}

#define NILSCOPE_INSTANTIATE_PROX(Sys)                                                          \
  template WitnessRecord<Sys::point_type> rp_search<Sys>(const Sys&, const Sys::point_type&,   \
                                                         const Sys::point_type&,                \
                                                         const SearchBudget&);                  \
  template WitnessRecord<Sys::point_type> rp2_search<Sys>(const Sys&, const Sys::point_type&,  \
                                                          const Sys::point_type&,               \
                                                          const SearchBudget&);                 \
  template WitnessRecord<Sys::point_type> rpds_search<Sys>(const Sys&, const Sys::point_type&, \
                                                           const Sys::point_type&,              \
                                                           const SearchBudget&);                \
  template CubeCertificate<Sys::point_type> witness_to_cube<Sys>(                               \
      const WitnessRecord<Sys::point_type>&, const Sys&, int);

NILSCOPE_INSTANTIATE_PROX(HeisenbergSystem)
NILSCOPE_INSTANTIATE_PROX(RotationSystem)

}  // namespace nilscope
