#include "nilscope/cubes.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace nilscope {

std::int64_t Shifts::shell() const { return std::abs(m) + std::abs(n) + std::abs(p); }

std::int64_t vertex_shift(int vertex, const Shifts& s) {
  return ((vertex & 1) ? s.m : 0) + ((vertex & 2) ? s.n : 0) + ((vertex & 4) ? s.p : 0);
}

std::string to_string(CompletionStatus s) {
  switch (s) {
    case CompletionStatus::complete:
      return "complete";
    case CompletionStatus::inconclusive:
      return "inconclusive";
    case CompletionStatus::face_rejected:
      return "face_rejected";
  }
  return "unknown";
}

template <class System>
Quad<typename System::point_type> sample_pgram(const System& sys,
                                               const typename System::point_type& base,
                                               std::int64_t m, std::int64_t n) {
  return {base, sys.iterate(base, m), sys.iterate(base, n), sys.iterate(base, m + n)};
}

template <class System>
Oct<typename System::point_type> sample_pped(const System& sys,
                                             const typename System::point_type& base,
                                             std::int64_t m, std::int64_t n, std::int64_t p) {
  const Shifts s{m, n, p};
  Oct<typename System::point_type> o;
  for (int v = 0; v < 8; ++v) o[v] = v == 0 ? base : sys.iterate(base, vertex_shift(v, s));
  return o;
}

namespace {

double alternating_residual(const std::array<TorusPoint, 4>& t) {
  double r = 0.0;
  for (int i = 0; i < t[0].dims; ++i) {
    const double s = t[0].coords[i] - t[1].coords[i] - t[2].coords[i] + t[3].coords[i];
    r = std::max(r, circle_dist(s));
  }
  return r;
}

}  // namespace

double pgram_residual(const Quad<NilPoint>& q) {
  return alternating_residual({factor_pi(q[0]), factor_pi(q[1]), factor_pi(q[2]), factor_pi(q[3])});
}

double pgram_residual(const Quad<TorusPoint>& q) { return alternating_residual(q); }

std::array<int, 4> face_indices(int axis, int side) {
  if (axis < 1 || axis > 3) throw std::out_of_range("face: axis must be 1, 2 or 3");
  if (side != 0 && side != 1) throw std::out_of_range("face: side must be 0 or 1");
  const int fixed = 3 - axis;  // label digit held constant
  std::array<int, 2> free{};
  for (int d = 0, k = 0; d < 3; ++d) {
    if (d != fixed) free[k++] = d;
  }
  std::array<int, 4> idx{};
  for (int j = 0; j < 4; ++j) {
    idx[j] = (side << fixed) | ((j & 1) << free[0]) | (((j >> 1) & 1) << free[1]);
  }
  return idx;
}

template <class P>
Quad<P> face(const Oct<P>& o, int axis, int side) {
  const auto idx = face_indices(axis, side);
  return {o[idx[0]], o[idx[1]], o[idx[2]], o[idx[3]]};
}

namespace {

template <int D>
std::array<int, (1 << D)> symmetry_map(int perm_id) {
  constexpr int kVerts = 1 << D;
  std::array<int, D> digits{};
  for (int i = 0; i < D; ++i) digits[i] = i;
  const int mask = perm_id % kVerts;
  for (int k = perm_id / kVerts; k > 0; --k) std::next_permutation(digits.begin(), digits.end());
  std::array<int, kVerts> map{};
  for (int i = 0; i < kVerts; ++i) {
    int src = 0;
    for (int j = 0; j < D; ++j) {
      const int bit = ((i >> digits[j]) & 1) ^ ((mask >> j) & 1);
      src |= bit << j;
    }
    map[i] = src;
  }
  return map;
}

}  // namespace

std::array<int, 4> square_symmetry(int perm_id) {
  if (perm_id < 0 || perm_id >= kSquareSymmetries) {
    throw std::out_of_range("euclid_perm_quad: perm_id must be in [0, 8)");
  }
  return symmetry_map<2>(perm_id);
}

std::array<int, 8> cube_symmetry(int perm_id) {
  if (perm_id < 0 || perm_id >= kCubeSymmetries) {
    throw std::out_of_range("euclid_perm_oct: perm_id must be in [0, 48)");
  }
  return symmetry_map<3>(perm_id);
}

template <class P>
Quad<P> euclid_perm_quad(const Quad<P>& q, int perm_id) {
  const auto map = square_symmetry(perm_id);
  Quad<P> out;
  for (int i = 0; i < 4; ++i) out[i] = q[map[i]];
  return out;
}

template <class P>
Oct<P> euclid_perm_oct(const Oct<P>& o, int perm_id) {
  const auto map = cube_symmetry(perm_id);
  Oct<P> out;
  for (int i = 0; i < 8; ++i) out[i] = o[map[i]];
  return out;
}

namespace {

constexpr double kPruneSlack = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Candidate {
  double residual{kInf};
  Shifts s;
};

// Total order: residual, then shell, then (m, n, p) lexicographically.
bool better(const Candidate& a, const Candidate& b) {
  if (a.residual != b.residual) return a.residual < b.residual;
  return std::make_tuple(a.s.shell(), a.s.m, a.s.n, a.s.p) <
         std::make_tuple(b.s.shell(), b.s.m, b.s.n, b.s.p);
}

// Exhaustive search over [-H, H]^3 against targets on a subset of vertices,
// with base v0. Lower bounds come from the torus projection, which the
// system distance dominates.
template <class System>
class CubeSearch {
 public:
  using P = typename System::point_type;

  CubeSearch(const System& sys, const P& v0, const std::array<P, 8>& targets, unsigned vertex_mask,
             std::int64_t horizon)
      : sys_(sys), targets_(targets), mask_(vertex_mask), h_(horizon), span_(3 * horizon) {
    if (horizon < 1) throw std::invalid_argument("horizon: must be >= 1");
    const std::int64_t len = 2 * span_ + 1;
    orbit_.resize(static_cast<std::size_t>(len));
    for (std::int64_t s = -span_; s <= span_; ++s) orbit_[idx(s)] = sys.iterate(v0, s);
    for (int v = 1; v < 8; ++v) {
      if (!uses(v)) continue;
      lb_[v].resize(static_cast<std::size_t>(len));
      const TorusPoint target = sys.project(targets_[v]);
      for (std::int64_t s = -span_; s <= span_; ++s) {
        lb_[v][idx(s)] = torus_dist(sys.project(orbit_[idx(s)]), target);
      }
    }
  }

  const P& orbit(std::int64_t s) const { return orbit_[idx(s)]; }

  // Exact objective; returns early with a value > cutoff once exceeded.
  double evaluate(const Shifts& s, double cutoff = kInf) const {
    double r = 0.0;
    for (int v = 1; v < 8; ++v) {
      if (!uses(v)) continue;
      r = std::max(r, sys_.distance(orbit(vertex_shift(v, s)), targets_[v]));
      if (r > cutoff) return r;
    }
    return r;
  }

  Candidate minimize(int workers) const {
    Candidate seed;
    seed.s = {argmin_lb(1), argmin_lb(2), argmin_lb(4)};
    seed.residual = evaluate(seed.s);
    Candidate best = seed;
#pragma omp parallel num_threads(std::max(1, workers))
    {
      Candidate local = seed;
#pragma omp for schedule(dynamic, 1) nowait
      for (std::int64_t m = -h_; m <= h_; ++m) {
        visit_m(m, [&](const Shifts& s, double lb) {
          if (lb > local.residual + kPruneSlack) return;
          Candidate c{evaluate(s, local.residual + kPruneSlack), s};
          if (better(c, local)) local = c;
        }, [&] { return local.residual + kPruneSlack; });
      }
#pragma omp critical(nilscope_cube_merge)
      if (better(local, best)) best = local;
    }
    return best;
  }

  // All candidates with objective <= bound, sorted by the candidate order.
  std::vector<Candidate> collect(double bound, int workers) const {
    std::vector<Candidate> all;
#pragma omp parallel num_threads(std::max(1, workers))
    {
      std::vector<Candidate> local;
#pragma omp for schedule(dynamic, 1) nowait
      for (std::int64_t m = -h_; m <= h_; ++m) {
        visit_m(m, [&](const Shifts& s, double lb) {
          if (lb > bound + kPruneSlack) return;
          const double r = evaluate(s, bound);
          if (r <= bound) local.push_back({r, s});
        }, [&] { return bound + kPruneSlack; });
      }
#pragma omp critical(nilscope_cube_collect)
      all.insert(all.end(), local.begin(), local.end());
    }
    std::sort(all.begin(), all.end(), better);
    return all;
  }

 private:
  bool uses(int v) const { return (mask_ >> v) & 1U; }
  std::size_t idx(std::int64_t s) const { return static_cast<std::size_t>(s + span_); }
  double lb(int v, std::int64_t s) const { return uses(v) ? lb_[v][idx(s)] : 0.0; }

  std::int64_t argmin_lb(int v) const {
    std::int64_t best = 0;
    double val = lb(v, 0);
    for (std::int64_t s = -h_; s <= h_; ++s) {
      const double x = lb(v, s);
      if (x < val || (x == val && std::abs(s) < std::abs(best))) {
        val = x;
        best = s;
      }
    }
    return best;
  }

  // Enumerates (m, n, p) for fixed m, skipping branches whose partial lower
  // bound exceeds limit().
  template <class Visit, class Limit>
  void visit_m(std::int64_t m, Visit&& visit, Limit&& limit) const {
    const double lb_m = lb(1, m);
    if (lb_m > limit()) return;
    for (std::int64_t n = -h_; n <= h_; ++n) {
      const double lb_mn = std::max({lb_m, lb(2, n), lb(3, m + n)});
      if (lb_mn > limit()) continue;
      for (std::int64_t p = -h_; p <= h_; ++p) {
        const double b = std::max({lb_mn, lb(4, p), lb(5, m + p), lb(6, n + p), lb(7, m + n + p)});
        if (b > limit()) continue;
        visit(Shifts{m, n, p}, b);
      }
    }
  }

  const System& sys_;
  std::array<P, 8> targets_;
  unsigned mask_;
  std::int64_t h_;
  std::int64_t span_;
  std::vector<P> orbit_;
  std::array<std::vector<double>, 8> lb_;
};

constexpr unsigned kAllVertices = 0xFEU;    // vertices 1..7
constexpr unsigned kFirstSeven = 0x7EU;     // vertices 1..6

}  // namespace

template <class System>
PpedFit pped_residual(const System& sys, const Oct<typename System::point_type>& o,
                      std::int64_t horizon, int workers) {
  const CubeSearch<System> search(sys, o[0], o, kAllVertices, horizon);
  const Candidate c = search.minimize(workers);
  return {c.residual, c.s};
}

template <class System>
PpedFit pped_residual_reference(const System& sys, const Oct<typename System::point_type>& o,
                                std::int64_t horizon) {
  Candidate best;
  for (std::int64_t m = -horizon; m <= horizon; ++m) {
    for (std::int64_t n = -horizon; n <= horizon; ++n) {
      for (std::int64_t p = -horizon; p <= horizon; ++p) {
        const Shifts s{m, n, p};
        const auto sample = sample_pped(sys, o[0], m, n, p);
        double r = 0.0;
        for (int v = 0; v < 8; ++v) r = std::max(r, sys.distance(sample[v], o[v]));
        const Candidate c{r, s};
        if (better(c, best)) best = c;
      }
    }
  }
  return {best.residual, best.s};
}

template <class System>
CompletionResult<typename System::point_type> pped_complete(
    const System& sys, const std::array<typename System::point_type, 7>& seven,
    const CompletionOptions& opts) {
  using P = typename System::point_type;
  CompletionResult<P> result;

  Oct<P> o;
  std::copy(seven.begin(), seven.end(), o.begin());
  o[7] = seven[0];

  // faces through v0 that avoid v7
  for (int axis = 1; axis <= 3; ++axis) {
    const double r = pgram_residual(face(o, axis, 0));
    if (!(r < opts.face_tol)) {
      result.status = CompletionStatus::face_rejected;
      result.bad_face = face_indices(axis, 0);
      result.bad_face_residual = r;
      return result;
    }
  }

  const CubeSearch<System> search(sys, o[0], o, kFirstSeven, opts.horizon);
  const Candidate best = search.minimize(opts.workers);
  result.residual = best.residual;
  result.witness = best.s;
  result.x7 = search.orbit(vertex_shift(7, best.s));
  result.status =
      best.residual <= opts.resid_tol ? CompletionStatus::complete : CompletionStatus::inconclusive;

  const auto near = search.collect(opts.spread_factor * best.residual, opts.workers);
  result.near_witnesses = static_cast<std::int64_t>(near.size());
  for (const Candidate& c : near) {
    result.spread = std::max(result.spread, sys.distance(search.orbit(vertex_shift(7, c.s)), result.x7));
  }
  return result;
}

#define NILSCOPE_INSTANTIATE_CUBES(Sys)                                                           \
  template Quad<Sys::point_type> sample_pgram<Sys>(const Sys&, const Sys::point_type&,           \
                                                   std::int64_t, std::int64_t);                  \
  template Oct<Sys::point_type> sample_pped<Sys>(const Sys&, const Sys::point_type&, std::int64_t, \
                                                 std::int64_t, std::int64_t);                    \
  template PpedFit pped_residual<Sys>(const Sys&, const Oct<Sys::point_type>&, std::int64_t, int); \
  template PpedFit pped_residual_reference<Sys>(const Sys&, const Oct<Sys::point_type>&,         \
                                                std::int64_t);                                   \
  template CompletionResult<Sys::point_type> pped_complete<Sys>(                                  \
      const Sys&, const std::array<Sys::point_type, 7>&, const CompletionOptions&);

NILSCOPE_INSTANTIATE_CUBES(HeisenbergSystem)
NILSCOPE_INSTANTIATE_CUBES(RotationSystem)

template Quad<NilPoint> face<NilPoint>(const Oct<NilPoint>&, int, int);
template Quad<TorusPoint> face<TorusPoint>(const Oct<TorusPoint>&, int, int);
template Quad<NilPoint> euclid_perm_quad<NilPoint>(const Quad<NilPoint>&, int);
template Quad<TorusPoint> euclid_perm_quad<TorusPoint>(const Quad<TorusPoint>&, int);
template Oct<NilPoint> euclid_perm_oct<NilPoint>(const Oct<NilPoint>&, int);
template Oct<TorusPoint> euclid_perm_oct<TorusPoint>(const Oct<TorusPoint>&, int);

}  // namespace nilscope
