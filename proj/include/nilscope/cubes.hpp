#pragma once

// Dynamical parallelograms (subsets of X^4) and parallelepipeds (X^8).
//
// Vertex i of a cube configuration sits at label (i & 1, (i >> 1) & 1,
// (i >> 2) & 1); the orbit sample with shifts (m, n, p) places
// T^{b0 m + b1 n + b2 p} x at label (b0, b1, b2):
//
//   (x, T^m x, T^n x, T^{m+n} x, T^p x, T^{m+p} x, T^{n+p} x, T^{m+n+p} x).

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nilscope/systems.hpp"

namespace nilscope {

template <class P>
using Quad = std::array<P, 4>;
template <class P>
using Oct = std::array<P, 8>;

struct Shifts {
  std::int64_t m{0};
  std::int64_t n{0};
  std::int64_t p{0};

  std::int64_t shell() const;
  friend bool operator==(const Shifts&, const Shifts&) = default;
};

/// Offset of vertex `vertex` (0..7) in the orbit sample with the given shifts.
std::int64_t vertex_shift(int vertex, const Shifts& s);

template <class System>
Quad<typename System::point_type> sample_pgram(const System& sys,
                                               const typename System::point_type& base,
                                               std::int64_t m, std::int64_t n);

template <class System>
Oct<typename System::point_type> sample_pped(const System& sys,
                                             const typename System::point_type& base,
                                             std::int64_t m, std::int64_t n, std::int64_t p);

/// Flat torus distance from pi(v0) - pi(v1) - pi(v2) + pi(v3) to 0.
/// Exact membership test for the parallelogram set of the distal systems
/// implemented here: a quadruple is a member iff the residual vanishes.
double pgram_residual(const Quad<NilPoint>& q);
double pgram_residual(const Quad<TorusPoint>& q);

inline constexpr double kDefaultPgramTol = 1e-9;

template <class P>
bool is_pgram_member(const Quad<P>& q, double tol = kDefaultPgramTol) {
  return pgram_residual(q) < tol;
}

/// Face of the cube orthogonal to `axis` (1 = p, 2 = n, 3 = m direction),
/// on side 0 or 1, in cube order. face(o, 1, 0) = (v0, v1, v2, v3);
/// face(o, 3, 1) = (v1, v3, v5, v7). Throws std::out_of_range.
template <class P>
Quad<P> face(const Oct<P>& o, int axis, int side);

/// Vertex indices of face(axis, side).
std::array<int, 4> face_indices(int axis, int side);

inline constexpr int kSquareSymmetries = 8;
inline constexpr int kCubeSymmetries = 48;

/// Vertex map of a euclidean symmetry. perm_id = perm_index * 2^d + mask,
/// where perm_index enumerates the d! permutations of the label digits in
/// lexicographic order and mask reflects digit j when bit j is set. The
/// relabeled configuration is out[i] = in[map[i]]; perm_id 0 is the identity.
std::array<int, 4> square_symmetry(int perm_id);
std::array<int, 8> cube_symmetry(int perm_id);

template <class P>
Quad<P> euclid_perm_quad(const Quad<P>& q, int perm_id);
template <class P>
Oct<P> euclid_perm_oct(const Oct<P>& o, int perm_id);

struct PpedFit {
  double residual{0.0};
  Shifts witness;
};

/// min over (m, n, p) in [-H, H]^3 of max over the 8 vertices of the
/// distance between sample_pped(v0, m, n, p) and o. One-sided: a small value
/// certifies proximity to the parallelepiped set; a large value at a finite
/// horizon proves nothing. Ties are broken by shell |m|+|n|+|p|, then (m,n,p)
/// lexicographically, so the result does not depend on `workers`.
template <class System>
PpedFit pped_residual(const System& sys, const Oct<typename System::point_type>& o,
                      std::int64_t horizon, int workers = 1);

/// Unpruned serial scan of the same objective, kept as a test oracle.
template <class System>
PpedFit pped_residual_reference(const System& sys, const Oct<typename System::point_type>& o,
                                std::int64_t horizon);

struct CompletionOptions {
  std::int64_t horizon{200};
  double resid_tol{1e-3};
  double face_tol{1e-6};
  /// Witnesses with residual <= spread_factor * best feed the spread.
  double spread_factor{2.0};
  int workers{1};
};

enum class CompletionStatus { complete, inconclusive, face_rejected };
std::string to_string(CompletionStatus s);

template <class P>
struct CompletionResult {
  CompletionStatus status{CompletionStatus::inconclusive};
  P x7{};
  double residual{0.0};
  Shifts witness;
  /// max distance between x7 and the eighth vertex of every near-optimal witness
  double spread{0.0};
  std::int64_t near_witnesses{0};
  /// Set when status == face_rejected: vertex indices of the failing face and its residual.
  std::optional<std::array<int, 4>> bad_face;
  double bad_face_residual{0.0};
};

/// Finds x7 with (v0, ..., v6, x7) close to an orbit sample from v0. The
/// faces (0,1,2,3), (0,1,4,5), (0,2,4,6) must pass the parallelogram test at
/// face_tol; otherwise the first failing face is reported and no search runs.
/// A best residual above resid_tol yields `inconclusive` with the best-so-far.
template <class System>
CompletionResult<typename System::point_type> pped_complete(
    const System& sys, const std::array<typename System::point_type, 7>& seven,
    const CompletionOptions& opts = {});

}  // namespace nilscope
