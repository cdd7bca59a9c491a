#pragma once

#include <cstdint>
#include <vector>

#include "detline/graded_lines.hpp"
#include "detline/lattice_ops.hpp"

namespace detline {

/// Per-operator-type plumbing: vector type and basic operations.
template <class Op>
struct OpTraits;

template <>
struct OpTraits<FiberedLatticeOp> {
    using Vec = LVec;
};

template <>
struct OpTraits<WindowOp> {
    using Vec = CVec;
};

/// Determinant line |T| presented by an ordered kernel basis and ordered cokernel
/// representatives orthogonal to the image. Canonical frame: the top wedge of the
/// kernel basis tensored with the dual of the top wedge of the cokernel basis.
template <class Op>
struct DetLinePresentation {
    using Vec = typename OpTraits<Op>::Vec;
    Op op;
    std::vector<Vec> ker;
    std::vector<Vec> coker;

    long degree() const { return static_cast<long>(ker.size()) - static_cast<long>(coker.size()); }
};

using FiberedLine = DetLinePresentation<FiberedLatticeOp>;
using WindowLine = DetLinePresentation<WindowOp>;

/// Element of a determinant line, as a coefficient against the canonical frame.
template <class Op>
struct DetLineElement {
    DetLinePresentation<Op> line;
    cplx coefficient = 1.0;
};

FiberedLine det_line(const FiberedLatticeOp& t);
WindowLine det_line(const WindowOp& t, double tol = kWindowTol);

/// Composition s o t of operators of the same kind.
FiberedLatticeOp compose_ops(const FiberedLatticeOp& s, const FiberedLatticeOp& t);
WindowOp compose_ops(const WindowOp& s, const WindowOp& t);

/// Torsion isomorphism |T| (x) |S| -> |ST| as a coefficient on canonical frames.
/// Computed as Det(Delta(S,T))^{-1} through torsion_of_triangle.
template <class Op>
cplx torsion(const DetLinePresentation<Op>& t, const DetLinePresentation<Op>& s,
             const DetLinePresentation<Op>& st);

cplx torsion(const FiberedLatticeOp& t, const FiberedLatticeOp& s);

/// The exact triangle Delta(S,T) realized in the kernel/cokernel bases.
template <class Op>
ExactTriangle torsion_triangle(const DetLinePresentation<Op>& t, const DetLinePresentation<Op>& s,
                               const DetLinePresentation<Op>& st);

enum class Completion { Canonical, Random };

/// Perturbation isomorphism |T1| -> |T2| as a coefficient on canonical frames.
/// Index-zero pairs use finite rank completions; other pairs are padded with 0_{m,n}.
template <class Op>
cplx perturbation(const DetLinePresentation<Op>& t1, const DetLinePresentation<Op>& t2,
                  Completion completion = Completion::Canonical, std::uint64_t seed = 0);

cplx perturbation(const FiberedLatticeOp& t1, const FiberedLatticeOp& t2);

/// Monomial map of lattice vectors: coordinate (x, j) -> scale[j] * (x + shift, slot_map[j]).
struct VectorMap {
    Point shift{0, 0};
    std::vector<int> slot_map;
    std::vector<cplx> scale;
    size_t target_slots = 0;

    static VectorMap inclusion(size_t slots);
    static VectorMap embedding(const std::vector<int>& slot_map, size_t target_slots);
    LVec apply(const LVec& v) const;
};

/// |phi, psi| : |T| -> |T'| for a quasi-isomorphism (phi, psi) with psi T = T' phi.
cplx quasi_map(const VectorMap& phi, const VectorMap& psi, const FiberedLine& t, const FiberedLine& tp);

/// Window version: phi and psi are ambient window matrices.
cplx quasi_map(const Mat& phi, const Mat& psi, const WindowLine& t, const WindowLine& tp);

/// Operator T + Gamma on the slotwise union of supports. Throws NotComplementary
/// unless the supports are disjoint and Gamma is invertible.
FiberedLatticeOp stabilized_operator(const FiberedLatticeOp& t, const FiberedLatticeOp& gamma);

/// Stabilisation isomorphism |T| -> |T + Gamma|, induced by the inclusions.
cplx stabilize(const FiberedLine& t, const FiberedLatticeOp& gamma);
cplx stabilize(const FiberedLine& t, const FiberedLine& t_plus_gamma);

}  // namespace detline
