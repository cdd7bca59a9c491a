#pragma once

#include <random>

#include "detline/fredholm_lines.hpp"
#include "detline/graded_lines.hpp"

namespace detline::instances {

using detline::cplx;
using detline::Mat;

inline Mat random_matrix(std::mt19937_64& rng, long rows, long cols) {
    std::normal_distribution<double> nd;
    Mat m(rows, cols);
    for (long j = 0; j < cols; ++j)
        for (long i = 0; i < rows; ++i) m(i, j) = cplx(nd(rng), nd(rng));
    return m;
}

/// Random matrix of prescribed rank.
inline Mat random_rank(std::mt19937_64& rng, long rows, long cols, long r) {
    if (r == 0 || rows == 0 || cols == 0) return Mat::Zero(rows, cols);
    return random_matrix(rng, rows, r) * random_matrix(rng, r, cols);
}

inline Mat random_invertible(std::mt19937_64& rng, long n) {
    return random_matrix(rng, n, n) + 3.0 * Mat::Identity(n, n);
}

/// Random exact triangle: ranks r[0..5] of i+, q+, d+, i-, q-, d-.
inline detline::ExactTriangle random_triangle(std::mt19937_64& rng, const int r[6]) {
    using detline::GradedVectorSpace;
    const int up = r[5] + r[0], vp = r[0] + r[1], wp = r[1] + r[2];
    const int um = r[2] + r[3], vm = r[3] + r[4], wm = r[4] + r[5];
    // adapted coordinates: each space = (image of incoming) (+) (complement), incoming first
    auto adapted = [&](int in_rank, int out_rank, int tgt_in_rank, int tgt_dim, int src_dim) {
        (void)tgt_in_rank;
        Mat f = Mat::Zero(tgt_dim, src_dim);
        if (out_rank) f.block(0, in_rank, out_rank, out_rank) = random_invertible(rng, out_rank);
        return f;
    };
    detline::ExactTriangle t;
    t.U = GradedVectorSpace::of_dims(up, um, "u");
    t.V = GradedVectorSpace::of_dims(vp, vm, "v");
    t.W = GradedVectorSpace::of_dims(wp, wm, "w");
    t.i_plus = adapted(r[5], r[0], r[0], vp, up);
    t.q_plus = adapted(r[0], r[1], r[1], wp, vp);
    t.d_plus = adapted(r[1], r[2], r[2], um, wp);
    t.i_minus = adapted(r[2], r[3], r[3], vm, um);
    t.q_minus = adapted(r[3], r[4], r[4], wm, vm);
    t.d_minus = adapted(r[4], r[5], r[5], up, wm);
    // random changes of basis
    const Mat gu_p = random_invertible(rng, up), gv_p = random_invertible(rng, vp), gw_p = random_invertible(rng, wp);
    const Mat gu_m = random_invertible(rng, um), gv_m = random_invertible(rng, vm), gw_m = random_invertible(rng, wm);
    t.i_plus = gv_p * t.i_plus * gu_p.inverse();
    t.q_plus = gw_p * t.q_plus * gv_p.inverse();
    t.d_plus = gu_m * t.d_plus * gw_p.inverse();
    t.i_minus = gv_m * t.i_minus * gu_m.inverse();
    t.q_minus = gw_m * t.q_minus * gv_m.inverse();
    t.d_minus = gu_p * t.d_minus * gw_m.inverse();
    return t;
}

inline BoxIndicator ray(long a) { return BoxIndicator::make(Interval::at_least(a)); }
inline BoxIndicator below(long a) { return BoxIndicator::make(Interval::below(a)); }
inline BoxIndicator point(long a) { return BoxIndicator::make(Interval::range(a, a + 1)); }

/// One-dimensional lattice space with slots supported on a ray, the whole line and a lower ray.
inline SlotSpace two_slot_space(std::mt19937_64& rng) {
    const long a = -3 + long(rng() % 5), b = -3 + long(rng() % 5);
    SlotSpace s;
    s.dim = 1;
    s.add("s0", {ray(a)});
    s.add("s1", {BoxIndicator::all()});
    s.add("s2", {below(b)});
    return s;
}

/// Background matrix on the whole line with fibers replaced on [lo, hi) by random matrices
/// that are rank deficient with probability 1/2.
inline FiberedLatticeOp random_fredholm(std::mt19937_64& rng, const SlotSpace& dom, const SlotSpace& cod, long lo,
                                        long hi) {
    using Term = FiberedLatticeOp::Term;
    const long r = static_cast<long>(cod.size()), c = static_cast<long>(dom.size());
    const Mat b = random_invertible(rng, std::max(r, c)).topLeftCorner(r, c);
    std::vector<Term> terms;
    for (long i = 0; i < r; ++i)
        for (long j = 0; j < c; ++j) terms.push_back({int(i), int(j), b(i, j), BoxIndicator::all()});
    for (long x = lo; x < hi; ++x) {
        const Mat f = (rng() % 2) ? random_rank(rng, r, c, std::max(0L, std::min(r, c) - 1)) : random_matrix(rng, r, c);
        for (long i = 0; i < r; ++i)
            for (long j = 0; j < c; ++j) terms.push_back({int(i), int(j), f(i, j) - b(i, j), point(x)});
    }
    return FiberedLatticeOp(dom, cod, terms);
}

/// Finite rank perturbation of t: on about half of the fibers in [lo, hi) either zeroed or
/// shifted by a random matrix.
inline FiberedLatticeOp perturb(std::mt19937_64& rng, const FiberedLatticeOp& t, long lo, long hi) {
    using Term = FiberedLatticeOp::Term;
    std::vector<Term> terms = t.entries();
    const size_t r = t.codomain().size(), c = t.domain().size();
    for (long x = lo; x < hi; ++x) {
        if (rng() % 2) continue;
        const Mat f = (rng() % 2) ? Mat(-t.full_fiber({x, 0})) : random_matrix(rng, long(r), long(c));
        for (size_t i = 0; i < r; ++i)
            for (size_t j = 0; j < c; ++j) terms.push_back({int(i), int(j), f(long(i), long(j)), point(x)});
    }
    return FiberedLatticeOp(t.domain(), t.codomain(), terms);
}

inline SlotSpace space1(const std::vector<std::vector<BoxIndicator>>& sup) {
    SlotSpace s;
    s.dim = 1;
    for (size_t j = 0; j < sup.size(); ++j) s.add("s" + std::to_string(j), sup[j]);
    return s;
}

/// Slot space with n slots, all supports empty except for the given boxes in one slot.
inline SlotSpace slots_with(size_t n, size_t slot, std::vector<BoxIndicator> boxes) {
    std::vector<std::vector<BoxIndicator>> sup(n);
    sup[slot] = std::move(boxes);
    return space1(sup);
}

/// Constant invertible matrix acting fiberwise from dom to cod (same slot count).
inline FiberedLatticeOp random_invertible_on(std::mt19937_64& rng, const SlotSpace& dom, const SlotSpace& cod) {
    using Term = FiberedLatticeOp::Term;
    const Mat b = random_invertible(rng, long(dom.size()));
    std::vector<Term> terms;
    for (int i = 0; i < int(cod.size()); ++i)
        for (int j = 0; j < int(dom.size()); ++j) terms.push_back({i, j, b(i, j), BoxIndicator::all()});
    return FiberedLatticeOp(dom, cod, terms);
}

/// Three slots: the operator lives on slot 0 (x >= a) and slot 1; the complement is
/// slot 0 (x < a) together with slot 2 (x >= a), one dimension on every fiber.
inline SlotSpace main_part(long a) { return space1({{ray(a)}, {BoxIndicator::all()}, {}}); }
inline SlotSpace complement_part(long a) { return space1({{below(a)}, {}, {ray(a)}}); }

}  // namespace detline::instances
