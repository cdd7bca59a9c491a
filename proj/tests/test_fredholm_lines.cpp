#include <random>

#include "detline/fredholm_lines.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace detline;
using Term = FiberedLatticeOp::Term;
using testsupport::random_invertible;
using testsupport::random_matrix;
using testsupport::random_rank;

namespace {

BoxIndicator ray(long a) { return BoxIndicator::make(Interval::at_least(a)); }
BoxIndicator below(long a) { return BoxIndicator::make(Interval::below(a)); }
BoxIndicator range(long a, long b) { return BoxIndicator::make(Interval::range(a, b)); }
BoxIndicator point(long a) { return range(a, a + 1); }

SlotSpace space1(const std::vector<std::vector<BoxIndicator>>& sup) {
    SlotSpace s;
    s.dim = 1;
    for (size_t j = 0; j < sup.size(); ++j) s.add("s" + std::to_string(j), sup[j]);
    return s;
}

// Background matrix b on the whole line with fibers replaced on [lo, hi) by random
// matrices that are rank deficient with probability 1/2.
FiberedLatticeOp random_fredholm(std::mt19937_64& rng, const SlotSpace& dom, const SlotSpace& cod, long lo,
                                 long hi) {
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

FiberedLatticeOp perturb(std::mt19937_64& rng, const FiberedLatticeOp& t, long lo, long hi) {
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

// Dense coordinates of a lattice vector on the window [-L, L) of a 1D lattice.
constexpr long kL = 20;

CVec dense(const LVec& v, size_t slots) {
    CVec out = CVec::Zero(long(2 * kL * slots));
    for (const auto& [x, c] : v) {
        REQUIRE(x[0] >= -kL);
        REQUIRE(x[0] < kL);
        for (long j = 0; j < c.size(); ++j) out((x[0] + kL) * long(slots) + j) = c(j);
    }
    return out;
}

Mat dense_cols(const std::vector<LVec>& vs, size_t slots) {
    Mat m(long(2 * kL * slots), long(vs.size()));
    for (size_t k = 0; k < vs.size(); ++k) m.col(long(k)) = dense(vs[k], slots);
    return m;
}

// Least squares coordinates of the columns of y against the columns of b.
Mat coords(const Mat& b, const Mat& y) {
    if (b.cols() == 0) return Mat(0, y.cols());
    return b.colPivHouseholderQr().solve(y);
}

// Coefficient of the map |T| -> |T'| induced by (phi on kernels, psi on cokernels)
// using only dense linear algebra.
cplx dense_frame_map(const Mat& ker_img, const Mat& ker_tgt, const Mat& cok_img, const Mat& cok_tgt) {
    const Mat a = coords(ker_tgt, ker_img);
    CHECK((ker_tgt * a - ker_img).norm() < 1e-9 * std::max(1.0, ker_img.norm()));
    const Mat b = coords(cok_tgt, cok_img);
    return det(a) / det(b);
}

LVec apply_inverse(const FiberedLatticeOp& s, const LVec& v) {
    LVec out;
    for (const auto& [x, c] : v) {
        const Mat f = s.full_fiber(x);
        out[x] = f.partialPivLu().solve(c);
    }
    return out;
}

SlotSpace two_slot_space(std::mt19937_64& rng) {
    const long a = -3 + long(rng() % 5), b = -3 + long(rng() % 5);
    return space1({{ray(a)}, {BoxIndicator::all()}, {below(b)}});
}

}  // namespace

TEST_SUITE("fredholm_lines") {
    TEST_CASE("invertible operator has the trivial line") {
        const SlotSpace h = space1({{BoxIndicator::all()}, {BoxIndicator::all()}});
        const FiberedLine l = det_line(FiberedLatticeOp::identity(h));
        CHECK(l.degree() == 0);
        CHECK(l.ker.empty());
        CHECK(l.coker.empty());
        CHECK(std::abs(torsion(FiberedLatticeOp::identity(h), FiberedLatticeOp::identity(h)) - 1.0) < 1e-14);
    }

    TEST_CASE("torsion with an invertible left factor is L(S)") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 40; ++trial) {
            const SlotSpace h = two_slot_space(rng), g = two_slot_space(rng);
            const FiberedLatticeOp t = random_fredholm(rng, h, g, -4, 4);
            // S invertible on every fiber, varying on a box
            std::vector<Term> st;
            const Mat b = random_invertible(rng, 3);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) st.push_back({i, j, b(i, j), BoxIndicator::all()});
            FiberedLatticeOp s(g, g, st);
            if (!det_line(s).ker.empty() || !det_line(s).coker.empty()) continue;
            const FiberedLine lt = det_line(t), ls = det_line(s), lst = det_line(compose(s, t));
            const cplx got = torsion(lt, ls, lst);
            std::vector<LVec> s_coker;
            for (const auto& c : lt.coker) s_coker.push_back(s.apply(c));
            const cplx want = dense_frame_map(dense_cols(lt.ker, 3), dense_cols(lst.ker, 3), dense_cols(s_coker, 3),
                                              dense_cols(lst.coker, 3));
            CHECK(rel_diff(got, want) < 1e-9);
        }
    }

    TEST_CASE("torsion with an invertible right factor is R(T)") {
        std::mt19937_64 rng(12);
        for (int trial = 0; trial < 40; ++trial) {
            const SlotSpace h = two_slot_space(rng), g = two_slot_space(rng);
            std::vector<Term> terms;
            const Mat b = random_invertible(rng, 3);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) terms.push_back({i, j, b(i, j), BoxIndicator::all()});
            for (long x = -3; x < 3; ++x) {
                const Mat f = random_invertible(rng, 3);
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) terms.push_back({i, j, f(i, j) - b(i, j), point(x)});
            }
            const FiberedLatticeOp sigma(h, h, terms);
            if (!det_line(sigma).ker.empty() || !det_line(sigma).coker.empty()) continue;
            const FiberedLatticeOp t = random_fredholm(rng, h, g, -4, 4);
            const FiberedLine ls = det_line(sigma), lt = det_line(t), lts = det_line(compose(t, sigma));
            const cplx got = torsion(ls, lt, lts);
            std::vector<LVec> pulled;
            for (const auto& k : lt.ker) pulled.push_back(apply_inverse(sigma, k));
            const cplx want = dense_frame_map(dense_cols(pulled, 3), dense_cols(lts.ker, 3), dense_cols(lt.coker, 3),
                                              dense_cols(lts.coker, 3));
            CHECK(rel_diff(got, want) < 1e-9);
        }
    }

    TEST_CASE("torsion is associative") {
        std::mt19937_64 rng(13);
        for (int trial = 0; trial < 40; ++trial) {
            const SlotSpace h = two_slot_space(rng), g = two_slot_space(rng), k = two_slot_space(rng),
                            l = two_slot_space(rng);
            const FiberedLatticeOp t = random_fredholm(rng, h, g, -4, 3), s = random_fredholm(rng, g, k, -3, 4),
                                   r = random_fredholm(rng, k, l, -4, 4);
            const FiberedLine lt = det_line(t), ls = det_line(s), lr = det_line(r);
            const FiberedLine lst = det_line(compose(s, t)), lrs = det_line(compose(r, s));
            const FiberedLine lrst = det_line(compose(r, compose(s, t)));
            const cplx left = torsion(ls, lr, lrs) * torsion(lt, lrs, lrst);
            const cplx right = torsion(lt, ls, lst) * torsion(lst, lr, lrst);
            CHECK(rel_diff(left, right) < 1e-9);
        }
    }

    TEST_CASE("perturbation of identical operators is the identity") {
        std::mt19937_64 rng(21);
        for (int trial = 0; trial < 20; ++trial) {
            const SlotSpace h = two_slot_space(rng), g = two_slot_space(rng);
            const FiberedLatticeOp t = random_fredholm(rng, h, g, -4, 4);
            const FiberedLine l = det_line(t);
            CHECK(std::abs(perturbation(l, l) - 1.0) < 1e-10);
        }
    }

    TEST_CASE("perturbation of invertible operators is the Fredholm determinant") {
        const SlotSpace h = space1({{BoxIndicator::all()}, {BoxIndicator::all()}});
        const cplx delta(0.25, -0.5);
        const FiberedLatticeOp t1(h, h, {Term{0, 0, 2.0, BoxIndicator::all()}, Term{1, 1, cplx(0, 1), BoxIndicator::all()}});
        const FiberedLatticeOp t2(h, h, {Term{0, 0, 2.0, BoxIndicator::all()}, Term{1, 1, cplx(0, 1), BoxIndicator::all()},
                                         Term{1, 1, cplx(0, 1) * delta, point(3)}});
        CHECK(rel_diff(perturbation(t1, t2), 1.0 + delta) < 1e-14);
        CHECK(rel_diff(perturbation(t2, t1), 1.0 / (1.0 + delta)) < 1e-14);
    }

    TEST_CASE("perturbation cocycle conditions") {
        std::mt19937_64 rng(22);
        for (int trial = 0; trial < 60; ++trial) {
            const SlotSpace h = two_slot_space(rng), g = two_slot_space(rng);
            const FiberedLatticeOp t1 = random_fredholm(rng, h, g, -4, 4);
            const FiberedLatticeOp t2 = perturb(rng, t1, -5, 5), t3 = perturb(rng, t2, -5, 5);
            const FiberedLine l1 = det_line(t1), l2 = det_line(t2), l3 = det_line(t3);
            const cplx p12 = perturbation(l1, l2), p23 = perturbation(l2, l3), p13 = perturbation(l1, l3);
            CHECK(rel_diff(p23 * p12, p13) < 1e-9);
            CHECK(rel_diff(perturbation(l2, l1) * p12, 1.0) < 1e-9);
        }
    }

    TEST_CASE("perturbation agrees with the finite rank characterisation") {
        std::mt19937_64 rng(23);
        for (int trial = 0; trial < 40; ++trial) {
            const SlotSpace h = two_slot_space(rng), g = two_slot_space(rng);
            const FiberedLatticeOp t1 = random_fredholm(rng, h, g, -4, 4);
            const FiberedLatticeOp t2 = perturb(rng, t1, -5, 5);
            // V: the domain with the fibers in [-5, 5) removed
            SlotSpace v;
            v.dim = 1;
            for (size_t j = 0; j < h.size(); ++j) {
                std::vector<BoxIndicator> sup;
                for (const auto& bx : h.supports[j]) {
                    for (const auto& piece : {below(-5), ray(5)}) {
                        const BoxIndicator cut = bx.intersect(piece);
                        if (!cut.empty()) sup.push_back(cut);
                    }
                }
                v.add(h.labels[j], sup);
            }
            std::vector<Term> inc;
            for (int j = 0; j < int(h.size()); ++j) inc.push_back({j, j, 1.0, BoxIndicator::all()});
            const FiberedLatticeOp iota(v, h, inc);
            const FiberedLatticeOp c1 = compose(t1, iota), c2 = compose(t2, iota);
            REQUIRE(approx_equal(c1, c2));
            const FiberedLine li = det_line(iota), lc = det_line(c1);
            const FiberedLine l1 = det_line(t1), l2 = det_line(t2);
            const cplx want = torsion(li, l1, lc) / torsion(li, l2, lc);
            CHECK(rel_diff(perturbation(l1, l2), want) < 1e-9);
        }
    }

    TEST_CASE("perturbation does not depend on the completions") {
        std::mt19937_64 rng(24);
        for (int trial = 0; trial < 40; ++trial) {
            const SlotSpace h = two_slot_space(rng), g = two_slot_space(rng);
            const FiberedLatticeOp t1 = random_fredholm(rng, h, g, -4, 4);
            const FiberedLatticeOp t2 = perturb(rng, t1, -5, 5);
            const FiberedLine l1 = det_line(t1), l2 = det_line(t2);
            const cplx base = perturbation(l1, l2);
            for (std::uint64_t seed = 1; seed <= 3; ++seed)
                CHECK(rel_diff(perturbation(l1, l2, Completion::Random, seed), base) < 1e-9);
        }
    }

    TEST_CASE("perturbation commutes with torsion") {
        std::mt19937_64 rng(25);
        for (int trial = 0; trial < 40; ++trial) {
            const SlotSpace h = two_slot_space(rng), g = two_slot_space(rng), k = two_slot_space(rng);
            const FiberedLatticeOp t1 = random_fredholm(rng, h, g, -4, 4), s1 = random_fredholm(rng, g, k, -4, 4);
            const FiberedLatticeOp t2 = perturb(rng, t1, -5, 5), s2 = perturb(rng, s1, -5, 5);
            const FiberedLine lt1 = det_line(t1), lt2 = det_line(t2), ls1 = det_line(s1), ls2 = det_line(s2);
            const FiberedLine l1 = det_line(compose(s1, t1)), l2 = det_line(compose(s2, t2));
            const cplx left = torsion(lt2, ls2, l2) * perturbation(lt1, lt2) * perturbation(ls1, ls2);
            const cplx right = perturbation(l1, l2) * torsion(lt1, ls1, l1);
            CHECK(rel_diff(left, right) < 1e-9);
        }
    }

    TEST_CASE("perturbation errors") {
        const SlotSpace h = space1({{BoxIndicator::all()}});
        const SlotSpace hp = space1({{below(0), ray(1)}});
        const FiberedLatticeOp id = FiberedLatticeOp::identity(h);
        const FiberedLatticeOp two(h, h, {Term{0, 0, 2.0, BoxIndicator::all()}});
        CHECK_THROWS_AS(perturbation(id, two), NotTraceClassDifference);
        const FiberedLatticeOp inc(hp, h, {Term{0, 0, 1.0, BoxIndicator::all()}});
        CHECK(det_line(inc).degree() == -1);
        CHECK_THROWS_AS(perturbation(det_line(id), det_line(inc)), IndexMismatch);
        CHECK_THROWS_AS(perturbation(det_line(id), det_line(FiberedLatticeOp::identity(hp))), NotTraceClassDifference);
    }
}

namespace {

BoxIndicator shifted(const BoxIndicator& b, long s) {
    BoxIndicator out = b;
    if (out.axes[0].lo != kNegInf) out.axes[0].lo += s;
    if (out.axes[0].hi != kPosInf) out.axes[0].hi += s;
    return out;
}

// Image of a slot space under a monomial map (slot permutation and shift).
SlotSpace moved(const SlotSpace& s, const VectorMap& m) {
    std::vector<std::vector<BoxIndicator>> sup(m.target_slots);
    for (size_t j = 0; j < s.size(); ++j)
        for (const auto& b : s.supports[j]) sup[size_t(m.slot_map[j])].push_back(shifted(b, m.shift[0]));
    return space1(sup);
}

// psi T phi^{-1} for monomial maps with bijective slot maps.
FiberedLatticeOp conjugate(const FiberedLatticeOp& t, const VectorMap& phi, const VectorMap& psi) {
    std::vector<Term> terms;
    for (const auto& e : t.entries())
        terms.push_back({psi.slot_map[size_t(e.row)], phi.slot_map[size_t(e.col)],
                         e.coef * psi.scale[size_t(e.row)] / phi.scale[size_t(e.col)], shifted(e.box, phi.shift[0])});
    return FiberedLatticeOp(moved(t.domain(), phi), moved(t.codomain(), psi), terms);
}

VectorMap random_monomial(std::mt19937_64& rng, long shift) {
    std::vector<int> perm{0, 1, 2};
    std::shuffle(perm.begin(), perm.end(), rng);
    VectorMap m = VectorMap::embedding(perm, 3);
    m.shift = {shift, 0};
    std::normal_distribution<double> nd;
    for (auto& c : m.scale) c = cplx(1.0 + std::abs(nd(rng)), nd(rng));
    return m;
}

// Slot space with the same slot count and empty supports except for the given boxes.
SlotSpace slots_with(size_t n, size_t slot, std::vector<BoxIndicator> boxes) {
    std::vector<std::vector<BoxIndicator>> sup(n);
    sup[slot] = std::move(boxes);
    return space1(sup);
}

FiberedLatticeOp random_invertible_on(std::mt19937_64& rng, const SlotSpace& dom, const SlotSpace& cod) {
    const Mat b = random_invertible(rng, long(dom.size()));
    std::vector<Term> terms;
    for (int i = 0; i < int(cod.size()); ++i)
        for (int j = 0; j < int(dom.size()); ++j) terms.push_back({i, j, b(i, j), BoxIndicator::all()});
    return FiberedLatticeOp(dom, cod, terms);
}

// Three slots: the operator lives on slot 0 (x >= a) and slot 1; the complement is
// slot 0 (x < a) together with slot 2 (x >= a), one dimension on every fiber.
SlotSpace main_part(long a) { return space1({{ray(a)}, {BoxIndicator::all()}, {}}); }
SlotSpace complement_part(long a) { return space1({{below(a)}, {}, {ray(a)}}); }

}  // namespace

TEST_SUITE("fredholm_lines") {
    TEST_CASE("quasi map of the identity pair is the identity") {
        std::mt19937_64 rng(31);
        const SlotSpace h = two_slot_space(rng), g = two_slot_space(rng);
        const FiberedLine l = det_line(random_fredholm(rng, h, g, -4, 4));
        CHECK(std::abs(quasi_map(VectorMap::inclusion(3), VectorMap::inclusion(3), l, l) - 1.0) < 1e-12);
    }

    TEST_CASE("quasi map of a monomial conjugation") {
        // T = 1 - e_0 on l^2(Z) with a one dimensional kernel and cokernel at 0
        const SlotSpace h = space1({{BoxIndicator::all()}});
        const FiberedLatticeOp t(h, h, {Term{0, 0, 1.0, below(0)}, Term{0, 0, 1.0, ray(1)}});
        VectorMap phi = VectorMap::inclusion(1), psi = VectorMap::inclusion(1);
        phi.shift = psi.shift = {2, 0};
        phi.scale = {cplx(3.0)};
        psi.scale = {cplx(0.0, 2.0)};
        const FiberedLatticeOp tp = conjugate(t, phi, psi);
        // kernel e_0 -> 3 e_2, cokernel e_0 -> 2i e_2
        CHECK(rel_diff(quasi_map(phi, psi, det_line(t), det_line(tp)), 3.0 / cplx(0.0, 2.0)) < 1e-14);
        CHECK_THROWS_AS(quasi_map(phi, psi, det_line(t), det_line(t)), NotQuasiIso);
    }

    TEST_CASE("torsion commutes with quasi isomorphisms") {
        std::mt19937_64 rng(32);
        for (int trial = 0; trial < 40; ++trial) {
            const SlotSpace h = two_slot_space(rng), g = two_slot_space(rng), k = two_slot_space(rng);
            const FiberedLatticeOp t = random_fredholm(rng, h, g, -4, 4), s = random_fredholm(rng, g, k, -4, 4);
            const long shift = long(rng() % 7) - 3;
            const VectorMap phi = random_monomial(rng, shift), psi = random_monomial(rng, shift),
                            tau = random_monomial(rng, shift);
            const FiberedLatticeOp tp = conjugate(t, phi, psi), sp = conjugate(s, psi, tau);
            const FiberedLine lt = det_line(t), ls = det_line(s), lst = det_line(compose(s, t));
            const FiberedLine ltp = det_line(tp), lsp = det_line(sp), lstp = det_line(compose(sp, tp));
            const cplx left = quasi_map(phi, psi, lt, ltp) * quasi_map(psi, tau, ls, lsp) * torsion(ltp, lsp, lstp);
            const cplx right = torsion(lt, ls, lst) * quasi_map(phi, tau, lst, lstp);
            CHECK(rel_diff(left, right) < 1e-9);
        }
    }

    TEST_CASE("stabilisation by an empty complement is the identity") {
        std::mt19937_64 rng(33);
        const SlotSpace h = two_slot_space(rng), g = two_slot_space(rng);
        const FiberedLatticeOp t = random_fredholm(rng, h, g, -4, 4);
        const SlotSpace empty = space1({{}, {}, {}});
        const FiberedLine l = det_line(t);
        const FiberedLine ls = det_line(stabilized_operator(t, FiberedLatticeOp::zero(empty, empty)));
        CHECK(ls.ker.size() == l.ker.size());
        CHECK(ls.coker.size() == l.coker.size());
        for (size_t j = 0; j < l.ker.size(); ++j) CHECK(norm(axpy(l.ker[j], -1.0, ls.ker[j])) < 1e-14);
        CHECK(std::abs(stabilize(l, FiberedLatticeOp::zero(empty, empty)) - 1.0) < 1e-14);
    }

    TEST_CASE("stabilisation errors") {
        const SlotSpace h = space1({{ray(0)}});
        const FiberedLatticeOp t = FiberedLatticeOp::identity(h);
        const SlotSpace overlap = space1({{below(3)}});
        CHECK_THROWS_AS(stabilized_operator(t, FiberedLatticeOp::identity(overlap)), NotComplementary);
        const SlotSpace comp = space1({{below(0)}});
        const FiberedLatticeOp singular(comp, comp, {Term{0, 0, 1.0, below(-1)}});
        CHECK_THROWS_AS(stabilized_operator(t, singular), NotComplementary);
        CHECK_NOTHROW(stabilized_operator(t, FiberedLatticeOp::identity(comp)));
    }

    TEST_CASE("torsion commutes with stabilisation") {
        std::mt19937_64 rng(34);
        for (int trial = 0; trial < 40; ++trial) {
                        const long a = long(rng() % 3), b = long(rng() % 3), c = long(rng() % 3);
            const SlotSpace h = main_part(a), g = main_part(b), k = main_part(c);
            const SlotSpace hc = complement_part(a), gc = complement_part(b), kc = complement_part(c);
            const FiberedLatticeOp t = random_fredholm(rng, h, g, -2, 5), s = random_fredholm(rng, g, k, -2, 5);
            const FiberedLatticeOp gamma = random_invertible_on(rng, hc, gc), theta = random_invertible_on(rng, gc, kc);
            const FiberedLine lt = det_line(t), ls = det_line(s), lst = det_line(compose(s, t));
            const FiberedLatticeOp tg = stabilized_operator(t, gamma), st = stabilized_operator(s, theta);
            const FiberedLine ltg = det_line(tg), lst2 = det_line(st), lcomp = det_line(compose(st, tg));
            const cplx left = stabilize(lt, ltg) * stabilize(ls, lst2) * torsion(ltg, lst2, lcomp);
            const cplx right = torsion(lt, ls, lst) * stabilize(lst, lcomp);
            CHECK(rel_diff(left, right) < 1e-9);
        }
    }

    TEST_CASE("perturbation commutes with stabilisation") {
        std::mt19937_64 rng(35);
        for (int trial = 0; trial < 40; ++trial) {
            const long a = long(rng() % 3), b = long(rng() % 3);
            const SlotSpace h = main_part(a), g = main_part(b);
            const SlotSpace hc = complement_part(a), gc = complement_part(b);
            const FiberedLatticeOp t = random_fredholm(rng, h, g, -2, 5);
            const FiberedLatticeOp s = perturb(rng, t, -2, 6);
            const FiberedLatticeOp gamma = random_invertible_on(rng, hc, gc);
            const FiberedLine lt = det_line(t), ls = det_line(s);
            const FiberedLine ltg = det_line(stabilized_operator(t, gamma)), lsg = det_line(stabilized_operator(s, gamma));
            const cplx left = stabilize(ls, lsg) * perturbation(lt, ls);
            const cplx right = perturbation(ltg, lsg) * stabilize(lt, ltg);
            CHECK(rel_diff(left, right) < 1e-9);
        }
    }

    TEST_CASE("stabilised torsions of disjoint operators differ by the swap sign") {
        std::mt19937_64 rng(36);
        for (int trial = 0; trial < 40; ++trial) {
            // slot 0 carries e, f; slot 1 carries p, q
            const long e0 = long(rng() % 4), f0 = long(rng() % 4), p0 = long(rng() % 4), q0 = long(rng() % 4);
            const SlotSpace e = slots_with(2, 0, {ray(e0)}), f = slots_with(2, 0, {ray(f0)});
            const SlotSpace p = slots_with(2, 1, {ray(p0)}), q = slots_with(2, 1, {ray(q0)});
            const FiberedLatticeOp t = random_fredholm(rng, e, f, 0, 6), s = random_fredholm(rng, p, q, 0, 6);
            const FiberedLine lt = det_line(t), ls = det_line(s);
            const FiberedLatticeOp tp = stabilized_operator(t, FiberedLatticeOp::identity(p));
            const FiberedLatticeOp sf = stabilized_operator(s, FiberedLatticeOp::identity(f));
            const FiberedLatticeOp se = stabilized_operator(s, FiberedLatticeOp::identity(e));
            const FiberedLatticeOp tq = stabilized_operator(t, FiberedLatticeOp::identity(q));
            const FiberedLatticeOp sum1 = compose(sf, tp), sum2 = compose(tq, se);
            REQUIRE(approx_equal(sum1, sum2));
            const FiberedLine lsum = det_line(sum1);
            const FiberedLine ltp = det_line(tp), lsf = det_line(sf), lse = det_line(se), ltq = det_line(tq);
            const cplx left = stabilize(lt, ltp) * stabilize(ls, lsf) * torsion(ltp, lsf, lsum);
            const cplx right = double(swap_sign(lt.degree(), ls.degree())) * stabilize(ls, lse) * stabilize(lt, ltq) *
                               torsion(lse, ltq, lsum);
            CHECK(rel_diff(left, right) < 1e-9);
        }
    }

    TEST_CASE("window and fibered backends give the same perturbation") {
        std::mt19937_64 rng(41);
        for (int trial = 0; trial < 30; ++trial) {
            const long n = 3 + long(rng() % 4), m = 3 + long(rng() % 4);
            const Mat a1 = random_rank(rng, m, n, std::min(m, n) - long(rng() % 2));
            Mat a2 = a1;
            a2.col(0) = random_matrix(rng, m, 1);
            a2.row(1).setZero();
            const SlotSpace dom = space1(std::vector<std::vector<BoxIndicator>>(size_t(n), {point(0)}));
            const SlotSpace cod = space1(std::vector<std::vector<BoxIndicator>>(size_t(m), {point(0)}));
            auto fib = [&](const Mat& a) {
                std::vector<Term> terms;
                for (long i = 0; i < m; ++i)
                    for (long j = 0; j < n; ++j) terms.push_back({int(i), int(j), a(i, j), point(0)});
                return det_line(FiberedLatticeOp(dom, cod, terms));
            };
            auto win = [&](const Mat& a) { return det_line(WindowOp{0, a, Mat(), Mat()}); };
            const FiberedLine f1 = fib(a1), f2 = fib(a2);
            const WindowLine w1 = win(a1), w2 = win(a2);
            // frame_fibered = r * frame_window
            auto frame_ratio = [&](const FiberedLine& f, const WindowLine& w) {
                Mat fk(n, long(f.ker.size())), wk(n, long(w.ker.size())), fc(m, long(f.coker.size())),
                    wc(m, long(w.coker.size()));
                for (size_t j = 0; j < f.ker.size(); ++j) fk.col(long(j)) = f.ker[j].begin()->second;
                for (size_t j = 0; j < w.ker.size(); ++j) wk.col(long(j)) = w.ker[j];
                for (size_t j = 0; j < f.coker.size(); ++j) fc.col(long(j)) = f.coker[j].begin()->second;
                for (size_t j = 0; j < w.coker.size(); ++j) wc.col(long(j)) = w.coker[j];
                return dense_frame_map(fk, wk, fc, wc);
            };
            const cplx pf = perturbation(f1, f2), pw = perturbation(w1, w2);
            CHECK(rel_diff(pf, pw * frame_ratio(f1, w1) / frame_ratio(f2, w2)) < 1e-8);
        }
    }
}
