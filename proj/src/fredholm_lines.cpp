#include "detline/fredholm_lines.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace detline {

namespace {

// Vector plumbing shared by both backends.
cplx vdot(const LVec& a, const LVec& b) { return inner(a, b); }
cplx vdot(const CVec& a, const CVec& b) { return a.dot(b); }
double vnorm(const LVec& a) { return norm(a); }
double vnorm(const CVec& a) { return a.norm(); }
LVec vaxpy(const LVec& x, cplx a, const LVec& y) { return axpy(x, a, y); }
CVec vaxpy(const CVec& x, cplx a, const CVec& y) {
    if (x.size() == 0) return a * y;
    return x + a * y;
}

LVec apply_op(const FiberedLatticeOp& t, const LVec& v) { return t.apply(v); }

Mat projector(const Mat& basis, Eigen::Index n) {
    if (basis.size() == 0) return Mat::Identity(n, n);
    return basis * basis.adjoint();
}

CVec apply_op(const WindowOp& t, const CVec& v) {
    CVec w = t.matrix * v;
    if (t.cod_basis.size()) w = t.cod_basis * (t.cod_basis.adjoint() * w);
    return w;
}

template <class Vec>
Mat gram(const std::vector<Vec>& b) {
    const auto n = static_cast<Eigen::Index>(b.size());
    Mat g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = vdot(b[i], b[j]);
    return g;
}

template <class Vec>
CVec least_squares(const std::vector<Vec>& b, const Vec& v) {
    const auto n = static_cast<Eigen::Index>(b.size());
    CVec rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) rhs(i) = vdot(b[i], v);
    if (n == 0) return rhs;
    return gram(b).partialPivLu().solve(rhs);
}

// Coordinates of v in the span of b; throws when v is not in the span.
template <class Vec>
CVec span_coords(const std::vector<Vec>& b, const Vec& v, double scale_ref) {
    CVec z = least_squares(b, v);
    Vec r = v;
    for (size_t i = 0; i < b.size(); ++i) r = vaxpy(r, -z(static_cast<Eigen::Index>(i)), b[i]);
    if (vnorm(r) > 1e-7 * std::max(1.0, scale_ref)) throw NotExact("vector outside the expected subspace");
    return z;
}

// Coordinates of the class of v modulo the image, for representatives orthogonal to it.
template <class Vec>
CVec coset_coords(const std::vector<Vec>& reps, const Vec& v) {
    return least_squares(reps, v);
}

std::vector<CVec> columns(const Mat& m) {
    std::vector<CVec> out;
    for (Eigen::Index k = 0; k < m.cols(); ++k) out.emplace_back(m.col(k));
    return out;
}

struct PerturbationCore {
    Mat m1, m2;  // core blocks in common coordinates
    Mat k1, k2;  // kernel vectors in domain core coordinates
    Mat c1, c2;  // cokernel representatives in codomain core coordinates
};

bool bijective(const Mat& m) { return m.rows() == m.cols() && rank(m) == m.rows(); }

PerturbationCore make_core(const FiberedLine& a, const FiberedLine& b) {
    const FiberedLatticeOp& t1 = a.op;
    const FiberedLatticeOp& t2 = b.op;
    if (!same_space(t1.domain(), t2.domain()) || !same_space(t1.codomain(), t2.codomain()))
        throw NotTraceClassDifference("operators act between different spaces");
    if (!is_finite_box(subtract(t2, t1))) throw NotTraceClassDifference("difference is not of finite rank");
    const Grid g = merge(t1.grid(), t2.grid());
    std::vector<Point> core;
    for (size_t c = 0; c < g.cell_count(); ++c) {
        if (!g.bounded(c)) continue;
        const Point rep = g.representative(c);
        const Mat f1 = t1.fiber_matrix(rep), f2 = t2.fiber_matrix(rep);
        const bool same = f1.rows() == f2.rows() && f1.cols() == f2.cols() &&
                          (f1.size() == 0 || max_abs(f1 - f2) <= 1e-12 * std::max(1.0, max_abs(f1)));
        if (same && bijective(f1)) continue;
        g.for_each_point(c, [&](const Point& x) { core.push_back(x); });
    }
    std::sort(core.begin(), core.end(), PointLess{});

    const SlotSpace& dom = t1.domain();
    const SlotSpace& cod = t1.codomain();
    std::map<Point, Eigen::Index, PointLess> doff, coff;
    Eigen::Index nd = 0, nc = 0;
    for (const Point& x : core) {
        doff[x] = nd;
        coff[x] = nc;
        nd += static_cast<Eigen::Index>(dom.active_slots(x).size());
        nc += static_cast<Eigen::Index>(cod.active_slots(x).size());
    }
    PerturbationCore pc;
    pc.m1 = Mat::Zero(nc, nd);
    pc.m2 = Mat::Zero(nc, nd);
    for (const Point& x : core) {
        const Mat f1 = t1.fiber_matrix(x), f2 = t2.fiber_matrix(x);
        pc.m1.block(coff[x], doff[x], f1.rows(), f1.cols()) = f1;
        pc.m2.block(coff[x], doff[x], f2.rows(), f2.cols()) = f2;
    }
    auto embed = [&](const std::vector<LVec>& vs, const SlotSpace& s,
                     const std::map<Point, Eigen::Index, PointLess>& off, Eigen::Index n) {
        Mat out = Mat::Zero(n, static_cast<Eigen::Index>(vs.size()));
        for (size_t k = 0; k < vs.size(); ++k) {
            for (const auto& [x, v] : vs[k]) {
                auto it = off.find(x);
                if (it == off.end()) {
                    if (v.norm() > 1e-12) throw NotExact("kernel or cokernel vector outside the exceptional fibers");
                    continue;
                }
                const auto act = s.active_slots(x);
                for (size_t j = 0; j < act.size(); ++j)
                    out(it->second + static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = v(act[j]);
            }
        }
        return out;
    };
    pc.k1 = embed(a.ker, dom, doff, nd);
    pc.k2 = embed(b.ker, dom, doff, nd);
    pc.c1 = embed(a.coker, cod, coff, nc);
    pc.c2 = embed(b.coker, cod, coff, nc);
    return pc;
}

bool same_basis(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return a.size() == 0 || max_abs(a - b) <= 1e-12;
}

PerturbationCore make_core(const WindowLine& a, const WindowLine& b) {
    if (a.op.matrix.rows() != b.op.matrix.rows() || a.op.matrix.cols() != b.op.matrix.cols() ||
        !same_basis(a.op.dom_basis, b.op.dom_basis) || !same_basis(a.op.cod_basis, b.op.cod_basis))
        throw NotTraceClassDifference("operators act between different spaces");
    auto to_dom = [&](const std::vector<CVec>& vs, const Mat& basis, Eigen::Index n) {
        Mat out(n, static_cast<Eigen::Index>(vs.size()));
        for (size_t k = 0; k < vs.size(); ++k)
            out.col(static_cast<Eigen::Index>(k)) = basis.size() ? CVec(basis.adjoint() * vs[k]) : vs[k];
        return out;
    };
    PerturbationCore pc;
    pc.m1 = a.op.restricted();
    pc.m2 = b.op.restricted();
    pc.k1 = to_dom(a.ker, a.op.dom_basis, pc.m1.cols());
    pc.k2 = to_dom(b.ker, b.op.dom_basis, pc.m1.cols());
    pc.c1 = to_dom(a.coker, a.op.cod_basis, pc.m1.rows());
    pc.c2 = to_dom(b.coker, b.op.cod_basis, pc.m1.rows());
    return pc;
}

Mat block_diag(const Mat& a, const Mat& b) {
    Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

Mat random_mat(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> nd;
    Mat m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = cplx(nd(rng), nd(rng));
    return m;
}

// Finite rank F with F(ker) complementary to the image and Ker F complementary to the kernel.
// Returns det(A) where F maps the kernel frame to the cokernel frame transformed by A.
cplx completion(const Mat& k, const Mat& c, Completion mode, std::mt19937_64& rng, Mat& f) {
    if (k.cols() == 0) {
        f = Mat::Zero(c.rows(), k.rows());
        return 1.0;
    }
    if (mode == Completion::Canonical) {
        f = c * (k.adjoint() * k).partialPivLu().solve(k.adjoint());
        return 1.0;
    }
    const Mat y = random_mat(rng, k.cols(), k.rows());
    const Mat a = random_mat(rng, k.cols(), k.cols()) + 3.0 * Mat::Identity(k.cols(), k.cols());
    f = c * a * (y * k).partialPivLu().solve(y);
    return det(a);
}

// Split triangle |T| (x) |0_{m,n}| -> |T (+) 0_{m,n}| for kernel/cokernel dims (k, c).
cplx padding_coefficient(int k, int c, int n, int m) {
    ExactTriangle t;
    t.U = GradedVectorSpace::of_dims(k, c, "u");
    t.V = GradedVectorSpace::of_dims(k + n, c + m, "v");
    t.W = GradedVectorSpace::of_dims(n, m, "w");
    t.i_plus = Mat::Zero(k + n, k);
    t.i_plus.topRows(k) = Mat::Identity(k, k);
    t.q_plus = Mat::Zero(n, k + n);
    t.q_plus.rightCols(n) = Mat::Identity(n, n);
    t.d_plus = Mat::Zero(c, n);
    t.i_minus = Mat::Zero(c + m, c);
    t.i_minus.topRows(c) = Mat::Identity(c, c);
    t.q_minus = Mat::Zero(m, c + m);
    t.q_minus.rightCols(m) = Mat::Identity(m, m);
    t.d_minus = Mat::Zero(k, m);
    return torsion_of_triangle(t);
}

}  // namespace

FiberedLine det_line(const FiberedLatticeOp& t) {
    FiberedLine l;
    l.op = t;
    KernelCokernel kc = kernel_cokernel(t);
    l.ker = std::move(kc.kernel);
    l.coker = std::move(kc.cokernel);
    return l;
}

WindowLine det_line(const WindowOp& t, double tol) {
    WindowLine l;
    l.op = t;
    const WindowKernelCokernel kc = window_kernel_cokernel(t, tol);
    l.ker = columns(kc.kernel);
    l.coker = columns(kc.cokernel);
    return l;
}

FiberedLatticeOp compose_ops(const FiberedLatticeOp& s, const FiberedLatticeOp& t) { return compose(s, t); }

WindowOp compose_ops(const WindowOp& s, const WindowOp& t) {
    if (s.matrix.cols() != t.matrix.rows() || !same_basis(s.dom_basis, t.cod_basis))
        throw ShapeMismatch("window operators are not composable");
    WindowOp st;
    st.radius = t.radius;
    st.matrix = s.matrix * projector(t.cod_basis, t.matrix.rows()) * t.matrix;
    st.dom_basis = t.dom_basis;
    st.cod_basis = s.cod_basis;
    return st;
}

template <class Op>
ExactTriangle torsion_triangle(const DetLinePresentation<Op>& t, const DetLinePresentation<Op>& s,
                               const DetLinePresentation<Op>& st) {
    using Vec = typename OpTraits<Op>::Vec;
    auto dims = [](const DetLinePresentation<Op>& l, const std::string& p) {
        return GradedVectorSpace::of_dims(static_cast<int>(l.ker.size()), static_cast<int>(l.coker.size()), p);
    };
    ExactTriangle tr;
    tr.U = dims(t, "t");
    tr.V = dims(st, "st");
    tr.W = dims(s, "s");
    const auto nu_p = static_cast<Eigen::Index>(t.ker.size()), nu_m = static_cast<Eigen::Index>(t.coker.size());
    const auto nv_p = static_cast<Eigen::Index>(st.ker.size()), nv_m = static_cast<Eigen::Index>(st.coker.size());
    const auto nw_p = static_cast<Eigen::Index>(s.ker.size()), nw_m = static_cast<Eigen::Index>(s.coker.size());
    tr.i_plus = Mat(nv_p, nu_p);
    for (Eigen::Index j = 0; j < nu_p; ++j)
        tr.i_plus.col(j) = span_coords(st.ker, t.ker[j], vnorm(t.ker[j]));
    tr.q_plus = Mat(nw_p, nv_p);
    for (Eigen::Index j = 0; j < nv_p; ++j) {
        const Vec w = apply_op(t.op, st.ker[j]);
        tr.q_plus.col(j) = span_coords(s.ker, w, vnorm(st.ker[j]));
    }
    tr.d_plus = Mat(nu_m, nw_p);
    for (Eigen::Index j = 0; j < nw_p; ++j) tr.d_plus.col(j) = coset_coords(t.coker, s.ker[j]);
    tr.i_minus = Mat(nv_m, nu_m);
    for (Eigen::Index j = 0; j < nu_m; ++j) tr.i_minus.col(j) = coset_coords(st.coker, apply_op(s.op, t.coker[j]));
    tr.q_minus = Mat(nw_m, nv_m);
    for (Eigen::Index j = 0; j < nv_m; ++j) tr.q_minus.col(j) = coset_coords(s.coker, st.coker[j]);
    tr.d_minus = Mat::Zero(nu_p, nw_m);
    return tr;
}

template <class Op>
cplx torsion(const DetLinePresentation<Op>& t, const DetLinePresentation<Op>& s,
             const DetLinePresentation<Op>& st) {
    return 1.0 / torsion_of_triangle(torsion_triangle(t, s, st));
}

cplx torsion(const FiberedLatticeOp& t, const FiberedLatticeOp& s) {
    return torsion(det_line(t), det_line(s), det_line(compose(s, t)));
}

template <class Op>
cplx perturbation(const DetLinePresentation<Op>& t1, const DetLinePresentation<Op>& t2, Completion mode,
                  std::uint64_t seed) {
    if (t1.degree() != t2.degree()) throw IndexMismatch("perturbation between operators of different index");
    const PerturbationCore pc = make_core(t1, t2);
    const long ind = t1.degree();
    const Eigen::Index n = std::max(0L, -ind), m = std::max(0L, ind);
    if (pc.m1.cols() + n != pc.m1.rows() + m) throw NotFredholm("core block index disagrees with the line");
    const Mat pad = Mat::Zero(m, n);
    const Mat m1 = block_diag(pc.m1, pad), m2 = block_diag(pc.m2, pad);
    const Mat k1 = block_diag(pc.k1, Mat::Identity(n, n)), k2 = block_diag(pc.k2, Mat::Identity(n, n));
    const Mat c1 = block_diag(pc.c1, Mat::Identity(m, m)), c2 = block_diag(pc.c2, Mat::Identity(m, m));
    std::mt19937_64 rng(seed);
    Mat f1, f2;
    const cplx a1 = completion(k1, c1, mode, rng, f1);
    const cplx a2 = completion(k2, c2, mode, rng, f2);
    const cplx den = det(Mat(m1 + f1));
    if (std::abs(den) == 0.0) throw NotFredholm("completion failed to be invertible");
    const cplx ratio = det(Mat(m2 + f2)) / den * a1 / a2;
    const int k1d = static_cast<int>(t1.ker.size()), c1d = static_cast<int>(t1.coker.size());
    const int k2d = static_cast<int>(t2.ker.size()), c2d = static_cast<int>(t2.coker.size());
    const cplx d1 = padding_coefficient(k1d, c1d, static_cast<int>(n), static_cast<int>(m));
    const cplx d2 = padding_coefficient(k2d, c2d, static_cast<int>(n), static_cast<int>(m));
    return ratio * d2 / d1;
}

cplx perturbation(const FiberedLatticeOp& t1, const FiberedLatticeOp& t2) {
    return perturbation(det_line(t1), det_line(t2));
}

template ExactTriangle torsion_triangle(const FiberedLine&, const FiberedLine&, const FiberedLine&);
template ExactTriangle torsion_triangle(const WindowLine&, const WindowLine&, const WindowLine&);
template cplx torsion(const FiberedLine&, const FiberedLine&, const FiberedLine&);
template cplx torsion(const WindowLine&, const WindowLine&, const WindowLine&);
template cplx perturbation(const FiberedLine&, const FiberedLine&, Completion, std::uint64_t);
template cplx perturbation(const WindowLine&, const WindowLine&, Completion, std::uint64_t);

// ---------------------------------------------------------------------------
// Quasi-isomorphisms and stabilisation

VectorMap VectorMap::inclusion(size_t slots) {
    VectorMap m;
    for (size_t j = 0; j < slots; ++j) m.slot_map.push_back(static_cast<int>(j));
    m.scale.assign(slots, 1.0);
    m.target_slots = slots;
    return m;
}

VectorMap VectorMap::embedding(const std::vector<int>& slot_map, size_t target_slots) {
    VectorMap m;
    m.slot_map = slot_map;
    m.scale.assign(slot_map.size(), 1.0);
    m.target_slots = target_slots;
    return m;
}

LVec VectorMap::apply(const LVec& v) const {
    LVec out;
    for (const auto& [x, c] : v) {
        const Point y{x[0] + shift[0], x[1] + shift[1]};
        for (Eigen::Index j = 0; j < c.size(); ++j) {
            if (c(j) == cplx(0.0)) continue;
            auto it = out.find(y);
            if (it == out.end()) it = out.emplace(y, CVec::Zero(static_cast<Eigen::Index>(target_slots))).first;
            it->second(slot_map.at(static_cast<size_t>(j))) += scale.at(static_cast<size_t>(j)) * c(j);
        }
    }
    return out;
}

namespace {

LVec unit(const Point& x, int slot, size_t slots) {
    CVec v = CVec::Zero(static_cast<Eigen::Index>(slots));
    v(slot) = 1.0;
    return LVec{{x, v}};
}

Grid shifted(const Grid& g, const Point& s) {
    Grid out = g;
    for (int a = 0; a < 2; ++a)
        for (long& c : out.cuts[a]) c += s[a];
    return out;
}

// psi T = T' phi, tested on every slot of a representative of each cell of a common grid.
void check_intertwines(const VectorMap& phi, const VectorMap& psi, const FiberedLatticeOp& t,
                       const FiberedLatticeOp& tp) {
    const Point back{-phi.shift[0], -phi.shift[1]};
    const Grid g = merge(t.grid(), shifted(tp.grid(), back));
    for (size_t c = 0; c < g.cell_count(); ++c) {
        const Point x = g.representative(c);
        for (int j : t.domain().active_slots(x)) {
            const LVec e = unit(x, j, t.domain().size());
            const LVec pe = phi.apply(e);
            for (const auto& [y, v] : pe)
                for (Eigen::Index k = 0; k < v.size(); ++k)
                    if (v(k) != cplx(0.0) && !tp.domain().active(static_cast<size_t>(k), y))
                        throw NotQuasiIso("phi leaves the domain of the target operator");
            const LVec lhs = psi.apply(t.apply(e));
            const LVec rhs = tp.apply(pe);
            if (norm(axpy(lhs, -1.0, rhs)) > 1e-10 * std::max(1.0, norm(lhs)))
                throw NotQuasiIso("psi T != T' phi");
        }
    }
}

}  // namespace

cplx quasi_map(const VectorMap& phi, const VectorMap& psi, const FiberedLine& t, const FiberedLine& tp) {
    check_intertwines(phi, psi, t.op, tp.op);
    if (t.ker.size() != tp.ker.size() || t.coker.size() != tp.coker.size())
        throw NotQuasiIso("kernel or cokernel dimensions differ");
    const auto nk = static_cast<Eigen::Index>(t.ker.size()), nc = static_cast<Eigen::Index>(t.coker.size());
    Mat a(nk, nk), b(nc, nc);
    try {
        for (Eigen::Index j = 0; j < nk; ++j) a.col(j) = span_coords(tp.ker, phi.apply(t.ker[j]), norm(t.ker[j]));
    } catch (const NotExact&) {
        throw NotQuasiIso("phi does not map the kernel into the kernel");
    }
    for (Eigen::Index j = 0; j < nc; ++j) b.col(j) = coset_coords(tp.coker, psi.apply(t.coker[j]));
    const cplx da = det(a), db = det(b);
    if (std::abs(da) < 1e-12 || std::abs(db) < 1e-12) throw NotQuasiIso("induced map is not an isomorphism");
    return da / db;
}

cplx quasi_map(const Mat& phi, const Mat& psi, const WindowLine& t, const WindowLine& tp) {
    if (t.ker.size() != tp.ker.size() || t.coker.size() != tp.coker.size())
        throw NotQuasiIso("kernel or cokernel dimensions differ");
    const auto nk = static_cast<Eigen::Index>(t.ker.size()), nc = static_cast<Eigen::Index>(t.coker.size());
    Mat a(nk, nk), b(nc, nc);
    try {
        for (Eigen::Index j = 0; j < nk; ++j) a.col(j) = span_coords(tp.ker, CVec(phi * t.ker[j]), t.ker[j].norm());
    } catch (const NotExact&) {
        throw NotQuasiIso("phi does not map the kernel into the kernel");
    }
    for (Eigen::Index j = 0; j < nc; ++j) b.col(j) = coset_coords(tp.coker, CVec(psi * t.coker[j]));
    const cplx da = det(a), db = det(b);
    if (std::abs(da) < 1e-12 || std::abs(db) < 1e-12) throw NotQuasiIso("induced map is not an isomorphism");
    return da / db;
}

namespace {

SlotSpace slot_union(const SlotSpace& a, const SlotSpace& b) {
    if (a.size() != b.size() || a.dim != b.dim) throw NotComplementary("slot counts differ");
    SlotSpace out;
    out.dim = a.dim;
    for (size_t j = 0; j < a.size(); ++j) {
        for (const auto& ba : a.supports[j])
            for (const auto& bb : b.supports[j])
                if (!ba.intersect(bb).empty()) throw NotComplementary("supports overlap");
        auto sup = a.supports[j];
        sup.insert(sup.end(), b.supports[j].begin(), b.supports[j].end());
        out.add(a.labels[j], sup);
    }
    return out;
}

}  // namespace

FiberedLatticeOp stabilized_operator(const FiberedLatticeOp& t, const FiberedLatticeOp& gamma) {
    const SlotSpace dom = slot_union(t.domain(), gamma.domain());
    const SlotSpace cod = slot_union(t.codomain(), gamma.codomain());
    const KernelCokernel kc = [&] {
        try {
            return kernel_cokernel(gamma);
        } catch (const NotFredholm&) {
            throw NotComplementary("complement operator is not invertible");
        }
    }();
    if (!kc.kernel.empty() || !kc.cokernel.empty()) throw NotComplementary("complement operator is not invertible");
    std::vector<FiberedLatticeOp::Term> terms = t.entries();
    const auto more = gamma.entries();
    terms.insert(terms.end(), more.begin(), more.end());
    return FiberedLatticeOp(dom, cod, terms);
}

cplx stabilize(const FiberedLine& t, const FiberedLine& t_plus_gamma) {
    const VectorMap inc = VectorMap::inclusion(t.op.domain().size());
    const VectorMap inc_c = VectorMap::inclusion(t.op.codomain().size());
    return quasi_map(inc, inc_c, t, t_plus_gamma);
}

cplx stabilize(const FiberedLine& t, const FiberedLatticeOp& gamma) {
    return stabilize(t, det_line(stabilized_operator(t.op, gamma)));
}

}  // namespace detline
