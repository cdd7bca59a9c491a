#include "detline/coproduct_cat.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace detline {

namespace {

using Lams = std::vector<SigmaIndex>;
using Ids = std::vector<RingIdempotent>;

/// F(lambda_i, lambda_j)(a, b) placed at slots (i, j) of a chain; all other slots sit at the base point.
struct ChainFactor {
    size_t i, j;
    RingIdempotent a, b;
};

cplx embed(const FiberedLine& small, const FiberedLine& big, size_t i, size_t j) {
    const VectorMap m =
        VectorMap::embedding({static_cast<int>(i), static_cast<int>(j)}, big.op.domain().size());
    return quasi_map(m, m, small, big);
}

FiberedLatticeOp complement_identity(const Lams& lam, const Ids& p) {
    return FiberedLatticeOp::identity(complement_space(lam, p));
}

/// S, then T over the factors in order, then the stabilisation by the identity on the
/// complement, then P to the product of the Omega^{ij}(p0) stabilised the same way.
cplx chain_trivialization(const Lams& lam, const BasePoint& base, const std::vector<ChainFactor>& fs) {
    const size_t n = lam.size();
    cplx c = 1.0;
    FiberedLine acc;
    Ids first_domain;
    for (size_t k = 0; k < fs.size(); ++k) {
        const ChainFactor& f = fs[k];
        Ids tuple(n, base);
        tuple[f.i] = f.a;
        tuple[f.j] = f.b;
        if (k == 0) first_domain = tuple;
        const FiberedLine small = det_line(F_op(lam[f.i], lam[f.j], f.a, f.b));
        const FiberedLine big = det_line(big_F(lam, f.i, f.j, tuple));
        c *= embed(small, big, f.i, f.j);
        if (k == 0) {
            acc = big;
        } else {
            FiberedLine prod = det_line(compose(big.op, acc.op));
            c *= torsion(acc, big, prod);
            acc = std::move(prod);
        }
    }
    const FiberedLine stab = det_line(stabilized_operator(acc.op, complement_identity(lam, first_domain)));
    c *= stabilize(acc, stab);

    const Ids all(n, base);
    FiberedLatticeOp om;
    for (size_t k = 0; k < fs.size(); ++k) {
        const FiberedLatticeOp o = big_Omega(lam, fs[k].i, fs[k].j, all);
        om = k == 0 ? o : compose(o, om);
    }
    const FiberedLine target = det_line(stabilized_operator(om, complement_identity(lam, all)));
    return c * perturbation(stab, target);
}

FiberedElement frame_of(const FiberedLine& line, cplx c = 1.0) { return FiberedElement{line, c}; }

void require_same_point(const HomLineElement& f, const HomLineElement& g) {
    if (!same_idempotent(f.p, g.p) || !same_idempotent(f.q, g.q) || !same_idempotent(f.base, g.base))
        throw ShapeMismatch("hom elements live over different idempotents or base points");
}

/// Coordinates of v in the span of b via the Gram matrix (least squares).
CVec gram_coords(const std::vector<LVec>& b, const LVec& v) {
    const auto k = static_cast<Eigen::Index>(b.size());
    Mat g(k, k);
    CVec r(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) g(i, j) = inner(b[i], b[j]);
        r(i) = inner(b[i], v);
    }
    return g.fullPivLu().solve(r);
}

/// Unit vectors on the (slot, point) support of the given vectors, slot major, lattice order within a slot.
std::vector<LVec> unit_span(const std::vector<LVec>& vs, size_t nslots) {
    std::set<std::pair<int, Point>, bool (*)(const std::pair<int, Point>&, const std::pair<int, Point>&)> sup(
        [](const std::pair<int, Point>& a, const std::pair<int, Point>& b) {
            if (a.first != b.first) return a.first < b.first;
            return PointLess{}(a.second, b.second);
        });
    for (const LVec& v : vs)
        for (const auto& [x, c] : v)
            for (Eigen::Index s = 0; s < c.size(); ++s)
                if (std::abs(c(s)) > 1e-12) sup.insert({static_cast<int>(s), x});
    if (sup.size() != vs.size()) throw NotExact("subspace is not spanned by lattice unit vectors");
    std::vector<LVec> out;
    for (const auto& [s, x] : sup) {
        CVec e = CVec::Zero(static_cast<Eigen::Index>(nslots));
        e(s) = 1.0;
        out.push_back(LVec{{x, e}});
    }
    return out;
}

}  // namespace

FiberedLine plus_line(const SigmaIndex& lambda, const SigmaIndex& mu, const RingIdempotent& p, const BasePoint& base) {
    return det_line(F_op(lambda, mu, p, base));
}

FiberedLine minus_line(const SigmaIndex& lambda, const SigmaIndex& mu, const BasePoint& base, const RingIdempotent& q) {
    return det_line(F_op(lambda, mu, base, q));
}

HomLineElement hom_frame(const SigmaIndex& source, const SigmaIndex& target, const RingIdempotent& p,
                         const RingIdempotent& q, const BasePoint& base, cplx value) {
    if (!in_ideal(p, base) || !in_ideal(q, base)) throw IdealViolation("base point and idempotent differ outside the ideal");
    return HomLineElement{source,
                          target,
                          p,
                          q,
                          base,
                          frame_of(plus_line(source, target, p, base), value),
                          frame_of(minus_line(source, target, base, q))};
}

HomLineElement hom_identity(const SigmaIndex& lambda, const RingIdempotent& p, const RingIdempotent& q,
                            const BasePoint& base) {
    return hom_frame(lambda, lambda, p, q, base, 1.0);
}

cplx HomTensor::value() const {
    cplx v = 1.0;
    for (const auto& f : factors) v *= f.value();
    return v;
}

long HomTensor::degree() const {
    long d = 0;
    for (const auto& f : factors) d += f.degree();
    return d;
}

cplx duality_phi(const SigmaIndex& lambda, const SigmaIndex& mu, const RingIdempotent& e, const BasePoint& base) {
    const FiberedLine t = minus_line(lambda, mu, base, e);
    const FiberedLine s = plus_line(lambda, mu, e, base);
    const FiberedLine st = det_line(compose(s.op, t.op));
    const FiberedLine id = det_line(FiberedLatticeOp::identity(t.op.domain()));
    return perturbation(id, st) / torsion(t, s, st);
}

cplx duality_psi(const SigmaIndex& lambda, const SigmaIndex& mu, const RingIdempotent& e, const BasePoint& base) {
    const FiberedLine t = plus_line(lambda, mu, e, base);
    const FiberedLine s = minus_line(lambda, mu, base, e);
    const FiberedLine st = det_line(compose(s.op, t.op));
    const FiberedLine id = det_line(FiberedLatticeOp::identity(t.op.domain()));
    return torsion(t, s, st) * perturbation(st, id);
}

cplx trivialize_mu(const SigmaIndex& l, const SigmaIndex& m, const SigmaIndex& n, const RingIdempotent& p,
                   const BasePoint& base) {
    return chain_trivialization({l, m, n}, base, {{0, 1, p, base}, {1, 2, p, base}, {0, 2, base, p}});
}

cplx trivialize_mu_dagger(const SigmaIndex& l, const SigmaIndex& m, const SigmaIndex& n, const RingIdempotent& p,
                          const BasePoint& base) {
    return chain_trivialization({l, m, n}, base, {{0, 2, p, base}, {1, 2, base, p}, {0, 1, base, p}});
}

cplx trivialize_mu_ternary(const SigmaIndex& l, const SigmaIndex& m, const SigmaIndex& n, const SigmaIndex& t,
                           const RingIdempotent& p, const BasePoint& base) {
    return chain_trivialization({l, m, n, t}, base,
                                {{0, 1, p, base}, {1, 2, p, base}, {2, 3, p, base}, {0, 3, base, p}});
}

cplx compose_L(const SigmaIndex& l, const SigmaIndex& m, const SigmaIndex& n, const RingIdempotent& p,
               const BasePoint& base) {
    return duality_phi(l, n, p, base) * trivialize_mu(l, m, n, p, base);
}

cplx compose_L_dagger(const SigmaIndex& l, const SigmaIndex& m, const SigmaIndex& n, const RingIdempotent& p,
                      const BasePoint& base) {
    return duality_phi(l, n, p, base) * trivialize_mu_dagger(l, m, n, p, base);
}

cplx ternary_compose(const SigmaIndex& l, const SigmaIndex& m, const SigmaIndex& n, const SigmaIndex& t,
                     const RingIdempotent& p, const BasePoint& base) {
    return duality_phi(l, t, p, base) * trivialize_mu_ternary(l, m, n, t, p, base);
}

HomLineElement compose(const HomLineElement& f, const HomLineElement& g) {
    require_same_point(f, g);
    if (!same_index(f.target, g.source)) throw ShapeMismatch("morphisms are not composable");
    const SigmaIndex &l = f.source, &m = f.target, &n = g.target;
    HomLineElement out = hom_frame(l, n, f.p, f.q, f.base);
    const FiberedLine fp_dag = minus_line(l, n, f.base, f.p);
    const FiberedLine fq_dag = out.minus.line;
    const FiberedLine fp = out.plus.line;
    const FiberedLine fq = plus_line(l, n, f.q, f.base);
    // A, A^dag, B, B^dag, F_p^dag, F_p, F_q^dag, F_q  ->  (A, B, F_p^dag), (F_q, B^dag, A^dag), F_p, F_q^dag
    const std::vector<long> deg{f.plus.line.degree(), f.minus.line.degree(), g.plus.line.degree(),
                                g.minus.line.degree(), fp_dag.degree(),       fp.degree(),
                                fq_dag.degree(),       fq.degree()};
    const int sign = koszul_sign(deg, {0, 2, 4, 7, 3, 1, 5, 6});
    const cplx c = duality_phi(l, n, f.p, f.base) * duality_phi(l, n, f.q, f.base) *
                   trivialize_mu(l, m, n, f.p, f.base) * trivialize_mu_dagger(l, m, n, f.q, f.base);
    out.plus.coefficient = static_cast<double>(sign) * c * f.value() * g.value();
    return out;
}

HomLineElement inverse(const HomLineElement& f) {
    HomLineElement g = hom_frame(f.target, f.source, f.p, f.q, f.base);
    const cplx c = compose(f, g).value();
    if (std::abs(c) < 1e-300) throw NotQuasiIso("morphism is not invertible");
    g.plus.coefficient = 1.0 / c;
    return g;
}

HomTensor compose(const HomTensor& f, const HomTensor& g) {
    const size_t n = f.factors.size();
    if (g.factors.size() != n || n == 0) throw ShapeMismatch("tensor morphisms of different length");
    std::vector<long> deg;
    for (const auto& x : f.factors) deg.push_back(x.degree());
    for (const auto& x : g.factors) deg.push_back(x.degree());
    std::vector<size_t> order;
    for (size_t i = 0; i < n; ++i) {
        order.push_back(i);
        order.push_back(n + i);
    }
    HomTensor out;
    for (size_t i = 0; i < n; ++i) out.factors.push_back(compose(f.factors[i], g.factors[i]));
    out.factors[0].plus.coefficient *= static_cast<double>(koszul_sign(deg, order));
    return out;
}

HomTensor inverse(const HomTensor& f) {
    HomTensor g;
    for (const auto& x : f.factors) g.factors.push_back(inverse(x));
    // the factorwise inverse is off by the interchange sign
    const cplx v = compose(f, g).value();
    g.factors.at(0).plus.coefficient /= v;
    return g;
}

HomTensor tensor(const HomTensor& a, const HomTensor& b) {
    HomTensor out = a;
    out.factors.insert(out.factors.end(), b.factors.begin(), b.factors.end());
    return out;
}

HomTensor coproduct(const RingIdempotent& e, const HomLineElement& f) {
    HomLineElement x = hom_frame(f.source, f.target, f.p, e, f.base);
    HomLineElement y = hom_frame(f.source, f.target, e, f.q, f.base);
    x.plus = f.plus;
    x.minus.coefficient = duality_phi(f.source, f.target, e, f.base);
    y.minus = f.minus;
    return HomTensor{{std::move(x), std::move(y)}};
}

HomTensor coproduct_at(size_t position, const RingIdempotent& e, const HomTensor& f) {
    if (position >= f.factors.size()) throw ShapeMismatch("coproduct position out of range");
    HomTensor out;
    for (size_t i = 0; i < f.factors.size(); ++i) {
        if (i != position) {
            out.factors.push_back(f.factors[i]);
            continue;
        }
        const HomTensor d = coproduct(e, f.factors[i]);
        out.factors.insert(out.factors.end(), d.factors.begin(), d.factors.end());
    }
    return out;
}

namespace {

/// |F(p, b)| (x) |F(b, q)| -> |S1 T1 + Gamma| for objects (lambda, mu, mu), as a coefficient on frames.
struct BaseSide {
    cplx coefficient;
    FiberedLine stabilized;
};

BaseSide base_side(const SigmaIndex& l, const SigmaIndex& m, const RingIdempotent& p, const RingIdempotent& q,
                   const BasePoint& b) {
    const Lams lam{l, m, m};
    const FiberedLine a = plus_line(l, m, p, b), ad = minus_line(l, m, b, q);
    const FiberedLine t1 = det_line(big_F(lam, 0, 2, {p, q, b}));
    const FiberedLine s1 = det_line(big_F(lam, 0, 1, {b, q, p}));
    const FiberedLine st = det_line(compose(s1.op, t1.op));
    cplx c = embed(a, t1, 0, 2) * embed(ad, s1, 0, 1) * torsion(t1, s1, st);

    SlotSpace dom, cod;
    dom.dim = cod.dim = 2;
    const auto comp = sigma_complement(m, b);
    dom.add("pi0", {}).add("pi1", {}).add("pi2", comp);
    cod.add("pi0", {}).add("pi1", comp).add("pi2", {});
    const FiberedLatticeOp gamma(dom, cod, {{1, 2, 1.0, BoxIndicator::all()}});
    FiberedLine stab = det_line(stabilized_operator(st.op, gamma));
    c *= stabilize(st, stab);
    return {c, std::move(stab)};
}

}  // namespace

HomLineElement change_base(const BasePoint& new_base, const HomLineElement& f) {
    if (!in_ideal(f.base, new_base)) throw IdealViolation("base points differ outside the ideal");
    const BaseSide from = base_side(f.source, f.target, f.p, f.q, f.base);
    const BaseSide to = base_side(f.source, f.target, f.p, f.q, new_base);
    const cplx c = from.coefficient * perturbation(from.stabilized, to.stabilized) / to.coefficient;
    HomLineElement out = hom_frame(f.source, f.target, f.p, f.q, new_base);
    out.plus.coefficient = c * f.value();
    return out;
}

HomTensor change_base(const BasePoint& new_base, const HomTensor& f) {
    HomTensor out;
    for (const auto& x : f.factors) out.factors.push_back(change_base(new_base, x));
    return out;
}

HomLineElement transport(const Monomial2& k, const HomLineElement& f) {
    VectorMap alpha;
    alpha.shift = {k.a, k.b};
    alpha.slot_map = {0, 1};
    alpha.scale = {k.mu, k.mu};
    alpha.target_slots = 2;
    HomLineElement out =
        hom_frame(f.source.acted(k), f.target.acted(k), f.p.acted(k), f.q.acted(k), f.base.acted(k));
    out.plus.coefficient = f.plus.coefficient * quasi_map(alpha, alpha, f.plus.line, out.plus.line);
    out.minus.coefficient = f.minus.coefficient * quasi_map(alpha, alpha, f.minus.line, out.minus.line);
    return out;
}

HomLineElement group_act(const Monomial2& k, const HomLineElement& f) {
    return change_base(f.base, transport(k, f));
}

HomTensor group_act(const Monomial2& k, const HomTensor& f) {
    HomTensor out;
    for (const auto& x : f.factors) out.factors.push_back(group_act(k, x));
    return out;
}

namespace {

FiberedLatticeOp crux_operator(const Lams& lam, const BasePoint& p0) {
    static const std::vector<std::pair<size_t, size_t>> order{{0, 3}, {1, 3}, {3, 4}, {1, 4},
                                                              {2, 4}, {3, 4}, {2, 3}, {0, 3}};
    const Ids all(lam.size(), p0);
    FiberedLatticeOp x;
    for (size_t k = 0; k < order.size(); ++k) {
        const FiberedLatticeOp o = big_Omega(lam, order[k].first, order[k].second, all);
        x = k == 0 ? o : compose(x, o);
    }
    return stabilized_operator(x, complement_identity(lam, all));
}

}  // namespace

cplx crux_determinant(const SigmaIndex& l, const SigmaIndex& m, const SigmaIndex& n, const BasePoint& p0,
                      const BasePoint& p0_prime) {
    if (!in_ideal(p0, p0_prime)) throw IdealViolation("base points differ outside the ideal");
    const Lams lam{l, l, l, m, n};
    const FiberedLatticeOp x = crux_operator(lam, p0), xp = crux_operator(lam, p0_prime);
    return fredholm_det(compose(xp, inverse(x)));
}

std::vector<LVec> omega_vectors(long n, long m, long t, long s, size_t slot, size_t nslots) {
    std::vector<LVec> out;
    for (long x2 = s; x2 < t; ++x2)
        for (long x1 = m; x1 < n; ++x1) {
            CVec e = CVec::Zero(static_cast<Eigen::Index>(nslots));
            e(static_cast<Eigen::Index>(slot)) = 1.0;
            out.push_back(LVec{{Point{x1, x2}, e}});
        }
    return out;
}

cplx frame_coefficient(const FiberedLine& line, const std::vector<LVec>& ker, const std::vector<LVec>& coker) {
    if (ker.size() != line.ker.size() || coker.size() != line.coker.size())
        throw ShapeMismatch("frame vectors do not match the line dimensions");
    const auto nk = static_cast<Eigen::Index>(ker.size()), nc = static_cast<Eigen::Index>(coker.size());
    Mat a(nk, nk), b(nc, nc);
    for (Eigen::Index j = 0; j < nk; ++j) a.col(j) = gram_coords(line.ker, ker[static_cast<size_t>(j)]);
    for (Eigen::Index j = 0; j < nc; ++j) b.col(j) = gram_coords(line.coker, coker[static_cast<size_t>(j)]);
    const cplx db = det(b);
    if (std::abs(db) < 1e-12 || std::abs(det(a)) < 1e-12) throw NotExact("frame vectors are dependent");
    return det(a) / db;
}

cplx lattice_frame_coefficient(const FiberedLine& line) {
    return frame_coefficient(line, unit_span(line.ker, line.op.domain().size()),
                             unit_span(line.coker, line.op.codomain().size()));
}

}  // namespace detline
