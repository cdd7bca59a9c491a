#include "detline/torus_bipolar.hpp"

#include <sstream>

namespace detline {

using Term = FiberedLatticeOp::Term;

std::string Monomial2::str() const {
    std::ostringstream os;
    os << "(" << mu.real() << (mu.imag() < 0 ? "" : "+") << mu.imag() << "i)*z1^" << a << "*z2^" << b;
    return os.str();
}

std::string RingIdempotent::str() const { return is_unit() ? "1" : "q[" + u.str() + "]"; }

bool in_ideal(const RingIdempotent& p, const RingIdempotent& q) { return p.is_unit() == q.is_unit(); }

SlotSpace torus_space() { return SlotSpace::full(2, 1); }

BoxIndicator box_P(const Monomial2& g) { return BoxIndicator::make(Interval::at_least(g.a)); }
BoxIndicator box_Q(const Monomial2& u) { return BoxIndicator::make(Interval{}, Interval::at_least(u.b)); }

BoxIndicator sigma_box(const SigmaIndex& k, const RingIdempotent& x) {
    if (x.is_unit()) return box_P(k.k);
    return box_P(k.k).intersect(box_Q(x.u));
}

namespace {

FiberedLatticeOp indicator(const BoxIndicator& b) {
    const SlotSpace h = torus_space();
    return FiberedLatticeOp(h, h, {Term{0, 0, 1.0, b}});
}

long shifted_end(long v, long s) { return (v == kNegInf || v == kPosInf) ? v : v + s; }

BoxIndicator shift_box(const BoxIndicator& b, long s1, long s2) {
    BoxIndicator out = b;
    const long s[2] = {s1, s2};
    for (int k = 0; k < 2; ++k) {
        out.axes[k].lo = shifted_end(b.axes[k].lo, s[k]);
        out.axes[k].hi = shifted_end(b.axes[k].hi, s[k]);
    }
    return out;
}

SlotSpace shift_space(const SlotSpace& s, long s1, long s2) {
    SlotSpace out;
    out.dim = s.dim;
    for (size_t j = 0; j < s.size(); ++j) {
        std::vector<BoxIndicator> sup;
        for (const auto& b : s.supports[j]) sup.push_back(shift_box(b, s1, s2));
        out.add(s.labels[j], sup);
    }
    return out;
}

// Omega block for commuting indicators a, b placed on slots i, j: [[a(1-b), ab], [ab, ab - b]];
// every other slot carries the identity.
std::vector<Term> omega_terms(size_t n, size_t i, size_t j, const BoxIndicator& a, const BoxIndicator& b) {
    const BoxIndicator ab = a.intersect(b);
    const int ii = static_cast<int>(i), jj = static_cast<int>(j);
    std::vector<Term> terms{{ii, ii, 1.0, a},  {ii, ii, -1.0, ab}, {ii, jj, 1.0, ab},
                            {jj, ii, 1.0, ab}, {jj, jj, 1.0, ab},  {jj, jj, -1.0, b}};
    for (size_t k = 0; k < n; ++k)
        if (k != i && k != j) terms.push_back({static_cast<int>(k), static_cast<int>(k), 1.0, BoxIndicator::all()});
    return terms;
}

}  // namespace

FiberedLatticeOp projection_P(const Monomial2& g) { return indicator(box_P(g)); }
FiberedLatticeOp projection_Q(const Monomial2& u) { return indicator(box_Q(u)); }
FiberedLatticeOp sigma_apply(const SigmaIndex& k, const RingIdempotent& x) { return indicator(sigma_box(k, x)); }

FiberedLatticeOp adjoint_action(const Monomial2& g, const FiberedLatticeOp& t) {
    std::vector<Term> terms = t.entries();
    for (auto& e : terms) e.box = shift_box(e.box, g.a, g.b);
    return FiberedLatticeOp(shift_space(t.domain(), g.a, g.b), shift_space(t.codomain(), g.a, g.b), terms);
}

BipolarReport bipolar_verify(const Monomial2& g, const Monomial2& h, const Monomial2& u, const Monomial2& v) {
    BipolarReport r;
    const FiberedLatticeOp pg = projection_P(g), ph = projection_P(h), qu = projection_Q(u), qv = projection_Q(v);
    r.commutator = subtract(compose(pg, qu), compose(qu, pg));
    r.product = compose(subtract(pg, ph), subtract(qu, qv));
    if (!is_finite_box(r.commutator) || !is_finite_box(r.product))
        throw NotFiniteRank("bipolarisation condition fails");
    r.commutator_trace_norm = trace_norm(r.commutator);
    r.product_trace_norm = trace_norm(r.product);
    return r;
}

SlotSpace sigma_space(const std::vector<SigmaIndex>& lambda, const std::vector<RingIdempotent>& p) {
    if (lambda.size() != p.size()) throw ShapeMismatch("index and idempotent tuples differ in length");
    SlotSpace s;
    s.dim = 2;
    for (size_t k = 0; k < lambda.size(); ++k) s.add("pi" + std::to_string(k), {sigma_box(lambda[k], p[k])});
    return s;
}

std::vector<BoxIndicator> sigma_complement(const SigmaIndex& k, const RingIdempotent& x) {
    if (x.is_unit()) return {};
    return {box_P(k.k).intersect(BoxIndicator::make(Interval{}, Interval::below(x.u.b)))};
}

SlotSpace complement_space(const std::vector<SigmaIndex>& lambda, const std::vector<RingIdempotent>& p) {
    if (lambda.size() != p.size()) throw ShapeMismatch("index and idempotent tuples differ in length");
    SlotSpace s;
    s.dim = 2;
    for (size_t k = 0; k < lambda.size(); ++k) s.add("pi" + std::to_string(k), sigma_complement(lambda[k], p[k]));
    return s;
}

bool same_monomial(const Monomial2& a, const Monomial2& b, double rel_tol) {
    return a.a == b.a && a.b == b.b && rel_diff(a.mu, b.mu) <= rel_tol;
}

bool same_idempotent(const RingIdempotent& a, const RingIdempotent& b) {
    return a.kind == b.kind && (a.is_unit() || same_monomial(a.u, b.u));
}

bool same_index(const SigmaIndex& a, const SigmaIndex& b) { return same_monomial(a.k, b.k); }

FiberedLatticeOp Omega_op(const SigmaIndex& lambda, const SigmaIndex& mu, const RingIdempotent& p) {
    const SlotSpace s = sigma_space({lambda, mu}, {p, p});
    return FiberedLatticeOp(s, s, omega_terms(2, 0, 1, sigma_box(lambda, p), sigma_box(mu, p)));
}

FiberedLatticeOp F_op(const SigmaIndex& lambda, const SigmaIndex& mu, const RingIdempotent& p,
                      const RingIdempotent& q) {
    return big_F({lambda, mu}, 0, 1, {p, q});
}

FiberedLatticeOp big_F(const std::vector<SigmaIndex>& lambda, size_t i, size_t j,
                       const std::vector<RingIdempotent>& p) {
    if (i >= j || j >= lambda.size()) throw ShapeMismatch("positions must satisfy i < j < n");
    if (!in_ideal(p[i], p[j])) throw IdealViolation(p[i].str() + " - " + p[j].str() + " is not in the ideal");
    std::vector<RingIdempotent> target = p;
    std::swap(target[i], target[j]);
    const SlotSpace dom = sigma_space(lambda, p), cod = sigma_space(lambda, target);
    const BoxIndicator a = sigma_box(lambda[i], RingIdempotent::unit()), b = sigma_box(lambda[j], RingIdempotent::unit());
    return FiberedLatticeOp(dom, cod, omega_terms(lambda.size(), i, j, a, b));
}

FiberedLatticeOp big_Omega(const std::vector<SigmaIndex>& lambda, size_t i, size_t j,
                           const std::vector<RingIdempotent>& p) {
    if (i >= j || j >= lambda.size()) throw ShapeMismatch("positions must satisfy i < j < n");
    if (p[i].is_unit() != p[j].is_unit() || (!p[i].is_unit() && !(p[i].u == p[j].u)))
        throw ShapeMismatch("Omega^{ij} needs p_i = p_j");
    const SlotSpace s = sigma_space(lambda, p);
    const BoxIndicator a = sigma_box(lambda[i], p[i]), b = sigma_box(lambda[j], p[j]);
    return FiberedLatticeOp(s, s, omega_terms(lambda.size(), i, j, a, b));
}

AssumptionReport assumption_check(const std::vector<AssumptionSample>& samples) {
    AssumptionReport rep;
    const RingIdempotent one = RingIdempotent::unit();
    for (const auto& s : samples) {
        ++rep.checked;
        const FiberedLatticeOp c1 = subtract(compose(sigma_apply(s.lambda, s.x), sigma_apply(s.mu, one)),
                                             compose(sigma_apply(s.lambda, one), sigma_apply(s.mu, s.x)));
        if (!is_finite_box(c1)) ++rep.condition1_failures;
        const FiberedLatticeOp i_op = subtract(sigma_apply(s.lambda, RingIdempotent::gen(s.u)),
                                               sigma_apply(s.lambda, RingIdempotent::gen(s.v)));
        const FiberedLatticeOp c2 =
            subtract(compose(i_op, compose(sigma_apply(s.mu, one), sigma_apply(s.nu, one))),
                     compose(i_op, sigma_apply(s.nu, one)));
        if (!is_finite_box(c2)) ++rep.condition2_failures;
    }
    return rep;
}

}  // namespace detline
