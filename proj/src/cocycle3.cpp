#include "detline/cocycle3.hpp"

#include <cmath>
#include <numbers>

namespace detline {

namespace {

const Monomial2 kUnit{1.0, 0, 0};

RingIdempotent q_of(const Monomial2& u) { return RingIdempotent::gen(u); }
SigmaIndex obj(const Monomial2& g) { return SigmaIndex{g}; }
BasePoint base_point() { return q_of(kUnit); }

/// beta_{g,h} = id_{(e)} (x) b_{g,h} in H(q_e, q_g) (x) H(q_g, q_gh).
HomTensor beta(const Monomial2& g, const Monomial2& h) {
    return HomTensor{{hom_identity(obj(kUnit), q_of(kUnit), q_of(g), base_point()), BetaChoice::make(g, h).b}};
}

int parity_sign(long e) { return (e % 2 == 0) ? 1 : -1; }

}  // namespace

BetaChoice BetaChoice::make(const Monomial2& g, const Monomial2& h) {
    HomLineElement b = hom_frame(obj(kUnit), obj(g), q_of(g), q_of(g * h), base_point());
    b.plus.coefficient = lattice_frame_coefficient(b.plus.line);
    b.minus.coefficient = lattice_frame_coefficient(b.minus.line);
    return BetaChoice{g, h, std::move(b)};
}

cplx Cocycle3Value::canonical() const {
    const bool flip = value.real() < 0.0 || (value.real() == 0.0 && value.imag() < 0.0);
    return flip ? -value : value;
}

bool Cocycle3Value::equal_mod_sign(const Cocycle3Value& o, double rel_tol) const {
    return rel_diff(value, o.value) <= rel_tol || rel_diff(value, -o.value) <= rel_tol;
}

HomologyCycle3 HomologyCycle3::symbol(const Monomial2& f, const Monomial2& g, const Monomial2& h) {
    return HomologyCycle3{{{1, {f, g, h}},
                           {-1, {f, h, g}},
                           {1, {h, f, g}},
                           {-1, {h, g, f}},
                           {1, {g, h, f}},
                           {-1, {g, f, h}}}};
}

Cocycle3Value cocycle_c(const Monomial2& g, const Monomial2& h, const Monomial2& k) {
    const Monomial2 gh = g * h;
    const HomTensor x1 = tensor(beta(g, h), HomTensor{{hom_identity(obj(gh), q_of(gh), q_of(gh * k), base_point())}});
    const HomTensor x2 = coproduct_at(0, q_of(g), beta(gh, k));
    const HomTensor x3 = coproduct_at(1, q_of(gh), beta(g, h * k));
    const HomTensor x4 =
        tensor(HomTensor{{hom_identity(obj(kUnit), q_of(kUnit), q_of(g), base_point())}}, group_act(g, beta(h, k)));
    const HomTensor gamma = compose(compose(compose(inverse(x1), inverse(x2)), x3), x4);
    return Cocycle3Value{gamma.value()};
}

long closed_form_epsilon(const Monomial2& g, const Monomial2& h, const Monomial2& k) {
    const long n1 = g.a, n2 = g.b, m1 = h.a, m2 = h.b, l2 = k.b;
    const long s = n2 + m2, t = n2 + m2 + l2;
    return (n1 * m2 + n1 * m1 + n2 * m1) * l2 + n1 * n2 * m1 * l2 + n1 * m1 * (s - 1) * s / 2 +
           n1 * m1 * (t - 1) * t / 2;
}

Cocycle3Value closed_form(const Monomial2& g, const Monomial2& h, const Monomial2& k) {
    for (long e : {g.a, g.b, h.a, h.b, k.a, k.b})
        if (e < 0) throw ExponentRange("closed form requires nonnegative exponents");
    const cplx v = std::pow(g.mu, static_cast<double>(h.a * k.b));
    return Cocycle3Value{static_cast<double>(parity_sign(closed_form_epsilon(g, h, k))) * v};
}

RelationReport verify_relation(const Monomial2& g, const Monomial2& h, const Monomial2& k, const Monomial2& l,
                               double rel_tol) {
    RelationReport r;
    const long e = BetaChoice::make(g, h).degree() * BetaChoice::make(k, l).degree();
    r.lhs = static_cast<double>(parity_sign(e)) * cocycle_c(g * h, k, l).value * cocycle_c(g, h, k * l).value;
    r.rhs = cocycle_c(h, k, l).value * cocycle_c(g, h * k, l).value * cocycle_c(g, h, k).value;
    r.residual = rel_diff(r.lhs, r.rhs);
    r.pass = r.residual <= rel_tol;
    return r;
}

Cocycle3Value pair_homology(const HomologyCycle3& cycle) {
    cplx v = 1.0;
    for (const auto& t : cycle.terms) {
        if (t.coefficient == 0) continue;
        const cplx c = cocycle_c(t.triple[0], t.triple[1], t.triple[2]).value;
        v *= std::pow(c, static_cast<double>(t.coefficient));
    }
    return Cocycle3Value{v};
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Continuous logarithm of (t, s) -> u(e^{2 pi i t}, e^{2 pi i s}) on an (n+1) x (n+1) grid,
/// started at the principal value at the origin, followed along s = 0 and then along each column.
Mat grid_log(const Monomial2& u, int n) {
    auto value = [&](int i, int j) {
        const double t = static_cast<double>(i) / n, s = static_cast<double>(j) / n;
        return u.mu * std::polar(1.0, kTwoPi * (static_cast<double>(u.a) * t + static_cast<double>(u.b) * s));
    };
    auto step = [](cplx prev_log, cplx next) {
        const double d = std::remainder(std::arg(next) - prev_log.imag(), kTwoPi);
        if (std::abs(d) > std::numbers::pi / 2) throw BranchJump("phase jump along the quadrature grid");
        return cplx(std::log(std::abs(next)), prev_log.imag() + d);
    };
    Mat l(n + 1, n + 1);
    l(0, 0) = std::log(value(0, 0));
    for (int i = 1; i <= n; ++i) l(i, 0) = step(l(i - 1, 0), value(i, 0));
    for (int i = 0; i <= n; ++i)
        for (int j = 1; j <= n; ++j) l(i, j) = step(l(i, j - 1), value(i, j));
    return l;
}

long winding(const Mat& l, int axis) {
    const long n = l.rows() - 1;
    const cplx d = axis == 0 ? l(n, 0) - l(0, 0) : l(0, n) - l(0, 0);
    return std::lround(d.imag() / kTwoPi);
}

/// Derivative of the grid function along an axis by central differences (one sided at the ends).
cplx partial(const Mat& l, int i, int j, int axis) {
    const int n = static_cast<int>(l.rows()) - 1;
    const double h = 1.0 / n;
    const int lo = axis == 0 ? std::max(i - 1, 0) : std::max(j - 1, 0);
    const int hi = axis == 0 ? std::min(i + 1, n) : std::min(j + 1, n);
    const cplx a = axis == 0 ? l(lo, j) : l(i, lo), b = axis == 0 ? l(hi, j) : l(i, hi);
    return (b - a) / (h * (hi - lo));
}

double trapezoid_weight(int i, int n) { return (i == 0 || i == n) ? 0.5 : 1.0; }

}  // namespace

ConjectureReport conjecture_probe(const Monomial2& f, const Monomial2& g, const Monomial2& h, int q_points) {
    if (q_points < 2) throw ShapeMismatch("at least two quadrature points required");
    const int n = q_points;
    const Mat lf = grid_log(f, n), lg = grid_log(g, n), lh = grid_log(h, n);
    ConjectureReport r;
    r.w1_f = winding(lf, 0);
    r.w2_f = winding(lf, 1);
    r.w1_g = winding(lg, 0);
    r.w2_g = winding(lg, 1);

    const double step = 1.0 / n;
    const cplx two_pi_i(0.0, kTwoPi);
    cplx area = 0.0;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            const cplx form =
                partial(lg, i, j, 0) * partial(lh, i, j, 1) - partial(lg, i, j, 1) * partial(lh, i, j, 0);
            area += trapezoid_weight(i, n) * trapezoid_weight(j, n) * lf(i, j) * form;
        }
    area *= step * step * 2.0 / (two_pi_i * two_pi_i);

    cplx right = 0.0, top = 0.0;
    for (int j = 0; j <= n; ++j) right += trapezoid_weight(j, n) * lg(n, j) * partial(lh, n, j, 1);
    for (int i = 0; i <= n; ++i) top += trapezoid_weight(i, n) * lg(i, n) * partial(lh, i, n, 0);
    const cplx pi_i(0.0, std::numbers::pi);
    const cplx boundary = (-static_cast<double>(r.w1_f) * right + static_cast<double>(r.w2_f) * top) * step / pi_i;

    const long corner = 2 * r.w1_f * r.w2_g - 2 * r.w1_g * r.w2_f;
    r.formula = std::exp(area + boundary) * std::pow(h.mu, static_cast<double>(corner));
    r.pairing = pair_homology(HomologyCycle3::symbol(f, g, h)).value;
    r.ratio = r.pairing / r.formula;
    return r;
}

}  // namespace detline
