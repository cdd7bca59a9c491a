#include "suites.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <random>
#include <thread>

#include "detline/cocycle3.hpp"
#include "detline/coproduct_cat.hpp"
#include "detline/fredholm_lines.hpp"
#include "detline/graded_lines.hpp"
#include "detline/torus_bipolar.hpp"
#include "instances.hpp"

namespace detline::cli {

namespace {

using instances::perturb;
using instances::random_fredholm;
using instances::random_invertible;
using instances::two_slot_space;
using Rng = std::mt19937_64;

constexpr double kTol = 1e-9;

struct Suite {
    std::vector<std::string> checks;
    /// One residual per check; a check fails when its residual exceeds kTol or is not finite.
    std::function<std::vector<double>(Rng&)> trial;
};

long uniform(Rng& rng, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

cplx coefficient(Rng& rng) {
    std::uniform_real_distribution<double> r(0.5, 2.0), ph(0.0, 6.283185307179586);
    return std::polar(r(rng), ph(rng));
}

Monomial2 monomial(Rng& rng, long lo, long hi) { return {coefficient(rng), uniform(rng, lo, hi), uniform(rng, lo, hi)}; }

// ---- torsion

ExactTriangle small_triangle(Rng& rng) {
    for (;;) {
        int r[6];
        for (int& x : r) x = static_cast<int>(uniform(rng, 0, 2));
        ExactTriangle t = instances::random_triangle(rng, r);
        if (t.V.dim_even() <= 5 && t.V.dim_odd() <= 5 && t.U.dim_even() <= 5 && t.W.dim_odd() <= 5) return t;
    }
}

std::vector<double> torsion_trial(Rng& rng) {
    const ExactTriangle t = small_triangle(rng);
    const double lift = rel_diff(torsion_of_triangle(t, LiftStrategy::Pivoted),
                                 torsion_of_triangle(t, LiftStrategy::Random, rng()));

    const Mat ap = random_invertible(rng, t.U.dim_even()), am = random_invertible(rng, t.U.dim_odd());
    const Mat bp = random_invertible(rng, t.V.dim_even()), bm = random_invertible(rng, t.V.dim_odd());
    const Mat cp = random_invertible(rng, t.W.dim_even()), cm = random_invertible(rng, t.W.dim_odd());
    ExactTriangle s = t;
    s.i_plus = bp * t.i_plus * ap.inverse();
    s.i_minus = bm * t.i_minus * am.inverse();
    s.q_plus = cp * t.q_plus * bp.inverse();
    s.q_minus = cm * t.q_minus * bm.inverse();
    s.d_plus = am * t.d_plus * cp.inverse();
    s.d_minus = ap * t.d_minus * cm.inverse();
    const double natural = rel_diff(torsion_of_triangle(s) * det(bp) / det(bm),
                                    torsion_of_triangle(t) * det(ap) / det(am) * det(cp) / det(cm));

    const SlotSpace h = two_slot_space(rng), g = two_slot_space(rng), k = two_slot_space(rng), l = two_slot_space(rng);
    const FiberedLatticeOp a = random_fredholm(rng, h, g, -4, 3), b = random_fredholm(rng, g, k, -3, 4),
                           c = random_fredholm(rng, k, l, -4, 4);
    const FiberedLine la = det_line(a), lb = det_line(b), lc = det_line(c);
    const FiberedLine lba = det_line(compose(b, a)), lcb = det_line(compose(c, b));
    const FiberedLine lcba = det_line(compose(c, compose(b, a)));
    const double assoc = rel_diff(torsion(lb, lc, lcb) * torsion(la, lcb, lcba),
                                  torsion(la, lb, lba) * torsion(lba, lc, lcba));
    return {lift, natural, assoc};
}

// ---- perturbation

std::vector<double> perturbation_trial(Rng& rng) {
    const SlotSpace h = two_slot_space(rng), g = two_slot_space(rng), k = two_slot_space(rng);
    const FiberedLatticeOp t1 = random_fredholm(rng, h, g, -4, 4);
    const FiberedLatticeOp t2 = perturb(rng, t1, -5, 5), t3 = perturb(rng, t2, -5, 5);
    const FiberedLine l1 = det_line(t1), l2 = det_line(t2), l3 = det_line(t3);
    const cplx p12 = perturbation(l1, l2);
    const double cocycle = rel_diff(perturbation(l2, l3) * p12, perturbation(l1, l3));
    const double inverse = rel_diff(perturbation(l2, l1) * p12, 1.0);
    const double completion = rel_diff(perturbation(l1, l2, Completion::Random, rng()), p12);

    const FiberedLatticeOp s1 = random_fredholm(rng, g, k, -4, 4), s2 = perturb(rng, s1, -5, 5);
    const FiberedLine ls1 = det_line(s1), ls2 = det_line(s2);
    const FiberedLine c1 = det_line(compose(s1, t1)), c2 = det_line(compose(s2, t2));
    const double with_torsion = rel_diff(torsion(l2, ls2, c2) * p12 * perturbation(ls1, ls2),
                                         perturbation(c1, c2) * torsion(l1, ls1, c1));
    return {cocycle, inverse, completion, with_torsion};
}

// ---- category

SigmaIndex object(Rng& rng) { return {monomial(rng, 0, 3)}; }
RingIdempotent idempotent(Rng& rng) { return RingIdempotent::gen(monomial(rng, -1, 3)); }

std::vector<double> category_trial(Rng& rng) {
    const SigmaIndex l = object(rng), m = object(rng), n = object(rng), t = object(rng);
    const RingIdempotent p = idempotent(rng), q = idempotent(rng), e = idempotent(rng), f = idempotent(rng);
    const BasePoint b = idempotent(rng), b2 = idempotent(rng);
    const HomLineElement x = hom_frame(l, m, p, q, b, coefficient(rng)), y = hom_frame(m, n, p, q, b, coefficient(rng)),
                         z = hom_frame(n, t, p, q, b, coefficient(rng));

    const double unital = std::max(rel_diff(compose(hom_identity(l, p, q, b), x).value(), x.value()),
                                   rel_diff(compose(x, hom_identity(m, p, q, b)).value(), x.value()));
    const double assoc = rel_diff(compose(compose(x, y), z).value(), compose(x, compose(y, z)).value());
    const double inv = std::max(rel_diff(compose(x, inverse(x)).value(), 1.0), rel_diff(compose(inverse(x), x).value(), 1.0));
    const double coassoc =
        rel_diff(coproduct_at(0, f, coproduct(e, x)).value(), coproduct_at(1, e, coproduct(f, x)).value());
    const double comult = rel_diff(coproduct(e, compose(x, y)).value(), compose(coproduct(e, x), coproduct(e, y)).value());
    const double base = std::max(
        rel_diff(change_base(b2, compose(x, y)).value(), compose(change_base(b2, x), change_base(b2, y)).value()),
        rel_diff(change_base(b2, coproduct(e, x)).value(), coproduct(e, change_base(b2, x)).value()));

    const BasePoint b0 = RingIdempotent::gen(Monomial2{1.0, 0, 0});
    const Monomial2 g = monomial(rng, -1, 2), h = monomial(rng, -1, 2);
    const HomLineElement xa = hom_frame(l, m, p, q, b0, coefficient(rng)), ya = hom_frame(m, n, p, q, b0, coefficient(rng));
    const double action = std::max(
        rel_diff(group_act(h, group_act(g, xa)).value(), group_act(h * g, xa).value()),
        rel_diff(group_act(g, compose(xa, ya)).value(), compose(group_act(g, xa), group_act(g, ya)).value()));

    const SigmaIndex cl{monomial(rng, -2, 3)}, cm{monomial(rng, -2, 3)}, cn{monomial(rng, -2, 3)};
    const double crux = std::abs(crux_determinant(cl, cm, cn, idempotent(rng), idempotent(rng)) - 1.0);
    return {unital, assoc, inv, coassoc, comult, base, action, crux};
}

// ---- cocycle

std::vector<double> cocycle_trial(Rng& rng) {
    const Monomial2 g = monomial(rng, 0, 4), h = monomial(rng, 0, 4), k = monomial(rng, 0, 4);
    const double closed = rel_diff(cocycle_c(g, h, k).value, closed_form(g, h, k).value);
    const Monomial2 a = monomial(rng, 0, 3), b = monomial(rng, 0, 3), c = monomial(rng, 0, 3), d = monomial(rng, 0, 3);
    const RelationReport rel = verify_relation(a, b, c, d, kTol);
    const Monomial2 lam{coefficient(rng), 0, 0}, z1{1.0, 1, 0}, z2{1.0, 0, 1};
    const double nontrivial = std::max(rel_diff(cocycle_c(lam, z1, z2).value, lam.mu),
                                       rel_diff(cocycle_c(z1, z2, lam).value, 1.0));
    return {closed, rel.residual, nontrivial};
}

// ---- bipolar

std::vector<double> bipolar_trial(Rng& rng) {
    const Monomial2 g = monomial(rng, -3, 3), h = monomial(rng, -3, 3), u = monomial(rng, -3, 3),
                    v = monomial(rng, -3, 3);
    const BipolarReport r = bipolar_verify(g, h, u, v);
    const double expected = static_cast<double>(std::abs(g.a - h.a) * std::abs(u.b - v.b));
    const double product = std::abs(r.product_trace_norm - expected);
    const double commutator = r.commutator_trace_norm;
    AssumptionSample s{{monomial(rng, -3, 3)}, {monomial(rng, -3, 3)}, {monomial(rng, -3, 3)},
                       rng() % 4 == 0 ? RingIdempotent::unit() : RingIdempotent::gen(monomial(rng, -3, 3)),
                       monomial(rng, -3, 3), monomial(rng, -3, 3)};
    const AssumptionReport a = assumption_check({s});
    return {product, commutator, static_cast<double>(a.condition1_failures),
            static_cast<double>(a.condition2_failures)};
}

nlohmann::json trace_norm_table(bool& ok) {
    nlohmann::json exps = nlohmann::json::array(), rows = nlohmann::json::array();
    for (long n = -4; n <= 4; ++n) {
        exps.push_back(n);
        nlohmann::json row = nlohmann::json::array();
        for (long m = -4; m <= 4; ++m) {
            const double v = bipolar_verify({}, {1.0, n, 0}, {}, {1.0, 0, m}).product_trace_norm;
            ok = ok && v == static_cast<double>(std::abs(n) * std::abs(m));
            row.push_back(v);
        }
        rows.push_back(row);
    }
    return {{"exponents", exps}, {"trace_norm", rows}, {"expected", "|n|*|m|"}, {"exact", ok}};
}

const Suite& suite(const std::string& name) {
    static const std::vector<std::pair<std::string, Suite>> table{
        {"torsion", {{"lift_independence", "naturality", "associativity"}, torsion_trial}},
        {"perturbation", {{"cocycle", "inverse", "completion_independence", "torsion_compatibility"}, perturbation_trial}},
        {"category",
         {{"unitality", "associativity", "inverse", "coassociativity", "coproduct_multiplicative", "change_of_base",
           "group_action", "crux_determinant"},
          category_trial}},
        {"cocycle", {{"closed_form", "twisted_relation", "nontriviality"}, cocycle_trial}},
        {"bipolar", {{"product_trace_norm", "commutator_trace_norm", "assumption_condition_1", "assumption_condition_2"},
                     bipolar_trial}},
    };
    for (const auto& [n, s] : table)
        if (n == name) return s;
    throw ParseError("unknown suite '" + name + "'");
}

struct TrialResult {
    std::vector<double> residuals;
    std::string error;
};

TrialResult run_trial(const Suite& s, std::uint64_t seed, int index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index)};
    Rng rng(seq);
    TrialResult r;
    try {
        r.residuals = s.trial(rng);
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"torsion", "perturbation", "category", "cocycle", "bipolar"};
    return names;
}

nlohmann::json run_suite(const std::string& name, int trials, std::uint64_t seed, int threads) {
    const Suite& s = suite(name);
    trials = std::max(trials, 0);
    std::vector<TrialResult> results(static_cast<size_t>(trials));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < trials; i = next++) results[static_cast<size_t>(i)] = run_trial(s, seed, i);
    };
    const int n_threads = std::clamp(threads, 1, std::max(trials, 1));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    bool pass = true;
    nlohmann::json checks = nlohmann::json::array(), errors = nlohmann::json::array();
    for (size_t c = 0; c < s.checks.size(); ++c) {
        int evaluated = 0, failures = 0;
        double worst = 0.0;
        for (const auto& r : results) {
            if (!r.error.empty()) continue;
            const double v = r.residuals[c];
            ++evaluated;
            if (!(v <= kTol)) ++failures;
            if (std::isfinite(v)) worst = std::max(worst, v);
            else worst = INFINITY;
        }
        pass = pass && failures == 0;
        checks.push_back({{"name", s.checks[c]},
                          {"tolerance", kTol},
                          {"evaluated", evaluated},
                          {"failures", failures},
                          {"max_residual", std::isfinite(worst) ? nlohmann::json(worst) : nlohmann::json("inf")}});
    }
    for (size_t i = 0; i < results.size(); ++i)
        if (!results[i].error.empty()) {
            pass = false;
            errors.push_back({{"trial", i}, {"message", results[i].error}});
        }

    nlohmann::json report{{"suite", name}, {"trials", trials}, {"seed", seed}, {"checks", checks}, {"errors", errors}};
    if (name == "bipolar") {
        bool exact = true;
        report["trace_norm_table"] = trace_norm_table(exact);
        pass = pass && exact;
    }
    report["pass"] = pass;
    return report;
}

}  // namespace detline::cli
