#include <Eigen/Sparse>
#include <random>

#include "detline/torus_bipolar.hpp"
#include "doctest.h"

using namespace detline;

namespace {

Monomial2 z1(long n, cplx mu = 1.0) { return {mu, n, 0}; }
Monomial2 z2(long n, cplx mu = 1.0) { return {mu, 0, n}; }

Monomial2 random_monomial(std::mt19937_64& rng) {
    std::uniform_int_distribution<long> e(-3, 3);
    std::normal_distribution<double> nd;
    return {cplx(1.0 + std::abs(nd(rng)), nd(rng)), e(rng), e(rng)};
}

RingIdempotent random_idempotent(std::mt19937_64& rng, bool allow_unit = true) {
    if (allow_unit && rng() % 4 == 0) return RingIdempotent::unit();
    return RingIdempotent::gen(random_monomial(rng));
}

bool contains_exactly(const FiberedLatticeOp& t, const BoxIndicator& b) {
    return approx_equal(t, FiberedLatticeOp(torus_space(), torus_space(), {{0, 0, 1.0, b}}));
}

// Dense window [-L, L)^2 with x1 minor.
constexpr long kL = 8;
constexpr long kW = 2 * kL;

long idx(long x1, long x2) { return (x2 + kL) * kW + (x1 + kL); }

using SpMat = Eigen::SparseMatrix<cplx>;

SpMat window_indicator(long a1, long a2) {
    std::vector<Eigen::Triplet<cplx>> t;
    for (long x2 = -kL; x2 < kL; ++x2)
        for (long x1 = -kL; x1 < kL; ++x1)
            if (x1 >= a1 && x2 >= a2) t.emplace_back(idx(x1, x2), idx(x1, x2), 1.0);
    SpMat m(kW * kW, kW * kW);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SpMat window_shift(long s1, long s2) {
    std::vector<Eigen::Triplet<cplx>> t;
    for (long x2 = -kL; x2 < kL; ++x2)
        for (long x1 = -kL; x1 < kL; ++x1) {
            const long y1 = x1 + s1, y2 = x2 + s2;
            if (y1 >= -kL && y1 < kL && y2 >= -kL && y2 < kL) t.emplace_back(idx(y1, y2), idx(x1, x2), 1.0);
        }
    SpMat m(kW * kW, kW * kW);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

// Sum of singular values of a sparse matrix, computed on its non-zero rows and columns.
double sparse_trace_norm(const SpMat& a) {
    std::vector<long> rows, cols;
    const Mat d(a);
    for (long i = 0; i < d.rows(); ++i)
        if (d.row(i).norm() > 0) rows.push_back(i);
    for (long j = 0; j < d.cols(); ++j)
        if (d.col(j).norm() > 0) cols.push_back(j);
    Mat sub(long(rows.size()), long(cols.size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j) sub(long(i), long(j)) = d(rows[i], cols[j]);
    if (sub.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Mat>(sub).singularValues().sum();
}

}  // namespace

TEST_SUITE("torus_bipolar") {
    TEST_CASE("projections are shifted half planes") {
        CHECK(contains_exactly(projection_P({}), BoxIndicator::make(Interval::at_least(0))));
        CHECK(contains_exactly(projection_P(z1(3)), BoxIndicator::make(Interval::at_least(3))));
        CHECK(contains_exactly(projection_Q(z2(-2)), BoxIndicator::make(Interval{}, Interval::at_least(-2))));
        const FiberedLatticeOp p = projection_P({}), q = projection_Q({});
        CHECK(approx_equal(compose(p, q), compose(q, p)));
    }

    TEST_CASE("bipolarisation conditions on monomials") {
        std::mt19937_64 rng(5);
        for (int t = 0; t < 30; ++t) {
            const Monomial2 g = random_monomial(rng), u = random_monomial(rng), v = random_monomial(rng);
            const BipolarReport same = bipolar_verify(g, g, u, v);
            CHECK(is_zero(same.product));
            CHECK(is_zero(same.commutator));
            const BipolarReport r = bipolar_verify(g, random_monomial(rng), u, u);
            CHECK(is_zero(r.product));
        }
        for (long n = 0; n <= 4; ++n)
            for (long m = 0; m <= 4; ++m)
                CHECK(bipolar_verify({}, z1(n), {}, z2(m)).product_trace_norm == doctest::Approx(double(n * m)));
        CHECK(is_zero(bipolar_verify({}, {}, z2(3), {}).commutator));
    }

    TEST_CASE("trace norm law against dense shift commutators") {
        const SpMat pp = window_indicator(0, -kL), qq = window_indicator(-kL, 0);
        for (long n = -4; n <= 4; ++n) {
            for (long m = -4; m <= 4; ++m) {
                const SpMat s1 = window_shift(n, 0), s2 = window_shift(0, m);
                const SpMat prod = SpMat(pp * s1 - s1 * pp) * SpMat(qq * s2 - s2 * qq);
                const double dense_norm = sparse_trace_norm(prod);
                const double lib = bipolar_verify({}, z1(n), {}, z2(m)).product_trace_norm;
                CHECK(dense_norm == doctest::Approx(double(std::abs(n * m))).epsilon(1e-9));
                CHECK(lib == doctest::Approx(double(std::abs(n * m))));
            }
        }
    }

    TEST_CASE("canonical sigma family") {
        const SigmaIndex one{};
        CHECK(approx_equal(sigma_apply(one, RingIdempotent::gen({})), compose(projection_P({}), projection_Q({}))));
        CHECK(approx_equal(sigma_apply({z1(1)}, RingIdempotent::gen(z2(1))),
                           compose(projection_P(z1(1)), projection_Q(z2(1)))));
        std::mt19937_64 rng(6);
        for (int t = 0; t < 30; ++t) {
            const SigmaIndex k{random_monomial(rng)};
            const Monomial2 u = random_monomial(rng), h = random_monomial(rng);
            const FiberedLatticeOp s = sigma_apply(k, RingIdempotent::gen(u));
            CHECK(approx_equal(compose(s, s), s));
            // admissibility
            CHECK(approx_equal(sigma_apply(k, RingIdempotent::unit()), projection_P(k.k)));
            const FiberedLatticeOp pk = projection_P(k.k);
            CHECK(is_finite_box(subtract(s, compose(pk, compose(projection_Q(u), pk)))));
            CHECK(approx_equal(sigma_apply(k.acted(h), RingIdempotent::gen(h * u)), adjoint_action(h, s)));
        }
    }

    TEST_CASE("Omega squares to the identity and F has parametrix") {
        std::mt19937_64 rng(7);
        for (int t = 0; t < 30; ++t) {
            const SigmaIndex l{random_monomial(rng)}, m{random_monomial(rng)};
            const RingIdempotent p = random_idempotent(rng);
            const RingIdempotent q = p.is_unit() ? p : RingIdempotent::gen(random_monomial(rng));
            const FiberedLatticeOp om = Omega_op(l, m, p);
            CHECK(approx_equal(compose(om, om), FiberedLatticeOp::identity(om.domain())));
            const FiberedLatticeOp fpq = F_op(l, m, p, q), fqp = F_op(l, m, q, p);
            CHECK(is_finite_box(subtract(compose(fqp, fpq), FiberedLatticeOp::identity(fpq.domain()))));
            CHECK(is_finite_box(subtract(F_op(l, m, p, p), om)));
            CHECK_NOTHROW(check_fredholm(fpq));
        }
    }

    TEST_CASE("F on equal objects is the invertible swap") {
        const SigmaIndex l{z1(2) * z2(-1)};
        const RingIdempotent p = RingIdempotent::gen(z2(1)), q = RingIdempotent::gen(z2(-2) * z1(3));
        const FiberedLatticeOp f = F_op(l, l, p, q);
        const KernelCokernel kc = kernel_cokernel(f);
        CHECK(kc.kernel.empty());
        CHECK(kc.cokernel.empty());
        // antidiagonal: slot 0 -> slot 1 and slot 1 -> slot 0 with coefficient 1
        const Point x{5, 5};
        const Mat fib = f.full_fiber(x);
        CHECK(std::abs(fib(0, 0)) < 1e-15);
        CHECK(std::abs(fib(1, 1)) < 1e-15);
        CHECK(std::abs(fib(0, 1) - 1.0) < 1e-15);
        CHECK(std::abs(fib(1, 0) - 1.0) < 1e-15);
    }

    TEST_CASE("ideal violations") {
        const SigmaIndex l{}, m{z1(1)};
        CHECK_THROWS_AS(F_op(l, m, RingIdempotent::unit(), RingIdempotent::gen({})), IdealViolation);
        CHECK_NOTHROW(F_op(l, m, RingIdempotent::unit(), RingIdempotent::unit()));
        CHECK_THROWS_AS(big_F({l, m, l}, 0, 2, {RingIdempotent::gen({}), RingIdempotent::unit(), RingIdempotent::unit()}),
                        IdealViolation);
    }

    TEST_CASE("big F and big Omega act on the named slots") {
        const std::vector<SigmaIndex> lam{{}, {z1(1)}, {z1(-1) * z2(2)}};
        const std::vector<RingIdempotent> p{RingIdempotent::gen(z2(1)), RingIdempotent::gen({}),
                                            RingIdempotent::gen(z2(-1))};
        const FiberedLatticeOp f = big_F(lam, 0, 2, p);
        const FiberedLatticeOp small = F_op(lam[0], lam[2], p[0], p[2]);
        CHECK(index(f) == index(small));
        CHECK(kernel_cokernel(f).kernel.size() == kernel_cokernel(small).kernel.size());
        const std::vector<RingIdempotent> pe{p[0], p[1], p[0]};
        const FiberedLatticeOp om = big_Omega(lam, 0, 2, pe);
        CHECK(approx_equal(compose(om, om), FiberedLatticeOp::identity(om.domain())));
        CHECK_THROWS_AS(big_Omega(lam, 0, 2, p), ShapeMismatch);
    }

    TEST_CASE("equivariance of F under the group action") {
        std::mt19937_64 rng(8);
        for (int t = 0; t < 30; ++t) {
            const SigmaIndex l{random_monomial(rng)}, m{random_monomial(rng)};
            const RingIdempotent p = random_idempotent(rng);
            const RingIdempotent q = p.is_unit() ? p : RingIdempotent::gen(random_monomial(rng));
            const Monomial2 g = random_monomial(rng);
            const FiberedLatticeOp lhs = F_op(l.acted(g), m.acted(g), p.acted(g), q.acted(g));
            CHECK(approx_equal(lhs, adjoint_action(g, F_op(l, m, p, q))));
        }
    }

    TEST_CASE("representation family satisfies the trace class assumption") {
        std::mt19937_64 rng(9);
        std::vector<AssumptionSample> samples;
        for (int t = 0; t < 50; ++t)
            samples.push_back({{random_monomial(rng)}, {random_monomial(rng)}, {random_monomial(rng)},
                               random_idempotent(rng), random_monomial(rng), random_monomial(rng)});
        const AssumptionReport r = assumption_check(samples);
        CHECK(r.checked == 50);
        CHECK(r.ok());
        const SigmaIndex l{z1(2)}, m{z1(-1)};
        const RingIdempotent one = RingIdempotent::unit();
        CHECK(is_zero(subtract(compose(sigma_apply(l, one), sigma_apply(m, one)),
                               compose(sigma_apply(l, one), sigma_apply(m, one)))));
    }
}
