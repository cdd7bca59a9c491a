#include <cmath>
#include <random>

#include "doctest.h"
#include "suites.hpp"
#include "syntax.hpp"

using namespace detline;
using namespace detline::cli;

TEST_SUITE("cli") {
    TEST_CASE("torus monomial syntax") {
        const Monomial2 m = parse_monomial2("(2,-0.5)*z1^3*z2^-1");
        CHECK(m.mu == cplx(2.0, -0.5));
        CHECK(m.a == 3);
        CHECK(m.b == -1);
        const Monomial2 c = parse_monomial2(" (2, 0) ");
        CHECK(c.mu == cplx(2.0));
        CHECK(c.a == 0);
        CHECK(c.b == 0);
        const Monomial2 z = parse_monomial2("z2*z1^(-2)");
        CHECK(z.mu == cplx(1.0));
        CHECK(z.a == -2);
        CHECK(z.b == 1);
        CHECK(parse_monomial2("-3").mu == cplx(-3.0));
        for (const char* bad : {"", "(0,0)*z1", "(1,0)*z3", "z1*z1", "(1,0)z1", "(1,0)*z1^", "(1,)"})
            CHECK_THROWS_AS(parse_monomial2(bad), ParseError);
    }

    TEST_CASE("circle loop syntax") {
        const Loop u = parse_loop("(1.5,0)*z^-2");
        CHECK(u.is_monomial());
        CHECK(u.n() == -2);
        CHECK(u.mu() == cplx(1.5));
        CHECK(parse_loop("z").n() == 1);
        CHECK(parse_loop("z^3").n() == 3);
        CHECK(parse_loop("2").n() == 0);
        const Loop l = parse_loop("(2,0):(1,0)@0");
        CHECK_FALSE(l.is_monomial());
        CHECK(l.kmin() == 0);
        CHECK(l.kmax() == 1);
        CHECK(l.coeff(1) == cplx(1.0));
        CHECK(parse_loop("3:0.5@-1").coeff(-1) == cplx(3.0));
        CHECK_THROWS_AS(parse_loop("(1,0):(1,0)@0"), Uncertified);
        for (const char* bad : {"(0,0)*z", "(1,0)*w", "1:2", "1:2@", "z*z"}) CHECK_THROWS_AS(parse_loop(bad), ParseError);
    }

    TEST_CASE("formatting round trips exactly") {
        std::mt19937_64 rng(3);
        std::normal_distribution<double> nd;
        std::uniform_int_distribution<long> e(-9, 9);
        for (int i = 0; i < 200; ++i) {
            const Monomial2 m{cplx(nd(rng), nd(rng)), e(rng), e(rng)};
            const Monomial2 back = parse_monomial2(format_monomial2(m));
            CHECK(back == m);
            const Loop u = Loop::monomial(m.mu, m.a);
            const Loop ub = parse_loop(format_loop(u));
            CHECK(ub.mu() == u.mu());
            CHECK(ub.n() == u.n());
        }
        const Loop l = Loop::laurent({cplx(0.1, 0.3), cplx(3.0, -1.0 / 3.0), cplx(0.7, 0.0)}, -1);
        const Loop lb = parse_loop(format_loop(l));
        CHECK(lb.kmin() == l.kmin());
        CHECK(lb.coeffs() == l.coeffs());
    }

    TEST_CASE("json numbers carry 17 significant digits") {
        const nlohmann::json j{{"re", 0.1}, {"im", -2.0}, {"n", 3}, {"s", "x"}, {"bad", INFINITY}, {"v", {1.0 / 3.0}}};
        const std::string text = dump_json(j, 0);
        CHECK(text == R"({"bad":null,"im":-2,"n":3,"re":0.10000000000000001,"s":"x","v":[0.33333333333333331]})");
        const nlohmann::json back = nlohmann::json::parse(dump_json(j));
        CHECK(back.at("re").get<double>() == 0.1);
        CHECK(back.at("v")[0].get<double>() == 1.0 / 3.0);
    }

    TEST_CASE("suites pass and are deterministic in the thread count") {
        for (const std::string& s : suite_names()) {
            const nlohmann::json one = run_suite(s, 6, 7, 1);
            const nlohmann::json four = run_suite(s, 6, 7, 4);
            CHECK_MESSAGE(one.at("pass").get<bool>(), one.dump());
            CHECK(one.dump() == four.dump());
            CHECK(run_suite(s, 6, 8, 1).dump() != one.dump());
        }
    }

    TEST_CASE("zero trials pass vacuously") {
        for (const std::string& s : suite_names()) {
            const nlohmann::json r = run_suite(s, 0, 1);
            CHECK(r.at("pass").get<bool>());
            for (const auto& c : r.at("checks")) CHECK(c.at("evaluated").get<int>() == 0);
        }
        CHECK_THROWS_AS(run_suite("nonsense", 1, 1), ParseError);
    }

    TEST_CASE("bipolar report carries the trace norm table") {
        const nlohmann::json r = run_suite("bipolar", 0, 1);
        const auto& t = r.at("trace_norm_table");
        REQUIRE(t.at("exponents").size() == 9);
        for (size_t i = 0; i < 9; ++i)
            for (size_t j = 0; j < 9; ++j) {
                const long n = static_cast<long>(i) - 4, m = static_cast<long>(j) - 4;
                CHECK(t.at("trace_norm")[i][j].get<double>() == static_cast<double>(std::abs(n) * std::abs(m)));
            }
        CHECK(t.at("exact").get<bool>());
    }
}
