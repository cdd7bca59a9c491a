#include <cstdlib>
#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "detline/circle_polarization.hpp"
#include "detline/cocycle3.hpp"
#include "json.hpp"
#include "suites.hpp"
#include "syntax.hpp"

using namespace detline;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kVerificationFailed = 1, kInvalidInput = 2, kUnstable = 3 };

json complex_json(cplx c) { return {{"re", c.real()}, {"im", c.imag()}}; }

void emit(const json& j) { std::cout << cli::dump_json(j) << "\n"; }

int threads_from_env() {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("DETLINE_THREADS");
    if (!env || !*env) return static_cast<int>(hw);
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ParseError(std::string("DETLINE_THREADS must be a positive integer, got '") + env + "'");
    return static_cast<int>(std::min<long>(v, hw));
}

int cmd_cocycle3(const std::string& gs, const std::string& hs, const std::string& ks) {
    const Monomial2 g = cli::parse_monomial2(gs), h = cli::parse_monomial2(hs), k = cli::parse_monomial2(ks);
    const cplx value = cocycle_c(g, h, k).value;
    json out{{"value", complex_json(value)}};
    bool agree = true;
    try {
        const cplx closed = closed_form(g, h, k).value;
        agree = rel_diff(value, closed) <= 1e-9;
        out["closed_form"] = complex_json(closed);
        out["closed_form_applicable"] = true;
    } catch (const ExponentRange&) {
        out["closed_form"] = nullptr;
        out["closed_form_applicable"] = false;
    }
    out["agree"] = agree;
    emit(out);
    return agree ? kOk : kVerificationFailed;
}

int cmd_verify(const std::string& suite, int trials, std::uint64_t seed) {
    const int threads = threads_from_env();
    std::cerr << "verify: suite=" << suite << " trials=" << trials << " seed=" << seed << " threads=" << threads << "\n";
    const json report = cli::run_suite(suite, trials, seed, threads);
    emit(report);
    return report.at("pass").get<bool>() ? kOk : kVerificationFailed;
}

int cmd_pair(const std::string& fs, const std::string& gs, const std::string& hs) {
    const Monomial2 f = cli::parse_monomial2(fs), g = cli::parse_monomial2(gs), h = cli::parse_monomial2(hs);
    const Cocycle3Value v = pair_homology(HomologyCycle3::symbol(f, g, h));
    emit({{"pairing", complex_json(v.value)}, {"class_rep", complex_json(v.canonical())}});
    return kOk;
}

int cmd_tame(const std::string& us, const std::string& vs, std::optional<int> numeric, int qpoints) {
    const Loop u = cli::parse_loop(us), v = cli::parse_loop(vs);
    if (qpoints < 2) throw ParseError("--qpoints must be at least 2");
    CircleOptions opt;
    if (numeric) {
        if (*numeric < 1) throw ParseError("--numeric must be positive");
        opt.radius = *numeric;
        opt.force_window = true;
    }
    const int s = convention_exponent();
    const TameSymbolResult det_side = steinberg_pairing(u, v, opt);
    const TameSymbolResult formula = tame_symbol_formula(u, v, qpoints);
    const bool agree = rel_diff(det_side.value, std::pow(formula.value, static_cast<double>(s))) <= 1e-6;
    emit({{"determinant_pipeline", complex_json(det_side.value)},
          {"integral_formula", complex_json(formula.value)},
          {"convention_exponent", s},
          {"window_radius", det_side.radius},
          {"q_points", formula.q_points},
          {"agree", agree}});
    return agree ? kOk : kVerificationFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Determinant line calculus: group cocycles on loop groups and the two-torus"};
    app.require_subcommand(1);

    std::string a, b, c;
    auto* cocycle = app.add_subcommand("cocycle3", "3-cocycle c(g,h,k) on monomials (re,im)*z1^a*z2^b");
    cocycle->add_option("G", a)->required();
    cocycle->add_option("H", b)->required();
    cocycle->add_option("K", c)->required();

    std::string suite;
    int trials = 100;
    std::uint64_t seed = 0;
    auto* verify = app.add_subcommand("verify", "randomized property suite with a JSON report");
    verify->add_option("--suite", suite)->required()->check(CLI::IsMember(cli::suite_names()));
    verify->add_option("--trials", trials)->check(CLI::NonNegativeNumber);
    verify->add_option("--seed", seed);

    auto* pair = app.add_subcommand("pair", "pairing of the 3-cocycle with the symbol cycle of f, g, h");
    pair->add_option("F", a)->required();
    pair->add_option("G", b)->required();
    pair->add_option("H", c)->required();

    std::optional<int> numeric;
    int qpoints = 4096;
    auto* tame = app.add_subcommand("tame", "determinant pairing of two loops against the tame symbol integral");
    tame->add_option("U", a)->required();
    tame->add_option("V", b)->required();
    tame->add_option("--numeric", numeric, "window radius N; forces window mode (default: exact for monomials, 64)");
    tame->add_option("--qpoints", qpoints, "quadrature points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalidInput;
    }

    try {
        if (*cocycle) return cmd_cocycle3(a, b, c);
        if (*verify) return cmd_verify(suite, trials, seed);
        if (*pair) return cmd_pair(a, b, c);
        if (*tame) return cmd_tame(a, b, numeric, qpoints);
    } catch (const Unstable& e) {
        std::cerr << e.what() << "\n";
        return kUnstable;
    } catch (const BranchJump& e) {
        std::cerr << e.what() << "\n";
        return kUnstable;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kInvalidInput;
    }
    return kInvalidInput;
}
