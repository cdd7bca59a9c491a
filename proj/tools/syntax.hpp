#pragma once

#include <string>

#include "detline/circle_polarization.hpp"
#include "detline/torus_bipolar.hpp"
#include "json.hpp"

namespace detline::cli {

/// "(re,im)*z1^a*z2^b". The coefficient may also be a bare real number, factors may be
/// omitted or given without an exponent ("z1"). Throws ParseError, also for mu = 0.
Monomial2 parse_monomial2(const std::string& text);

/// "(re,im)*z^n" for monomials, "c_kmin:...:c_kmax@kmin" for Laurent polynomials.
/// Throws ParseError on malformed input; Loop::laurent may throw Uncertified.
Loop parse_loop(const std::string& text);

/// Canonical forms with 17 significant digits; parse(format(x)) reproduces x exactly.
std::string format_monomial2(const Monomial2& m);
std::string format_loop(const Loop& u);

/// JSON text with floating point numbers printed as %.17g; non-finite numbers become null.
/// Object keys keep the sorted order of nlohmann::json.
std::string dump_json(const nlohmann::json& j, int indent = 2);

}  // namespace detline::cli
