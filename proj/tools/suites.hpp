#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace detline::cli {

const std::vector<std::string>& suite_names();

/// Runs the named property suite. Trial i draws from a generator seeded by (seed, i), so the
/// report does not depend on the thread count. Each entry of "checks" records the number of
/// failures and the largest residual; "pass" is true iff no check failed. Throws ParseError
/// for an unknown suite name.
nlohmann::json run_suite(const std::string& name, int trials, std::uint64_t seed, int threads = 1);

}  // namespace detline::cli
