#pragma once

#include "eldyn/config.hpp"

#include <functional>
#include <string>
#include <vector>

namespace eldyn::cli {

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = false;
    io::Json measured;
    double seconds = 0.0;
};

/// Numbered checks 1..9 followed by extra module invariants (id 0).
/// `progress` is called after each check.
std::vector<CheckResult> run_checks(const RunConfig& c,
                                    const std::function<void(const CheckResult&)>& progress = {});

/// Escaping exponential seeds x + iy, x in [7, 12], |y| <= 100 e^{-x}, plus 50, 60, 200.
std::vector<Complex> escaping_seeds(int n, std::uint64_t seed);

}  // namespace eldyn::cli
