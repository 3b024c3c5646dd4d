// One line per acceptance criterion; exit status 1 if any fails.
// Usage: acceptance <path to eldyn executable>

#include "checks.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

using namespace eldyn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string summary(const cli::CheckResult& r) {
    const auto& m = r.measured;
    auto num = [](const io::Json& j) { return j.is_number() ? io::format_double(j.get<double>()) : j.dump(); };
    std::ostringstream os;
    switch (r.id) {
        case 1:
            os << m["samples"] << " samples, " << m["violations"] << " violations, min relative slack "
               << num(m["min_relative_slack"]);
            break;
        case 2:
            for (const auto& [k, v] : m["families"].items())
                os << k << ": max ratio " << num(v["max_ratio"]) << " over " << v["ratios_measured"]
                   << " ratios (margin " << num(v["normalized_margin"]) << "); ";
            break;
        case 3:
            os << m["samples"] << " samples, max relative error " << num(m["max_relative_error"]);
            break;
        case 4:
            os << m["instances"] << " instances, max |pi_n - z_n| " << num(m["max_abs_error"]) << ", monotonicity "
               << m["monotonicity_violations"] << ", gap bound " << m["gap_bound_violations"] << ", worked pi(10.2) = "
               << num(m["worked"]["pi(10.2)"]);
            break;
        case 5:
            os << m["hairs"] << " hairs, " << m["converged_runs"] << " converged runs, max idempotence gap "
               << num(m["max_idempotence_gap"]) << ", defects " << m["defects"]["count"] << " max modulus "
               << m["defects"]["max_modulus"] << ", all meet S_R " << m["defects"]["all_meet_region"];
            break;
        case 6:
            os << m["instances"] << " brushes, max crossings " << m["max_crossings"];
            break;
        case 7:
            for (const auto& [k, v] : m["families"].items())
                os << k << ": " << v["samples"] << " samples, residual " << num(v["max_residual"]) << ", violations "
                   << v["displacement_violations"] << "/" << v["annulus_violations"] << "/"
                   << v["equivariance_violations"] << "; ";
            os << "lambda = 1 identity " << m["lambda_1_identity"];
            break;
        case 8:
            os << m["seeds"] << " seeds, contained " << m["contained"] << ", monotone " << m["monotone"];
            break;
        case 9:
            for (const auto& [k, v] : m["families"].items())
                os << k << ": " << v["pairs"] << " pairs, " << v["violations"] << " violations; ";
            break;
        default:
            os << m.dump();
    }
    std::string out = os.str();
    while (!out.empty() && (out.back() == ' ' || out.back() == ';')) out.pop_back();
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <eldyn executable>\n";
        return 2;
    }
    RunConfig c;
    c.verify.expansion_samples = 100000;
    c.verify.pullback_addresses = 100;
    c.verify.roundtrip_samples = 10000;
    c.verify.brush_instances = 1000;
    c.verify.projection_hairs = 50;
    c.verify.conjugacy_samples = 1000;
    c.verify.pipeline_seeds = 20;
    c.verify.order_pairs = 100;

    const double limits[] = {0, 5, 10, 2, 30, 60, 0, 60, 120, 0};
    bool all = true;
    auto line = [&](int id, const std::string& name, bool pass, double secs, double limit, const std::string& detail) {
        all = all && pass;
        std::printf("criterion %d: %s | %s | %.2f s%s | %s\n", id, pass ? "PASS" : "FAIL", name.c_str(), secs,
                    limit > 0 ? (" (limit " + io::format_double(limit) + " s)").c_str() : "", detail.c_str());
        std::fflush(stdout);
    };
    for (const auto& r : cli::run_checks(c)) {
        if (r.id == 0) continue;
        const double limit = limits[r.id];
        const bool in_time = limit <= 0 || r.seconds <= limit;
        line(r.id, r.name, r.pass && in_time, r.seconds, limit, summary(r) + (in_time ? "" : " [over time limit]"));
    }

    const auto t0 = std::chrono::steady_clock::now();
    const fs::path base = fs::temp_directory_path() / ("eldyn_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(base);
    const std::string exe = argv[1];
    bool same = true;
    std::string detail;
    for (const char* d : {"a", "b"}) {
        const std::string cmd = "\"" + exe + "\" verify --seed 7 --out \"" + (base / d).string() + "\" 2>/dev/null";
        const int rc = std::system(cmd.c_str());
        if (rc != 0) {
            same = false;
            detail = std::string("run ") + d + " exited with status " + std::to_string(rc) + "; ";
        }
    }
    const std::string a = slurp(base / "a" / "verify.json"), b = slurp(base / "b" / "verify.json");
    same = same && !a.empty() && a == b;
    detail += std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " bytes, " + (a == b ? "identical" : "different");
    fs::remove_all(base);
    line(10, "determinism", same, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 0, detail);
    return all ? 0 : 1;
}
