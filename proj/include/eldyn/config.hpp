#pragma once

#include "eldyn/families.hpp"
#include "eldyn/io.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eldyn {

struct TraceSettings {
    double t_min = 0.0;
    double t_max = 4.0;
    double tol = 1e-10;
    long k_max = 16;
};

struct ProjectionSettings {
    /// Region is the disc of radius e^{log_R} in the plane of the rescaled map.
    double log_R = 30.5;
    int n_max = 30;
    double t_tol = 1e-10;
    int orbit_horizon = 60;
    int scan_steps = 512;
    /// Parameters projected per hair.
    int points = 16;
    int defect_samples = 64;
};

struct ConjugacySettings {
    std::optional<double> Q;
    std::optional<Complex> lambda;
    int depth = 64;
    int samples = 1000;
};

struct RenderSettings {
    /// "log" draws the w-plane of the rescaled map, "plane" its z-plane.
    std::string coordinates = "log";
    double re_min = 28.0, re_max = 40.0, im_min = -10.0, im_max = 10.0;
    int width = 256, height = 256;
    int horizon = 40;
    std::optional<double> R;
    std::string scheme = "escape";
    bool rays = true;
};

struct BrushSettings {
    /// Explicit instance. Without one: a random brush from the run seed when
    /// `random` is set, else the two-hair instance H1 -> H2 -> H2.
    std::optional<io::Json> instance;
    bool random = false;
    int hairs = 20;
    Rational lambda = 2;
    Rational Q = 3;
    /// pi table grid: t_y + k * step for k = 0..steps.
    Rational step{1, 5};
    int steps = 20;
};

struct PipelineSettings {
    std::vector<Complex> seeds;
    double R = 10.0;
    int horizon = 20;
};

/// Sample counts for the verify suite.
struct VerifySettings {
    int expansion_samples = 20000;
    int pullback_addresses = 40;
    int roundtrip_samples = 2000;
    int brush_instances = 100;
    int projection_hairs = 50;
    int conjugacy_samples = 1000;
    int pipeline_seeds = 20;
    int order_pairs = 100;
};

struct RunConfig {
    FunctionFamily family = FunctionFamily::exponential(1.0);
    std::optional<double> L;
    /// "domain", "range" or "none".
    std::string rescale = "domain";
    std::vector<ExternalAddress> addresses{ExternalAddress::constant({1, 0})};
    TraceSettings trace;
    ProjectionSettings projection;
    ConjugacySettings conjugacy;
    RenderSettings render;
    BrushSettings brush;
    PipelineSettings pipeline;
    VerifySettings verify;
    std::string out = "out";
    std::uint64_t seed = 1;

    /// The family with the L override applied.
    FunctionFamily base() const;
    /// The map the tracer and projection act on.
    FunctionFamily traced() const;
    /// FNV-1a of the canonical config, output directory excluded.
    std::string hash() const;
};

RunConfig parse_config(const io::Json& j);
RunConfig load_config(const std::string& path);
/// Canonical form with every default filled in; `out` is omitted.
io::Json to_json(const RunConfig& c);

}  // namespace eldyn
