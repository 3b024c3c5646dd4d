#pragma once

#include "eldyn/conjugacy.hpp"
#include "eldyn/rays.hpp"

#include <vector>

namespace eldyn {

struct PipelineConfig {
    /// Certified tolerance for the traced tail in the rescaling.
    double tol = 1e-10;
    /// Potential half-width of the traced window around the matched point.
    double window = 1.0;
    /// min |f^n| over the tail is recorded for n = 0 .. monotone_horizon.
    int monotone_horizon = 20;
    int conjugacy_depth = 64;
    RayConfig rays{};
};

struct PipelineResult {
    /// First index from which |f^n(z)| >= R.
    int N = 0;
    /// Log-orbit index where the rescaled tail is traced, and the last finite index.
    int level = 0;
    int last_finite = 0;
    /// Address of the tail through f^N(z); entries past last_finite are completed with 0.
    ExternalAddress address = ExternalAddress::constant({1, 0});
    /// Principal logarithm of f^N(z).
    Complex w0;
    /// Potential of the matched point on the rescaled hair.
    double t_match = 0.0;
    /// Tail through w0 in logarithmic coordinates (potentials of the rescaled hair).
    HairTail tail{ExternalAddress::constant({1, 0}), {}, {}};
    /// Level-0 point matched to w0 and its certified error.
    RayPoint matched{ExternalAddress::constant({1, 0}), 0, {}, {}, {}};
    double distance = 0.0;
    double error_bound = 0.0;
    /// A priori distance at the traced level between the hair through the orbit and
    /// the completed hair (with rounding slack), and the measured one.
    double completion_bound = 0.0;
    double completion_distance = 0.0;
    bool contained = false;
    /// log of min |f^n| over the tail samples, +inf past overflow.
    std::vector<double> min_log_modulus;
    bool monotone = false;
};

/// Ray tail through f^N(z): the itinerary is read in logarithmic coordinates,
/// the tail traced in the disjoint-type rescaling, moved by Theta and pulled
/// back along the itinerary. Exponential-type families only need R > L.
PipelineResult criniferous_pipeline(const FunctionFamily& f, Complex z, double R, int horizon,
                                    const PipelineConfig& cfg = {});

}  // namespace eldyn
