#pragma once

#include "eldyn/brushmodel.hpp"
#include "eldyn/core.hpp"
#include "eldyn/rays.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace eldyn {

/// A hair with its forward dynamics, identified with a parameter interval.
/// Points are ordered by t; the finite end is t_begin.
class HairDynamics {
public:
    virtual ~HairDynamics() = default;
    virtual double t_begin() const = 0;
    virtual double t_end() const = 0;
    /// -1 when the j-th orbit point of gamma(t) lies in the open region, 0 on
    /// its boundary, +1 outside.
    virtual int region_side(double t, int j) const = 0;
    /// Orbit points 0..n of gamma(t) all outside the open region.
    virtual bool avoids_region(double t, int n) const;
    virtual Complex position(double t) const = 0;
    /// Parameter of g(gamma(t)) on the image hair.
    virtual double image_parameter(double t) const = 0;
    virtual std::unique_ptr<HairDynamics> image() const = 0;
    virtual std::string label() const = 0;
};

struct ProjectionConfig {
    double R = 0.0;
    Region region = region::Disc{{0.0, 0.0}, 1.0};
    int n_max = 30;
    double t_tol = 1e-10;
    int orbit_horizon = 60;
    /// Scan resolution over the traced parameter range.
    int scan_steps = 512;
};

/// Checks the configuration against the family: R > L, n_max >= 1, t_tol > 0.
void validate(const ProjectionConfig& cfg, const FunctionFamily& g);
ProjectionConfig disc_config(const FunctionFamily& g, double R);

struct ProjectionResult {
    double t_in = 0.0;
    double t_out = 0.0;
    Complex input;
    Complex output;
    int n_used = 0;
    std::vector<std::pair<int, double>> zn_trace;
    bool converged = false;
    /// Largest ratio of successive nonzero gaps; NaN when fewer than two gaps.
    double rho = std::numeric_limits<double>::quiet_NaN();
};

bool orbit_avoids(const HairDynamics& h, double t, int n);

/// Minimal t' >= start such that the first n+1 orbit points avoid the region.
double project_pi_n(const HairDynamics& h, double t, int n, const ProjectionConfig& cfg);
double project_pi_n(const HairDynamics& h, double t, int n, const ProjectionConfig& cfg, double start);

/// Runs pi_n for n = 0..n_max and reports the trace; never throws NotConverged.
ProjectionResult project_pi_trace(const HairDynamics& h, double t, const ProjectionConfig& cfg);
/// As project_pi_trace, but throws NotConverged when the t-value does not settle.
ProjectionResult project_pi(const HairDynamics& h, double t, const ProjectionConfig& cfg);

struct DefectPoint {
    std::string hair;
    double t;
    double modulus;
    double gap;
    bool orbit_meets_region;
};

struct DefectReport {
    int samples = 0;
    int skipped = 0;
    std::vector<DefectPoint> defects;
    double max_defect_modulus = 0.0;
    bool all_defects_meet_region = true;
};

DefectReport commutation_defect(const std::vector<const HairDynamics*>& hairs,
                                const ProjectionConfig& cfg, int n_samples);

/// Sign changes of region_side(t, 0) over a grid of the parameter range.
int measure_crossings(const HairDynamics& h, int n_grid);

/// Traced hair of a disjoint-type map; the region lives in the dynamical plane.
class TracedHair : public HairDynamics {
public:
    TracedHair(std::shared_ptr<const RayTracer> tracer, ExternalAddress s, Region region,
               double t_begin, double t_end);
    static TracedHair from_tail(std::shared_ptr<const RayTracer> tracer, const HairTail& tail,
                                Region region);

    double t_begin() const override { return t0_; }
    double t_end() const override { return t1_; }
    int region_side(double t, int j) const override;
    Complex position(double t) const override;
    double image_parameter(double t) const override;
    std::unique_ptr<HairDynamics> image() const override;
    std::string label() const override { return s_.to_string(); }

    const ExternalAddress& address() const { return s_; }
    /// Orbit point j of gamma(t) in logarithmic coordinates, or nullopt past
    /// the double range.
    std::optional<Complex> orbit_point(double t, int j) const;

private:
    std::shared_ptr<const RayTracer> tracer_;
    ExternalAddress s_;
    Region region_;
    double t0_, t1_;
};

/// Hair of an affine brush, with the exact square test.
class BrushHairDynamics : public HairDynamics {
public:
    BrushHairDynamics(std::shared_ptr<const AffineBrush> B, std::string hair, double t_end);

    double t_begin() const override;
    double t_end() const override { return t1_; }
    int region_side(double t, int j) const override;
    bool avoids_region(double t, int n) const override;
    Complex position(double t) const override;
    double image_parameter(double t) const override;
    std::unique_ptr<HairDynamics> image() const override;
    std::string label() const override { return hair_; }

private:
    struct Table;
    BrushHairDynamics(std::shared_ptr<const AffineBrush> B, std::shared_ptr<const Table> table,
                      std::string hair, double t_end);

    std::shared_ptr<const AffineBrush> B_;
    std::shared_ptr<const Table> table_;
    std::string hair_;
    std::size_t index_;
    double t1_;
};

}  // namespace eldyn
