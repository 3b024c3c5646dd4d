#pragma once

#include "eldyn/core.hpp"
#include "eldyn/families.hpp"
#include "eldyn/logspace.hpp"

#include <compare>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace eldyn {

/// A point of J_s(F) in logarithmic coordinates with its certified error.
struct RayPoint {
    ExternalAddress address;
    int depth = 0;
    Complex position;
    Complex plane_position;
    ErrorBudget error;
};

struct HairSample {
    double t;
    RayPoint point;
};

struct HairTail {
    ExternalAddress address;
    std::vector<HairSample> samples;
    std::optional<RayPoint> endpoint_estimate;
};

struct RayConfig {
    long k_max = 16;
    /// Max distance between consecutive tail samples, logarithmic plane.
    double spacing = 0.05;
    std::size_t max_samples = 20000;
    int max_depth = 200;
    /// Model seeds stop growing once their real part passes this.
    double seed_cap = 1e300;
    /// Allowed backward motion of Re along a tail before it counts as a turn.
    double turnaround = 1e-9;
    int initial_grid = 17;
};

/// Tracing machinery bound to one logarithmic transform in the contraction
/// regime (tracts inside H_{log L + 8 pi}).
///
/// Hair points are parametrized by a potential t >= 0: the seed at level j is
/// x_j + i*y_anchor(s_j), where x_0 = x_base(s) + t and x_{j+1} = Re F at the
/// previous seed. gamma_s(t) is the limit of pulling the level-n seed back along
/// s. F maps gamma_s(t) to gamma_{shift s}(t1) with x_base + t1 = model(x_base + t),
/// and t = 0 gives the endpoint.
class RayTracer {
public:
    explicit RayTracer(LogTransform F, RayConfig cfg = {});

    const LogTransform& transform() const { return F_; }
    const RayConfig& config() const { return cfg_; }
    double margin() const { return margin_; }

    /// n-fold inverse-branch composition along s applied to seed.
    RayPoint pullback_point(const ExternalAddress& s, int n, Complex seed) const;
    /// (log L + 8 pi + t) + i y_anchor(s_n).
    Complex anchored_seed(const ExternalAddress& s, int n, double t = 0.0) const;

    /// Largest real fixed point of the model growth x -> Re F(x + i y_anchor(T)).
    double x_base(const TractId& t) const;
    double x_base(const ExternalAddress& s) const;
    /// Model growth along the anchor line of T.
    double model(const TractId& t, double x) const;
    /// Potential of the image point: F(gamma_s(t)) = gamma_{shift s}(image_potential(s, t)).
    double image_potential(const ExternalAddress& s, double t) const;

    HairSample tail_point(const ExternalAddress& s, double t) const;
    HairTail trace_tail(const ExternalAddress& s, double t_min, double t_max, double tol) const;
    std::optional<RayPoint> endpoint(const ExternalAddress& s, double tol) const;

    /// Vertical order of the hairs, realized through traced points.
    std::strong_ordering address_order(const ExternalAddress& s1, const ExternalAddress& s2,
                                       double t_ref = 1.0) const;

    void check_address(const ExternalAddress& s) const;

private:
    LogTransform F_;
    RayConfig cfg_;
    double margin_;
    mutable std::mutex cache_mutex_;
    mutable std::map<TractId, double> x_base_cache_;
};

/// Escape classification of a forward orbit in the dynamical plane.
struct EscapeVerdict {
    enum class Kind { escaping, reentered, undecided };
    Kind kind = Kind::undecided;
    /// escaping: first index from which the orbit stays >= R; reentered: index of re-entry.
    int n = 0;
    /// log|f^j(z)| for the computed orbit. Past a plane overflow the orbit is followed
    /// in logarithmic coordinates; a drop out of the tracts is recorded as log L, an upper bound.
    std::vector<double> log_moduli;
};

EscapeVerdict escape_test(const FunctionFamily& f, Complex z, double R, int horizon);

struct HeadStartResult {
    bool counterexample = false;
    Complex z, w;
    int pairs_checked = 0;
};

/// Falsification search for the head-start condition with phi(x) = a x + b.
HeadStartResult headstart_check(const LogTransform& F, double a, double b, int n_pairs,
                                std::uint64_t seed = 1);

}  // namespace eldyn
