#pragma once

#include "eldyn/core.hpp"
#include "eldyn/families.hpp"
#include "eldyn/logspace.hpp"
#include "eldyn/rays.hpp"

#include <compare>
#include <memory>

namespace eldyn {

/// Near-infinity conjugacy between G (lift of g(z) = f(lambda z)) and F.
/// Tract indices are base coordinates, so T_G(k) = T_F(k) - log lambda and
/// the index correspondence is the identity.
struct ConjugacyMap {
    LogTransform F;
    LogTransform G;
    Complex lambda;
    double Q;
    int depth;
    Complex tract_shift;  // -log lambda
};

/// Uses the disjoint-type rescaling of f. Q defaults to 2|log lambda| + 2.
ConjugacyMap make_conjugacy(const FunctionFamily& f, std::optional<double> Q = std::nullopt,
                            int depth = 64);
/// Explicit lambda; lambda = 1 gives the identity.
ConjugacyMap make_conjugacy(const FunctionFamily& f, Complex lambda, std::optional<double> Q,
                            int depth = 64);

struct ThetaValue {
    Complex value;
    ErrorBudget error;
    /// value - w, computed without cancellation.
    Complex displacement;
    /// displacement - log lambda; far out it vanishes against log lambda in double.
    Complex excess;
    /// Finite forward steps used.
    int steps = 0;
    /// Largest ratio of successive iterate displacements; NaN with fewer than two.
    double rate = std::numeric_limits<double>::quiet_NaN();
};

/// Forward orbit x_0, x_1 = G(x_0), ... with the tract of every x_j that was mapped.
/// overflowed: the last point overflows on the next step.
struct ForwardOrbit {
    std::vector<Complex> points;
    std::vector<TractId> tracts;
    bool overflowed = false;
};

/// Iterates G in double. Only reliable while |G^j(w)| stays moderate; use
/// theta_hair for points on hairs deep in H_Q.
ThetaValue theta_log(const ConjugacyMap& C, Complex w);
ThetaValue theta_log_orbit(const ConjugacyMap& C, const ForwardOrbit& orbit);
/// The G-orbit of gamma_s(t), each level traced separately.
ForwardOrbit hair_orbit(const ConjugacyMap& C, const RayTracer& tracer_g, const ExternalAddress& s,
                        double t);
ThetaValue theta_hair(const ConjugacyMap& C, const RayTracer& tracer_g, const ExternalAddress& s,
                      double t);
/// lim G^{-m} F^m (v); requires the F-orbit of v to stay in H_{Q+2}.
ThetaValue theta_log_inverse(const ConjugacyMap& C, Complex v);
/// exp(Theta(Log z)) with the principal lift. Overflow returns infinite parts.
Complex theta_plane(const ConjugacyMap& C, Complex z);

struct ConjugacyReport {
    int samples = 0;
    int excluded = 0;
    double max_residual = 0.0;      // plane functional equation, relative
    double max_log_residual = 0.0;  // log functional equation, relative
    double max_displacement = 0.0;
    double displacement_bound = 0.0;
    int residual_violations = 0;  // residual above 10x the sample's error budget
    int displacement_violations = 0;
    int annulus_violations = 0;
    int equivariance_violations = 0;
    int escape_failures = 0;
    double max_rate = 0.0;
    int surjectivity_samples = 0;
    int surjectivity_failures = 0;
    double max_roundtrip = 0.0;

    bool valid() const {
        return max_displacement <= displacement_bound && displacement_violations == 0 &&
               residual_violations == 0 &&
               annulus_violations == 0 && equivariance_violations == 0 && escape_failures == 0 &&
               surjectivity_failures == 0;
    }
};

ConjugacyReport verify_conjugacy(const ConjugacyMap& C, int n_samples, std::uint64_t seed = 1);

ExternalAddress address_correspondence(const ConjugacyMap& C, const ExternalAddress& s_g);

/// Vertical order of the F-hairs with addresses s1, s2, realized by Theta
/// images of G-tail points deep in H_Q.
std::strong_ordering address_order_f(const ConjugacyMap& C, const RayTracer& tracer_g,
                                     const ExternalAddress& s1, const ExternalAddress& s2);

}  // namespace eldyn
