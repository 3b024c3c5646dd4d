#include "eldyn/conjugacy.hpp"

#include "eldyn/errors.hpp"
#include "eldyn/parallel.hpp"

#include <cmath>
#include <random>

namespace eldyn {

namespace {

constexpr double kOverflowTail = 1e-300;

constexpr double kLogMax = 709.782712893384;

bool overflows(const LogTransform& F, Complex w) { return (w + F.shift()).real() > kLogMax; }

// Forward orbit in double. Past the first few levels of a hair the imaginary
// parts are rounding noise, so this is only used for generic points.
ForwardOrbit iterate(const LogTransform& F, Complex x, double threshold, int depth) {
    if (x.real() < threshold) throw OrbitLeftHalfPlane("orbit left the half plane at step 0");
    ForwardOrbit o;
    o.points.push_back(x);
    for (int j = 0; j <= depth; ++j) {
        const Complex w = o.points.back();
        if (overflows(F, w)) {
            o.overflowed = true;
            break;
        }
        const TractLookup look = F.tract_of(w);
        if (!look.id) throw OrbitLeftHalfPlane("orbit leaves the tracts after step " + std::to_string(j));
        const LogImage img = F.eval(w);
        if (img.value.real() < threshold)
            throw OrbitLeftHalfPlane("orbit left the half plane at step " + std::to_string(j + 1));
        o.tracts.push_back(*look.id);
        o.points.push_back(img.value);
    }
    return o;
}

// x + D(x) where D_K = step, D_j = step + inverse_delta(T_j, x_{j+1}, D_{j+1}).
// The last orbit point is not pulled through; it bounds the truncation.
ThetaValue conjugate(const LogTransform& backward, Complex step, const ForwardOrbit& o) {
    if (o.points.empty() || o.tracts.size() + 1 != o.points.size())
        throw PreconditionError("forward orbit needs one tract per step");
    // Overflow ends the orbit exactly; otherwise the last step only feeds the bound.
    const std::size_t n = o.tracts.size();
    const std::size_t K = o.overflowed || n == 0 ? n : n - 1;
    Complex excess{};
    auto chain = [&](std::size_t bottom, std::vector<Complex>* levels) {
        Complex D = step;
        excess = {};
        if (levels) (*levels)[bottom] = D;
        for (std::size_t j = bottom; j-- > 0;) {
            excess = backward.inverse_delta(o.tracts[j], o.points[j + 1], D);
            D = step + excess;
            if (levels) (*levels)[j] = D;
        }
        return D;
    };

    ThetaValue out;
    double last_inc = 0.0;
    Complex prev{};
    for (std::size_t bottom = 0; bottom < K; ++bottom) {
        const Complex D = chain(bottom, nullptr);
        const double inc = std::abs(D - prev);
        if (bottom > 1 && last_inc > 0.0) {
            const double r = inc / last_inc;
            out.rate = std::isnan(out.rate) ? r : std::max(out.rate, r);
        }
        if (bottom > 0) last_inc = inc;
        prev = D;
    }
    std::vector<Complex> level(K + 1);
    const Complex D = chain(K, &level);

    // One level deeper moves D_K by at most |step| 4 pi / (Re x_{K+1} - |step| - log L).
    double bound;
    if (o.overflowed || o.tracts.empty()) {
        bound = o.overflowed ? std::abs(step) * kOverflowTail : 0.0;
    } else {
        const double room = o.points[K + 1].real() - std::abs(step) - backward.log_L();
        bound = room > 0.0 ? std::abs(step) * 4.0 * kPi / room : kInf;
    }
    for (std::size_t j = K; j-- > 0 && std::isfinite(bound) && bound > 0.0;) {
        const double room = (o.points[j + 1] + level[j + 1]).real() - bound - backward.log_L();
        bound = room > 0.0 ? bound * 4.0 * kPi / room : kInf;
    }

    out.displacement = D;
    out.excess = excess;
    out.value = o.points[0] + D;
    out.steps = static_cast<int>(K);
    out.error.analytic_bound = 2.0 * bound;
    out.error.float_epsilon_count = 8 * static_cast<std::int64_t>(K + 1);
    return out;
}

bool is_identity(const ConjugacyMap& C) { return C.lambda == Complex{1.0, 0.0}; }

}  // namespace

ConjugacyMap make_conjugacy(const FunctionFamily& f, Complex lambda, std::optional<double> Q, int depth) {
    if (depth < 1) throw PreconditionError("conjugacy depth must be >= 1");
    if (lambda == Complex{0.0, 0.0}) throw PreconditionError("lambda must be nonzero");
    const Complex log_lambda = std::log(lambda);
    const double q_min = 2.0 * std::abs(log_lambda) + 1.0;
    const double q = Q.value_or(q_min + 1.0);
    if (!(q > q_min)) throw PreconditionError("Q must exceed 2|log lambda| + 1");
    FunctionFamily g = FunctionFamily::domain_rescaled(f, lambda).with_radii(f.L(), f.L());
    return {LogTransform(f), LogTransform(std::move(g)), lambda, q, depth, -log_lambda};
}

ConjugacyMap make_conjugacy(const FunctionFamily& f, std::optional<double> Q, int depth) {
    return make_conjugacy(f, disjoint_type_rescale(f, RescaleMode::domain).lambda, Q, depth);
}

ThetaValue theta_log(const ConjugacyMap& C, Complex w) {
    if (is_identity(C)) return {w, {}, {}, 0};
    return conjugate(C.F, -C.tract_shift, iterate(C.G, w, C.Q, C.depth));
}

ThetaValue theta_log_orbit(const ConjugacyMap& C, const ForwardOrbit& orbit) {
    if (orbit.points.empty()) throw PreconditionError("empty orbit");
    if (is_identity(C)) return {orbit.points[0], {}, {}, 0};
    for (std::size_t j = 0; j < orbit.points.size(); ++j)
        if (orbit.points[j].real() < C.Q)
            throw OrbitLeftHalfPlane("orbit left the half plane at step " + std::to_string(j));
    return conjugate(C.F, -C.tract_shift, orbit);
}

ForwardOrbit hair_orbit(const ConjugacyMap& C, const RayTracer& tracer_g, const ExternalAddress& s,
                        double t) {
    ForwardOrbit o;
    ExternalAddress a = s;
    for (int j = 0; j <= C.depth; ++j) {
        o.points.push_back(tracer_g.tail_point(a, t).point.position);
        const double x = tracer_g.x_base(a) + t;
        if (tracer_g.model(a.at(0), x) == kInf) {
            o.overflowed = true;
            break;
        }
        if (j == C.depth) break;
        t = tracer_g.image_potential(a, t);
        if (!(t >= 0.0)) throw AddressNotRealized("hair potential left the tail on " + a.to_string());
        o.tracts.push_back(a.at(0));
        a = a.shift(1);
    }
    return o;
}

ThetaValue theta_hair(const ConjugacyMap& C, const RayTracer& tracer_g, const ExternalAddress& s,
                      double t) {
    return theta_log_orbit(C, hair_orbit(C, tracer_g, s, t));
}

ThetaValue theta_log_inverse(const ConjugacyMap& C, Complex v) {
    if (is_identity(C)) return {v, {}, {}, 0};
    return conjugate(C.G, C.tract_shift, iterate(C.F, v, C.Q + 2.0, C.depth));
}

Complex theta_plane(const ConjugacyMap& C, Complex z) {
    if (is_identity(C)) return z;
    const Complex w = theta_log(C, std::log(z)).value;
    if (w.real() > 709.0) return {kInf, kInf};
    return std::exp(w);
}

ConjugacyReport verify_conjugacy(const ConjugacyMap& C, int n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw PreconditionError("n_samples must be >= 1");
    ConjugacyReport rep;
    rep.displacement_bound = 2.0 * std::abs(C.tract_shift);
    if (is_identity(C)) {
        rep.samples = n_samples;
        return rep;
    }
    const RayTracer tracer(C.G);
    const double log_abs_lambda = -C.tract_shift.real();
    const double R = std::exp(C.Q);

    struct Sample {
        bool used = false;
        double residual = 0, log_residual = 0, displacement = 0, rate = 0;
        bool residual_bad = false, disp_bad = false, annulus_bad = false, equi_bad = false, escape_bad = false;
        bool surj_used = false, surj_bad = false;
        double roundtrip = 0;
    };
    std::vector<Sample> out(static_cast<std::size_t>(n_samples));
    std::vector<std::pair<ExternalAddress, double>> draws;
    std::vector<Complex> f_side;
    {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<long> k(-5, 5);
        std::uniform_int_distribution<int> len(0, 2), plen(1, 2), coin(0, 1);
        std::uniform_real_distribution<double> x(C.Q + 1.0, 600.0), delta(-1.0, 1.0);
        for (int i = 0; i < n_samples; ++i) {
            auto entry = [&] { return TractId{C.G.is_pair() && coin(rng) ? -1 : 1, k(rng)}; };
            std::vector<TractId> pre, per;
            for (int n = len(rng); n > 0; --n) pre.push_back(entry());
            for (int n = plen(rng); n > 0; --n) per.push_back(entry());
            draws.emplace_back(ExternalAddress(pre, per), x(rng));
            const TractId t = entry();
            f_side.emplace_back(x(rng) + 2.0, C.F.y_anchor(t) + delta(rng));
        }
    }

    parallel_for(out.size(), [&](std::size_t i) {
        Sample& s = out[i];
        try {
            const auto& [addr, x] = draws[i];
            const ForwardOrbit orbit = hair_orbit(C, tracer, addr, x - tracer.x_base(addr));
            const ThetaValue th = theta_log_orbit(C, orbit);
            const double err = th.error.total(std::abs(th.value));
            s.displacement = std::abs(th.displacement);
            s.disp_bad = s.displacement > rep.displacement_bound + err;
            s.annulus_bad = std::abs(th.displacement.real()) > 2.0 * std::abs(log_abs_lambda) + err;
            s.rate = std::isnan(th.rate) ? 0.0 : th.rate;

            // w + 2 pi i is the same potential on the hair whose first entry moves up by one.
            const ExternalAddress rest = addr.shift(1);
            std::vector<TractId> pre{addr.at(0)};
            ++pre[0].k;
            pre.insert(pre.end(), rest.prefix().begin(), rest.prefix().end());
            const ExternalAddress up(pre, rest.period());
            const ThetaValue th2 = theta_hair(C, tracer, up, x - tracer.x_base(up));
            s.equi_bad = std::abs(th2.displacement - th.displacement) >
                         err + th2.error.total(std::abs(th2.value)) + 1e-12 * std::abs(th.displacement);

            // F(Theta w) = G w + [F(b + delta) - F(b)] with b = w + log lambda; Theta(G w) = G w + D(G w).
            if (orbit.points.size() > 1) {
                ForwardOrbit next = orbit;
                next.points.erase(next.points.begin());
                next.tracts.erase(next.tracts.begin());
                const ThetaValue thg = theta_log_orbit(C, next);
                const Complex w = orbit.points[0];
                const Complex fdelta = C.F.eval_delta(w - C.tract_shift, th.excess);
                const Complex diff = (fdelta + C.tract_shift) - thg.excess;
                s.log_residual = std::abs(diff) / std::abs(orbit.points[1] + fdelta);
                s.residual = std::abs(std::exp(diff) - 1.0);
                // D_0 errors are stretched by |F'| ~ |G w|; rounding lives at the scale of log lambda.
                const double budget =
                    std::abs(orbit.points[1]) * th.error.analytic_bound + thg.error.analytic_bound +
                    static_cast<double>(th.error.float_epsilon_count + thg.error.float_epsilon_count) * kEps *
                        (std::abs(C.tract_shift) + 1.0);
                s.residual_bad = std::abs(diff) > 10.0 * budget;
            }
            // theta(I_R(g)) lands in I(f).
            if (th.value.real() < 709.0) {
                const EscapeVerdict v = escape_test(C.F.family(), std::exp(th.value), R, 8);
                s.escape_bad = v.kind != EscapeVerdict::Kind::escaping;
            }
            s.used = true;
        } catch (const OrbitLeftHalfPlane&) {
        } catch (const AddressNotRealized&) {
        } catch (const DomainError&) {
        }
        try {
            const Complex v = f_side[i];
            const ThetaValue back = theta_log_inverse(C, v);
            const Complex w = v + back.displacement;
            const ThetaValue fwd = theta_log(C, w);
            s.roundtrip = std::abs(back.displacement + fwd.displacement) / (1.0 + std::abs(v));
            s.surj_bad = s.roundtrip > 1e-12;
            s.surj_used = true;
        } catch (const OrbitLeftHalfPlane&) {
        } catch (const DomainError&) {
        }
    });

    for (const auto& s : out) {
        if (s.surj_used) {
            ++rep.surjectivity_samples;
            rep.surjectivity_failures += s.surj_bad;
            rep.max_roundtrip = std::max(rep.max_roundtrip, s.roundtrip);
        }
        if (!s.used) {
            ++rep.excluded;
            continue;
        }
        ++rep.samples;
        rep.max_residual = std::max(rep.max_residual, s.residual);
        rep.max_log_residual = std::max(rep.max_log_residual, s.log_residual);
        rep.max_displacement = std::max(rep.max_displacement, s.displacement);
        rep.max_rate = std::max(rep.max_rate, s.rate);
        rep.displacement_violations += s.disp_bad;
        rep.residual_violations += s.residual_bad;
        rep.annulus_violations += s.annulus_bad;
        rep.equivariance_violations += s.equi_bad;
        rep.escape_failures += s.escape_bad;
    }
    return rep;
}

ExternalAddress address_correspondence(const ConjugacyMap& C, const ExternalAddress& s_g) {
    for (const auto& t : s_g.prefix()) C.F.check_id(t);
    for (const auto& t : s_g.period()) C.F.check_id(t);
    // Tract indices live in base coordinates: T_G(k) = T_F(k) + tract_shift.
    return s_g;
}

std::strong_ordering address_order_f(const ConjugacyMap& C, const RayTracer& tracer_g,
                                     const ExternalAddress& s1, const ExternalAddress& s2) {
    const auto j = first_difference(s1, s2);
    if (!j) return std::strong_ordering::equal;
    auto realize = [&](const ExternalAddress& s) {
        const ExternalAddress tail = s.shift(*j);
        const double x = C.Q + 4.0;
        const Complex w = tracer_g.tail_point(tail, x - tracer_g.x_base(tail)).point.position;
        const ThetaValue th = theta_log(C, w);
        const TractLookup look = C.F.tract_of(th.value);
        if (!look.id || !(*look.id == tail.at(0)))
            throw AddressNotRealized("Theta image of " + tail.to_string() + " left its F-tract");
        return th;
    };
    const ThetaValue a = realize(s1), b = realize(s2);
    const double d = a.value.imag() - b.value.imag();
    const double err = a.error.total(std::abs(a.value)) + b.error.total(std::abs(b.value));
    if (!(std::abs(d) > err))
        throw AddressNotRealized("F-side order of " + s1.to_string() + " and " + s2.to_string() +
                                 " not resolved");
    return d < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
}

}  // namespace eldyn
