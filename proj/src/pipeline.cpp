#include "eldyn/pipeline.hpp"

#include "eldyn/errors.hpp"
#include "eldyn/parallel.hpp"

#include <cmath>

namespace eldyn {

namespace {

constexpr double kLogMax = 709.782712893384;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Complex principal(Complex w) {
    const double k = std::round(w.imag() / kTwoPi);
    Complex p = w - Complex{0.0, kTwoPi * k};
    if (p.imag() <= -kPi) p += Complex{0.0, kTwoPi};
    return p;
}

struct Transported {
    std::vector<Complex> levels;  // F-side log orbit of the tail point, from level 0
    Complex position;
    ErrorBudget error;
    bool overflowed = false;
};

// Rescaled hair point at potential t, moved by Theta to the F side at the traced
// level and pulled back along ids[level-1 .. 0].
Transported transport(const ConjugacyMap& C, const RayTracer& tracer, const ExternalAddress& s,
                      double t, const std::vector<TractId>& ids, int level) {
    const HairSample h = tracer.tail_point(s, t);
    const ForwardOrbit orbit = hair_orbit(C, tracer, s, t);
    Transported out;
    out.overflowed = orbit.overflowed;
    std::vector<Complex> upper;
    for (std::size_t j = 0; j < orbit.points.size(); ++j) {
        ForwardOrbit suffix;
        suffix.points.assign(orbit.points.begin() + static_cast<long>(j), orbit.points.end());
        suffix.tracts.assign(orbit.tracts.begin() + static_cast<long>(j), orbit.tracts.end());
        suffix.overflowed = orbit.overflowed;
        upper.push_back(theta_log_orbit(C, suffix).value);
    }
    const ThetaValue th = theta_log_orbit(C, orbit);
    double e = h.point.error.total(std::abs(h.point.position));
    // Theta - id is bounded by 2|log lambda| on H_Q, so its Lipschitz constant near v
    // is at most 1 + 2|log lambda| / (Re v - e - Q).
    const double room = h.point.position.real() - e - C.Q;
    e *= room > 0.0 ? 1.0 + 2.0 * std::abs(C.tract_shift) / room : kInf;
    e += th.error.total(std::abs(th.value));

    std::vector<Complex> lower(static_cast<std::size_t>(level));
    Complex p = th.value;
    std::int64_t floats = 0;
    for (int j = level; j-- > 0;) {
        const double lip = C.F.inverse_lipschitz(p, e);
        p = C.F.inverse_branch(ids[static_cast<std::size_t>(j)], p);
        e = e * lip;
        floats += 4;
        e += 4.0 * kEps * std::abs(p);
        lower[static_cast<std::size_t>(j)] = p;
    }
    out.levels = lower;
    out.levels.insert(out.levels.end(), upper.begin(), upper.end());
    out.position = p;
    out.error.analytic_bound = e;
    out.error.float_epsilon_count = floats;
    return out;
}

}  // namespace

PipelineResult criniferous_pipeline(const FunctionFamily& f, Complex z, double R, int horizon,
                                    const PipelineConfig& cfg) {
    if (!(cfg.tol > 0.0) || !(cfg.window > 0.0) || cfg.monotone_horizon < 0)
        throw PreconditionError("pipeline config needs tol > 0, window > 0, monotone_horizon >= 0");
    const EscapeVerdict verdict = escape_test(f, z, R, horizon);
    if (verdict.kind != EscapeVerdict::Kind::escaping)
        throw PreconditionError("seed is not classified escaping within the horizon");

    const ConjugacyMap C = make_conjugacy(f, std::nullopt, cfg.conjugacy_depth);
    const LogTransform& F = C.F;
    PipelineResult res;
    res.N = verdict.n;

    // log orbit of z up to f^N(z), then its principal lift
    if (z == Complex{0.0, 0.0}) throw DomainError("log lift of 0");
    Complex w = std::log(z);
    for (int n = 0; n < res.N; ++n) {
        const TractLookup look = F.tract_of(w);
        if (!look.id) {
            // below R the orbit may leave the tracts; follow it in the plane
            const Evaluation ev = evaluate(f, std::exp(w));
            if (ev.escaped) throw UnsupportedRegion("orbit overflows before index N");
            w = std::log(ev.value);
            continue;
        }
        const LogImage img = F.eval(w);
        if (img.escaped) throw UnsupportedRegion("orbit overflows before index N");
        w = img.value;
    }
    res.w0 = principal(w);

    // itinerary from w0 until the next image overflows
    std::vector<Complex> orbit{res.w0};
    std::vector<TractId> ids;
    for (int j = 0;; ++j) {
        if (j > horizon) throw UnsupportedRegion("log orbit does not overflow within the horizon");
        const TractLookup look = F.tract_of(orbit.back());
        if (look.boundary) throw ItineraryUnreadable("orbit point " + std::to_string(j) + " is on a tract boundary");
        if (!look.id) throw ItineraryUnreadable("orbit point " + std::to_string(j) + " is outside the tracts");
        ids.push_back(*look.id);
        if ((orbit.back() + F.shift()).real() > kLogMax) break;
        orbit.push_back(F.eval(orbit.back()).value);
    }
    const int M = static_cast<int>(orbit.size()) - 1;
    res.last_finite = M;
    int level = M;
    while (level > 0 && orbit[static_cast<std::size_t>(level - 1)].real() >= C.Q + 2.0) --level;
    if (orbit[static_cast<std::size_t>(level)].real() < C.Q + 2.0)
        throw UnsupportedRegion("orbit never reaches the conjugacy half plane");
    res.level = level;

    const TractId fill{1, 0};
    res.address = ExternalAddress(ids, {fill});
    const ExternalAddress s(std::vector<TractId>(ids.begin() + level, ids.end()), {fill});
    const RayTracer tracer(C.G, cfg.rays);
    tracer.check_address(s);

    // G-side point matched with the orbit, and the potential with the same real part
    const ThetaValue back = theta_log_inverse(C, orbit[static_cast<std::size_t>(level)]);
    const Complex u = back.value;
    const auto u_tract = C.G.tract_of(u);
    if (!u_tract.id || !(*u_tract.id == s.at(0)))
        throw AddressNotRealized("Theta^{-1} of the orbit left tract " + to_string(s.at(0)));
    auto re_at = [&](double t) { return tracer.tail_point(s, t).point.position.real(); };
    double lo = 0.0, hi = std::max(1.0, u.real() - tracer.x_base(s));
    if (re_at(lo) > u.real()) throw TailTooShort("orbit point lies below the tail start");
    while (re_at(hi) < u.real()) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 4.0 * kEps * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (re_at(mid) < u.real() ? lo : hi) = mid;
    }
    res.t_match = 0.5 * (lo + hi);

    // a priori: equal-Re points of two hairs agreeing through the overflow level are
    // within pi there; pulled back to the traced level
    {
        const ForwardOrbit o = hair_orbit(C, tracer, s, res.t_match);
        double c = kPi;
        for (std::size_t j = o.tracts.size(); j-- > 0;) c *= C.G.inverse_lipschitz(o.points[j + 1], c);
        // plus matching Re by bisection and the errors of both points
        const HairSample h = tracer.tail_point(s, res.t_match);
        res.completion_bound = c + back.error.total(std::abs(u)) +
                               h.point.error.total(std::abs(h.point.position)) + 8.0 * kEps * std::abs(u);
        res.completion_distance = std::abs(o.points[0] - u);
    }

    const Transported m = transport(C, tracer, s, res.t_match, ids, level);
    res.matched = {res.address, level, m.position, std::exp(m.position), m.error};
    // distance at the traced level pulled back like the tail error
    double reach = res.completion_distance + back.error.total(std::abs(u));
    {
        const double room = u.real() - reach - C.Q;
        reach *= room > 0.0 ? 1.0 + 2.0 * std::abs(C.tract_shift) / room : kInf;
        for (int j = level; j-- > 0;) reach *= F.inverse_lipschitz(orbit[static_cast<std::size_t>(j + 1)], reach);
    }
    res.distance = std::abs(m.position - res.w0);
    res.error_bound = reach + m.error.total(std::abs(m.position)) + 8.0 * kEps * res.N * (1.0 + std::abs(res.w0));
    res.contained = res.distance <= res.error_bound && res.completion_distance <= res.completion_bound;

    // tail window
    const double t0 = std::max(0.0, res.t_match - cfg.window);
    const HairTail g_tail = tracer.trace_tail(s, t0, res.t_match + cfg.window, cfg.tol);
    std::vector<Transported> moved(g_tail.samples.size());
    parallel_for(moved.size(), [&](std::size_t i) {
        moved[i] = transport(C, tracer, s, g_tail.samples[i].t, ids, level);
    });
    res.tail.address = res.address;
    const std::size_t H = static_cast<std::size_t>(cfg.monotone_horizon);
    res.min_log_modulus.assign(H + 1, kInf);
    for (std::size_t i = 0; i < moved.size(); ++i) {
        const auto& p = moved[i];
        res.tail.samples.push_back({g_tail.samples[i].t, {res.address, level, p.position, std::exp(p.position), p.error}});
        for (std::size_t n = 0; n <= H; ++n) {
            // past the last finite level the orbit has overflowed
            const double lm = n < p.levels.size() ? p.levels[n].real() : (p.overflowed ? kInf : kNaN);
            res.min_log_modulus[n] = std::isnan(lm) ? kNaN : std::min(res.min_log_modulus[n], lm);
        }
    }
    res.monotone = true;
    for (std::size_t n = 0; n + 1 <= H; ++n)
        if (!(res.min_log_modulus[n] <= res.min_log_modulus[n + 1])) res.monotone = false;
    return res;
}

}  // namespace eldyn
