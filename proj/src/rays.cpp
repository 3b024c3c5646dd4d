#include "eldyn/rays.hpp"

#include "eldyn/errors.hpp"
#include "eldyn/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace eldyn {

namespace {

Complex safe_exp(Complex w) {
    if (w.real() > 709.0) return {kInf, kInf};
    return std::exp(w);
}

constexpr int kEndpointDepthProbe = 60;

}  // namespace

RayTracer::RayTracer(LogTransform F, RayConfig cfg)
    : F_(std::move(F)), cfg_(cfg), margin_(normalized_margin(F_, 257)) {
    if (cfg_.k_max < 0 || cfg_.spacing <= 0.0 || cfg_.max_depth < 1 || cfg_.initial_grid < 2)
        throw PreconditionError("invalid ray configuration");
    if (margin_ < 0.0)
        throw ContractRegimeError("tracts reach left of log L + 8 pi (margin " +
                                  std::to_string(margin_) + ")");
}

void RayTracer::check_address(const ExternalAddress& s) const {
    if (s.max_abs_k() > cfg_.k_max)
        throw AddressNotRealized("address " + s.to_string() + " leaves the k window");
    for (const auto& t : s.prefix()) F_.check_id(t);
    for (const auto& t : s.period()) F_.check_id(t);
}

Complex RayTracer::anchored_seed(const ExternalAddress& s, int n, double t) const {
    return {F_.log_L() + kEightPi + t, F_.y_anchor(s.at(static_cast<std::size_t>(n)))};
}

RayPoint RayTracer::pullback_point(const ExternalAddress& s, int n, Complex seed) const {
    if (n < 1) throw PreconditionError("pullback depth must be >= 1");
    if (!(seed.real() > F_.log_L())) throw PreconditionError("seed must lie right of log L");
    check_address(s);

    auto pull = [&](std::size_t offset, int depth) {
        Complex w = seed;
        for (int j = depth - 1; j >= 0; --j)
            w = F_.inverse_branch(s.at(offset + static_cast<std::size_t>(j)), w);
        return w;
    };

    RayPoint p{s, n, pull(0, n), {}, {}};
    p.plane_position = safe_exp(p.position);

    // D: distance at depth n between the seed and the image of the limit point,
    // the latter estimated by a deep pullback along shift^n(s).
    const Complex image = pull(static_cast<std::size_t>(n), kEndpointDepthProbe);
    const double d = std::abs(seed - image) / (1.0 - std::ldexp(1.0, -kEndpointDepthProbe)) +
                     8.0 * kEps * std::abs(seed);
    const double first = std::min(seed.real(), image.real()) - F_.log_L();
    const double c0 = 4.0 * kPi / first;
    p.error.analytic_bound = d * c0 * std::ldexp(1.0, -(n - 1));
    p.error.float_epsilon_count = 8 * n;
    return p;
}

double RayTracer::model(const TractId& t, double x) const {
    const Complex w{x, F_.y_anchor(t)};
    const auto look = F_.tract_of(w);
    if (!look.id || !(*look.id == t)) return -kInf;
    const LogImage img = F_.eval(w);
    if (img.escaped) return kInf;
    return img.value.real();
}

double RayTracer::x_base(const TractId& t) const {
    {
        std::lock_guard lock(cache_mutex_);
        if (auto it = x_base_cache_.find(t); it != x_base_cache_.end()) return it->second;
    }
    const double lo = F_.log_L() + kEightPi;
    double x = lo;
    double result;
    if (model(t, x) > x) {
        result = x;
    } else {
        double prev = x;
        while (model(t, x) <= x) {
            prev = x;
            x += 1.0;
            if (x > 720.0) throw AddressNotRealized("no escaping potential on tract " + to_string(t));
        }
        double a = prev, b = x;
        for (int i = 0; i < 200 && b - a > 4 * kEps * b; ++i) {
            const double m = 0.5 * (a + b);
            (model(t, m) <= m ? a : b) = m;
        }
        result = b;
    }
    std::lock_guard lock(cache_mutex_);
    x_base_cache_.emplace(t, result);
    return result;
}

double RayTracer::x_base(const ExternalAddress& s) const {
    double best = -kInf;
    for (const auto& t : s.prefix()) best = std::max(best, x_base(t));
    for (const auto& t : s.period()) best = std::max(best, x_base(t));
    return best;
}

double RayTracer::image_potential(const ExternalAddress& s, double t) const {
    return model(s.at(0), x_base(s) + t) - x_base(s.shift(1));
}

HairSample RayTracer::tail_point(const ExternalAddress& s, double t) const {
    if (!(t >= 0.0)) throw PreconditionError("potential must be >= 0");
    check_address(s);

    auto at = [&](std::size_t j) { return s.at(j); };
    // Seeds grow until Re F overflows; x_base is taken with model(x_base) > x_base,
    // so this happens even at t = 0.
    std::vector<Complex> seeds;
    seeds.emplace_back(x_base(s) + t, F_.y_anchor(at(0)));
    while (true) {
        const std::size_t j = seeds.size() - 1;
        const double x = model(at(j), seeds.back().real());
        if (x == -kInf)
            throw AddressNotRealized("anchor seed left tract " + to_string(at(j)) + " on " + s.to_string());
        if (!std::isfinite(x) || x > cfg_.seed_cap) break;
        if (static_cast<int>(j) >= cfg_.max_depth)
            throw UnresolvedTail("seeds did not escape within max depth on " + s.to_string());
        seeds.emplace_back(x, F_.y_anchor(at(j + 1)));
    }
    // depth 0: F already overflows at the first seed, which then stands for
    // the hair point itself.
    const std::size_t depth = seeds.size() - 1;

    try {
        std::vector<Complex> chain(depth + 1);
        chain[depth] = seeds[depth];
        for (std::size_t j = depth; j-- > 0;) chain[j] = F_.inverse_branch(at(j), chain[j + 1]);
        // At the last level Re F overflowed while its argument stays bounded,
        // so the seed is within O(1 / Re F) of the orbit point. Contract that
        // back to level 0 with each branch's Koebe factor.
        double bound = 1e-290;
        for (std::size_t j = depth; j-- > 0;) {
            const double room = chain[j + 1].real() - bound - F_.log_L();
            if (!(room > 0.0)) throw UnresolvedTail("error bound leaves the half plane");
            bound *= 4.0 * kPi / room;
        }
        HairSample out{t, RayPoint{s, static_cast<int>(depth), chain[0], safe_exp(chain[0]), {}}};
        out.point.error.analytic_bound = bound;
        out.point.error.float_epsilon_count = 8 * static_cast<std::int64_t>(depth);
        return out;
    } catch (const DomainError& e) {
        throw AddressNotRealized("pullback along " + s.to_string() + " failed: " + e.what());
    } catch (const BranchCutError& e) {
        throw AddressNotRealized("pullback along " + s.to_string() + " failed: " + e.what());
    }
}

HairTail RayTracer::trace_tail(const ExternalAddress& s, double t_min, double t_max,
                               double tol) const {
    if (!(tol > 0.0)) throw PreconditionError("tol must be positive");
    if (!(t_min >= 0.0) || !(t_max >= t_min)) throw PreconditionError("need 0 <= t_min <= t_max");
    check_address(s);

    HairTail tail{s, {}, std::nullopt};
    auto certify = [&](const HairSample& h) {
        if (h.point.error.total(std::abs(h.point.position)) >= tol)
            throw UnresolvedTail("sample at t=" + std::to_string(h.t) + " misses tolerance");
    };

    if (t_min == t_max) {
        tail.samples.push_back(tail_point(s, t_min));
        certify(tail.samples.back());
        return tail;
    }

    std::vector<double> ts(static_cast<std::size_t>(cfg_.initial_grid));
    for (std::size_t i = 0; i < ts.size(); ++i)
        ts[i] = t_min + (t_max - t_min) * static_cast<double>(i) / static_cast<double>(ts.size() - 1);
    ts.back() = t_max;

    std::vector<HairSample> samples;
    auto evaluate_batch = [&](const std::vector<double>& batch) {
        std::vector<std::optional<HairSample>> slots(batch.size());
        parallel_for(batch.size(), [&](std::size_t i) { slots[i] = tail_point(s, batch[i]); });
        std::vector<HairSample> outv;
        outv.reserve(batch.size());
        for (auto& h : slots) {
            certify(*h);
            outv.push_back(std::move(*h));
        }
        return outv;
    };
    samples = evaluate_batch(ts);

    // Refinement rounds in t-order: bisect every gap wider than the spacing.
    while (true) {
        std::vector<double> mids;
        for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
            if (std::abs(samples[i + 1].point.position - samples[i].point.position) > cfg_.spacing)
                mids.push_back(0.5 * (samples[i].t + samples[i + 1].t));
        }
        if (mids.empty()) break;
        if (samples.size() + mids.size() > cfg_.max_samples)
            throw UnresolvedTail("refinement budget exhausted on " + s.to_string());
        for (std::size_t i = 0; i + 1 < mids.size(); ++i)
            if (!(mids[i] < mids[i + 1])) throw UnresolvedTail("parameter spacing underflow");
        auto fresh = evaluate_batch(mids);
        std::vector<HairSample> merged;
        merged.reserve(samples.size() + fresh.size());
        std::merge(std::make_move_iterator(samples.begin()), std::make_move_iterator(samples.end()),
                   std::make_move_iterator(fresh.begin()), std::make_move_iterator(fresh.end()),
                   std::back_inserter(merged),
                   [](const HairSample& a, const HairSample& b) { return a.t < b.t; });
        samples = std::move(merged);
        for (std::size_t i = 0; i + 1 < samples.size(); ++i)
            if (!(samples[i].t < samples[i + 1].t)) throw UnresolvedTail("parameter spacing underflow");
    }

    tail.samples = std::move(samples);
    return tail;
}

std::optional<RayPoint> RayTracer::endpoint(const ExternalAddress& s, double tol) const {
    if (!(tol > 0.0)) throw PreconditionError("tol must be positive");
    check_address(s);
    std::vector<Complex> pts;
    std::optional<Complex> last_est;
    int agreements = 0;
    double last_diff = kInf;
    for (int k = 0; k <= 60; ++k) {
        const HairSample h = tail_point(s, std::ldexp(1.0, -k));
        pts.push_back(h.point.position);
        if (pts.size() < 3) continue;
        const Complex a = pts[pts.size() - 3], b = pts[pts.size() - 2], c = pts.back();
        Complex est = c;
        if (std::abs(b - a) > 0.0) {
            const Complex q = (c - b) / (b - a);
            if (std::abs(q) < 0.9) est = c + (c - b) * q / (1.0 - q);
        }
        if (last_est) {
            last_diff = std::abs(est - *last_est);
            agreements = last_diff < tol ? agreements + 1 : 0;
        }
        last_est = est;
        if (agreements >= 3) {
            RayPoint p{s, h.point.depth, est, safe_exp(est), h.point.error};
            p.error.analytic_bound += last_diff;
            return p;
        }
    }
    return std::nullopt;
}

std::strong_ordering RayTracer::address_order(const ExternalAddress& s1, const ExternalAddress& s2,
                                              double t_ref) const {
    check_address(s1);
    check_address(s2);
    const auto j = first_difference(s1, s2);
    if (!j) return std::strong_ordering::equal;
    // Realizability of both hairs.
    const HairSample h1 = tail_point(s1, t_ref);
    const HairSample h2 = tail_point(s2, t_ref);
    if (*j == 0) {
        const double d = h1.point.position.imag() - h2.point.position.imag();
        const double err = h1.point.error.total(std::abs(h1.point.position)) +
                           h2.point.error.total(std::abs(h2.point.position));
        if (std::abs(d) > err) return d < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    // Hairs sharing the first j tracts are ordered like their level-j images,
    // which sit in distinct tracts.
    double t = t_ref;
    for (int attempt = 0; attempt < 8; ++attempt, t *= 2.0) {
        const HairSample a = tail_point(s1.shift(*j), t);
        const HairSample b = tail_point(s2.shift(*j), t);
        const double d = a.point.position.imag() - b.point.position.imag();
        const double err = a.point.error.total(std::abs(a.point.position)) +
                           b.point.error.total(std::abs(b.point.position));
        if (std::abs(d) > err) return d < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    throw AddressNotRealized("vertical order of " + s1.to_string() + " and " + s2.to_string() +
                             " not resolved");
}

constexpr double kLogMaxDouble = 709.782712893384;

EscapeVerdict escape_test(const FunctionFamily& f, Complex z, double R, int horizon) {
    if (!(R > f.L())) throw PreconditionError("escape radius must exceed L");
    if (horizon < 1) throw PreconditionError("horizon must be >= 1");
    EscapeVerdict v;
    const double logR = std::log(R);
    int last_below = -1;
    bool exceeded = false;
    std::optional<int> reentry;
    Complex cur = z;
    v.log_moduli.push_back(std::log(std::abs(z)));
    for (int n = 0; n < horizon; ++n) {
        const double lm = v.log_moduli.back();
        if (lm < logR) {
            last_below = n;
            if (exceeded && !reentry) reentry = n;
        } else {
            exceeded = true;
        }
        const Evaluation e = evaluate(f, cur);
        v.log_moduli.push_back(e.log_modulus);
        if (e.escaped) {
            // |f^{n+1}| overflows: go on with a logarithm of the orbit.
            const LogTransform F(f);
            Complex w = std::log(cur);
            for (int m = n; m < horizon; ++m) {
                // the tract of w is only meaningful while its angle is resolved
                const bool resolved = kEps * std::abs(w) < 1e-3;
                const TractLookup look = F.tract_of(w);
                if (resolved && look.boundary) return v;
                if (resolved && !look.id) {
                    // |f^{m+1}| <= L < R; only the bound is known
                    v.log_moduli.push_back(std::log(f.L()));
                    v.kind = EscapeVerdict::Kind::reentered;
                    v.n = m + 1;
                    return v;
                }
                if ((w + F.shift()).real() > kLogMaxDouble) {
                    v.kind = EscapeVerdict::Kind::escaping;
                    v.n = last_below + 1;
                    return v;
                }
                if (!resolved) return v;
                w = F.eval(w).value;
                if (m > n) v.log_moduli.push_back(w.real());
                if (w.real() < logR) {
                    v.kind = EscapeVerdict::Kind::reentered;
                    v.n = m + 1;
                    return v;
                }
            }
            return v;
        }
        cur = e.value;
    }
    if (v.log_moduli.back() < logR && exceeded && !reentry) reentry = horizon;
    if (reentry) {
        v.kind = EscapeVerdict::Kind::reentered;
        v.n = *reentry;
    }
    return v;
}

HeadStartResult headstart_check(const LogTransform& F, double a, double b, int n_pairs,
                                std::uint64_t seed) {
    if (!(a >= 1.0)) throw PreconditionError("head-start slope must be >= 1");
    const double x0 = F.log_L();
    if (!(a * x0 + b > x0)) throw PreconditionError("phi(x) <= x on the sampled range");
    if (n_pairs < 1) throw PreconditionError("n_pairs must be >= 1");

    auto phi = [&](double x) { return a * x + b; };
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> kdist(-2, 2);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto tract = [&] {
        TractId t{1, kdist(rng)};
        if (F.is_pair() && u01(rng) < 0.5) t.sign = -1;
        return t;
    };
    // A point of H_{log L} with log-uniform distance to the line Re = log L.
    auto far_point = [&] {
        const double x = x0 + std::exp(-4.0 + 70.0 * u01(rng));
        return Complex{x, (u01(rng) - 0.5) * 4.0 * kPi};
    };

    HeadStartResult r;
    for (int i = 0; i < n_pairs; ++i) {
        const TractId T = tract(), Tp = tract();
        Complex z, w, fz, fw;
        try {
            fz = F.inverse_branch(Tp, far_point());
            fw = F.inverse_branch(Tp, far_point());
            z = F.inverse_branch(T, fz);
            w = F.inverse_branch(T, fw);
        } catch (const Error&) {
            continue;
        }
        ++r.pairs_checked;
        for (int swap = 0; swap < 2; ++swap) {
            if (w.real() > phi(z.real()) && !(fw.real() > phi(fz.real()))) {
                r.counterexample = true;
                r.z = z;
                r.w = w;
                return r;
            }
            std::swap(z, w);
            std::swap(fz, fw);
        }
    }
    return r;
}

}  // namespace eldyn
