#include "checks.hpp"

#include "eldyn/brushmodel.hpp"
#include "eldyn/conjugacy.hpp"
#include "eldyn/errors.hpp"
#include "eldyn/parallel.hpp"
#include "eldyn/pipeline.hpp"
#include "eldyn/projection.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace eldyn::cli {

using io::Json;
using io::number;

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(salt)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

FunctionFamily exp_f() { return FunctionFamily::exponential(1.0); }
FunctionFamily pair_f() { return FunctionFamily::exp_pair(1.0, 1.0); }
FunctionFamily rescaled(const FunctionFamily& f) { return disjoint_type_rescale(f, RescaleMode::domain).g; }

ExternalAddress random_address(std::mt19937_64& rng, bool pair, long kmax, int max_pre, int max_per) {
    std::uniform_int_distribution<long> k(-kmax, kmax);
    std::uniform_int_distribution<int> len(0, max_pre), plen(1, max_per), coin(0, 1);
    auto entry = [&] { return TractId{pair && coin(rng) ? -1 : 1, k(rng)}; };
    std::vector<TractId> pre, per;
    for (int i = len(rng); i > 0; --i) pre.push_back(entry());
    for (int i = plen(rng); i > 0; --i) per.push_back(entry());
    return {pre, per};
}

std::vector<Complex> tract_samples(const LogTransform& F, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double x0 = -F.shift().real();
    std::uniform_real_distribution<double> re(x0 - 2.0, x0 + 8.0), im(-40.0, 40.0);
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(n));
    while (static_cast<int>(out.size()) < n) {
        const Complex w{re(rng), im(rng)};
        if (F.tract_of(w).id) out.push_back(w);
    }
    return out;
}

AffineBrush worked_brush() {
    return AffineBrush({{"H1", {0, 1}, 10}, {"H2", {1, -1}, 0}}, {{"H1", "H2"}, {"H2", "H2"}}, 2, 3);
}

/// Instance 0 is the worked two-hair brush.
AffineBrush brush_instance(int i, std::uint64_t seed) {
    if (i == 0) return worked_brush();
    std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(i)));
    static const Rational lambdas[] = {Rational(3, 2), Rational(2), Rational(5, 2), Rational(3)};
    static const Rational Qs[] = {Rational(1), Rational(3, 2), Rational(3), Rational(7)};
    std::uniform_int_distribution<int> hairs(1, 20), pick(0, 3);
    const int n = hairs(rng);
    const Rational lam = lambdas[pick(rng)], Q = Qs[pick(rng)];
    return AffineBrush::random(n, rng(), lam, Q);
}

// 1: |F'(w)| >= (Re F(w) - log L) / (4 pi) on tract samples.
CheckResult check_expansion(const RunConfig& c) {
    CheckResult r{1, "expansion inequality", false, {}};
    long violations = 0, samples = 0;
    double worst = kInf;
    Json per = Json::object();
    for (const auto& [name, fam] : std::vector<std::pair<std::string, FunctionFamily>>{
             {"exponential", exp_f()}, {"exp_pair", pair_f()},
             {"exponential_rescaled", rescaled(exp_f())}, {"exp_pair_rescaled", rescaled(pair_f())}}) {
        const LogTransform F(fam);
        const auto pts = tract_samples(F, c.verify.expansion_samples, mix(c.seed, 11));
        long bad = 0;
        double slack = kInf;
        for (const Complex w : pts) {
            const auto e = expansion_lower_bound(F, w);
            const double tol = 8 * kEps * std::max(1.0, e.bound);
            if (e.actual < e.bound - tol) ++bad;
            slack = std::min(slack, (e.actual - e.bound) / std::max(1.0, e.bound));
        }
        per[name] = Json{{"samples", pts.size()}, {"violations", bad}, {"min_relative_slack", number(slack)}};
        violations += bad;
        samples += static_cast<long>(pts.size());
        worst = std::min(worst, slack);
    }
    r.pass = violations == 0;
    r.measured = Json{{"samples", samples}, {"violations", violations}, {"min_relative_slack", number(worst)},
                      {"families", per}};
    return r;
}

// 2: depth ratios |w_{n+1} - w_n| / |w_n - w_{n-1}| of anchored pullbacks.
CheckResult check_pullback(const RunConfig& c) {
    CheckResult r{2, "pullback contraction", true, {}};
    Json per = Json::object();
    for (const auto& [name, fam] : std::vector<std::pair<std::string, FunctionFamily>>{
             {"exponential_rescaled", rescaled(exp_f())}, {"exp_pair_rescaled", rescaled(pair_f())}}) {
        const LogTransform G(fam);
        const RayTracer tr(G);
        const double margin = normalized_margin(G, 257);
        std::mt19937_64 rng(mix(c.seed, 12));
        std::vector<ExternalAddress> addrs;
        for (int i = 0; i < c.verify.pullback_addresses; ++i)
            addrs.push_back(random_address(rng, G.is_pair(), 3, 3, 3));
        struct Out { double worst = 0; int measured = 0, floor = 0; };
        std::vector<Out> outs(addrs.size());
        parallel_for(addrs.size(), [&](std::size_t i) {
            std::vector<Complex> w;
            for (int n = 1; n <= 41; ++n) w.push_back(tr.pullback_point(addrs[i], n, tr.anchored_seed(addrs[i], n)).position);
            for (std::size_t n = 2; n < w.size(); ++n) {
                const double prev = std::abs(w[n - 1] - w[n - 2]);
                const double cur = std::abs(w[n] - w[n - 1]);
                // differences at the rounding floor carry no ratio information
                if (prev <= 64 * kEps * (1.0 + std::abs(w[n]))) {
                    ++outs[i].floor;
                    continue;
                }
                ++outs[i].measured;
                outs[i].worst = std::max(outs[i].worst, cur / prev);
            }
        });
        Out total;
        for (const auto& o : outs) {
            total.worst = std::max(total.worst, o.worst);
            total.measured += o.measured;
            total.floor += o.floor;
        }
        const bool ok = margin >= 0.0 && total.worst <= 0.5 + 1e-6 && total.measured > 0;
        r.pass = r.pass && ok;
        per[name] = Json{{"addresses", addrs.size()},      {"normalized_margin", number(margin)},
                         {"max_ratio", number(total.worst)}, {"ratios_measured", total.measured},
                         {"ratios_at_float_floor", total.floor}, {"pass", ok}};
    }
    r.measured = Json{{"depths", "2..40"}, {"families", per}};
    return r;
}

// 3: inverse_branch(T, F(w)) = w.
CheckResult check_roundtrip(const RunConfig& c) {
    CheckResult r{3, "inverse branch round trip", false, {}};
    const auto e1 = exp_f();
    const std::vector<std::pair<std::string, FunctionFamily>> fams{
        {"exponential", e1},
        {"exponential(0.5+0.25i)", FunctionFamily::exponential({0.5, 0.25})},
        {"exp_pair", pair_f()},
        {"exp_pair(0.7+0.2i,-0.4+0.9i)", FunctionFamily::exp_pair({0.7, 0.2}, {-0.4, 0.9})},
        {"exponential_rescaled", rescaled(e1)},
        {"exp_pair_rescaled", rescaled(pair_f())},
        {"exponential_range_rescaled", disjoint_type_rescale(e1, RescaleMode::range).g}};
    long bad = 0, samples = 0;
    double worst = 0.0;
    for (const auto& [name, fam] : fams) {
        const LogTransform F(fam);
        for (const Complex w : tract_samples(F, c.verify.roundtrip_samples, mix(c.seed, 13))) {
            const auto img = F.eval(w);
            if (img.escaped) continue;
            const double rel = std::abs(F.inverse_branch(img.tract, img.value) - w) / (1.0 + std::abs(w));
            worst = std::max(worst, rel);
            bad += rel >= 1e-10;
            ++samples;
        }
    }
    r.pass = bad == 0;
    r.measured = Json{{"families", fams.size()}, {"samples", samples}, {"violations", bad},
                      {"max_relative_error", number(worst)}};
    return r;
}

// 4: iterative pi_n against the closed-form z_n.
CheckResult check_brush_oracle(const RunConfig& c) {
    CheckResult r{4, "brush oracle equivalence", false, {}};
    const int n_inst = c.verify.brush_instances;
    struct Out { double err = 0; long mono = 0, gap = 0, runs = 0; std::string failure; };
    std::vector<Out> outs(static_cast<std::size_t>(n_inst));
    const std::uint64_t seed = mix(c.seed, 14);
    parallel_for(outs.size(), [&](std::size_t i) {
        Out& o = outs[i];
        try {
            const auto B = std::make_shared<const AffineBrush>(brush_instance(static_cast<int>(i), seed));
            const double C = static_cast<double>(cauchy_constant(*B));
            const double lam = static_cast<double>(B->lambda());
            ProjectionConfig cfg;
            cfg.t_tol = 1e-13;
            for (const auto& h : B->hairs()) {
                const BrushHairDynamics dyn(B, h.id, static_cast<double>(z_infinity(*B, h.id)) + 5.0);
                double prev = 0.0, lam_n = 1.0;
                for (int n = 0; n <= 30; ++n) {
                    const double got = project_pi_n(dyn, dyn.t_begin(), n, cfg);
                    const double want = static_cast<double>(zn_oracle(*B, h.id, n));
                    o.err = std::max(o.err, std::abs(got - want));
                    ++o.runs;
                    if (n > 0) {
                        o.mono += got < prev;
                        o.gap += got - prev > C / lam_n + 1e-12;
                        lam_n *= lam;
                    }
                    prev = got;
                }
            }
        } catch (const std::exception& e) {
            o.failure = e.what();
        }
    });
    Out t;
    std::string failure;
    for (const auto& o : outs) {
        t.err = std::max(t.err, o.err);
        t.mono += o.mono;
        t.gap += o.gap;
        t.runs += o.runs;
        if (failure.empty()) failure = o.failure;
    }
    // worked instance
    const auto W = std::make_shared<const AffineBrush>(worked_brush());
    ProjectionConfig cfg;
    cfg.t_tol = 1e-12;
    const BrushHairDynamics h1(W, "H1", 30.0);
    const double z0 = project_pi_n(h1, h1.t_begin(), 0, cfg);
    const double zinf = project_pi_n(h1, h1.t_begin(), 30, cfg);
    const double pi102 = project_pi(h1, 10.2, cfg).t_out;
    const bool worked = std::abs(z0 - 10.0) <= 1e-12 && std::abs(zinf - 11.5) <= 1e-12 && std::abs(pi102 - 11.5) <= 1e-12;
    r.pass = failure.empty() && t.err <= 1e-12 && t.mono == 0 && t.gap == 0 && worked;
    r.measured = Json{{"instances", n_inst},
                      {"runs", t.runs},
                      {"max_abs_error", number(t.err)},
                      {"monotonicity_violations", t.mono},
                      {"gap_bound_violations", t.gap},
                      {"worked", {{"z_0", z0}, {"z_inf", zinf}, {"pi(10.2)", pi102}, {"pass", worked}}},
                      {"failure", failure.empty() ? Json(nullptr) : Json(failure)}};
    return r;
}

std::vector<ExternalAddress> traced_addresses(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<ExternalAddress> out{ExternalAddress::constant({1, 0}), ExternalAddress({}, {{1, 0}, {1, 12}})};
    while (static_cast<int>(out.size()) < n) out.push_back(random_address(rng, false, 14, 2, 3));
    out.erase(out.begin() + n, out.end());
    return out;
}

// 5: idempotence of pi_R on traced hairs and confinement of commutation defects.
CheckResult check_projection(const RunConfig& c) {
    CheckResult r{5, "pi_R structure", false, {}};
    const FunctionFamily g = rescaled(exp_f());
    const auto tracer = std::make_shared<const RayTracer>(LogTransform(g));
    ProjectionConfig cfg = disc_config(g, std::exp(c.projection.log_R));
    cfg.t_tol = c.projection.t_tol;
    cfg.n_max = c.projection.n_max;
    cfg.orbit_horizon = c.projection.orbit_horizon;
    cfg.scan_steps = c.projection.scan_steps;
    const auto addrs = traced_addresses(c.verify.projection_hairs, mix(c.seed, 15));
    std::vector<std::unique_ptr<TracedHair>> owned;
    std::vector<const HairDynamics*> hairs;
    for (const auto& s : addrs) {
        owned.push_back(std::make_unique<TracedHair>(tracer, s, cfg.region, 0.0, 6.0));
        hairs.push_back(owned.back().get());
    }
    struct Out { int converged = 0, unconverged = 0, idem_bad = 0, order_bad = 0, crossings = 0; double idem = 0; };
    std::vector<Out> outs(hairs.size());
    parallel_for(hairs.size(), [&](std::size_t i) {
        Out& o = outs[i];
        double last = -1.0;
        for (double t : {0.0, 0.3, 0.9, 2.0}) {
            try {
                const ProjectionResult p = project_pi(*hairs[i], t, cfg);
                ++o.converged;
                const ProjectionResult again = project_pi(*hairs[i], p.t_out, cfg);
                const double d = std::abs(again.t_out - p.t_out);
                o.idem = std::max(o.idem, d);
                o.idem_bad += d > cfg.t_tol;
                o.order_bad += p.t_out < t || p.t_out < last - cfg.t_tol;
                last = p.t_out;
            } catch (const NotConverged&) {
                ++o.unconverged;
            }
        }
        o.crossings = measure_crossings(*hairs[i], 400);
    });
    Out t;
    for (const auto& o : outs) {
        t.converged += o.converged;
        t.unconverged += o.unconverged;
        t.idem_bad += o.idem_bad;
        t.order_bad += o.order_bad;
        t.idem = std::max(t.idem, o.idem);
        t.crossings = std::max(t.crossings, o.crossings);
    }
    const int n1 = c.projection.defect_samples;
    const DefectReport a = commutation_defect(hairs, cfg, n1);
    const DefectReport b = commutation_defect(hairs, cfg, 2 * n1);
    const bool defects_ok = a.all_defects_meet_region && b.all_defects_meet_region &&
                            b.max_defect_modulus >= a.max_defect_modulus && b.max_defect_modulus <= 2.0 * cfg.R;
    r.pass = static_cast<int>(hairs.size()) >= 1 && t.converged > 0 && t.idem_bad == 0 && t.order_bad == 0 && defects_ok;
    r.measured = Json{{"hairs", hairs.size()},
                      {"log_R", c.projection.log_R},
                      {"converged_runs", t.converged},
                      {"unconverged_runs", t.unconverged},
                      {"max_idempotence_gap", number(t.idem)},
                      {"idempotence_violations", t.idem_bad},
                      {"order_violations", t.order_bad},
                      {"max_disc_crossings", t.crossings},
                      {"defects", {{"samples", {n1, 2 * n1}},
                                   {"count", {a.defects.size(), b.defects.size()}},
                                   {"max_modulus", {number(a.max_defect_modulus), number(b.max_defect_modulus)}},
                                   {"all_meet_region", a.all_defects_meet_region && b.all_defects_meet_region},
                                   {"bound", number(2.0 * cfg.R)}}}};
    return r;
}

// 6: exact crossing counts of brushes with the square boundary.
CheckResult check_crossings(const RunConfig& c) {
    CheckResult r{6, "crossing property", false, {}};
    const int n_inst = c.verify.brush_instances;
    std::vector<int> worst(static_cast<std::size_t>(n_inst), 0);
    const std::uint64_t seed = mix(c.seed, 14);
    parallel_for(worst.size(), [&](std::size_t i) {
        const AffineBrush B = brush_instance(static_cast<int>(i), seed);
        for (const Rational& Q : {B.Q(), Rational(1, 3), Rational(22, 7), Rational(40)})
            worst[i] = std::max(worst[i], crossing_count(B, Q));
    });
    int m = 0;
    for (int w : worst) m = std::max(m, w);
    r.pass = m <= 1;
    r.measured = Json{{"instances", n_inst}, {"square_sizes_per_instance", 4}, {"max_crossings", m}};
    return r;
}

// 7: conjugacy bounds and functional equation; lambda = 1 identity.
CheckResult check_conjugacy(const RunConfig& c) {
    CheckResult r{7, "conjugacy bounds", true, {}};
    Json per = Json::object();
    for (const auto& [name, f] : std::vector<std::pair<std::string, FunctionFamily>>{{"exponential", exp_f()},
                                                                                     {"exp_pair", pair_f()}}) {
        const auto C = make_conjugacy(f);
        const int n = c.verify.conjugacy_samples;
        const auto rep = verify_conjugacy(C, n, mix(c.seed, 17));
        const bool ok = rep.valid() && rep.samples >= (9 * n) / 10 && rep.max_residual <= 1e-8 &&
                        rep.max_log_residual <= 1e-8 && rep.max_rate <= 0.5 + 1e-6;
        r.pass = r.pass && ok;
        Json j = io::to_json(rep);
        j["pass"] = ok;
        per[name] = j;
    }
    const auto I = make_conjugacy(exp_f(), Complex{1.0, 0.0}, 5.0);
    const Complex w{7.5, 1.25};
    const auto rep1 = verify_conjugacy(I, 10, c.seed);
    const bool identity = theta_log(I, w).value == w && theta_plane(I, Complex{3.0, -4.0}) == Complex{3.0, -4.0} &&
                          rep1.max_residual == 0.0 && rep1.max_displacement == 0.0 && rep1.valid();
    r.pass = r.pass && identity;
    r.measured = Json{{"families", per}, {"lambda_1_identity", identity}};
    return r;
}

// 8: criniferous pipeline on escaping exponential seeds.
CheckResult check_pipeline(const RunConfig& c) {
    CheckResult r{8, "criniferous pipeline", false, {}};
    const auto f = exp_f();
    const auto seeds = escaping_seeds(c.verify.pipeline_seeds, mix(c.seed, 18));
    int contained = 0, monotone = 0, bounded = 0;
    double worst_ratio = 0.0;
    std::string failure;
    for (const Complex z : seeds) {
        try {
            const auto p = criniferous_pipeline(f, z, c.pipeline.R, c.pipeline.horizon);
            contained += p.contained;
            monotone += p.monotone;
            bounded += p.distance <= p.error_bound && p.completion_distance <= p.completion_bound;
            if (p.error_bound > 0) worst_ratio = std::max(worst_ratio, p.distance / p.error_bound);
        } catch (const Error& e) {
            if (failure.empty()) failure = e.kind() + ": " + e.what();
        }
    }
    const int n = static_cast<int>(seeds.size());
    r.pass = contained == n && monotone == n && bounded == n && failure.empty();
    r.measured = Json{{"seeds", n},
                      {"R", c.pipeline.R},
                      {"horizon", c.pipeline.horizon},
                      {"contained", contained},
                      {"monotone", monotone},
                      {"within_bounds", bounded},
                      {"max_distance_over_bound", number(worst_ratio)},
                      {"failure", failure.empty() ? Json(nullptr) : Json(failure)}};
    return r;
}

// 9: address order under the correspondence.
CheckResult check_order(const RunConfig& c) {
    CheckResult r{9, "order correspondence", true, {}};
    Json per = Json::object();
    for (const auto& [name, f] : std::vector<std::pair<std::string, FunctionFamily>>{{"exponential", exp_f()},
                                                                                     {"exp_pair", pair_f()}}) {
        const auto C = make_conjugacy(f);
        const RayTracer tracer(C.G);
        std::mt19937_64 rng(mix(c.seed, 19));
        std::vector<std::pair<ExternalAddress, ExternalAddress>> pairs;
        for (int i = 0; i < c.verify.order_pairs; ++i) {
            auto a = random_address(rng, C.G.is_pair(), 5, 2, 2);
            auto b = random_address(rng, C.G.is_pair(), 5, 2, 2);
            pairs.emplace_back(std::move(a), std::move(b));
        }
        std::vector<int> bad(pairs.size(), 0);
        parallel_for(pairs.size(), [&](std::size_t i) {
            const auto& [a, b] = pairs[i];
            try {
                const auto og = tracer.address_order(a, b);
                const auto of = address_order_f(C, tracer, address_correspondence(C, a), address_correspondence(C, b));
                bad[i] = og != of;
            } catch (const Error&) {
                bad[i] = 2;
            }
        });
        long violations = 0, errors = 0;
        for (int v : bad) violations += v == 1, errors += v == 2;
        r.pass = r.pass && violations == 0 && errors == 0;
        per[name] = Json{{"pairs", pairs.size()}, {"violations", violations}, {"errors", errors}};
    }
    r.measured = Json{{"families", per}};
    return r;
}

CheckResult check_brush_axioms(const RunConfig& c) {
    CheckResult r{0, "brush axioms on a random 100-hair brush", false, {}};
    const auto rep = eldyn::check_brush_axioms(AffineBrush::random(100, mix(c.seed, 20)));
    r.pass = rep.ok();
    r.measured = Json{{"ok", rep.ok()}, {"violations", rep.violations}};
    return r;
}

// Doubling the horizon never turns an escaping verdict into anything else.
CheckResult check_escape_horizon(const RunConfig& c) {
    CheckResult r{0, "escape verdict stable under horizon doubling", false, {}};
    const FunctionFamily g = c.traced();
    const double R = c.render.R.value_or(2.0 * g.L());
    const auto& v = c.render;
    const int n = 32;
    std::vector<int> flips(static_cast<std::size_t>(n * n), 0), esc(flips.size(), 0);
    parallel_for(flips.size(), [&](std::size_t i) {
        const double x = v.re_min + (v.re_max - v.re_min) * ((static_cast<double>(i % n) + 0.5) / n);
        const double y = v.im_min + (v.im_max - v.im_min) * ((static_cast<double>(i / n) + 0.5) / n);
        const Complex z = v.coordinates == "log" ? std::exp(Complex{x, y}) : Complex{x, y};
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return;
        const auto a = escape_test(g, z, R, v.horizon);
        if (a.kind != EscapeVerdict::Kind::escaping) return;
        esc[i] = 1;
        flips[i] = escape_test(g, z, R, 2 * v.horizon).kind != EscapeVerdict::Kind::escaping;
    });
    long f = 0, e = 0;
    for (std::size_t i = 0; i < flips.size(); ++i) f += flips[i], e += esc[i];
    r.pass = f == 0;
    r.measured = Json{{"points", n * n}, {"escaping", e}, {"flips", f}};
    return r;
}

}  // namespace

std::vector<Complex> escaping_seeds(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> x(7.0, 12.0), u(-1.0, 1.0);
    std::vector<Complex> out{50.0, 60.0, 200.0};
    while (static_cast<int>(out.size()) < n) {
        const double xr = x(rng);
        const Complex z{xr, 100.0 * std::exp(-xr) * u(rng)};
        // exp(e^z) overflows; its sign of Re is that of cos(Im e^z)
        if (std::cos(std::exp(z).imag()) > 0.1) out.push_back(z);
    }
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<CheckResult> run_checks(const RunConfig& c, const std::function<void(const CheckResult&)>& progress) {
    using Fn = CheckResult (*)(const RunConfig&);
    const Fn checks[] = {check_expansion,   check_pullback, check_roundtrip, check_brush_oracle,
                         check_projection,  check_crossings, check_conjugacy, check_pipeline,
                         check_order,       check_brush_axioms, check_escape_horizon};
    std::vector<CheckResult> out;
    for (Fn fn : checks) {
        const auto t0 = std::chrono::steady_clock::now();
        CheckResult r;
        try {
            r = fn(c);
        } catch (const std::exception& e) {
            r.pass = false;
            r.measured = Json{{"error", e.what()}};
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (progress) progress(r);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace eldyn::cli
