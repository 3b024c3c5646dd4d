#include "doctest.h"

#include "eldyn/errors.hpp"
#include "eldyn/projection.hpp"

#include <cmath>
#include <random>

using namespace eldyn;

namespace {

const FunctionFamily& exp_g() {
    static const FunctionFamily g = disjoint_type_rescale(FunctionFamily::exponential(1.0),
                                                          RescaleMode::domain).g;
    return g;
}

std::shared_ptr<const RayTracer> tracer() {
    static const auto tr = std::make_shared<const RayTracer>(LogTransform(exp_g()));
    return tr;
}

ProjectionConfig traced_config(double logR) {
    ProjectionConfig cfg = disc_config(exp_g(), std::exp(logR));
    cfg.t_tol = 1e-10;
    return cfg;
}

std::vector<ExternalAddress> sample_addresses() {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<long> k(-14, 14);
    std::uniform_int_distribution<int> len(0, 2), plen(1, 3);
    std::vector<ExternalAddress> out{ExternalAddress::constant({1, 0}),
                                     ExternalAddress({}, {{1, 0}, {1, 12}})};
    while (out.size() < 12) {
        std::vector<TractId> pre, per;
        for (int i = len(rng); i > 0; --i) pre.push_back({1, k(rng)});
        for (int i = plen(rng); i > 0; --i) per.push_back({1, k(rng)});
        out.emplace_back(pre, per);
    }
    return out;
}

}  // namespace

TEST_CASE("pi_n matches the brush oracle") {
    std::vector<std::shared_ptr<const AffineBrush>> brushes{
        std::make_shared<const AffineBrush>(AffineBrush({{"H1", {0, 1}, 10}, {"H2", {1, -1}, 0}},
                                                        {{"H1", "H2"}, {"H2", "H2"}}, 2, 3)),
        std::make_shared<const AffineBrush>(AffineBrush::random(40, 3, Rational(3, 2), 12))};
    ProjectionConfig cfg;
    cfg.t_tol = 1e-13;
    double worst = 0.0;
    for (const auto& B : brushes) {
        for (const auto& h : B->hairs()) {
            const BrushHairDynamics dyn(B, h.id, static_cast<double>(h.t_y) + 40.0);
            for (int n = 0; n <= 30; ++n) {
                const double got = project_pi_n(dyn, dyn.t_begin(), n, cfg);
                const double want = static_cast<double>(zn_oracle(*B, h.id, n));
                worst = std::max(worst, std::abs(got - want));
            }
        }
    }
    MESSAGE("max |pi_n - oracle| = " << worst);
    CHECK(worst <= 1e-12);
}

TEST_CASE("brush projection worked instance") {
    const auto B = std::make_shared<const AffineBrush>(AffineBrush(
        {{"H1", {0, 1}, 10}, {"H2", {1, -1}, 0}}, {{"H1", "H2"}, {"H2", "H2"}}, 2, 3));
    ProjectionConfig cfg;
    cfg.t_tol = 1e-12;
    const BrushHairDynamics h1(B, "H1", 30.0);
    const auto r = project_pi(h1, 10.2, cfg);
    CHECK(r.converged);
    CHECK(r.t_out == doctest::Approx(11.5).epsilon(1e-12));
    CHECK(project_pi(h1, 12.0, cfg).t_out == 12.0);
    CHECK(project_pi(h1, r.t_out, cfg).t_out == doctest::Approx(r.t_out).epsilon(1e-12));

    cfg.n_max = 1;
    CHECK_THROWS_AS(project_pi(h1, 10.2, cfg), NotConverged);
    const BrushHairDynamics shortie(B, "H1", 11.0);
    CHECK_THROWS_AS(project_pi_n(shortie, 10.0, 1, cfg), TailTooShort);
}

TEST_CASE("brush orbit test at the square boundary matches the exact check") {
    const auto B = std::make_shared<const AffineBrush>(AffineBrush(
        {{"H1", {0, 1}, 10}, {"H2", {1, -1}, 0}}, {{"H1", "H2"}, {"H2", "H2"}}, 2, 3));
    const BrushHairDynamics h2(B, "H2", 40.0), h1(B, "H1", 40.0);
    auto exact = [&](const std::string& id, double t, int n) {
        BrushPoint p{id, Rational(t)};
        for (int k = 0; k <= n; ++k) {
            if (in_open_square(*B, p)) return false;
            if (k < n) p = brush_map(*B, p);
        }
        return true;
    };
    CHECK(h2.avoids_region(3.0, 0));
    CHECK_FALSE(h2.avoids_region(std::nextafter(3.0, 0.0), 0));
    // H1 at 10.5 lands on H2 at 1, then 2, then 4
    CHECK_FALSE(h1.avoids_region(10.5, 2));
    CHECK(h1.avoids_region(11.5, 2));
    CHECK_FALSE(h1.avoids_region(std::nextafter(11.5, 0.0), 2));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> t(10.0, 13.0);
    for (int i = 0; i < 2000; ++i) {
        const double x = t(rng);
        for (int n : {0, 1, 3, 12}) CHECK(h1.avoids_region(x, n) == exact("H1", x, n));
    }
}

TEST_CASE("brush commutation defects agree with the exact check") {
    const auto B = std::make_shared<const AffineBrush>(AffineBrush::random(15, 5, 2, 20));
    ProjectionConfig cfg;
    cfg.t_tol = 1e-12;
    std::vector<std::unique_ptr<BrushHairDynamics>> owned;
    std::vector<const HairDynamics*> hairs;
    for (const auto& h : B->hairs()) {
        owned.push_back(std::make_unique<BrushHairDynamics>(B, h.id, static_cast<double>(h.t_y) + 80.0));
        hairs.push_back(owned.back().get());
    }
    const DefectReport rep = commutation_defect(hairs, cfg, 40);
    CHECK(rep.all_defects_meet_region);
    CHECK_FALSE(rep.defects.empty());
    for (const auto& d : rep.defects) {
        const BrushPoint p{d.hair, Rational(d.t)};
        CHECK(brush_map(*B, pi_model(*B, p)) != pi_model(*B, brush_map(*B, p)));
    }
}

TEST_CASE("traced hairs: monotone trace, idempotence, order") {
    for (double logR : {30.0, 30.5, 31.0}) {
        const ProjectionConfig cfg = traced_config(logR);
        for (const auto& s : sample_addresses()) {
            const TracedHair h(tracer(), s, cfg.region, 0.0, 6.0);
            double last_out = -1.0;
            for (double t : {0.0, 0.3, 0.9, 2.0}) {
                const ProjectionResult r = project_pi(h, t, cfg);
                for (std::size_t i = 1; i < r.zn_trace.size(); ++i)
                    CHECK(r.zn_trace[i].second >= r.zn_trace[i - 1].second);
                CHECK(r.t_out >= t);
                CHECK(r.t_out >= last_out - cfg.t_tol);
                last_out = r.t_out;
                const ProjectionResult again = project_pi(h, r.t_out, cfg);
                CHECK(std::abs(again.t_out - r.t_out) <= cfg.t_tol);
                CHECK(orbit_avoids(h, r.t_out, r.n_used));
            }
        }
    }
}

TEST_CASE("traced hairs: identity off the region and the hair exit point") {
    const ProjectionConfig cfg = traced_config(30.5);
    const TracedHair h(tracer(), ExternalAddress::constant({1, 0}), cfg.region, 0.0, 6.0);
    // gamma(3) has Re > 32 and its orbit only moves right.
    CHECK(project_pi_n(h, 3.0, 5, cfg) == 3.0);
    // n = 0 from the endpoint: the first parameter with |gamma| = R.
    const double t0 = project_pi_n(h, 0.0, 0, cfg);
    const double re = tracer()->tail_point(ExternalAddress::constant({1, 0}), t0).point.position.real();
    CHECK(std::abs(re - 30.5) < 1e-9);
    CHECK(measure_crossings(h, 400) == 1);

    const TracedHair tiny(tracer(), ExternalAddress::constant({1, 0}), cfg.region, 0.0, 0.1);
    CHECK_THROWS_AS(project_pi_n(tiny, 0.0, 0, cfg), TailTooShort);
    CHECK_THROWS_AS(disc_config(exp_g(), 2.0), ConfigError);
}

TEST_CASE("traced commutation defect is bounded") {
    const ProjectionConfig cfg = traced_config(30.5);
    std::vector<std::unique_ptr<TracedHair>> owned;
    std::vector<const HairDynamics*> hairs;
    for (const auto& s : sample_addresses()) {
        owned.push_back(std::make_unique<TracedHair>(tracer(), s, cfg.region, 0.0, 6.0));
        hairs.push_back(owned.back().get());
    }
    const DefectReport a = commutation_defect(hairs, cfg, 16);
    const DefectReport b = commutation_defect(hairs, cfg, 32);
    MESSAGE("defects " << a.defects.size() << "/" << b.defects.size() << ", max modulus "
                       << a.max_defect_modulus << " / " << b.max_defect_modulus
                       << ", skipped " << a.skipped << "/" << b.skipped);
    CHECK(a.all_defects_meet_region);
    CHECK(b.all_defects_meet_region);
    CHECK(b.max_defect_modulus >= a.max_defect_modulus);
    CHECK(b.max_defect_modulus <= 2.0 * cfg.R);
    for (const auto* rep : {&a, &b})
        for (const auto& d : rep->defects) CHECK(d.modulus < cfg.R * std::exp(2.0));
}
