#include "doctest.h"

#include "eldyn/errors.hpp"
#include "eldyn/rays.hpp"

#include <cmath>
#include <random>

using namespace eldyn;

namespace {

const FunctionFamily& exp_g() {
    static const FunctionFamily g = disjoint_type_rescale(FunctionFamily::exponential(1.0),
                                                          RescaleMode::domain).g;
    return g;
}

const FunctionFamily& pair_g() {
    static const FunctionFamily g = disjoint_type_rescale(FunctionFamily::exp_pair(1.0, 1.0),
                                                          RescaleMode::domain).g;
    return g;
}

ExternalAddress zero_bar() { return ExternalAddress::constant({1, 0}); }

// Independent oracle: w = Log w - log lambda, iterated from 30.
Complex fixed_point_oracle() {
    const double log_lambda = -std::log(3.0) - kEightPi;
    Complex w{30.0, 0.0};
    for (int i = 0; i < 200; ++i) w = std::log(w) - log_lambda;
    return w;
}

ExternalAddress random_address(std::mt19937_64& rng, bool pair, long kmax = 3) {
    std::uniform_int_distribution<long> k(-kmax, kmax);
    std::uniform_int_distribution<int> len(0, 3), plen(1, 3), coin(0, 1);
    auto entry = [&] { return TractId{pair && coin(rng) ? -1 : 1, k(rng)}; };
    std::vector<TractId> pre, per;
    for (int i = len(rng); i > 0; --i) pre.push_back(entry());
    for (int i = plen(rng); i > 0; --i) per.push_back(entry());
    return {pre, per};
}

}  // namespace

TEST_CASE("disjoint-type exponential fixed point on the zero address") {
    const LogTransform G(exp_g());
    const RayTracer tr(G);
    const Complex oracle = fixed_point_oracle();
    CHECK(std::abs(G.eval(oracle).value - oracle) < 1e-10);
    CHECK(oracle.real() == doctest::Approx(29.6198).epsilon(1e-5));

    const RayPoint deep = tr.pullback_point(zero_bar(), 40, {30.0, 0.0});
    CHECK(std::abs(deep.position - oracle) < 1e-10);
    CHECK(std::abs(deep.position - oracle) <= deep.error.total(30.0));

    const HairSample h = tr.tail_point(zero_bar(), 0.0);
    CHECK(std::abs(h.point.position - oracle) < 1e-12);
    CHECK(std::abs(G.eval(h.point.position).value - h.point.position) < 1e-10);
}

TEST_CASE("pullback contraction ratios on random addresses") {
    for (const auto* fam : {&exp_g(), &pair_g()}) {
        const LogTransform G(*fam);
        const RayTracer tr(G);
        std::mt19937_64 rng(7);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const ExternalAddress s = random_address(rng, G.is_pair());
            std::vector<Complex> w;
            for (int n = 1; n <= 12; ++n) w.push_back(tr.pullback_point(s, n, tr.anchored_seed(s, n)).position);
            for (std::size_t n = 2; n < w.size(); ++n) {
                const double prev = std::abs(w[n - 1] - w[n - 2]);
                const double cur = std::abs(w[n] - w[n - 1]);
                if (prev < 1e-12) break;  // below the float floor
                worst = std::max(worst, cur / prev);
            }
        }
        MESSAGE("worst depth ratio " << worst);
        CHECK(worst <= 0.5 + 1e-6);
    }
}

TEST_CASE("pullback error bound and seed independence") {
    const LogTransform G(exp_g());
    const RayTracer tr(G);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> re(G.log_L() + kEightPi, G.log_L() + kEightPi + 20.0);
    std::uniform_real_distribution<double> im(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const ExternalAddress s = random_address(rng, false);
        const int n = 1 + trial % 8;
        const Complex v{re(rng), im(rng)}, v2{re(rng), im(rng)};
        const RayPoint a = tr.pullback_point(s, n, v);
        const RayPoint b = tr.pullback_point(s, n, v2);
        CHECK(std::abs(a.position - b.position) <= std::abs(v - v2) / std::ldexp(1.0, n) + 1e-12);
        CHECK(G.tract_of(a.position).id == s.at(0));

        // Forward-backward identity.
        if (n >= 2) {
            const RayPoint c = tr.pullback_point(s.shift(1), n - 1, v);
            CHECK(std::abs(G.eval(a.position).value - c.position) <=
                  10.0 * std::max(a.error.total(std::abs(a.position)), 1e-12 * std::abs(c.position)));
        }
        // Successive depths from the same seed stay inside the bound.
        const RayPoint deep = tr.pullback_point(s, n + 1, v);
        CHECK(std::abs(deep.position - a.position) <= a.error.total(std::abs(a.position)) +
                                                          deep.error.total(std::abs(a.position)));
    }
}

TEST_CASE("pullback preconditions") {
    CHECK_THROWS_AS(RayTracer(LogTransform(FunctionFamily::exponential(1.0))), ContractRegimeError);
    const RayTracer tr{LogTransform(exp_g())};
    CHECK_THROWS_AS(tr.pullback_point(zero_bar(), 0, {30.0, 0.0}), PreconditionError);
    CHECK_THROWS_AS(tr.pullback_point(zero_bar(), 3, {0.5, 0.0}), PreconditionError);
    CHECK_THROWS_AS(tr.tail_point(ExternalAddress::constant({1, 40}), 1.0), AddressNotRealized);
}

TEST_CASE("tail image consistency under the forward map") {
    for (const auto* fam : {&exp_g(), &pair_g()}) {
        const LogTransform G(*fam);
        const RayTracer tr(G);
        std::mt19937_64 rng(3);
        const double tol = 1e-9;
        for (int trial = 0; trial < 10; ++trial) {
            const ExternalAddress s = random_address(rng, G.is_pair(), 2);
            const HairTail tail = tr.trace_tail(s, 0.0, 2.0, tol);
            REQUIRE(tail.samples.size() >= 17);
            for (const auto& h : tail.samples) {
                const Complex img = G.eval(h.point.position).value;
                const double t1 = tr.image_potential(s, h.t);
                if (!(t1 < 600.0)) continue;  // image potential past the double range of its pullback
                const HairSample other = tr.tail_point(s.shift(1), t1);
                CHECK(std::abs(img - other.point.position) <= 2.0 * tol + 1e-13 * std::abs(img));
            }
        }
    }
}

TEST_CASE("tail invariants") {
    const LogTransform G(exp_g());
    const RayTracer tr(G);
    const HairTail tail = tr.trace_tail(zero_bar(), 0.0, 5.0, 1e-9);
    for (std::size_t i = 1; i < tail.samples.size(); ++i) {
        CHECK(tail.samples[i].t > tail.samples[i - 1].t);
        CHECK(tail.samples[i].point.position.real() > tail.samples[i - 1].point.position.real());
        CHECK(std::abs(tail.samples[i].point.position - tail.samples[i - 1].point.position) <=
              tr.config().spacing);
    }
    const HairTail single = tr.trace_tail(zero_bar(), 1.0, 1.0, 1e-9);
    CHECK(single.samples.size() == 1);
    CHECK_THROWS_AS(tr.trace_tail(zero_bar(), 2.0, 1.0, 1e-9), PreconditionError);

    RayConfig tight;
    tight.max_samples = 20;
    const RayTracer small(G, tight);
    CHECK_THROWS_AS(small.trace_tail(zero_bar(), 0.0, 5.0, 1e-9), UnresolvedTail);
}

TEST_CASE("endpoints") {
    const LogTransform G(exp_g());
    const RayTracer tr(G);
    const auto e = tr.endpoint(zero_bar(), 1e-10);
    REQUIRE(e);
    CHECK(std::abs(e->position - fixed_point_oracle()) < 1e-10);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const ExternalAddress s = random_address(rng, false);
        const auto a = tr.endpoint(s, 1e-8);
        const auto b = tr.endpoint(s, 5e-9);
        REQUIRE(a);
        REQUIRE(b);
        CHECK(a->position.real() >= G.log_L() + kEightPi);
        CHECK(std::abs(a->position - b->position) < 1e-8);
        CHECK(std::abs(a->position - tr.tail_point(s, 0.0).point.position) < 1e-8);
    }
}

TEST_CASE("escape classification") {
    const auto f = FunctionFamily::exponential(1.0);
    auto v = escape_test(f, 50.0, 10.0, 20);
    CHECK(v.kind == EscapeVerdict::Kind::escaping);
    CHECK(v.n == 0);

    v = escape_test(f, 0.0, 10.0, 20);
    CHECK(v.kind == EscapeVerdict::Kind::escaping);
    CHECK(v.n == 3);  // 0, 1, e, e^e = 15.15

    v = escape_test(f, {0.0, kPi}, 10.0, 3);
    CHECK(v.kind == EscapeVerdict::Kind::undecided);
    CHECK(v.log_moduli[1] == doctest::Approx(0.0).epsilon(1e-12));    // f = -1
    CHECK(v.log_moduli[2] == doctest::Approx(-1.0).epsilon(1e-12));   // e^{-1}

    v = escape_test(f, {5.0, kPi}, 10.0, 3);
    CHECK(v.kind == EscapeVerdict::Kind::reentered);
    CHECK(v.n == 2);

    // |f^2| overflows for both; the sign of Re f^2 = cos(Im f(z)) * |f^2| decides.
    for (const Complex z : {Complex{8.0, -0.02}, Complex{10.0, 0.004}}) {
        const Complex z1 = std::exp(z);
        const bool escapes = std::cos(z1.imag()) > 0.0;
        v = escape_test(f, z, 10.0, 20);
        CHECK(v.kind == (escapes ? EscapeVerdict::Kind::escaping : EscapeVerdict::Kind::reentered));
        if (!escapes) CHECK(v.n == 3);
        if (escapes) CHECK(v.n == 0);
    }
    CHECK(std::cos(std::exp(Complex{8.0, -0.02}).imag()) < 0.0);

    // Doubling the horizon never withdraws an escape verdict.
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> d(-6.0, 6.0);
    for (int i = 0; i < 200; ++i) {
        const Complex z{d(rng), d(rng)};
        const auto a = escape_test(f, z, 10.0, 15);
        const auto b = escape_test(f, z, 10.0, 30);
        if (a.kind == EscapeVerdict::Kind::escaping) {
            CHECK(b.kind == EscapeVerdict::Kind::escaping);
            CHECK(b.n == a.n);
        }
    }
    CHECK_THROWS_AS(escape_test(f, 1.0, 2.0, 5), PreconditionError);
}

TEST_CASE("head-start falsification") {
    const LogTransform G(exp_g());
    const auto r = headstart_check(G, 2.0, 0.0, 10000);
    CHECK_FALSE(r.counterexample);
    CHECK(r.pairs_checked > 9000);
    CHECK_THROWS_AS(headstart_check(G, 1.0, -1.0, 10), PreconditionError);
    CHECK_THROWS_AS(headstart_check(G, 0.5, 0.0, 10), PreconditionError);

    const auto loose = headstart_check(LogTransform(FunctionFamily::exponential(1.0)), 2.0, 0.0, 2000);
    MESSAGE("exploratory run outside the contraction regime: counterexample=" << loose.counterexample);
}

TEST_CASE("address order") {
    const RayTracer tr{LogTransform(exp_g())};
    const auto one = ExternalAddress::constant({1, 1});
    CHECK(tr.address_order(zero_bar(), one) == std::strong_ordering::less);
    CHECK(tr.address_order(one, zero_bar()) == std::strong_ordering::greater);
    CHECK(tr.address_order(one, one) == std::strong_ordering::equal);
    const ExternalAddress a({{1, 0}}, {{1, 1}}), b({{1, 0}}, {{1, -1}});
    CHECK(tr.address_order(a, b) == std::strong_ordering::greater);
    CHECK_THROWS_AS(tr.address_order(a, ExternalAddress::constant({1, 17})), AddressNotRealized);

    const RayTracer tp{LogTransform(pair_g())};
    CHECK(tp.address_order(ExternalAddress::constant({1, 0}), ExternalAddress::constant({-1, 0})) ==
          std::strong_ordering::less);
    CHECK(tp.address_order(ExternalAddress::constant({-1, -1}), ExternalAddress::constant({1, 0})) ==
          std::strong_ordering::less);
}
