#include "doctest.h"

#include "eldyn/errors.hpp"
#include "eldyn/logspace.hpp"

#include <cmath>
#include <random>

using namespace eldyn;

namespace {

std::vector<FunctionFamily> log_families() {
    const auto e1 = FunctionFamily::exponential(1.0);
    return {e1,
            FunctionFamily::exponential({0.5, 0.25}),
            FunctionFamily::exp_pair(1.0, 1.0),
            FunctionFamily::exp_pair({0.7, 0.2}, {-0.4, 0.9}),
            disjoint_type_rescale(e1, RescaleMode::domain).g,
            disjoint_type_rescale(FunctionFamily::exp_pair(1.0, 1.0), RescaleMode::domain).g,
            disjoint_type_rescale(e1, RescaleMode::range).g};
}

// Uniform samples of a window around the tracts' left edge, kept when in a tract.
std::vector<Complex> tract_samples(const LogTransform& F, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double x0 = -F.shift().real();
    std::uniform_real_distribution<double> re(x0 - 2.0, x0 + 8.0), im(-40.0, 40.0);
    std::vector<Complex> out;
    while (static_cast<int>(out.size()) < n) {
        const Complex w{re(rng), im(rng)};
        if (F.tract_of(w).id) out.push_back(w);
    }
    return out;
}

}  // namespace

TEST_CASE("tract_of on the exponential") {
    const LogTransform F(FunctionFamily::exponential(1.0));
    CHECK(F.tract_of(1.0).id == TractId{1, 0});
    CHECK(F.tract_of({1.0, kTwoPi}).id == TractId{1, 1});
    const auto none = F.tract_of({0.0, kPi});
    CHECK_FALSE(none.id);
    CHECK_FALSE(none.boundary);
    // Re e^w == log 3 exactly on the real axis at w = log log 3.
    const auto edge = F.tract_of(std::log(std::log(3.0)));
    CHECK_FALSE(edge.id);
    CHECK(edge.boundary);
}

TEST_CASE("eval_F and inverse worked values") {
    const LogTransform F(FunctionFamily::exponential(1.0));
    CHECK(std::abs(F.eval(1.0).value - std::exp(1.0)) < 1e-15);
    const Complex w = F.inverse_branch({1, 1}, 2.0);
    CHECK(std::abs(w - Complex{std::log(2.0), kTwoPi}) < 1e-15);
    CHECK(std::abs(F.inverse_branch({1, 0}, std::exp(1.0)) - 1.0) < 1e-15);

    const Complex lam{0.2, 0.1};
    const LogTransform Fl(FunctionFamily::exponential(lam));
    const Complex w1 = -std::log(lam) + 0.5;  // e^w = e^{0.5}/lambda, inside the tract
    CHECK(std::abs(Fl.eval(w1).value - (std::exp(w1) + std::log(lam))) < 1e-12);

    CHECK_THROWS_AS(F.eval({0.0, kPi}), DomainError);
    CHECK_THROWS_AS(F.inverse_branch({1, 0}, 1.0), DomainError);
    CHECK_THROWS_AS(F.inverse_branch({-1, 0}, 5.0), DomainError);
}

TEST_CASE("semiconjugacy exp(F(w)) = f(exp w)") {
    for (const auto& fam : log_families()) {
        const LogTransform F(fam);
        for (const auto& w : tract_samples(F, 10000, 5)) {
            const auto img = F.eval(w);
            const auto fz = evaluate(fam, std::exp(w));
            if (img.escaped || fz.escaped) continue;
            CHECK(std::abs(std::exp(img.value) - fz.value) < 1e-10 * std::abs(fz.value));
            CHECK(img.value.real() > F.log_L());
        }
    }
}

TEST_CASE("inverse branch round trip") {
    for (const auto& fam : log_families()) {
        const LogTransform F(fam);
        for (const auto& w : tract_samples(F, 10000, 9)) {
            const auto img = F.eval(w);
            if (img.escaped) continue;
            const Complex back = F.inverse_branch(img.tract, img.value);
            CHECK(std::abs(back - w) < 1e-10 * (1.0 + std::abs(w)));
        }
    }
}

TEST_CASE("2 pi i equivariance of inverse branches") {
    const LogTransform F(FunctionFamily::exponential(1.0));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> re(1.2, 30), im(-50, 50);
    std::uniform_int_distribution<int> k(-16, 16);
    for (int i = 0; i < 500; ++i) {
        const Complex v{re(rng), im(rng)};
        const long kk = k(rng);
        const Complex d = F.inverse_branch({1, kk + 1}, v) - F.inverse_branch({1, kk}, v);
        CHECK(std::abs(d - Complex{0, kTwoPi}) < 1e-12);
        const Complex w = F.inverse_branch({1, kk}, v);
        CHECK(std::abs(F.eval(w + Complex{0, kTwoPi}).value - F.eval(w).value) < 1e-9 * std::abs(v));
    }
}

TEST_CASE("expansion estimate") {
    const LogTransform F(FunctionFamily::exponential(1.0));
    const auto e = expansion_lower_bound(F, 1.0);
    CHECK(e.bound == doctest::Approx((std::exp(1.0) - std::log(3.0)) / (4 * kPi)));
    CHECK(e.bound == doctest::Approx(0.1288).epsilon(1e-3));
    CHECK(e.actual == doctest::Approx(std::exp(1.0)));

    // Re F(w) = log L + 8 pi gives bound exactly 2.
    const Complex w = F.inverse_branch({1, 0}, F.log_L() + kEightPi);
    const auto e2 = expansion_lower_bound(F, w);
    CHECK(e2.bound == doctest::Approx(2.0));
    CHECK(e2.actual >= 2.0);

    for (const auto& fam : log_families()) {
        const LogTransform G(fam);
        for (const auto& p : tract_samples(G, 2000, 2)) {
            const auto c = expansion_lower_bound(G, p);
            CHECK(c.actual >= c.bound - 8 * kEps * std::max(1.0, c.bound));
        }
    }
}

TEST_CASE("normalized margin") {
    const auto f = FunctionFamily::exponential(1.0);
    const auto r = disjoint_type_rescale(f, RescaleMode::domain);
    const LogTransform F(f), G(r.g);
    const double mG = normalized_margin(G, 257);
    const double mF = normalized_margin(F, 257);
    CHECK(mG > 0.0);
    CHECK(mF < 0.0);
    // leftmost tract point: Re w = log(log 3) - log lambda
    CHECK(mG == doctest::Approx(std::log(std::log(3.0)) - std::log(r.lambda.real()) - std::log(3.0) - kEightPi).epsilon(1e-8));
    CHECK(std::abs((mG - mF) - (-std::log(r.lambda.real()))) < 1e-12);
    CHECK_THROWS_AS(normalized_margin(G, 0), PreconditionError);
}

TEST_CASE("external addresses") {
    const TractId t0{1, 0}, t1{1, 1}, t2{1, 2};
    const ExternalAddress a({t0, t1, t1}, {t1});
    CHECK(a.prefix() == std::vector<TractId>{t0});
    CHECK(a.period() == std::vector<TractId>{t1});
    const ExternalAddress b({t2}, {t0, t1, t0, t1});
    CHECK(b.period().size() == 2);
    CHECK(b.at(0) == t2);
    CHECK(b.at(5) == t0);
    CHECK(b.shift(4) == ExternalAddress({}, {t1, t0}));
    CHECK_THROWS_AS(ExternalAddress({t0}, {}), PreconditionError);

    const ExternalAddress s1({t0}, {t1});
    const ExternalAddress s2({t1}, {t1});
    CHECK(address_equiv(s1, s2));
    CHECK(address_equiv(s1, s1));
    CHECK_FALSE(address_equiv(ExternalAddress({t0, t1}, {t0}), ExternalAddress({t0, t2}, {t0})));
    CHECK_FALSE(address_equiv(ExternalAddress({TractId{-1, 0}}, {t0}), ExternalAddress({t0}, {t0})));
    CHECK(first_difference(s1, s2) == 0u);
    CHECK_FALSE(first_difference(s1, s1).has_value());
}

TEST_CASE("difference operators against direct differences") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> hr(-0.3, 0.3);
    for (const auto& fam : log_families()) {
        const LogTransform F(fam);
        for (const auto& w : tract_samples(F, 500, 13)) {
            const Complex h{hr(rng), hr(rng)};
            // same tract: across a left/right switch of a pair the branch changes
            if (F.tract_of(w + h).id != F.tract_of(w).id) continue;
            const auto a = F.eval(w), b = F.eval(w + h);
            if (a.escaped || b.escaped) continue;
            const Complex direct = b.value - a.value;
            const Complex d = F.eval_delta(w, h);
            CHECK(std::abs(d - direct) < 1e-9 * (std::abs(direct) + kEps * std::abs(a.value) * 1e3));

            const Complex back = F.inverse_delta(a.tract, a.value, direct);
            const Complex direct_back = F.inverse_branch(a.tract, b.value) - w;
            CHECK(std::abs(back - direct_back) < 1e-9 * (1.0 + std::abs(direct_back)));
        }
        // tiny steps: first order in h, where direct differences lose everything
        for (const auto& w : tract_samples(F, 200, 17)) {
            const auto a = F.eval(w);
            if (a.escaped) continue;
            const Complex h{1e-13, -2e-13};
            const Complex d = F.eval_delta(w, h);
            const Complex lin = F.derivative(w) * h;
            // pairs: the correction term is accurate to a few ulps absolutely, not relatively
            const double floor_d = F.is_pair() ? 16.0 * kEps : 0.0;
            const double floor_g = F.is_pair() ? 16.0 * kEps / std::abs(a.value - F.offset()) : 0.0;
            CHECK(std::abs(d - lin) < 1e-6 * std::abs(lin) + floor_d);
            const Complex g = F.inverse_delta(a.tract, a.value, lin);
            CHECK(std::abs(g - h) < 1e-6 * std::abs(h) + floor_g);
        }
    }
}
