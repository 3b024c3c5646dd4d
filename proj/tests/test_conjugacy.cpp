#include "doctest.h"

#include "eldyn/conjugacy.hpp"
#include "eldyn/errors.hpp"

#include <boost/multiprecision/cpp_complex.hpp>

#include <chrono>
#include <cmath>
#include <random>

using namespace eldyn;

namespace {

using Big = boost::multiprecision::cpp_complex<320>;
using BigReal = Big::value_type;

ExternalAddress random_address(std::mt19937_64& rng, bool pair) {
    std::uniform_int_distribution<long> k(-5, 5);
    std::uniform_int_distribution<int> len(0, 2), plen(1, 2), coin(0, 1);
    auto entry = [&] { return TractId{pair && coin(rng) ? -1 : 1, k(rng)}; };
    std::vector<TractId> pre, per;
    for (int n = len(rng); n > 0; --n) pre.push_back(entry());
    for (int n = plen(rng); n > 0; --n) per.push_back(entry());
    return ExternalAddress(pre, per);
}

// Naive two-level pullback for f = exp in 320-digit arithmetic:
// Theta_2(w) = Log_{T_0}(G(w) + log lambda); deeper levels move it by ~|log lambda| / |G^2(w)|.
Complex oracle_excess(Complex w, long k0, double lambda) {
    const Big bw(BigReal(w.real()), BigReal(w.imag()));
    const BigReal ll = log(BigReal(lambda));
    const Big w1 = exp(bw + Big(ll));
    const BigReal two_pi = 2 * boost::math::constants::pi<BigReal>();
    Big l = log(w1 + Big(ll));
    // principal log moved into band k0
    const BigReal band = boost::multiprecision::round((l.imag() - two_pi * k0) / two_pi);
    l -= Big(BigReal(0), two_pi * band);
    const Big excess = l - bw - Big(ll);
    return {static_cast<double>(excess.real()), static_cast<double>(excess.imag())};
}

}  // namespace

TEST_CASE("lambda = 1 is the identity") {
    const auto f = FunctionFamily::exponential(1.0);
    const auto C = make_conjugacy(f, Complex{1.0, 0.0}, 5.0);
    const Complex w{7.5, 1.25};
    CHECK(theta_log(C, w).value == w);
    CHECK(theta_log(C, w).displacement == Complex{});
    CHECK(theta_log_inverse(C, w).value == w);
    CHECK(theta_plane(C, Complex{3.0, -4.0}) == Complex{3.0, -4.0});
    const auto rep = verify_conjugacy(C, 10);
    CHECK(rep.max_residual == 0.0);
    CHECK(rep.max_displacement == 0.0);
    CHECK(rep.valid());
    const ExternalAddress s({TractId{1, 3}}, {TractId{1, -2}});
    CHECK(address_correspondence(C, s) == s);
}

TEST_CASE("preconditions") {
    const auto f = FunctionFamily::exponential(1.0);
    const double ll = std::abs(std::log(1.0 / 3.0) - kEightPi);
    CHECK_THROWS_AS(make_conjugacy(f, 2.0 * ll + 1.0), PreconditionError);
    CHECK_NOTHROW(make_conjugacy(f, 2.0 * ll + 1.01));
    CHECK_THROWS_AS(make_conjugacy(f, std::nullopt, 0), PreconditionError);
    CHECK_THROWS_AS(make_conjugacy(f, Complex{0.0, 0.0}, 5.0), PreconditionError);
    const auto C = make_conjugacy(f);
    CHECK(C.Q == doctest::Approx(2.0 * ll + 2.0));
    CHECK_THROWS_AS(theta_log(C, Complex{C.Q - 0.5, 0.0}), OrbitLeftHalfPlane);
    // G(w) lands on the imaginary axis: in H_Q, outside the tracts one step later.
    CHECK_THROWS_AS(theta_log(C, Complex{C.Q + 1.0, kPi / 2}), OrbitLeftHalfPlane);
    CHECK_THROWS_AS(verify_conjugacy(C, 0), PreconditionError);
}

TEST_CASE("Theta on hairs against a high precision pullback") {
    const auto f = FunctionFamily::exponential(1.0);
    const auto C = make_conjugacy(f);
    const RayTracer tracer(C.G);
    const double lambda = 1.0 / (3.0 * std::exp(kEightPi));
    // lambda = K / (e^{8 pi} L) with K = 1, L = 3 for the exponential
    CHECK(std::abs(C.lambda - lambda) < 1e-15 * lambda);
    CHECK(std::abs(C.tract_shift.real() - (kEightPi + std::log(3.0))) < 1e-13);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> x(C.Q + 1.0, 600.0);
    int checked = 0;
    for (int i = 0; i < 60; ++i) {
        const ExternalAddress s = random_address(rng, false);
        const double xi = i < 10 ? C.Q + 1.0 + 0.5 * i : x(rng);
        const ForwardOrbit o = hair_orbit(C, tracer, s, xi - tracer.x_base(s));
        const ThetaValue th = theta_log_orbit(C, o);
        const Complex want = oracle_excess(o.points[0], s.at(0).k, lambda);
        if (!o.overflowed || o.tracts.size() > 2) continue;  // oracle covers two levels
        CHECK(std::abs(th.excess - want) <= 1e-12 * std::abs(want) + 1e-300);
        CHECK(std::abs(th.displacement - (Complex{std::log(lambda), 0.0} + want)) <=
              th.error.total(std::abs(th.value)));
        ++checked;
    }
    CHECK(checked >= 50);
}

TEST_CASE("double iteration and hair orbit agree where both are reliable") {
    const auto C = make_conjugacy(FunctionFamily::exponential(1.0));
    const RayTracer tracer(C.G);
    std::mt19937_64 rng(4);
    for (int i = 0; i < 40; ++i) {
        const ExternalAddress s = random_address(rng, false);
        const double x = C.Q + 1.0 + 0.1 * i;
        const ThetaValue a = theta_hair(C, tracer, s, x - tracer.x_base(s));
        const ThetaValue b = theta_log(C, a.value - a.displacement);
        CHECK(std::abs(a.displacement - b.displacement) < 1e-12);
    }
}

TEST_CASE("displacement, annulus and equivariance") {
    const auto C = make_conjugacy(FunctionFamily::exponential(1.0));
    const RayTracer tracer(C.G);
    const double bound = 2.0 * (kEightPi + std::log(3.0));
    CHECK(bound == doctest::Approx(52.4627).epsilon(1e-5));
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> x(C.Q + 1.0, 600.0);
    for (int i = 0; i < 200; ++i) {
        ExternalAddress s = random_address(rng, false);
        const double t = x(rng) - tracer.x_base(s);
        const ThetaValue th = theta_hair(C, tracer, s, t);
        const double err = th.error.total(std::abs(th.value));
        CHECK(std::abs(th.displacement) <= bound + err);
        // |theta(z)| / |z| = exp(Re D) in [lambda^2, lambda^-2]
        CHECK(std::abs(th.displacement.real()) <= bound + err);

        std::vector<TractId> pre{s.at(0)};
        ++pre[0].k;
        const ExternalAddress rest = s.shift(1);
        pre.insert(pre.end(), rest.prefix().begin(), rest.prefix().end());
        const ExternalAddress up(pre, rest.period());
        const ThetaValue th2 = theta_hair(C, tracer, up, t);
        CHECK(std::abs(th2.value - th.value - Complex{0.0, kTwoPi}) <=
              err + th2.error.total(std::abs(th2.value)) + 8 * kEps * std::abs(th.value));
    }
}

TEST_CASE("theta_plane lands in the annulus and in an F tract") {
    const auto C = make_conjugacy(FunctionFamily::exponential(1.0));
    const RayTracer tracer(C.G);
    const double l = std::abs(C.lambda);
    for (double x : {C.Q + 1.0, 70.0, 200.0, 500.0}) {
        const ExternalAddress zero = ExternalAddress::constant({1, 0});
        const Complex w = tracer.tail_point(zero, x - tracer.x_base(zero)).point.position;
        const Complex z = std::exp(w);
        const Complex th = theta_plane(C, z);
        CHECK(std::abs(th) >= l * l * std::abs(z));
        CHECK(std::abs(th) <= std::abs(z) / (l * l));
        // principal tract corresponds to the principal tract
        CHECK(C.F.tract_of(std::log(th)).id == TractId{1, 0});
    }
}

TEST_CASE("verify_conjugacy on 1000 samples") {
    for (const auto& f : {FunctionFamily::exponential(1.0), FunctionFamily::exp_pair(1.0, 1.0)}) {
        const auto C = make_conjugacy(f);
        const auto t0 = std::chrono::steady_clock::now();
        const auto rep = verify_conjugacy(C, 1000, 17);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        MESSAGE(f.describe() << ": samples " << rep.samples << ", excluded " << rep.excluded
                             << ", residual " << rep.max_residual << ", displacement "
                             << rep.max_displacement << ", " << secs << " s");
        CHECK(rep.samples + rep.excluded == 1000);
        CHECK(rep.samples >= 900);
        CHECK(rep.valid());
        CHECK(rep.max_residual < 1e-8);
        CHECK(rep.max_log_residual < 1e-8);
        CHECK(rep.max_rate <= 0.5 + 1e-6);
        CHECK(rep.surjectivity_samples >= 400);
        CHECK(rep.escape_failures == 0);
        CHECK(secs < 60.0);
    }
}

TEST_CASE("inverse round trip") {
    const auto C = make_conjugacy(FunctionFamily::exponential(1.0));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> x(C.Q + 2.0, 600.0), d(-1.0, 1.0);
    std::uniform_int_distribution<long> k(-5, 5);
    int done = 0;
    for (int i = 0; i < 200; ++i) {
        const Complex v{x(rng), kTwoPi * static_cast<double>(k(rng)) + d(rng)};
        try {
            const ThetaValue back = theta_log_inverse(C, v);
            CHECK(std::abs(back.displacement - C.tract_shift) < 1e-9);
            const ThetaValue fwd = theta_log(C, back.value);
            CHECK(std::abs(fwd.value - v) < 1e-12 * (1.0 + std::abs(v)));
            ++done;
        } catch (const OrbitLeftHalfPlane&) {
        }
    }
    CHECK(done >= 80);
}

TEST_CASE("address order is preserved") {
    for (const auto& f : {FunctionFamily::exponential(1.0), FunctionFamily::exp_pair(1.0, 1.0)}) {
        const auto C = make_conjugacy(f);
        const RayTracer tracer(C.G);
        std::mt19937_64 rng(31);
        for (int i = 0; i < 100; ++i) {
            const ExternalAddress a = random_address(rng, C.G.is_pair());
            const ExternalAddress b = random_address(rng, C.G.is_pair());
            const auto og = tracer.address_order(a, b);
            const auto of = address_order_f(C, tracer, address_correspondence(C, a), address_correspondence(C, b));
            CHECK(og == of);
        }
    }
}
