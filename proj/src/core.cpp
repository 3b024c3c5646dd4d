#include "eldyn/core.hpp"

#include "eldyn/errors.hpp"

#include <cmath>
#include <string>

namespace eldyn {

Region make_disc(Complex center, double radius) {
    if (!(radius > 0.0)) throw PreconditionError("disc radius must be positive");
    return region::Disc{center, radius};
}

Region make_half_plane(double q) { return region::HalfPlane{q}; }

Region make_annulus(double a, double b) {
    if (!(a > 0.0) || !(a < b)) throw PreconditionError("annulus needs 0 < a < b");
    return region::Annulus{a, b};
}

Region make_strip(double a, double b) {
    if (!(a < b)) throw PreconditionError("strip needs a < b");
    return region::Strip{a, b};
}

Region make_square(Rational q) {
    if (q <= 0) throw PreconditionError("square half-side must be positive");
    return region::Square{std::move(q)};
}

int compare_exact(double x, const Rational& q) {
    if (std::isnan(x)) throw DomainError("NaN in exact comparison");
    if (std::isinf(x)) return x > 0 ? 1 : -1;
    // Every finite double is a dyadic rational, so the conversion is exact.
    const Rational rx(x);
    if (rx < q) return -1;
    if (rx > q) return 1;
    return 0;
}

bool square_contains(const region::Square& s, const Rational& re, const Rational& im) {
    return abs(re) < s.q && abs(im) < s.q;
}

namespace {

struct Contains {
    Complex z;

    bool operator()(const region::Disc& d) const { return std::abs(z - d.center) < d.radius; }
    bool operator()(const region::HalfPlane& h) const { return z.real() > h.q; }
    bool operator()(const region::Annulus& a) const {
        const double m = std::abs(z);
        return m > a.a && m < a.b;
    }
    bool operator()(const region::Strip& s) const { return z.real() > s.a && z.real() < s.b; }
    bool operator()(const region::Square& s) const {
        return compare_exact(std::abs(z.real()), s.q) < 0 &&
               compare_exact(std::abs(z.imag()), s.q) < 0;
    }
};

}  // namespace

bool region_contains(const Region& r, Complex z) { return std::visit(Contains{z}, r); }

Region exp_image(const Region& r) {
    if (const auto* s = std::get_if<region::Strip>(&r)) {
        return region::Annulus{std::exp(s->a), std::exp(s->b)};
    }
    if (const auto* h = std::get_if<region::HalfPlane>(&r)) {
        return region::Annulus{std::exp(h->q), kInf};
    }
    throw UnsupportedRegion("exp_image supports Strip and HalfPlane only (variant index " +
                            std::to_string(r.index()) + ")");
}

}  // namespace eldyn
