#include "eldyn/families.hpp"

#include "eldyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace eldyn {

namespace {

// log(DBL_MAX); exponents beyond this overflow.
constexpr double kLogMax = 709.782712893384;
constexpr double kExpPairKMargin = 1.25;
constexpr int kDefaultRadiusSamples = 1024;

Evaluation exp_term(Complex exponent) {
    if (exponent.real() > kLogMax) return {Complex{}, exponent.real(), true};
    return {std::exp(exponent), exponent.real(), false};
}

Evaluation sum_of_terms(Complex e1, Complex e2, double sign) {
    if (e1.real() > kLogMax || e2.real() > kLogMax) {
        return {Complex{}, std::max(e1.real(), e2.real()), true};
    }
    const Complex v = std::exp(e1) + sign * std::exp(e2);
    return {v, std::log(std::abs(v)), false};
}

Evaluation scale(const Evaluation& r, Complex lambda) {
    Evaluation out = r;
    out.log_modulus += std::log(std::abs(lambda));
    if (r.escaped) return out;
    out.value = lambda * r.value;
    if (!std::isfinite(out.value.real()) || !std::isfinite(out.value.imag())) out.escaped = true;
    return out;
}

void require_nonzero(Complex c, const char* what) {
    if (c == Complex{}) throw PreconditionError(std::string(what) + " must be nonzero");
}

}  // namespace

FunctionFamily FunctionFamily::exponential(Complex lambda) {
    require_nonzero(lambda, "lambda");
    FunctionFamily f;
    f.kind_ = Kind::exponential;
    f.p1_ = lambda;
    f.set_default_radii();
    return f;
}

FunctionFamily FunctionFamily::exp_pair(Complex a, Complex b) {
    require_nonzero(a, "a");
    require_nonzero(b, "b");
    FunctionFamily f;
    f.kind_ = Kind::exp_pair;
    f.p1_ = a;
    f.p2_ = b;
    f.set_default_radii();
    return f;
}

FunctionFamily FunctionFamily::domain_rescaled(const FunctionFamily& base, Complex lambda) {
    require_nonzero(lambda, "lambda");
    FunctionFamily f;
    f.kind_ = Kind::domain_rescaled;
    f.p1_ = lambda;
    f.base_ = std::make_shared<const FunctionFamily>(base);
    f.set_default_radii();
    return f;
}

FunctionFamily FunctionFamily::range_rescaled(const FunctionFamily& base, Complex lambda) {
    require_nonzero(lambda, "lambda");
    FunctionFamily f;
    f.kind_ = Kind::range_rescaled;
    f.p1_ = lambda;
    f.base_ = std::make_shared<const FunctionFamily>(base);
    f.set_default_radii();
    return f;
}

double FunctionFamily::log_L() const { return std::log(L_); }

FunctionFamily FunctionFamily::with_radii(double K, double L) const {
    if (!(K > 0.0) || !(L >= K)) throw PreconditionError("radii need 0 < K <= L");
    FunctionFamily f = *this;
    f.K_ = K;
    f.L_ = L;
    return f;
}

void FunctionFamily::set_default_radii() {
    K_ = singular_bound(*this).K;
    const double m = max_modulus_on_circle(*this, K_, kDefaultRadiusSamples);
    L_ = std::max(K_, std::ceil(1.1 * m));
}

std::string FunctionFamily::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::exponential: os << "exponential(" << p1_ << ")"; break;
        case Kind::exp_pair: os << "exp_pair(" << p1_ << ", " << p2_ << ")"; break;
        case Kind::domain_rescaled: os << "domain_rescaled(" << base_->describe() << ", " << p1_ << ")"; break;
        case Kind::range_rescaled: os << "range_rescaled(" << base_->describe() << ", " << p1_ << ")"; break;
    }
    return os.str();
}

Evaluation evaluate(const FunctionFamily& f, Complex z) {
    using K = FunctionFamily::Kind;
    switch (f.kind()) {
        case K::exponential: return exp_term(z + std::log(f.param()));
        case K::exp_pair:
            return sum_of_terms(z + std::log(f.param()), -z + std::log(f.param_b()), 1.0);
        case K::domain_rescaled: return evaluate(f.base(), f.param() * z);
        case K::range_rescaled: return scale(evaluate(f.base(), z), f.param());
    }
    return {};
}

Evaluation derivative(const FunctionFamily& f, Complex z) {
    using K = FunctionFamily::Kind;
    switch (f.kind()) {
        case K::exponential: return exp_term(z + std::log(f.param()));
        case K::exp_pair:
            return sum_of_terms(z + std::log(f.param()), -z + std::log(f.param_b()), -1.0);
        case K::domain_rescaled: return scale(derivative(f.base(), f.param() * z), f.param());
        case K::range_rescaled: return scale(derivative(f.base(), z), f.param());
    }
    return {};
}

std::vector<Complex> critical_points(const FunctionFamily& f) {
    using K = FunctionFamily::Kind;
    switch (f.kind()) {
        case K::exp_pair: {
            // a e^z = b e^{-z}  <=>  e^{2z} = b/a
            const Complex z0 = 0.5 * std::log(f.param_b() / f.param());
            return {z0, z0 + kI * kPi};
        }
        case K::domain_rescaled: {
            auto pts = critical_points(f.base());
            for (auto& p : pts) p /= f.param();
            return pts;
        }
        case K::range_rescaled: return critical_points(f.base());
        case K::exponential: return {};
    }
    return {};
}

SingularData singular_bound(const FunctionFamily& f) {
    using K = FunctionFamily::Kind;
    std::vector<Complex> values;
    switch (f.kind()) {
        case K::exponential: values = {Complex{}}; break;  // asymptotic value 0
        case K::exp_pair: {
            const Complex r = std::sqrt(f.param() * f.param_b());
            values = {2.0 * r, -2.0 * r};
            break;
        }
        case K::domain_rescaled: values = singular_bound(f.base()).values; break;
        case K::range_rescaled:
            values = singular_bound(f.base()).values;
            for (auto& v : values) v *= f.param();
            break;
    }
    double sup = 0.0;
    for (const auto& v : values) sup = std::max(sup, std::abs(v));
    return {sup > 0.0 ? kExpPairKMargin * sup : 1.0, values};
}

double max_modulus_on_circle(const FunctionFamily& f, double r, int n) {
    double m = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = kTwoPi * i / n;
        const Evaluation e = evaluate(f, std::polar(r, a));
        if (e.escaped) return kInf;
        m = std::max(m, std::abs(e.value));
    }
    return m;
}

Rescaling disjoint_type_rescale(const FunctionFamily& f, RescaleMode mode) {
    const double lambda = f.K() / (std::exp(kEightPi) * f.L());
    if (mode == RescaleMode::domain) {
        // g^{-1}(C \ D_L) lies outside D_{e^{8pi} L}: by the maximum principle it
        // suffices that |g| <= L on that circle.
        FunctionFamily g = FunctionFamily::domain_rescaled(f, lambda).with_radii(f.L(), f.L());
        const double edge = std::exp(kEightPi) * f.L();
        if (max_modulus_on_circle(g, edge, kDefaultRadiusSamples) > f.L()) {
            throw DomainError("rescaled map violates g^{-1}(C\\D_L) in C\\D_{e^{8pi}L}; L too small");
        }
        return {lambda, g};
    }
    FunctionFamily h = FunctionFamily::range_rescaled(f, lambda).with_radii(f.K(), f.L());
    return {lambda, h};
}

bool DisjointTypeCertificate::valid() const {
    if (!(max_image_modulus < checked_radius)) return false;
    return std::all_of(singular_moduli.begin(), singular_moduli.end(),
                       [&](double m) { return m < checked_radius; });
}

DisjointTypeCertificate verify_disjoint_type(const FunctionFamily& f, int n_samples) {
    if (n_samples < 8) throw PreconditionError("verify_disjoint_type needs n_samples >= 8");
    DisjointTypeCertificate c;
    c.checked_radius = f.K();
    c.boundary_samples = n_samples;
    c.max_image_modulus = max_modulus_on_circle(f, f.K(), n_samples);
    for (const auto& v : singular_bound(f).values) c.singular_moduli.push_back(std::abs(v));
    return c;
}

}  // namespace eldyn
