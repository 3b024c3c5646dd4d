#include "eldyn/logspace.hpp"

#include "eldyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace eldyn {

namespace {

constexpr double kLogMax = 709.782712893384;
constexpr double kBoundaryUlps = 8.0;

long band_plus(double y) { return static_cast<long>(std::ceil((y - kPi) / kTwoPi)); }
long band_minus(double y) { return static_cast<long>(std::ceil(y / kTwoPi)) - 1; }

bool on_negative_axis(Complex z) { return z.imag() == 0.0 && z.real() <= 0.0; }

bool near(double x, double target) {
    return std::abs(x - target) <= kBoundaryUlps * kEps * std::max({1.0, std::abs(x), std::abs(target)});
}

struct Reduction {
    Complex shift{};
    Complex offset{};
    bool pair = false;
    Complex a{1.0, 0.0};
    Complex b{};
};

void reduce(const FunctionFamily& f, Reduction& r) {
    using K = FunctionFamily::Kind;
    switch (f.kind()) {
        case K::exponential: r.offset += std::log(f.param()); break;
        case K::exp_pair:
            r.pair = true;
            r.a = f.param();
            r.b = f.param_b();
            break;
        case K::domain_rescaled:
            reduce(f.base(), r);
            r.shift += std::log(f.param());
            break;
        case K::range_rescaled:
            reduce(f.base(), r);
            r.offset += std::log(f.param());
            break;
    }
}

Complex expm1c(Complex h) {
    if (std::abs(h) < 0.5) return 2.0 * std::exp(0.5 * h) * std::sinh(0.5 * h);
    return std::exp(h) - 1.0;
}

Complex log1pc(Complex x) {
    if (std::abs(x) >= 0.5) return std::log(1.0 + x);
    const Complex u = 1.0 + x;
    if (u == Complex{1.0, 0.0}) return x;
    return std::log(u) * (x / (u - 1.0));
}

}  // namespace

std::string to_string(const TractId& t) {
    if (t.sign > 0) return std::to_string(t.k);
    return "L" + std::to_string(t.k);
}

LogTransform::LogTransform(FunctionFamily family) : family_(std::move(family)), log_L_(family_.log_L()) {
    Reduction r;
    reduce(family_, r);
    shift_ = r.shift;
    offset_ = r.offset;
    pair_ = r.pair;
    a_ = r.a;
    b_ = r.b;
}

void LogTransform::check_id(const TractId& t) const {
    if (t.sign != 1 && t.sign != -1) throw DomainError("tract sign must be +1 or -1");
    if (!pair_ && t.sign != 1) throw DomainError("exponential maps have only sign +1 tracts");
}

double LogTransform::y_anchor(const TractId& t) const {
    check_id(t);
    const double center = kTwoPi * static_cast<double>(t.k) + (t.sign > 0 ? 0.0 : kPi);
    return center - shift_.imag();
}

LogTransform::BaseImage LogTransform::base_eval(Complex u) const {
    BaseImage out;
    if (!pair_) {
        out.tract = {1, band_plus(u.imag())};
        if (u.real() > kLogMax) {
            out.escaped = true;
            out.value = {std::cos(u.imag()) > 0.0 ? kInf : -kInf, 0.0};
            return out;
        }
        out.value = std::exp(u);
        return out;
    }
    if (u.real() > kLogMax) {
        // |e^u| overflows; the dominant term is decided by the sign of Re e^u.
        const bool right = std::cos(u.imag()) >= 0.0;
        out.tract = right ? TractId{1, band_plus(u.imag())} : TractId{-1, band_minus(u.imag())};
        out.escaped = true;
        out.value = {kInf, 0.0};
        return out;
    }
    const Complex z = std::exp(u);
    const bool right = z.real() + std::log(std::abs(a_)) >= -z.real() + std::log(std::abs(b_));
    out.tract = right ? TractId{1, band_plus(u.imag())} : TractId{-1, band_minus(u.imag())};

    const Complex e1 = z + std::log(a_);
    const Complex e2 = -z + std::log(b_);
    Complex eps{};
    if (std::max(e1.real(), e2.real()) <= kLogMax) {
        const Complex fz = std::exp(e1) + std::exp(e2);
        eps = 4.0 * a_ * b_ / (fz * fz);
        if (!(std::abs(eps) < 1.0)) {
            out.valid = false;
            return out;
        }
    }
    const Complex s = std::sqrt(1.0 - eps);
    const Complex corr = std::log(0.5 * (1.0 + s));
    out.value = right ? e1 - corr : e2 - corr;
    return out;
}

TractLookup LogTransform::tract_of(Complex w) const {
    const Complex u = w + shift_;
    const BaseImage b = base_eval(u);
    if (!b.valid) return {};
    const double re = b.escaped ? b.value.real() : b.value.real() + offset_.real();
    if (std::isfinite(re) && near(re, log_L_)) return {std::nullopt, true};
    if (!(re > log_L_)) return {};
    // Band edges of the right tracts sit at odd multiples of pi, left ones at multiples of 2 pi.
    const double edge_offset = b.tract.sign > 0 ? kPi : 0.0;
    const double edge = kTwoPi * std::round((u.imag() - edge_offset) / kTwoPi) + edge_offset;
    if (near(u.imag(), edge)) return {std::nullopt, true};
    return {b.tract, false};
}

LogImage LogTransform::eval(Complex w) const {
    const TractLookup t = tract_of(w);
    if (!t.id) {
        throw DomainError(t.boundary ? "point is on a tract boundary" : "point is not in a tract");
    }
    const BaseImage b = base_eval(w + shift_);
    return {b.escaped ? b.value : b.value + offset_, *t.id, b.escaped};
}

Complex LogTransform::inverse_branch(const TractId& t, Complex v) const {
    check_id(t);
    if (!(v.real() > log_L_)) throw DomainError("inverse branch needs Re v > log L");
    const Complex V = v - offset_;
    const Complex lift = kI * (kTwoPi * static_cast<double>(t.k));
    Complex u;
    if (!pair_) {
        if (on_negative_axis(V)) throw BranchCutError("Log argument on the negative axis");
        u = std::log(V) + lift;
    } else {
        const Complex e = std::log(4.0 * a_ * b_) - 2.0 * V;
        if (e.real() > kLogMax) throw BranchCutError("pair branch undefined: e^{-2V} overflows");
        const Complex eps = std::exp(e);
        if (!(std::abs(eps) < 1.0)) throw BranchCutError("pair branch undefined: |4ab e^{-2V}| >= 1");
        const Complex corr = std::log(0.5 * (1.0 + std::sqrt(1.0 - eps)));
        if (t.sign > 0) {
            const Complex z = V - std::log(a_) + corr;
            if (on_negative_axis(z)) throw BranchCutError("right-tract preimage on the negative axis");
            u = std::log(z) + lift;
        } else {
            const Complex mz = V - std::log(b_) + corr;  // = -z
            if (on_negative_axis(mz)) throw BranchCutError("left-tract preimage on the positive axis");
            u = std::log(mz) + kI * kPi + lift;
        }
    }
    return u - shift_;
}

Complex LogTransform::derivative(Complex w) const {
    const Complex u = w + shift_;
    if (u.real() > kLogMax) return {kInf, 0.0};
    const Complex z = std::exp(u);
    if (!pair_) return z;
    const bool right = z.real() + std::log(std::abs(a_)) >= -z.real() + std::log(std::abs(b_));
    Complex ratio;
    if (right) {
        const Complex r = (b_ / a_) * std::exp(-2.0 * z);
        ratio = (1.0 - r) / (1.0 + r);
    } else {
        const Complex r = (a_ / b_) * std::exp(2.0 * z);
        ratio = (r - 1.0) / (r + 1.0);
    }
    return z * ratio;
}

Complex LogTransform::pair_correction(Complex eps) const {
    if (eps == Complex{0.0, 0.0}) return eps;
    if (!(std::abs(eps) < 1.0)) throw BranchCutError("pair branch undefined: |eps| >= 1");
    // log((1 + s) / 2) = log1p((s - 1) / 2) and s - 1 = -eps / (1 + s).
    const Complex s = std::sqrt(1.0 - eps);
    return log1pc(-0.5 * eps / (1.0 + s));
}

Complex LogTransform::eval_delta(Complex w, Complex h) const {
    const Complex u = w + shift_;
    if (u.real() > kLogMax) return {kInf, 0.0};
    const Complex z = std::exp(u);
    const Complex dz = z * expm1c(h);
    if (!pair_) return dz;
    const BaseImage b = base_eval(u);
    // eps = 4ab / f(z)^2, zero once f overflows.
    auto corr = [&](Complex zz) {
        const Complex e1 = zz + std::log(a_), e2 = -zz + std::log(b_);
        if (std::max(e1.real(), e2.real()) > kLogMax) return Complex{};
        const Complex fz = std::exp(e1) + std::exp(e2);
        return pair_correction(4.0 * a_ * b_ / (fz * fz));
    };
    const Complex dcorr = corr(z + dz) - corr(z);
    return (b.tract.sign > 0 ? dz : -dz) - dcorr;
}

Complex LogTransform::inverse_delta(const TractId& t, Complex v, Complex h) const {
    check_id(t);
    if (!(v.real() > log_L_) || !((v + h).real() > log_L_))
        throw DomainError("inverse branch needs Re v > log L");
    const Complex V = v - offset_;
    if (!pair_) return log1pc(h / V);
    const Complex l4ab = std::log(4.0 * a_ * b_);
    auto corr = [&](Complex VV) {
        const Complex e = l4ab - 2.0 * VV;
        if (e.real() > kLogMax) throw BranchCutError("pair branch undefined: e^{-2V} overflows");
        return e.real() < -745.0 ? Complex{} : pair_correction(std::exp(e));
    };
    const Complex c = corr(V);
    const Complex dcorr = corr(V + h) - c;
    const Complex z = (t.sign > 0 ? V - std::log(a_) : V - std::log(b_)) + c;
    return log1pc((h + dcorr) / z);
}

double LogTransform::inverse_lipschitz(Complex v, double r) const {
    const double room = v.real() - r - log_L_;
    if (!(room > 0.0)) return kInf;
    // |F'(w)| >= (Re F(w) - log L) / (4 pi)
    double bound = 4.0 * kPi / room;
    if (!pair_) {
        // (F^{-1})'(v) = 1 / (v - offset)
        const double d = std::abs(v - offset_) - r;
        if (d > 0.0) bound = std::min(bound, 1.0 / d);
    }
    return bound;
}

ExpansionCheck expansion_lower_bound(const LogTransform& F, Complex w) {
    const LogImage img = F.eval(w);
    if (img.escaped) return {kInf, kInf};
    return {(img.value.real() - F.log_L()) / (4.0 * kPi), std::abs(F.derivative(w))};
}

double normalized_margin(const LogTransform& F, int n_samples) {
    if (n_samples < 1) throw PreconditionError("normalized_margin needs n_samples >= 1");
    const double half_width = kEightPi;
    const double x = F.log_L() + 1e-9 * std::max(1.0, std::abs(F.log_L()));
    std::vector<double> etas{F.offset().imag()};
    for (int j = 0; j < n_samples && n_samples > 1; ++j) {
        etas.push_back(F.offset().imag() + half_width * (2.0 * j / (n_samples - 1) - 1.0));
    }
    std::vector<TractId> tracts{{1, 0}};
    if (F.is_pair()) tracts.push_back({-1, 0});

    double margin = kInf;
    for (const auto& t : tracts) {
        for (double eta : etas) {
            try {
                const Complex w = F.inverse_branch(t, {x, eta});
                margin = std::min(margin, w.real() - (F.log_L() + kEightPi));
            } catch (const BranchCutError&) {
                // boundary point outside the branch's range; no sample
            }
        }
    }
    return margin;
}

ExternalAddress::ExternalAddress(std::vector<TractId> prefix, std::vector<TractId> period)
    : prefix_(std::move(prefix)), period_(std::move(period)) {
    if (period_.empty()) throw PreconditionError("address period must be nonempty");
    const std::size_t n = period_.size();
    for (std::size_t p = 1; p <= n; ++p) {
        if (n % p != 0) continue;
        bool ok = true;
        for (std::size_t i = p; i < n && ok; ++i) ok = period_[i] == period_[i % p];
        if (ok) {
            period_.resize(p);
            break;
        }
    }
    while (!prefix_.empty() && prefix_.back() == period_.back()) {
        prefix_.pop_back();
        std::rotate(period_.rbegin(), period_.rbegin() + 1, period_.rend());
    }
}

const TractId& ExternalAddress::at(std::size_t n) const {
    if (n < prefix_.size()) return prefix_[n];
    return period_[(n - prefix_.size()) % period_.size()];
}

ExternalAddress ExternalAddress::shift(std::size_t n) const {
    if (n <= prefix_.size()) {
        return {std::vector<TractId>(prefix_.begin() + static_cast<long>(n), prefix_.end()), period_};
    }
    std::vector<TractId> p = period_;
    const std::size_t m = (n - prefix_.size()) % p.size();
    std::rotate(p.begin(), p.begin() + static_cast<long>(m), p.end());
    return {{}, std::move(p)};
}

long ExternalAddress::max_abs_k() const {
    long m = 0;
    for (const auto& t : prefix_) m = std::max(m, std::abs(t.k));
    for (const auto& t : period_) m = std::max(m, std::abs(t.k));
    return m;
}

std::string ExternalAddress::to_string() const {
    std::ostringstream os;
    for (const auto& t : prefix_) os << eldyn::to_string(t) << ' ';
    os << '(';
    for (std::size_t i = 0; i < period_.size(); ++i) os << (i ? " " : "") << eldyn::to_string(period_[i]);
    os << ")^";
    return os.str();
}

std::optional<std::size_t> first_difference(const ExternalAddress& s1, const ExternalAddress& s2) {
    const std::size_t horizon = std::max(s1.prefix().size(), s2.prefix().size()) +
                                std::lcm(s1.period().size(), s2.period().size());
    for (std::size_t j = 0; j < horizon; ++j) {
        if (!(s1.at(j) == s2.at(j))) return j;
    }
    return std::nullopt;
}

bool address_equiv(const ExternalAddress& s1, const ExternalAddress& s2) {
    return s1.at(0).sign == s2.at(0).sign && s1.shift(1) == s2.shift(1);
}

}  // namespace eldyn
