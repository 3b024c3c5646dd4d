#include "eldyn/io.hpp"

#include "eldyn/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#ifndef ELDYN_VERSION
#define ELDYN_VERSION "0.0.0"
#endif

namespace eldyn::io {

namespace {

using BigInt = boost::multiprecision::cpp_int;

Json int_json(const BigInt& v) {
    if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max())
        return static_cast<std::int64_t>(v);
    return v.str();
}

BigInt int_from(const Json& j) {
    if (j.is_number_integer()) return BigInt(j.get<std::int64_t>());
    if (j.is_string()) return BigInt(j.get<std::string>());
    throw ConfigError("expected an integer, got " + j.dump());
}

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
    return j.at(key);
}

// shortest string that reads back to the same double
std::string fmt(double x) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

}  // namespace

std::string version() { return ELDYN_VERSION; }

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

double number_from(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw ConfigError("expected a number, got " + j.dump());
}

Json to_json(Complex z) { return Json::array({number(z.real()), number(z.imag())}); }

Complex complex_from(const Json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2) throw ConfigError("complex values are [re, im], got " + j.dump());
    return {number_from(j[0]), number_from(j[1])};
}

Json to_json(const Rational& r) {
    return Json::array({int_json(boost::multiprecision::numerator(r)),
                        int_json(boost::multiprecision::denominator(r))});
}

Rational rational_from(const Json& j) {
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        const auto slash = s.find('/');
        try {
            if (slash == std::string::npos) return Rational(BigInt(s));
            return Rational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
        } catch (const std::exception&) {
            throw ConfigError("bad rational '" + s + "'");
        }
    }
    if (j.is_array() && j.size() == 2) {
        const BigInt den = int_from(j[1]);
        if (den == 0) throw ConfigError("rational with zero denominator");
        return Rational(int_from(j[0]), den);
    }
    throw ConfigError("rationals are [num, den], got " + j.dump());
}

Json to_json(const FunctionFamily& f) {
    using K = FunctionFamily::Kind;
    Json j;
    switch (f.kind()) {
        case K::exponential:
            j["kind"] = "exponential";
            j["lambda"] = to_json(f.param());
            break;
        case K::exp_pair:
            j["kind"] = "exp_pair";
            j["a"] = to_json(f.param());
            j["b"] = to_json(f.param_b());
            break;
        case K::domain_rescaled:
        case K::range_rescaled:
            j["kind"] = f.kind() == K::domain_rescaled ? "domain_rescaled" : "range_rescaled";
            j["lambda"] = to_json(f.param());
            j["base"] = to_json(f.base());
            break;
    }
    j["K"] = f.K();
    j["L"] = f.L();
    return j;
}

FunctionFamily family_from(const Json& j) {
    const std::string kind = field(j, "kind").get<std::string>();
    FunctionFamily f = [&] {
        if (kind == "exponential") return FunctionFamily::exponential(complex_from(j.value("lambda", Json(1.0))));
        if (kind == "exp_pair") return FunctionFamily::exp_pair(complex_from(field(j, "a")), complex_from(field(j, "b")));
        if (kind == "domain_rescaled")
            return FunctionFamily::domain_rescaled(family_from(field(j, "base")), complex_from(field(j, "lambda")));
        if (kind == "range_rescaled")
            return FunctionFamily::range_rescaled(family_from(field(j, "base")), complex_from(field(j, "lambda")));
        throw ConfigError("unknown family kind '" + kind + "'");
    }();
    if (j.contains("K") || j.contains("L"))
        f = f.with_radii(j.value("K", f.K()), j.value("L", f.L()));
    return f;
}

Json to_json(const TractId& t, bool pair) {
    if (!pair) return t.k;
    return Json::array({t.sign, t.k});
}

TractId tract_from(const Json& j, bool pair) {
    if (!pair) {
        if (!j.is_number_integer()) throw ConfigError("exponential tract ids are integers, got " + j.dump());
        return {1, j.get<long>()};
    }
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw ConfigError("pair tract ids are [sign, k], got " + j.dump());
    const int sign = j[0].get<int>();
    if (sign != 1 && sign != -1) throw ConfigError("tract sign must be 1 or -1");
    return {sign, j[1].get<long>()};
}

Json to_json(const ExternalAddress& s, bool pair) {
    Json pre = Json::array(), per = Json::array();
    for (const auto& t : s.prefix()) pre.push_back(to_json(t, pair));
    for (const auto& t : s.period()) per.push_back(to_json(t, pair));
    return Json{{"prefix", pre}, {"period", per}};
}

ExternalAddress address_from(const Json& j, bool pair) {
    std::vector<TractId> pre, per;
    for (const auto& t : j.value("prefix", Json::array())) pre.push_back(tract_from(t, pair));
    for (const auto& t : field(j, "period")) per.push_back(tract_from(t, pair));
    try {
        return ExternalAddress(pre, per);
    } catch (const PreconditionError& e) {
        throw ConfigError(std::string("bad address: ") + e.what());
    }
}

Json to_json(const ErrorBudget& e) {
    return Json{{"analytic_bound", number(e.analytic_bound)}, {"float_epsilon_count", e.float_epsilon_count}};
}

Json to_json(const RayPoint& p, bool pair) {
    return Json{{"address", to_json(p.address, pair)},
                {"depth", p.depth},
                {"position", to_json(p.position)},
                {"plane_position", to_json(p.plane_position)},
                {"error", to_json(p.error)},
                {"error_total", number(p.error.total(std::abs(p.position)))}};
}

Json to_json(const HairTail& tail, bool pair) {
    Json samples = Json::array();
    double worst = 0.0;
    for (const auto& s : tail.samples) {
        const double e = s.point.error.total(std::abs(s.point.position));
        worst = std::max(worst, e);
        samples.push_back(Json{{"t", number(s.t)},
                               {"position", to_json(s.point.position)},
                               {"plane_position", to_json(s.point.plane_position)},
                               {"depth", s.point.depth},
                               {"error", number(e)}});
    }
    Json j{{"address", to_json(tail.address, pair)}, {"max_error", number(worst)}, {"samples", samples}};
    j["endpoint_estimate"] = tail.endpoint_estimate ? to_json(*tail.endpoint_estimate, pair) : Json(nullptr);
    return j;
}

std::string format_double(double x) { return fmt(x); }

std::string tail_csv(const HairTail& tail) {
    std::ostringstream os;
    os << "t,re_log,im_log,re_plane,im_plane,err\n";
    for (const auto& s : tail.samples) {
        const auto& p = s.point;
        os << fmt(s.t) << ',' << fmt(p.position.real()) << ',' << fmt(p.position.imag()) << ','
           << fmt(p.plane_position.real()) << ',' << fmt(p.plane_position.imag()) << ','
           << fmt(p.error.total(std::abs(p.position))) << '\n';
    }
    return os.str();
}

Json to_json(const ProjectionResult& r) {
    Json trace = Json::array();
    for (const auto& [n, t] : r.zn_trace) trace.push_back(Json::array({n, number(t)}));
    return Json{{"t_in", number(r.t_in)},       {"t_out", number(r.t_out)},   {"input", to_json(r.input)},
                {"output", to_json(r.output)},  {"n_used", r.n_used},         {"converged", r.converged},
                {"rho", number(r.rho)},         {"zn_trace", trace}};
}

std::string zn_trace_csv(const ProjectionResult& r) {
    std::ostringstream os;
    os << "n,t\n";
    for (const auto& [n, t] : r.zn_trace) os << n << ',' << fmt(t) << '\n';
    return os.str();
}

Json to_json(const DefectReport& r) {
    Json d = Json::array();
    for (const auto& p : r.defects)
        d.push_back(Json{{"hair", p.hair},
                         {"t", number(p.t)},
                         {"modulus", number(p.modulus)},
                         {"gap", number(p.gap)},
                         {"orbit_meets_region", p.orbit_meets_region}});
    return Json{{"samples", r.samples},
                {"skipped", r.skipped},
                {"defect_count", r.defects.size()},
                {"max_defect_modulus", number(r.max_defect_modulus)},
                {"all_defects_meet_region", r.all_defects_meet_region},
                {"defects", d}};
}

Json to_json(const ConjugacyReport& r) {
    return Json{{"samples", r.samples},
                {"excluded", r.excluded},
                {"max_residual", number(r.max_residual)},
                {"max_log_residual", number(r.max_log_residual)},
                {"residual_violations", r.residual_violations},
                {"max_displacement", number(r.max_displacement)},
                {"displacement_bound", number(r.displacement_bound)},
                {"displacement_violations", r.displacement_violations},
                {"annulus_violations", r.annulus_violations},
                {"equivariance_violations", r.equivariance_violations},
                {"escape_failures", r.escape_failures},
                {"max_rate", number(r.max_rate)},
                {"surjectivity_samples", r.surjectivity_samples},
                {"surjectivity_failures", r.surjectivity_failures},
                {"max_roundtrip", number(r.max_roundtrip)},
                {"valid", r.valid()}};
}

Json to_json(const PipelineResult& r, bool pair) {
    Json mods = Json::array();
    for (double x : r.min_log_modulus) mods.push_back(number(x));
    return Json{{"N", r.N},
                {"level", r.level},
                {"last_finite", r.last_finite},
                {"address", to_json(r.address, pair)},
                {"w0", to_json(r.w0)},
                {"t_match", number(r.t_match)},
                {"matched", to_json(r.matched, pair)},
                {"distance", number(r.distance)},
                {"error_bound", number(r.error_bound)},
                {"completion_distance", number(r.completion_distance)},
                {"completion_bound", number(r.completion_bound)},
                {"contained", r.contained},
                {"min_log_modulus", mods},
                {"monotone", r.monotone},
                {"tail", to_json(r.tail, pair)}};
}

Json to_json(const QuadHeight& y) { return Json{{"p", to_json(y.p)}, {"q", to_json(y.q)}}; }

Json to_json(const AffineBrush& B) {
    Json hairs = Json::array();
    for (const auto& h : B.hairs())
        hairs.push_back(Json{{"id", h.id}, {"p", to_json(h.y.p)}, {"q", to_json(h.y.q)}, {"t", to_json(h.t_y)}});
    Json sigma = Json::object();
    for (const auto& [a, b] : B.sigma()) sigma[a] = b;
    return Json{{"hairs", hairs}, {"sigma", sigma}, {"lambda", to_json(B.lambda())}, {"Q", to_json(B.Q())}};
}

AffineBrush brush_from(const Json& j) {
    std::vector<BrushHair> hairs;
    for (const auto& h : field(j, "hairs"))
        hairs.push_back({field(h, "id").get<std::string>(),
                         {rational_from(field(h, "p")), rational_from(field(h, "q"))},
                         rational_from(field(h, "t"))});
    std::map<std::string, std::string> sigma;
    for (const auto& [a, b] : field(j, "sigma").items()) sigma[a] = b.get<std::string>();
    try {
        return AffineBrush(std::move(hairs), std::move(sigma), rational_from(field(j, "lambda")),
                           rational_from(field(j, "Q")));
    } catch (const PreconditionError& e) {
        throw ConfigError(std::string("bad brush: ") + e.what());
    }
}

Json to_json(const BrushAxiomReport& r) {
    Json nb = Json::array();
    for (const auto& n : r.neighbors)
        nb.push_back(Json{{"id", n.id},
                          {"above", n.above ? Json(*n.above) : Json(nullptr)},
                          {"below", n.below ? Json(*n.below) : Json(nullptr)},
                          {"gap_above", number(n.gap_above)},
                          {"gap_below", number(n.gap_below)},
                          {"endpoint_gap_above", number(n.endpoint_gap_above)},
                          {"endpoint_gap_below", number(n.endpoint_gap_below)}});
    return Json{{"ok", r.ok()},
                {"heights_distinct", r.heights_distinct},
                {"heights_irrational", r.heights_irrational},
                {"half_lines", r.half_lines},
                {"violations", r.violations},
                {"density_note", r.density_note},
                {"neighbors", nb}};
}

}  // namespace eldyn::io
