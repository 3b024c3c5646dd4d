#include "eldyn/config.hpp"

#include "eldyn/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace eldyn {

using io::Json;

namespace {

void allow(const Json& j, const char* where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw ConfigError(std::string("unknown key '") + k + "' in " + where);
}

template <class T>
void read(const Json& j, const char* key, T& dst) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("bad value for '") + key + "': " + j.at(key).dump());
    }
}

void read_num(const Json& j, const char* key, double& dst) {
    if (j.contains(key)) dst = io::number_from(j.at(key));
}

void positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(std::string(what) + " must be positive and finite");
}

void at_least(long x, long lo, const char* what) {
    if (x < lo) throw ConfigError(std::string(what) + " must be >= " + std::to_string(lo));
}

Json opt(const std::optional<double>& x) { return x ? io::number(*x) : Json(nullptr); }

}  // namespace

FunctionFamily RunConfig::base() const { return L ? family.with_radii(family.K(), *L) : family; }

FunctionFamily RunConfig::traced() const {
    if (rescale == "none") return base();
    return disjoint_type_rescale(base(), rescale == "range" ? RescaleMode::range : RescaleMode::domain).g;
}

std::string RunConfig::hash() const { return io::hex64(io::fnv1a(to_json(*this).dump())); }

RunConfig parse_config(const Json& j) {
    RunConfig c;
    if (j.is_null()) return c;
    allow(j, "config", {"family", "L", "rescale", "addresses", "trace", "projection", "conjugacy", "render",
                        "brush", "pipeline", "verify", "out", "seed"});
    if (j.contains("family")) c.family = io::family_from(j["family"]);
    if (j.contains("L") && !j["L"].is_null()) {
        c.L = io::number_from(j["L"]);
        if (!(*c.L > c.family.K())) throw ConfigError("L must exceed K");
    }
    read(j, "rescale", c.rescale);
    if (c.rescale != "domain" && c.rescale != "range" && c.rescale != "none")
        throw ConfigError("rescale must be domain, range or none");
    if (j.contains("addresses")) {
        c.addresses.clear();
        for (const auto& a : j["addresses"]) c.addresses.push_back(io::address_from(a, c.family.is_pair()));
    }
    if (j.contains("trace")) {
        const Json& t = j["trace"];
        allow(t, "trace", {"t_min", "t_max", "tol", "k_max"});
        read_num(t, "t_min", c.trace.t_min);
        read_num(t, "t_max", c.trace.t_max);
        read_num(t, "tol", c.trace.tol);
        read(t, "k_max", c.trace.k_max);
    }
    if (!(c.trace.t_min >= 0.0) || !(c.trace.t_max > c.trace.t_min) || !std::isfinite(c.trace.t_max))
        throw ConfigError("trace window needs 0 <= t_min < t_max < inf");
    positive(c.trace.tol, "trace.tol");
    at_least(c.trace.k_max, 0, "trace.k_max");

    if (j.contains("projection")) {
        const Json& p = j["projection"];
        allow(p, "projection", {"log_R", "n_max", "t_tol", "orbit_horizon", "scan_steps", "points", "defect_samples"});
        read_num(p, "log_R", c.projection.log_R);
        read(p, "n_max", c.projection.n_max);
        read_num(p, "t_tol", c.projection.t_tol);
        read(p, "orbit_horizon", c.projection.orbit_horizon);
        read(p, "scan_steps", c.projection.scan_steps);
        read(p, "points", c.projection.points);
        read(p, "defect_samples", c.projection.defect_samples);
    }
    positive(c.projection.t_tol, "projection.t_tol");
    if (!std::isfinite(c.projection.log_R)) throw ConfigError("projection.log_R must be finite");
    at_least(c.projection.n_max, 1, "projection.n_max");
    at_least(c.projection.orbit_horizon, 1, "projection.orbit_horizon");
    at_least(c.projection.scan_steps, 2, "projection.scan_steps");
    at_least(c.projection.points, 1, "projection.points");
    at_least(c.projection.defect_samples, 1, "projection.defect_samples");

    if (j.contains("conjugacy")) {
        const Json& q = j["conjugacy"];
        allow(q, "conjugacy", {"Q", "lambda", "depth", "samples"});
        if (q.contains("Q") && !q["Q"].is_null()) c.conjugacy.Q = io::number_from(q["Q"]);
        if (q.contains("lambda") && !q["lambda"].is_null()) c.conjugacy.lambda = io::complex_from(q["lambda"]);
        read(q, "depth", c.conjugacy.depth);
        read(q, "samples", c.conjugacy.samples);
    }
    at_least(c.conjugacy.depth, 1, "conjugacy.depth");
    at_least(c.conjugacy.samples, 1, "conjugacy.samples");
    if (c.conjugacy.lambda && !(std::abs(*c.conjugacy.lambda) > 0.0)) throw ConfigError("conjugacy.lambda must be nonzero");

    if (j.contains("render")) {
        const Json& r = j["render"];
        allow(r, "render", {"coordinates", "viewport", "width", "height", "horizon", "R", "scheme", "rays"});
        read(r, "coordinates", c.render.coordinates);
        if (r.contains("viewport")) {
            const Json& v = r["viewport"];
            allow(v, "render.viewport", {"re", "im"});
            const Complex re = io::complex_from(v.at("re")), im = io::complex_from(v.at("im"));
            c.render.re_min = re.real(), c.render.re_max = re.imag();
            c.render.im_min = im.real(), c.render.im_max = im.imag();
        }
        read(r, "width", c.render.width);
        read(r, "height", c.render.height);
        read(r, "horizon", c.render.horizon);
        if (r.contains("R") && !r["R"].is_null()) c.render.R = io::number_from(r["R"]);
        read(r, "scheme", c.render.scheme);
        read(r, "rays", c.render.rays);
    }
    if (c.render.coordinates != "log" && c.render.coordinates != "plane")
        throw ConfigError("render.coordinates must be log or plane");
    if (!(c.render.re_max > c.render.re_min) || !(c.render.im_max > c.render.im_min))
        throw ConfigError("render viewport must have positive area");
    at_least(c.render.width, 1, "render.width");
    at_least(c.render.height, 1, "render.height");
    at_least(c.render.horizon, 1, "render.horizon");
    if (c.render.R) positive(*c.render.R, "render.R");
    if (c.render.scheme != "escape" && c.render.scheme != "gray")
        throw ConfigError("render.scheme must be escape or gray");

    if (j.contains("brush")) {
        const Json& b = j["brush"];
        allow(b, "brush", {"instance", "random", "hairs", "lambda", "Q", "step", "steps"});
        if (b.contains("instance") && !b["instance"].is_null()) {
            io::brush_from(b["instance"]);  // validate early
            c.brush.instance = b["instance"];
        }
        read(b, "random", c.brush.random);
        read(b, "hairs", c.brush.hairs);
        if (b.contains("lambda")) c.brush.lambda = io::rational_from(b["lambda"]);
        if (b.contains("Q")) c.brush.Q = io::rational_from(b["Q"]);
        if (b.contains("step")) c.brush.step = io::rational_from(b["step"]);
        read(b, "steps", c.brush.steps);
    }
    at_least(c.brush.hairs, 1, "brush.hairs");
    at_least(c.brush.steps, 0, "brush.steps");
    if (!(c.brush.lambda > 1)) throw ConfigError("brush.lambda must exceed 1");
    if (!(c.brush.Q > 0)) throw ConfigError("brush.Q must be positive");
    if (!(c.brush.step > 0)) throw ConfigError("brush.step must be positive");

    if (j.contains("pipeline")) {
        const Json& p = j["pipeline"];
        allow(p, "pipeline", {"seeds", "R", "horizon"});
        if (p.contains("seeds"))
            for (const auto& s : p["seeds"]) c.pipeline.seeds.push_back(io::complex_from(s));
        read_num(p, "R", c.pipeline.R);
        read(p, "horizon", c.pipeline.horizon);
    }
    positive(c.pipeline.R, "pipeline.R");
    at_least(c.pipeline.horizon, 1, "pipeline.horizon");

    if (j.contains("verify")) {
        const Json& v = j["verify"];
        allow(v, "verify", {"expansion_samples", "pullback_addresses", "roundtrip_samples", "brush_instances",
                            "projection_hairs", "conjugacy_samples", "pipeline_seeds", "order_pairs"});
        auto& s = c.verify;
        read(v, "expansion_samples", s.expansion_samples);
        read(v, "pullback_addresses", s.pullback_addresses);
        read(v, "roundtrip_samples", s.roundtrip_samples);
        read(v, "brush_instances", s.brush_instances);
        read(v, "projection_hairs", s.projection_hairs);
        read(v, "conjugacy_samples", s.conjugacy_samples);
        read(v, "pipeline_seeds", s.pipeline_seeds);
        read(v, "order_pairs", s.order_pairs);
        for (int n : {s.expansion_samples, s.pullback_addresses, s.roundtrip_samples, s.brush_instances,
                      s.projection_hairs, s.conjugacy_samples, s.pipeline_seeds, s.order_pairs})
            at_least(n, 1, "verify sample counts");
    }
    read(j, "out", c.out);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
            throw ConfigError("seed must be a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

Json to_json(const RunConfig& c) {
    const bool pair = c.family.is_pair();
    Json addrs = Json::array();
    for (const auto& a : c.addresses) addrs.push_back(io::to_json(a, pair));
    Json seeds = Json::array();
    for (const auto& s : c.pipeline.seeds) seeds.push_back(io::to_json(s));
    const auto& p = c.projection;
    const auto& r = c.render;
    const auto& v = c.verify;
    return Json{
        {"family", io::to_json(c.family)},
        {"L", opt(c.L)},
        {"rescale", c.rescale},
        {"addresses", addrs},
        {"trace", {{"t_min", c.trace.t_min}, {"t_max", c.trace.t_max}, {"tol", c.trace.tol}, {"k_max", c.trace.k_max}}},
        {"projection",
         {{"log_R", p.log_R}, {"n_max", p.n_max}, {"t_tol", p.t_tol}, {"orbit_horizon", p.orbit_horizon},
          {"scan_steps", p.scan_steps}, {"points", p.points}, {"defect_samples", p.defect_samples}}},
        {"conjugacy",
         {{"Q", opt(c.conjugacy.Q)},
          {"lambda", c.conjugacy.lambda ? io::to_json(*c.conjugacy.lambda) : Json(nullptr)},
          {"depth", c.conjugacy.depth},
          {"samples", c.conjugacy.samples}}},
        {"render",
         {{"coordinates", r.coordinates},
          {"viewport", {{"re", {r.re_min, r.re_max}}, {"im", {r.im_min, r.im_max}}}},
          {"width", r.width}, {"height", r.height}, {"horizon", r.horizon}, {"R", opt(r.R)},
          {"scheme", r.scheme}, {"rays", r.rays}}},
        {"brush",
         {{"instance", c.brush.instance ? *c.brush.instance : Json(nullptr)},
          {"random", c.brush.random}, {"hairs", c.brush.hairs}, {"lambda", io::to_json(c.brush.lambda)}, {"Q", io::to_json(c.brush.Q)},
          {"step", io::to_json(c.brush.step)}, {"steps", c.brush.steps}}},
        {"pipeline", {{"seeds", seeds}, {"R", c.pipeline.R}, {"horizon", c.pipeline.horizon}}},
        {"verify",
         {{"expansion_samples", v.expansion_samples}, {"pullback_addresses", v.pullback_addresses},
          {"roundtrip_samples", v.roundtrip_samples}, {"brush_instances", v.brush_instances},
          {"projection_hairs", v.projection_hairs}, {"conjugacy_samples", v.conjugacy_samples},
          {"pipeline_seeds", v.pipeline_seeds}, {"order_pairs", v.order_pairs}}},
        {"seed", c.seed}};
}

}  // namespace eldyn
