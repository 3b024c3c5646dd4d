#include "commands.hpp"

#include "checks.hpp"
#include "eldyn/brushmodel.hpp"
#include "eldyn/conjugacy.hpp"
#include "eldyn/errors.hpp"
#include "eldyn/parallel.hpp"
#include "eldyn/pipeline.hpp"
#include "eldyn/projection.hpp"

#include <png.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace eldyn::cli {

namespace fs = std::filesystem;
using io::Json;
using io::number;

namespace {

Json meta(const RunConfig& c, const std::string& command) {
    return Json{{"tool", "eldyn"}, {"version", io::version()}, {"command", command},
                {"config_hash", c.hash()}, {"seed", c.seed}};
}

fs::path out_dir(const RunConfig& c) {
    fs::path p(c.out);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& bytes) {
    std::ofstream o(p, std::ios::binary);
    if (!o) throw std::runtime_error("cannot write " + p.string());
    o << bytes;
}

/// `body` keys follow the meta block.
void write_json(const fs::path& p, const RunConfig& c, const std::string& command, const Json& body) {
    Json j{{"meta", meta(c, command)}};
    for (const auto& [k, v] : body.items()) j[k] = v;
    write_file(p, io::dump(j));
}

void write_csv(const fs::path& p, const RunConfig& c, const std::string& csv) {
    write_file(p, "# eldyn " + io::version() + " config_hash=" + c.hash() + "\n" + csv);
}

bool is_pair(const RunConfig& c) { return c.family.is_pair(); }

std::shared_ptr<const RayTracer> make_tracer(const RunConfig& c) {
    RayConfig rc;
    rc.k_max = c.trace.k_max;
    return std::make_shared<const RayTracer>(LogTransform(c.traced()), rc);
}

std::vector<HairTail> trace_all(const RunConfig& c, const RayTracer& tr) {
    std::vector<HairTail> tails;
    for (const auto& s : c.addresses) tails.push_back(tr.trace_tail(s, c.trace.t_min, c.trace.t_max, c.trace.tol));
    return tails;
}

double max_error(const HairTail& t) {
    double m = 0.0;
    for (const auto& s : t.samples) m = std::max(m, s.point.error.total(std::abs(s.point.position)));
    return m;
}

// ---- render ----

using Rgb = std::array<std::uint8_t, 3>;

constexpr Rgb kUndecided{255, 0, 255};
constexpr Rgb kReentered{0, 0, 0};
constexpr Rgb kRay{0, 255, 255};

Rgb escape_color(const EscapeVerdict& v, int horizon, const std::string& scheme) {
    if (v.kind == EscapeVerdict::Kind::undecided) return scheme == "gray" ? Rgb{255, 0, 0} : kUndecided;
    if (v.kind == EscapeVerdict::Kind::reentered) return kReentered;
    const double s = 1.0 - std::min(1.0, static_cast<double>(v.n) / std::max(1, horizon / 4));
    const auto u = [](double x) { return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255)); };
    if (scheme == "gray") return {u(0.35 + 0.65 * s), u(0.35 + 0.65 * s), u(0.35 + 0.65 * s)};
    return {u(1.0), u(0.55 + 0.45 * s), u(0.1 + 0.3 * s)};
}

void write_png(const fs::path& p, int w, int h, const std::vector<Rgb>& px, const RunConfig& c) {
    FILE* fp = std::fopen(p.string().c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot write " + p.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw std::runtime_error("libpng failed writing " + p.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    std::string software = "eldyn " + io::version(), hash = "config_hash=" + c.hash();
    png_text text[2]{};
    text[0].compression = text[1].compression = PNG_TEXT_COMPRESSION_NONE;
    text[0].key = const_cast<char*>("Software");
    text[0].text = software.data();
    text[1].key = const_cast<char*>("Comment");
    text[1].text = hash.data();
    png_set_text(png, info, text, 2);
    png_write_info(png, info);
    for (int y = 0; y < h; ++y)
        png_write_row(png, reinterpret_cast<png_const_bytep>(px.data() + static_cast<std::size_t>(y) * w));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

}  // namespace

int cmd_trace(const RunConfig& c) {
    const auto dir = out_dir(c);
    const auto tr = make_tracer(c);
    const auto tails = trace_all(c, *tr);
    Json rows = Json::array();
    double worst = 0.0;
    for (std::size_t i = 0; i < tails.size(); ++i) {
        const std::string stem = "tail_" + std::to_string(i);
        write_csv(dir / (stem + ".csv"), c, io::tail_csv(tails[i]));
        write_json(dir / (stem + ".json"), c, "trace", Json{{"tail", io::to_json(tails[i], is_pair(c))}});
        const double e = max_error(tails[i]);
        worst = std::max(worst, e);
        rows.push_back(Json{{"index", i},
                            {"address", io::to_json(tails[i].address, is_pair(c))},
                            {"label", tails[i].address.to_string()},
                            {"samples", tails[i].samples.size()},
                            {"max_error", number(e)},
                            {"csv", stem + ".csv"},
                            {"json", stem + ".json"}});
    }
    write_json(dir / "trace.json", c, "trace",
               Json{{"family", io::to_json(c.base())},
                    {"traced_family", io::to_json(c.traced())},
                    {"window", {{"t_min", c.trace.t_min}, {"t_max", c.trace.t_max}, {"tol", c.trace.tol}}},
                    {"max_error", number(worst)},
                    {"addresses", rows}});
    return kExitOk;
}

int cmd_render(const RunConfig& c) {
    const auto dir = out_dir(c);
    const FunctionFamily g = c.traced();
    const auto& v = c.render;
    const double R = v.R.value_or(2.0 * g.L());
    const bool logc = v.coordinates == "log";
    const int W = v.width, H = v.height;
    auto to_plane = [&](Complex p) { return logc ? std::exp(p) : p; };
    auto pixel_center = [&](int x, int y) {
        return Complex{v.re_min + (v.re_max - v.re_min) * (x + 0.5) / W,
                       v.im_max - (v.im_max - v.im_min) * (y + 0.5) / H};
    };
    auto classify = [&](Complex p) {
        const Complex z = to_plane(p);
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return EscapeVerdict{EscapeVerdict::Kind::escaping, 0, {}};
        return escape_test(g, z, R, v.horizon);
    };

    std::vector<Rgb> px(static_cast<std::size_t>(W) * H);
    std::vector<EscapeVerdict::Kind> kind(px.size());
    parallel_for(px.size(), [&](std::size_t i) {
        const auto verdict = classify(pixel_center(static_cast<int>(i % W), static_cast<int>(i / W)));
        kind[i] = verdict.kind;
        px[i] = escape_color(verdict, v.horizon, v.scheme);
    });
    long counts[3] = {0, 0, 0};
    for (auto k : kind) ++counts[static_cast<int>(k)];

    // Ray pixels are classified at the traced point itself.
    Json rays = Json::array();
    if (v.rays && !c.addresses.empty()) {
        const auto tr = make_tracer(c);
        for (const auto& tail : trace_all(c, *tr)) {
            long inside = 0, escaping = 0;
            std::vector<std::size_t> hit;
            std::vector<int> esc;
            for (const auto& s : tail.samples) {
                const Complex p = logc ? s.point.position : s.point.plane_position;
                const double fx = (p.real() - v.re_min) / (v.re_max - v.re_min) * W;
                const double fy = (v.im_max - p.imag()) / (v.im_max - v.im_min) * H;
                if (!(fx >= 0 && fx < W && fy >= 0 && fy < H)) continue;
                ++inside;
                const auto verdict = escape_test(g, s.point.plane_position, R, v.horizon);
                const bool e = verdict.kind == EscapeVerdict::Kind::escaping ||
                               !std::isfinite(std::abs(s.point.plane_position));
                escaping += e;
                hit.push_back(static_cast<std::size_t>(fy) * W + static_cast<std::size_t>(fx));
            }
            for (std::size_t i : hit) px[i] = kRay;
            rays.push_back(Json{{"address", io::to_json(tail.address, is_pair(c))},
                                {"samples", tail.samples.size()},
                                {"samples_in_view", inside},
                                {"samples_escaping", escaping}});
        }
    }
    write_png(dir / "render.png", W, H, px, c);
    write_json(dir / "render.json", c, "render",
               Json{{"image", "render.png"},
                    {"map", io::to_json(g)},
                    {"R", R},
                    {"pixels", {{"escaping", counts[0]}, {"reentered", counts[1]}, {"undecided", counts[2]}}},
                    {"colors", {{"undecided", {kUndecided[0], kUndecided[1], kUndecided[2]}},
                                {"reentered", {0, 0, 0}},
                                {"ray", {kRay[0], kRay[1], kRay[2]}}}},
                    {"rays", rays}});
    return kExitOk;
}

int cmd_project(const RunConfig& c) {
    const auto dir = out_dir(c);
    const FunctionFamily g = c.traced();
    const auto tracer = make_tracer(c);
    ProjectionConfig cfg = disc_config(g, std::exp(c.projection.log_R));
    cfg.n_max = c.projection.n_max;
    cfg.t_tol = c.projection.t_tol;
    cfg.orbit_horizon = c.projection.orbit_horizon;
    cfg.scan_steps = c.projection.scan_steps;
    validate(cfg, g);

    std::vector<std::unique_ptr<TracedHair>> owned;
    std::vector<const HairDynamics*> hairs;
    for (const auto& s : c.addresses) {
        owned.push_back(std::make_unique<TracedHair>(tracer, s, cfg.region, c.trace.t_min, c.trace.t_max));
        hairs.push_back(owned.back().get());
    }
    const int P = c.projection.points;
    Json rows = Json::array();
    for (std::size_t h = 0; h < hairs.size(); ++h) {
        std::vector<Json> results(static_cast<std::size_t>(P));
        std::vector<std::string> traces(results.size());
        parallel_for(results.size(), [&](std::size_t i) {
            const double t = c.trace.t_min + (c.trace.t_max - c.trace.t_min) * static_cast<double>(i) / P;
            try {
                const ProjectionResult r = project_pi(*hairs[h], t, cfg);
                results[i] = io::to_json(r);
                std::ostringstream os;
                for (const auto& [n, tn] : r.zn_trace) os << i << ',' << n << ',' << io::format_double(tn) << '\n';
                traces[i] = os.str();
            } catch (const NotConverged& e) {
                results[i] = Json{{"t_in", t}, {"converged", false}, {"error", e.kind()}, {"message", e.what()}};
            }
        });
        const std::string stem = "project_" + std::to_string(h);
        std::string csv = "point,n,t\n";
        for (const auto& s : traces) csv += s;
        write_csv(dir / (stem + "_zn.csv"), c, csv);
        write_json(dir / (stem + ".json"), c, "project",
                   Json{{"address", io::to_json(c.addresses[h], is_pair(c))}, {"results", results}});
        int conv = 0;
        for (const auto& r : results) conv += r.value("converged", false);
        rows.push_back(Json{{"index", h}, {"label", c.addresses[h].to_string()}, {"points", P}, {"converged", conv},
                            {"json", stem + ".json"}, {"csv", stem + "_zn.csv"}});
    }
    const DefectReport d = commutation_defect(hairs, cfg, c.projection.defect_samples);
    write_json(dir / "defects.json", c, "project", Json{{"report", io::to_json(d)}});
    write_json(dir / "project.json", c, "project",
               Json{{"map", io::to_json(g)}, {"R", cfg.R}, {"hairs", rows}, {"defects", "defects.json"}});
    return kExitOk;
}

int cmd_conjugate(const RunConfig& c) {
    const auto dir = out_dir(c);
    const FunctionFamily f = c.base();
    const ConjugacyMap C = c.conjugacy.lambda ? make_conjugacy(f, *c.conjugacy.lambda, c.conjugacy.Q, c.conjugacy.depth)
                                              : make_conjugacy(f, c.conjugacy.Q, c.conjugacy.depth);
    const ConjugacyReport rep = verify_conjugacy(C, c.conjugacy.samples, c.seed);
    Json corr = Json::array();
    for (const auto& s : c.addresses)
        corr.push_back(Json{{"g", io::to_json(s, is_pair(c))}, {"f", io::to_json(address_correspondence(C, s), is_pair(c))}});
    Json pipes = Json::array();
    for (std::size_t i = 0; i < c.pipeline.seeds.size(); ++i) {
        const auto r = criniferous_pipeline(f, c.pipeline.seeds[i], c.pipeline.R, c.pipeline.horizon);
        const std::string stem = "pipeline_" + std::to_string(i);
        write_json(dir / (stem + ".json"), c, "conjugate", Json{{"seed_point", io::to_json(c.pipeline.seeds[i])},
                                                               {"result", io::to_json(r, is_pair(c))}});
        write_csv(dir / (stem + ".csv"), c, io::tail_csv(r.tail));
        pipes.push_back(Json{{"seed_point", io::to_json(c.pipeline.seeds[i])}, {"N", r.N}, {"contained", r.contained},
                             {"monotone", r.monotone}, {"json", stem + ".json"}, {"csv", stem + ".csv"}});
    }
    write_json(dir / "conjugate.json", c, "conjugate",
               Json{{"f", io::to_json(C.F.family())},
                    {"g", io::to_json(C.G.family())},
                    {"lambda", io::to_json(C.lambda)},
                    {"Q", C.Q},
                    {"depth", C.depth},
                    {"report", io::to_json(rep)},
                    {"correspondence", corr},
                    {"pipeline", pipes}});
    return rep.valid() ? kExitOk : kExitVerification;
}

int cmd_brush(const RunConfig& c) {
    const auto dir = out_dir(c);
    const AffineBrush B = c.brush.instance ? io::brush_from(*c.brush.instance)
                          : c.brush.random ? AffineBrush::random(c.brush.hairs, c.seed, c.brush.lambda, c.brush.Q)
                                           : AffineBrush({{"H1", {0, 1}, 10}, {"H2", {1, -1}, 0}},
                                                         {{"H1", "H2"}, {"H2", "H2"}}, 2, 3);
    Json zn = Json::array(), table = Json::array();
    std::string csv = "hair,t,pi_t,t_exact,pi_exact\n";
    std::vector<BrushPoint> grid;
    auto exact = [](const Rational& r) {
        const auto den = boost::multiprecision::denominator(r);
        return boost::multiprecision::numerator(r).str() + (den == 1 ? "" : "/" + den.str());
    };
    for (const auto& h : B.hairs()) {
        Json zs = Json::array();
        for (int n = 0; n <= 8; ++n) zs.push_back(io::to_json(zn_oracle(B, h.id, n)));
        zn.push_back(Json{{"hair", h.id}, {"t_y", io::to_json(h.t_y)}, {"z_n", zs},
                          {"z_inf", io::to_json(z_infinity(B, h.id))}});
        for (int k = 0; k <= c.brush.steps; ++k) {
            const Rational t = h.t_y + c.brush.step * k;
            grid.push_back({h.id, t});
            const Rational pt = pi_model(B, {h.id, t}).t;
            table.push_back(Json{{"hair", h.id}, {"t", io::to_json(t)}, {"pi", io::to_json(pt)}});
            csv += h.id + "," + io::format_double(static_cast<double>(t)) + "," +
                   io::format_double(static_cast<double>(pt)) + "," + exact(t) + "," + exact(pt) + "\n";
        }
    }
    Json defects = Json::array();
    for (const auto& d : semiconjugacy_defects(B, grid))
        defects.push_back(Json{{"hair", d.point.hair}, {"t", io::to_json(d.point.t)},
                               {"orbit_meets_closed_square", d.orbit_meets_closed_square}});
    write_csv(dir / "pi_table.csv", c, csv);
    write_json(dir / "brush.json", c, "brush",
               Json{{"brush", io::to_json(B)},
                    {"axioms", io::to_json(check_brush_axioms(B))},
                    {"cauchy_constant", io::to_json(cauchy_constant(B))},
                    {"crossing_count", crossing_count(B, B.Q())},
                    {"z", zn},
                    {"pi_table", table},
                    {"defects", defects}});
    return kExitOk;
}

int cmd_verify(const RunConfig& c) {
    const auto dir = out_dir(c);
    bool all = true;
    Json checks = Json::array();
    for (const auto& r : run_checks(c, [](const CheckResult& r) {
             std::cerr << (r.pass ? "PASS " : "FAIL ") << (r.id ? std::to_string(r.id) : std::string("-")) << ' '
                       << r.name << " (" << r.seconds << " s)\n";
         })) {
        all = all && r.pass;
        checks.push_back(Json{{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"measured", r.measured}});
    }
    write_json(dir / "verify.json", c, "verify", Json{{"pass", all}, {"checks", checks}});
    return all ? kExitOk : kExitVerification;
}

}  // namespace eldyn::cli
