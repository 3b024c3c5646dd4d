#include "eldyn/projection.hpp"

#include "eldyn/errors.hpp"
#include "eldyn/parallel.hpp"

#include <cmath>
#include <sstream>

namespace eldyn {

void validate(const ProjectionConfig& cfg, const FunctionFamily& g) {
    if (!(cfg.R > g.L())) throw ConfigError("R must exceed L of the family");
    if (cfg.n_max < 1) throw ConfigError("n_max must be >= 1");
    if (!(cfg.t_tol > 0.0)) throw ConfigError("t_tol must be positive");
    if (cfg.scan_steps < 1) throw ConfigError("scan_steps must be >= 1");
    if (cfg.orbit_horizon < 1) throw ConfigError("orbit_horizon must be >= 1");
}

ProjectionConfig disc_config(const FunctionFamily& g, double R) {
    ProjectionConfig cfg;
    cfg.R = R;
    cfg.region = make_disc({0.0, 0.0}, R);
    validate(cfg, g);
    return cfg;
}

bool HairDynamics::avoids_region(double t, int n) const {
    for (int j = 0; j <= n; ++j)
        if (region_side(t, j) < 0) return false;
    return true;
}

bool orbit_avoids(const HairDynamics& h, double t, int n) { return h.avoids_region(t, n); }

double project_pi_n(const HairDynamics& h, double t, int n, const ProjectionConfig& cfg) {
    return project_pi_n(h, t, n, cfg, t);
}

double project_pi_n(const HairDynamics& h, double t, int n, const ProjectionConfig& cfg, double start) {
    if (n < 0) throw PreconditionError("n must be >= 0");
    if (t < h.t_begin() || t > h.t_end()) throw PreconditionError("point is not on the traced hair");
    double a = std::max(t, start);
    if (orbit_avoids(h, a, n)) return a;
    const double step = (h.t_end() - h.t_begin()) / cfg.scan_steps;
    while (a < h.t_end()) {
        const double b = std::min(a + step, h.t_end());
        if (orbit_avoids(h, b, n)) {
            double lo = a, hi = b;
            while (hi - lo > cfg.t_tol) {
                const double m = 0.5 * (lo + hi);
                if (m <= lo || m >= hi) break;
                (orbit_avoids(h, m, n) ? hi : lo) = m;
            }
            return hi;
        }
        a = b;
    }
    throw TailTooShort("no parameter on " + h.label() + " avoids the region for " +
                       std::to_string(n + 1) + " steps");
}

ProjectionResult project_pi_trace(const HairDynamics& h, double t, const ProjectionConfig& cfg) {
    if (cfg.n_max < 1 || !(cfg.t_tol > 0.0)) throw ConfigError("invalid projection configuration");
    ProjectionResult r;
    r.t_in = t;
    r.input = h.position(t);
    double prev = t;
    int stable = 0;
    for (int n = 0; n <= cfg.n_max; ++n) {
        // pi_{n+1} >= pi_n, so each search resumes where the previous stopped.
        const double cur = project_pi_n(h, t, n, cfg, prev);
        r.zn_trace.emplace_back(n, cur);
        r.n_used = n;
        if (n > 0) stable = (cur - prev <= cfg.t_tol) ? stable + 1 : 0;
        prev = cur;
        if (stable >= 3) {
            r.converged = true;
            break;
        }
    }
    r.t_out = prev;
    r.output = h.position(prev);

    std::vector<double> gaps;
    for (std::size_t i = 1; i < r.zn_trace.size(); ++i)
        gaps.push_back(r.zn_trace[i].second - r.zn_trace[i - 1].second);
    for (std::size_t i = 1; i < gaps.size(); ++i) {
        if (gaps[i - 1] > cfg.t_tol && gaps[i] > cfg.t_tol) {
            const double q = gaps[i] / gaps[i - 1];
            r.rho = std::isnan(r.rho) ? q : std::max(r.rho, q);
        }
    }
    return r;
}

ProjectionResult project_pi(const HairDynamics& h, double t, const ProjectionConfig& cfg) {
    ProjectionResult r = project_pi_trace(h, t, cfg);
    if (!r.converged) {
        std::ostringstream os;
        os << "pi_n did not settle within n_max=" << cfg.n_max << " on " << h.label() << "; trace:";
        for (const auto& [n, v] : r.zn_trace) os << " " << n << ":" << v;
        throw NotConverged(os.str());
    }
    return r;
}

DefectReport commutation_defect(const std::vector<const HairDynamics*>& hairs,
                                const ProjectionConfig& cfg, int n_samples) {
    if (n_samples < 1) throw PreconditionError("n_samples must be >= 1");
    struct Slot {
        bool skipped = true;
        std::optional<DefectPoint> defect;
    };
    std::vector<Slot> slots(hairs.size() * static_cast<std::size_t>(n_samples));
    std::vector<std::unique_ptr<HairDynamics>> images;
    for (const auto* h : hairs) images.push_back(h->image());

    parallel_for(slots.size(), [&](std::size_t idx) {
        const std::size_t hi = idx / static_cast<std::size_t>(n_samples);
        const int k = static_cast<int>(idx % static_cast<std::size_t>(n_samples));
        const HairDynamics& h = *hairs[hi];
        const HairDynamics& img = *images[hi];
        // Samples cover the lower half of the range so projections stay on it.
        const double t = h.t_begin() + 0.5 * (h.t_end() - h.t_begin()) * k / n_samples;
        try {
            const ProjectionResult pz = project_pi_trace(h, t, cfg);
            const double gz = h.image_parameter(t);
            if (!pz.converged || !(gz <= img.t_end())) return;
            const ProjectionResult pgz = project_pi_trace(img, std::max(gz, img.t_begin()), cfg);
            if (!pgz.converged) return;
            const double gpz = h.image_parameter(pz.t_out);
            // The image map stretches parameter errors by its local derivative.
            const double dt = std::max(cfg.t_tol, 1e-6 * (1.0 + std::abs(pz.t_out)));
            const double stretch = std::abs(h.image_parameter(pz.t_out + dt) - gpz) / dt;
            const double tol = 4.0 * cfg.t_tol * (1.0 + stretch);
            slots[idx].skipped = false;
            const double gap = std::abs(gpz - pgz.t_out);
            if (gap > tol) {
                bool meets = false;
                for (int j = 0; j <= std::max(pz.n_used, 1) && !meets; ++j)
                    meets = h.region_side(t, j) <= 0;
                slots[idx].defect = DefectPoint{h.label(), t, std::abs(h.position(t)), gap, meets};
            }
        } catch (const TailTooShort&) {
        }
    });

    DefectReport r;
    for (const auto& s : slots) {
        ++r.samples;
        if (s.skipped) {
            ++r.skipped;
            continue;
        }
        if (s.defect) {
            r.max_defect_modulus = std::max(r.max_defect_modulus, s.defect->modulus);
            r.all_defects_meet_region = r.all_defects_meet_region && s.defect->orbit_meets_region;
            r.defects.push_back(*s.defect);
        }
    }
    return r;
}

int measure_crossings(const HairDynamics& h, int n_grid) {
    if (n_grid < 2) throw PreconditionError("n_grid must be >= 2");
    int count = 0;
    int last = h.region_side(h.t_begin(), 0);
    for (int i = 1; i < n_grid; ++i) {
        const double t = h.t_begin() + (h.t_end() - h.t_begin()) * i / (n_grid - 1);
        const int side = h.region_side(t, 0);
        if (side != last && side != 0) {
            if (last != 0 || count == 0) ++count;
            last = side;
        }
    }
    return count;
}

TracedHair::TracedHair(std::shared_ptr<const RayTracer> tracer, ExternalAddress s, Region region,
                       double t_begin, double t_end)
    : tracer_(std::move(tracer)), s_(std::move(s)), region_(std::move(region)), t0_(t_begin), t1_(t_end) {
    if (!tracer_) throw PreconditionError("tracer required");
    if (!(t0_ >= 0.0) || !(t1_ > t0_)) throw PreconditionError("need 0 <= t_begin < t_end");
    tracer_->check_address(s_);
}

TracedHair TracedHair::from_tail(std::shared_ptr<const RayTracer> tracer, const HairTail& tail,
                                 Region region) {
    if (tail.samples.size() < 2) throw TailTooShort("tail needs at least two samples");
    return TracedHair(std::move(tracer), tail.address, std::move(region), tail.samples.front().t,
                      tail.samples.back().t);
}

std::optional<Complex> TracedHair::orbit_point(double t, int j) const {
    // g^j(gamma_s(t)) = gamma_{shift^j s}(t_j) with t_j from the potential recursion.
    ExternalAddress a = s_;
    double tj = t;
    for (int k = 0; k < j; ++k) {
        tj = tracer_->image_potential(a, tj);
        a = a.shift(1);
        if (!std::isfinite(tj) || tj + tracer_->x_base(a) > 700.0) return std::nullopt;
    }
    try {
        return tracer_->tail_point(a, tj).point.position;
    } catch (const AddressNotRealized&) {
        return std::nullopt;
    }
}

int TracedHair::region_side(double t, int j) const {
    const auto w = orbit_point(t, j);
    if (!w) return 1;
    if (const auto* d = std::get_if<region::Disc>(&region_); d && d->center == Complex{0.0, 0.0}) {
        const double diff = w->real() - std::log(d->radius);
        return diff < 0 ? -1 : (diff > 0 ? 1 : 0);
    }
    if (w->real() > 700.0) return 1;
    return region_contains(region_, std::exp(*w)) ? -1 : 1;
}

Complex TracedHair::position(double t) const { return tracer_->tail_point(s_, t).point.plane_position; }

double TracedHair::image_parameter(double t) const { return tracer_->image_potential(s_, t); }

std::unique_ptr<HairDynamics> TracedHair::image() const {
    return std::make_unique<TracedHair>(tracer_, s_.shift(1), region_, image_parameter(t0_),
                                        image_parameter(t1_));
}

// Per-hair data in index form; the double fields are correctly rounded copies.
struct BrushHairDynamics::Table {
    struct Row {
        bool active;
        std::size_t image;
        Rational t_y;
        double t_y_d;
    };
    std::vector<Row> rows;
    std::map<std::string, std::size_t> index;
    Rational Q;
    double Q_d, lambda_d;

    explicit Table(const AffineBrush& B) : Q(B.Q()), Q_d(static_cast<double>(B.Q())),
                                           lambda_d(static_cast<double>(B.lambda())) {
        for (std::size_t i = 0; i < B.hairs().size(); ++i) index[B.hairs()[i].id] = i;
        for (const auto& h : B.hairs())
            rows.push_back({compare(h.y, B.Q()) < 0 && compare(h.y, Rational(-B.Q())) > 0,
                            index.at(B.image(h.id)), h.t_y, static_cast<double>(h.t_y)});
    }
};

BrushHairDynamics::BrushHairDynamics(std::shared_ptr<const AffineBrush> B, std::string hair, double t_end)
    : BrushHairDynamics(B, B ? std::make_shared<const Table>(*B) : nullptr, std::move(hair), t_end) {}

BrushHairDynamics::BrushHairDynamics(std::shared_ptr<const AffineBrush> B, std::shared_ptr<const Table> table,
                                     std::string hair, double t_end)
    : B_(std::move(B)), table_(std::move(table)), hair_(std::move(hair)), t1_(t_end) {
    if (!B_) throw PreconditionError("brush required");
    index_ = table_->index.count(hair_) ? table_->index.at(hair_) : throw PreconditionError("unknown hair " + hair_);
    if (!(t1_ > t_begin())) throw PreconditionError("t_end must exceed the hair endpoint");
}

double BrushHairDynamics::t_begin() const { return table_->rows[index_].t_y_d; }

int BrushHairDynamics::region_side(double t, int j) const {
    BrushPoint p{hair_, Rational(t)};
    const Rational& ty = B_->hair(hair_).t_y;
    if (p.t < ty) p.t = ty;
    for (int k = 0; k < j; ++k) p = brush_map(*B_, p);
    if (in_open_square(*B_, p)) return -1;
    return in_closed_square(*B_, p) ? 0 : 1;
}

bool BrushHairDynamics::avoids_region(double t, int n) const {
    const Table& T = *table_;
    // Double orbit with a running bound on its distance to the exact one; the
    // exact path decides whenever a point is within that bound of +-Q.
    std::size_t h = index_;
    double x = std::max(t, T.rows[h].t_y_d), err = 0.0;
    bool exact = t < T.rows[h].t_y_d;  // clamped start: t_y itself is exact only as a rational
    for (int k = 0; k <= n && !exact; ++k) {
        const auto& row = T.rows[h];
        if (row.active) {
            if (std::abs(std::abs(x) - T.Q_d) <= err + 4 * kEps * T.Q_d) {
                exact = true;
                break;
            }
            if (std::abs(x) < T.Q_d) return false;
        }
        if (k == n || exact) break;
        const auto& img = T.rows[row.image];
        const double y = T.lambda_d * (x - row.t_y_d) + img.t_y_d;
        err = T.lambda_d * err * (1 + 4 * kEps) +
              8 * kEps * (std::abs(T.lambda_d * (x - row.t_y_d)) + std::abs(row.t_y_d) * T.lambda_d + std::abs(img.t_y_d) + std::abs(y));
        x = y;
        h = row.image;
    }
    if (!exact) return true;

    std::size_t e = index_;
    Rational r(t);
    if (r < T.rows[e].t_y) r = T.rows[e].t_y;
    for (int k = 0; k <= n; ++k) {
        const auto& row = T.rows[e];
        if (row.active && r < T.Q && r > -T.Q) return false;
        if (k == n) break;
        r = B_->lambda() * (r - row.t_y) + T.rows[row.image].t_y;
        e = row.image;
    }
    return true;
}

Complex BrushHairDynamics::position(double t) const { return {t, B_->hair(hair_).y.approx()}; }

double BrushHairDynamics::image_parameter(double t) const {
    const BrushHair& h = B_->hair(hair_);
    const BrushHair& img = B_->hair(B_->image(hair_));
    return static_cast<double>(B_->lambda()) * (t - static_cast<double>(h.t_y)) +
           static_cast<double>(img.t_y);
}

std::unique_ptr<HairDynamics> BrushHairDynamics::image() const {
    return std::unique_ptr<HairDynamics>(
        new BrushHairDynamics(B_, table_, B_->image(hair_), image_parameter(t1_)));
}

}  // namespace eldyn
