#include "eldyn/brushmodel.hpp"

#include "eldyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace eldyn {

namespace {

int sign(const Rational& r) { return r.sign(); }

// Hair orbit h, sigma h, ... up to the first repeat: (sequence, preperiod).
std::pair<std::vector<const BrushHair*>, std::size_t> hair_orbit(const AffineBrush& B,
                                                                 const std::string& start) {
    std::vector<const BrushHair*> seq;
    std::map<std::string, std::size_t> seen;
    std::string cur = start;
    while (!seen.count(cur)) {
        seen[cur] = seq.size();
        seq.push_back(&B.hair(cur));
        cur = B.image(cur);
    }
    return {seq, seen[cur]};
}

bool active(const AffineBrush& B, const BrushHair& h) {
    return compare(h.y, B.Q()) < 0 && compare(h.y, Rational(-B.Q())) > 0;
}

}  // namespace

double QuadHeight::approx() const {
    return static_cast<double>(p) + static_cast<double>(q) * std::sqrt(2.0);
}

int compare(const QuadHeight& a, const QuadHeight& b) {
    const Rational dp = a.p - b.p, dq = a.q - b.q;
    if (sign(dq) == 0) return sign(dp);
    if (sign(dp) == 0) return sign(dq);
    if (sign(dp) == sign(dq)) return sign(dp);
    // dp and dq sqrt2 have opposite signs; the larger magnitude wins.
    const Rational lhs = dp * dp, rhs = Rational(2) * dq * dq;
    const int mag = lhs.compare(rhs);
    return mag > 0 ? sign(dp) : sign(dq);
}

int compare(const QuadHeight& a, const Rational& r) { return compare(a, QuadHeight{r, 0}); }

AffineBrush::AffineBrush(std::vector<BrushHair> hairs, std::map<std::string, std::string> sigma,
                         Rational lambda, Rational Q)
    : hairs_(std::move(hairs)), sigma_(std::move(sigma)), lambda_(std::move(lambda)), Q_(std::move(Q)) {
    if (hairs_.empty()) throw PreconditionError("brush needs at least one hair");
    if (lambda_ <= 1) throw PreconditionError("brush expansion must exceed 1");
    if (Q_ <= 0) throw PreconditionError("square half-side must be positive");
    for (std::size_t i = 0; i < hairs_.size(); ++i) {
        if (!index_.emplace(hairs_[i].id, i).second)
            throw PreconditionError("duplicate hair id " + hairs_[i].id);
    }
    for (const auto& h : hairs_) {
        auto it = sigma_.find(h.id);
        if (it == sigma_.end()) throw PreconditionError("sigma undefined on hair " + h.id);
        if (!index_.count(it->second)) throw PreconditionError("sigma maps to unknown hair " + it->second);
    }
    for (const auto& [from, to] : sigma_)
        if (!index_.count(from)) throw PreconditionError("sigma defined on unknown hair " + from);
}

const BrushHair& AffineBrush::hair(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw PreconditionError("unknown hair " + id);
    return hairs_[it->second];
}

const std::string& AffineBrush::image(const std::string& id) const {
    hair(id);
    return sigma_.at(id);
}

AffineBrush AffineBrush::random(int n_hairs, std::uint64_t seed, Rational lambda, Rational Q) {
    if (n_hairs < 1) throw PreconditionError("need at least one hair");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> num(-400, 400), den(1, 97), tnum(0, 80), pick(0, n_hairs - 1);
    std::vector<BrushHair> hairs;
    std::set<std::pair<Rational, Rational>> used;
    while (static_cast<int>(hairs.size()) < n_hairs) {
        int qn = num(rng);
        if (qn == 0) qn = 1;
        const Rational p(num(rng), den(rng)), q(qn, den(rng));
        if (!used.insert({p, q}).second) continue;
        hairs.push_back({"h" + std::to_string(hairs.size()), {p, q}, Rational(tnum(rng), 8)});
    }
    std::map<std::string, std::string> sigma;
    for (const auto& h : hairs) sigma[h.id] = hairs[static_cast<std::size_t>(pick(rng))].id;
    return AffineBrush(std::move(hairs), std::move(sigma), std::move(lambda), std::move(Q));
}

BrushPoint brush_map(const AffineBrush& B, const BrushPoint& p) {
    const BrushHair& h = B.hair(p.hair);
    if (p.t < h.t_y) throw PreconditionError("point lies below the endpoint of hair " + h.id);
    const BrushHair& img = B.hair(B.image(h.id));
    return {img.id, B.lambda() * (p.t - h.t_y) + img.t_y};
}

bool in_open_square(const AffineBrush& B, const BrushPoint& p) {
    const BrushHair& h = B.hair(p.hair);
    return active(B, h) && p.t < B.Q() && p.t > -B.Q();
}

bool in_closed_square(const AffineBrush& B, const BrushPoint& p) {
    const BrushHair& h = B.hair(p.hair);
    return compare(h.y, B.Q()) <= 0 && compare(h.y, Rational(-B.Q())) >= 0 && p.t <= B.Q() &&
           p.t >= -B.Q();
}

Rational zn_oracle(const AffineBrush& B, const std::string& hair, int n) {
    if (n < 0) throw PreconditionError("n must be >= 0");
    const BrushHair& h0 = B.hair(hair);
    Rational best = h0.t_y;
    Rational scale = 1;  // Lambda^j
    std::string cur = hair;
    for (int j = 0; j <= n; ++j) {
        const BrushHair& hj = B.hair(cur);
        if (active(B, hj)) {
            // t_j = Lambda^j (t - t_y(h0)) + t_y(hj) >= Q
            const Rational th = h0.t_y + (B.Q() - hj.t_y) / scale;
            if (th > best) best = th;
        }
        scale *= B.lambda();
        cur = B.image(cur);
    }
    return best;
}

Rational z_infinity(const AffineBrush& B, const std::string& hair) {
    // Along the eventual cycle each constraint repeats with an extra factor
    // Lambda^-period, so the supremum is reached before the first repeat.
    const auto [seq, pre] = hair_orbit(B, hair);
    (void)pre;
    return zn_oracle(B, hair, static_cast<int>(seq.size()) - 1);
}

Rational cauchy_constant(const AffineBrush& B) { return B.Q() / B.lambda(); }

BrushPoint pi_model(const AffineBrush& B, const BrushPoint& p) {
    const BrushHair& h = B.hair(p.hair);
    if (p.t < h.t_y) throw PreconditionError("point lies below the endpoint of hair " + h.id);
    const Rational z = z_infinity(B, p.hair);
    return {p.hair, p.t < z ? z : p.t};
}

BrushAxiomReport check_brush_axioms(const AffineBrush& B) {
    BrushAxiomReport r;
    const auto& hs = B.hairs();
    for (const auto& h : hs) {
        if (sign(h.y.q) == 0) {
            r.heights_irrational = false;
            r.violations.push_back("hair " + h.id + " has rational height");
        }
        if (h.t_y < 0) {
            r.half_lines = false;
            r.violations.push_back("hair " + h.id + " has negative endpoint");
        }
    }
    std::vector<std::size_t> order(hs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return compare(hs[a].y, hs[b].y) < 0; });
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        if (compare(hs[order[i]].y, hs[order[i + 1]].y) == 0) {
            r.heights_distinct = false;
            r.violations.push_back("hairs " + hs[order[i]].id + " and " + hs[order[i + 1]].id +
                                   " share a height");
        }
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
        const BrushHair& h = hs[order[i]];
        HairNeighbors nb{h.id, {}, {}};
        if (i + 1 < order.size()) {
            const BrushHair& a = hs[order[i + 1]];
            nb.above = a.id;
            nb.gap_above = a.y.approx() - h.y.approx();
            nb.endpoint_gap_above = std::abs(static_cast<double>(a.t_y - h.t_y));
        }
        if (i > 0) {
            const BrushHair& b = hs[order[i - 1]];
            nb.below = b.id;
            nb.gap_below = h.y.approx() - b.y.approx();
            nb.endpoint_gap_below = std::abs(static_cast<double>(b.t_y - h.t_y));
        }
        r.neighbors.push_back(std::move(nb));
    }
    r.density_note = hs.size() < 2 ? "not applicable (finite)"
                                   : "approximate: neighbor gaps of a finite family";
    return r;
}

int crossings(const BrushHair& h, const Rational& Q) {
    int count = 0;
    // Horizontal edges y = +-Q: only met when y equals +-Q, which a height with q != 0 never does.
    if (compare(h.y, Q) == 0 || compare(h.y, Rational(-Q)) == 0) {
        // The whole overlap with [-Q, Q] lies on the boundary; count it once.
        if (h.t_y <= Q) ++count;
        return count;
    }
    const bool within = compare(h.y, Q) < 0 && compare(h.y, Rational(-Q)) > 0;
    if (!within) return 0;
    if (h.t_y <= -Q) ++count;  // left edge
    if (h.t_y <= Q) ++count;   // right edge
    return count;
}

int crossing_count(const AffineBrush& B, const Rational& Q) {
    int best = 0;
    for (const auto& h : B.hairs()) best = std::max(best, crossings(h, Q));
    return best;
}

std::vector<BrushDefect> semiconjugacy_defects(const AffineBrush& B, const std::vector<BrushPoint>& grid) {
    std::vector<BrushDefect> out;
    for (const auto& p : grid) {
        if (brush_map(B, pi_model(B, p)) == pi_model(B, brush_map(B, p))) continue;
        // Once Lambda^j (t - t_y) passes Q the orbit stays outside; endpoint
        // orbits are eventually periodic, so the hair count bounds the search.
        bool meets = false;
        BrushPoint q = p;
        const Rational excess = p.t - B.hair(p.hair).t_y;
        Rational grown = excess;
        for (std::size_t j = 0;; ++j) {
            if (in_closed_square(B, q)) {
                meets = true;
                break;
            }
            if (sign(excess) > 0 ? grown > B.Q() : j > B.hairs().size()) break;
            q = brush_map(B, q);
            grown *= B.lambda();
        }
        out.push_back({p, meets});
    }
    return out;
}

}  // namespace eldyn
