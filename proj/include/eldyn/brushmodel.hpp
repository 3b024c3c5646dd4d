#pragma once

#include "eldyn/core.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace eldyn {

/// p + q sqrt(2) with rational p, q. Irrational whenever q != 0.
struct QuadHeight {
    Rational p;
    Rational q;

    double approx() const;
    friend bool operator==(const QuadHeight&, const QuadHeight&) = default;
};

/// Exact sign of (a - b).
int compare(const QuadHeight& a, const QuadHeight& b);
/// Exact sign of (a - r) for rational r.
int compare(const QuadHeight& a, const Rational& r);

struct BrushHair {
    std::string id;
    QuadHeight y;
    Rational t_y;
};

/// Finite straight brush with affine hair dynamics
/// t -> Lambda (t - t_y(h)) + t_y(sigma h) and exit square (-Q, Q)^2.
class AffineBrush {
public:
    AffineBrush(std::vector<BrushHair> hairs, std::map<std::string, std::string> sigma,
                Rational lambda, Rational Q);

    const std::vector<BrushHair>& hairs() const { return hairs_; }
    const std::map<std::string, std::string>& sigma() const { return sigma_; }
    const Rational& lambda() const { return lambda_; }
    const Rational& Q() const { return Q_; }

    const BrushHair& hair(const std::string& id) const;
    const std::string& image(const std::string& id) const;

    /// Random brush satisfying the axioms: distinct heights, q != 0.
    static AffineBrush random(int n_hairs, std::uint64_t seed, Rational lambda = 2, Rational Q = 3);

private:
    std::vector<BrushHair> hairs_;
    std::map<std::string, std::size_t> index_;
    std::map<std::string, std::string> sigma_;
    Rational lambda_;
    Rational Q_;
};

struct BrushPoint {
    std::string hair;
    Rational t;
    friend bool operator==(const BrushPoint&, const BrushPoint&) = default;
};

BrushPoint brush_map(const AffineBrush& B, const BrushPoint& p);

/// True when the point lies in the open square (-Q, Q)^2.
bool in_open_square(const AffineBrush& B, const BrushPoint& p);
/// True when the point lies in the closed square.
bool in_closed_square(const AffineBrush& B, const BrushPoint& p);

/// Minimal t on the hair whose first n+1 orbit points avoid the open square.
Rational zn_oracle(const AffineBrush& B, const std::string& hair, int n);
/// lim z_n, attained within preperiod + period steps of the hair orbit.
Rational z_infinity(const AffineBrush& B, const std::string& hair);
/// Explicit constant with z_{n+1} - z_n <= C / Lambda^n.
Rational cauchy_constant(const AffineBrush& B);

BrushPoint pi_model(const AffineBrush& B, const BrushPoint& p);

struct HairNeighbors {
    std::string id;
    std::optional<std::string> above;
    std::optional<std::string> below;
    double gap_above = kInf;
    double gap_below = kInf;
    double endpoint_gap_above = kInf;
    double endpoint_gap_below = kInf;
};

struct BrushAxiomReport {
    bool heights_distinct = true;
    bool heights_irrational = true;
    bool half_lines = true;
    std::vector<std::string> violations;
    std::vector<HairNeighbors> neighbors;
    /// Finite families only give neighbor gaps as density evidence.
    std::string density_note;

    bool ok() const { return heights_distinct && heights_irrational && half_lines; }
};

BrushAxiomReport check_brush_axioms(const AffineBrush& B);

/// Intersections of [t_y, inf) x {y} with the boundary of (-Q, Q)^2.
int crossings(const BrushHair& h, const Rational& Q);
/// Maximum of crossings over all hairs.
int crossing_count(const AffineBrush& B, const Rational& Q);

struct BrushDefect {
    BrushPoint point;
    bool orbit_meets_closed_square;
};

/// Grid points p where brush_map(pi(p)) != pi(brush_map(p)).
std::vector<BrushDefect> semiconjugacy_defects(const AffineBrush& B, const std::vector<BrushPoint>& grid);

}  // namespace eldyn
