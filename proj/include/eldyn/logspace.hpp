#pragma once

#include "eldyn/core.hpp"
#include "eldyn/families.hpp"

#include <compare>
#include <optional>
#include <string>
#include <vector>

namespace eldyn {

/// Index of a logarithmic tract. `sign` is +1 for every tract of an exponential
/// map and for the right-hand tracts of exp_pair, -1 for the left-hand ones.
/// `k` counts 2 pi i translates.
struct TractId {
    int sign = 1;
    long k = 0;

    friend bool operator==(const TractId&, const TractId&) = default;
    friend auto operator<=>(const TractId&, const TractId&) = default;
};

std::string to_string(const TractId& t);

struct TractLookup {
    std::optional<TractId> id;
    /// Set when w is within 8 ulps of a tract boundary; `id` is then empty.
    bool boundary = false;
};

/// Value of the logarithmic transform. `escaped` marks overflow of Re F.
struct LogImage {
    Complex value;
    TractId tract;
    bool escaped = false;
};

/// The lift F of a family through exp, exp(F(w)) = f(exp w), defined on the
/// logarithmic tracts above log L.
///
/// Every supported family reduces to F(w) = F0(w + shift) + offset, where F0 is
/// either e^u or the continuous logarithm of a e^{e^u} + b e^{-e^u}. Domain
/// rescaling by lambda adds Log lambda to `shift`; range rescaling adds it to
/// `offset`.
class LogTransform {
public:
    explicit LogTransform(FunctionFamily family);

    const FunctionFamily& family() const { return family_; }
    double log_L() const { return log_L_; }
    /// Branch constant added to the base lift (Log lambda for exponential).
    Complex offset() const { return offset_; }
    /// Translation applied before the base lift; tracts sit at T_base - shift.
    Complex shift() const { return shift_; }
    bool is_pair() const { return pair_; }

    TractLookup tract_of(Complex w) const;
    LogImage eval(Complex w) const;
    Complex inverse_branch(const TractId& t, Complex v) const;
    Complex derivative(Complex w) const;
    /// F(w + h) - F(w) without cancellation, h small against the tract scale.
    Complex eval_delta(Complex w, Complex h) const;
    /// F_T^{-1}(v + h) - F_T^{-1}(v) without cancellation.
    Complex inverse_delta(const TractId& t, Complex v, Complex h) const;
    /// Upper bound for |(F_T^{-1})'| on the disc of radius r about v (any T).
    /// Infinite when the disc leaves Re > log L.
    double inverse_lipschitz(Complex v, double r) const;

    /// Imaginary part of the center of the band holding tract t.
    double y_anchor(const TractId& t) const;
    void check_id(const TractId& t) const;

private:
    // Base lift in u = w + shift coordinates, without the offset.
    struct BaseImage {
        Complex value;
        TractId tract;
        bool escaped = false;
        bool valid = true;  // false when the pair branch formula is out of range
    };
    BaseImage base_eval(Complex u) const;
    // log((1 + sqrt(1 - eps)) / 2) for the pair lift.
    Complex pair_correction(Complex eps) const;

    FunctionFamily family_;
    double log_L_;
    Complex shift_{};
    Complex offset_{};
    bool pair_ = false;
    Complex a_{1.0, 0.0};
    Complex b_{};
};

struct ExpansionCheck {
    double bound;
    double actual;
};

/// Koebe-type lower bound (Re F(w) - log L)/(4 pi) next to |F'(w)|.
ExpansionCheck expansion_lower_bound(const LogTransform& F, Complex w);

/// inf over sampled tract boundary points of Re w - (log L + 8 pi).
double normalized_margin(const LogTransform& F, int n_samples);

/// Eventually periodic external address prefix . period^infinity, kept in
/// canonical form (primitive period, shortest prefix).
class ExternalAddress {
public:
    ExternalAddress(std::vector<TractId> prefix, std::vector<TractId> period);
    static ExternalAddress constant(TractId t) { return ExternalAddress({}, {t}); }

    const std::vector<TractId>& prefix() const { return prefix_; }
    const std::vector<TractId>& period() const { return period_; }

    const TractId& at(std::size_t n) const;
    ExternalAddress shift(std::size_t n = 1) const;
    /// Largest |k| among the entries.
    long max_abs_k() const;
    std::string to_string() const;

    friend bool operator==(const ExternalAddress&, const ExternalAddress&) = default;

private:
    std::vector<TractId> prefix_;
    std::vector<TractId> period_;
};

/// Equal from the second entry on, first entries 2 pi i k translates.
bool address_equiv(const ExternalAddress& s1, const ExternalAddress& s2);

/// First index where the two addresses differ, or nullopt when equal.
std::optional<std::size_t> first_difference(const ExternalAddress& s1, const ExternalAddress& s2);

}  // namespace eldyn
