#pragma once

#include "eldyn/core.hpp"

#include <memory>
#include <string>
#include <vector>

namespace eldyn {

/// A concrete entire map of bounded type with closed-form inverse branches in
/// logarithmic coordinates.
///
/// Four kinds are modeled:
///   exponential      z -> lambda e^z
///   exp_pair         z -> a e^z + b e^{-z}
///   domain_rescaled  z -> base(lambda z)
///   range_rescaled   z -> lambda base(z)
///
/// `K` bounds the singular values (S(f) inside the disc of radius K) and `L` is
/// the cutoff with L >= K and f(D_K) inside D_L.
class FunctionFamily {
public:
    enum class Kind { exponential, exp_pair, domain_rescaled, range_rescaled };

    static FunctionFamily exponential(Complex lambda);
    static FunctionFamily exp_pair(Complex a, Complex b);
    static FunctionFamily domain_rescaled(const FunctionFamily& base, Complex lambda);
    static FunctionFamily range_rescaled(const FunctionFamily& base, Complex lambda);

    Kind kind() const { return kind_; }
    /// lambda for exponential and both rescalings, `a` for exp_pair.
    Complex param() const { return p1_; }
    /// `b` for exp_pair.
    Complex param_b() const { return p2_; }
    const FunctionFamily& base() const { return *base_; }
    bool has_base() const { return static_cast<bool>(base_); }
    /// True when tracts come in two signs (exp_pair, possibly rescaled).
    bool is_pair() const { return kind_ == Kind::exp_pair || (base_ && base_->is_pair()); }

    double K() const { return K_; }
    double L() const { return L_; }
    double log_L() const;

    /// Returns a copy with overridden radii. Throws PreconditionError unless
    /// 0 < K <= L.
    FunctionFamily with_radii(double K, double L) const;

    std::string describe() const;

private:
    FunctionFamily() = default;
    void set_default_radii();

    Kind kind_ = Kind::exponential;
    Complex p1_{1.0, 0.0};
    Complex p2_{0.0, 0.0};
    std::shared_ptr<const FunctionFamily> base_;
    double K_ = 1.0;
    double L_ = 3.0;
};

/// Result of evaluating a family. Overflow is reported, not thrown: `escaped`
/// is set and `value` is meaningless; `log_modulus` always holds log|f(z)|
/// (or the overflowing exponent's real part).
struct Evaluation {
    Complex value;
    double log_modulus = 0.0;
    bool escaped = false;
};

Evaluation evaluate(const FunctionFamily& f, Complex z);
Evaluation derivative(const FunctionFamily& f, Complex z);

struct SingularData {
    double K;
    std::vector<Complex> values;
};

/// Singular values and the default radius bound for them.
SingularData singular_bound(const FunctionFamily& f);

/// Critical points of exp_pair in the principal strip (empty for other kinds).
std::vector<Complex> critical_points(const FunctionFamily& f);

enum class RescaleMode { domain, range };

struct Rescaling {
    Complex lambda;
    FunctionFamily g;
};

/// lambda = K / (e^{8 pi} L); domain mode yields f(lambda z), range mode lambda f.
Rescaling disjoint_type_rescale(const FunctionFamily& f, RescaleMode mode);

struct DisjointTypeCertificate {
    double checked_radius = 0.0;
    int boundary_samples = 0;
    double max_image_modulus = 0.0;
    std::vector<double> singular_moduli;

    bool valid() const;
};

/// Samples the circle of radius K. The verdict is a sampled certificate.
DisjointTypeCertificate verify_disjoint_type(const FunctionFamily& f, int n_samples = 1024);

/// max |f| on the circle |z| = r, sampled at n points (includes angle 0).
double max_modulus_on_circle(const FunctionFamily& f, double r, int n);

}  // namespace eldyn
