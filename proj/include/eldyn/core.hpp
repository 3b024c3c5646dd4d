#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <cstdint>
#include <limits>
#include <variant>

namespace eldyn {

using Complex = std::complex<double>;
using Rational = boost::multiprecision::cpp_rational;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kEightPi = 8.0 * kPi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kEps = std::numeric_limits<double>::epsilon();

inline const Complex kI{0.0, 1.0};

namespace region {

struct Disc {
    Complex center;
    double radius;
};

/// Points with real part strictly greater than `q`.
struct HalfPlane {
    double q;
};

/// Open annulus a < |z| < b. `b` may be +inf (complement of a closed disc).
struct Annulus {
    double a;
    double b;
};

/// Vertical strip a < Re z < b.
struct Strip {
    double a;
    double b;
};

/// Open square (-Q, Q)^2 with exact rational half-side.
struct Square {
    Rational q;
};

}  // namespace region

using Region = std::variant<region::Disc, region::HalfPlane, region::Annulus,
                            region::Strip, region::Square>;

Region make_disc(Complex center, double radius);
Region make_half_plane(double q);
Region make_annulus(double a, double b);
Region make_strip(double a, double b);
Region make_square(Rational q);

bool region_contains(const Region& r, Complex z);

/// Exact membership in a Square for rational coordinates.
bool square_contains(const region::Square& s, const Rational& re, const Rational& im);

/// Image of a Strip or HalfPlane under exp. Throws UnsupportedRegion otherwise.
Region exp_image(const Region& r);

/// Certified error carrier: analytic bound plus a count of ulp-scale roundings.
struct ErrorBudget {
    double analytic_bound = 0.0;
    std::int64_t float_epsilon_count = 0;

    /// `scale` is the magnitude the roundings were applied at.
    double total(double scale = 1.0) const {
        return analytic_bound + static_cast<double>(float_epsilon_count) * kEps * scale;
    }

    ErrorBudget& operator+=(const ErrorBudget& o) {
        analytic_bound += o.analytic_bound;
        float_epsilon_count += o.float_epsilon_count;
        return *this;
    }
};

inline ErrorBudget operator+(ErrorBudget a, const ErrorBudget& b) { return a += b; }

/// Exact comparison of a double against a rational; returns -1, 0 or 1.
int compare_exact(double x, const Rational& q);

}  // namespace eldyn
