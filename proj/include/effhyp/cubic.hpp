#ifndef EFFHYP_CUBIC_HPP
#define EFFHYP_CUBIC_HPP

// Depressed real cubics p(tau) = tau^3 - a*tau - b: discriminant,
// roots (trigonometric / Cardano closed form + Newton polish),
// multiplicity classification, hyperbolicity test.
//
// Convention: the cubic is tau^3 - a*tau - b (minus b). The discriminant
// Delta = 4a^3 - 27b^2 does not see the sign of b, but root values do.

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "common.hpp"

namespace effhyp::cubic {

struct CubicSymbol {
    double a = 0.0;
    double b = 0.0;
};

enum class MultClass { simple, dbl, triple, complex_pair };

inline const char* to_string(MultClass m) {
    switch (m) {
        case MultClass::simple: return "simple";
        case MultClass::dbl: return "double";
        case MultClass::triple: return "triple";
        default: return "complex_pair";
    }
}

struct RootTriple {
    std::complex<double> roots[3]; // sorted by (Re, Im)
    MultClass multiplicity_class = MultClass::simple;
    double tolerance_used = 0.0;
};

namespace detail {

// two-product: x*y = p + e exactly
struct dd { double hi, lo; };

inline dd two_prod(double x, double y) {
    double p = x * y;
    return {p, std::fma(x, y, -p)};
}

inline dd two_sum(double x, double y) {
    double s = x + y;
    double bb = s - x;
    return {s, (x - (s - bb)) + (y - bb)};
}

// 4a^3 - 27b^2 with compensated products; keeps ~2x double precision
// through the cancellation.
inline double disc_compensated(double a, double b) {
    dd a2 = two_prod(a, a);
    dd a3h = two_prod(a2.hi, a);
    double a3lo = a2.lo * a + a3h.lo;
    dd b2 = two_prod(b, b);
    dd b2s = two_prod(27.0, b2.hi);
    double b2lo = 27.0 * b2.lo + b2s.lo;
    dd main = two_sum(4.0 * a3h.hi, -b2s.hi);
    return main.hi + (main.lo + 4.0 * a3lo - b2lo);
}

} // namespace detail

inline double discriminant(const CubicSymbol& c) {
    require_finite(c.a, "cubic coefficient a");
    require_finite(c.b, "cubic coefficient b");
    double d = 4.0 * c.a * c.a * c.a - 27.0 * c.b * c.b;
    double scale = std::max(1.0, std::fabs(c.a * c.a * c.a));
    if (std::fabs(d) < 1e-10 * scale) d = detail::disc_compensated(c.a, c.b);
    return d;
}

inline bool is_hyperbolic(const CubicSymbol& c, double tol) {
    if (tol < 0) throw std::invalid_argument("is_hyperbolic: tol < 0");
    return discriminant(c) >= -tol;
}

inline RootTriple roots(const CubicSymbol& c, double tol) {
    if (!(tol > 0)) throw std::invalid_argument("roots: tol must be > 0");
    require_finite(c.a, "cubic coefficient a");
    require_finite(c.b, "cubic coefficient b");
    const double a = c.a, b = c.b;
    std::complex<double> r[3];

    double Delta = discriminant(c);
    if (a == 0.0 && b == 0.0) {
        r[0] = r[1] = r[2] = 0.0;
    } else if (Delta >= 0.0) {
        // three real roots: 2 sqrt(a/3) cos((acos(3 sqrt(3) b / (2 a^{3/2})) - 2 pi k)/3)
        double q = a / 3.0; // a > 0 here unless a=b=0 handled above
        if (q <= 0.0) {
            // Delta >= 0 with a <= 0 forces a = b = 0 up to rounding
            r[0] = r[1] = r[2] = 0.0;
        } else {
            double sq = std::sqrt(q);
            double arg = b / (2.0 * q * sq);
            arg = std::clamp(arg, -1.0, 1.0);
            double th = std::acos(arg);
            for (int k = 0; k < 3; ++k) r[k] = 2.0 * sq * std::cos((th - 2.0 * M_PI * k) / 3.0);
        }
    } else {
        // one real root, conjugate complex pair (Cardano, stable branch)
        // tau^3 + p tau + q with p = -a, q = -b
        double p = -a, q = -b;
        double disc = q * q / 4.0 + p * p * p / 27.0; // = -Delta/108 > 0
        double s = std::sqrt(disc);
        double u3 = -q / 2.0 + (q <= 0 ? s : -s); // avoid cancellation
        double u = std::cbrt(u3);
        double v = (u != 0.0) ? -p / (3.0 * u) : 0.0;
        double real_root = u + v;
        double re = -real_root / 2.0;
        double im = std::fabs(u - v) * std::sqrt(3.0) / 2.0;
        r[0] = real_root;
        r[1] = {re, im};
        r[2] = {re, -im};
    }

    // Newton polish (complex); leaves exact multiples alone
    for (auto& z : r) {
        for (int it = 0; it < 3; ++it) {
            std::complex<double> f = (z * z - a) * z - b;
            std::complex<double> df = 3.0 * z * z - a;
            if (std::abs(df) < 1e-30) break;
            std::complex<double> step = f / df;
            double zscale = std::max({1.0, std::abs(z)});
            if (std::abs(step) > 0.5 * zscale) break; // near-multiple root: don't bounce
            z -= step;
        }
    }

    std::sort(std::begin(r), std::end(r), [](auto x, auto y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });

    RootTriple out;
    double scale = std::max({1.0, std::sqrt(std::fabs(a)), std::cbrt(std::fabs(b))});
    double ctol = tol * scale;
    out.tolerance_used = ctol;
    for (int i = 0; i < 3; ++i) out.roots[i] = r[i];

    bool pair = std::fabs(r[0].imag()) > ctol || std::fabs(r[1].imag()) > ctol || std::fabs(r[2].imag()) > ctol;
    if (pair) {
        out.multiplicity_class = MultClass::complex_pair;
    } else {
        auto close = [&](int i, int j) { return std::abs(r[i] - r[j]) <= ctol; };
        int clusters = 3 - int(close(0, 1)) - int(close(1, 2));
        if (clusters <= 1)
            out.multiplicity_class = MultClass::triple;
        else if (clusters == 2)
            out.multiplicity_class = MultClass::dbl;
        else
            out.multiplicity_class = MultClass::simple;
    }
    return out;
}

} // namespace effhyp::cubic

#endif
