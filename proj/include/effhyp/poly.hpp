#ifndef EFFHYP_POLY_HPP
#define EFFHYP_POLY_HPP

// Dense univariate polynomials with real coefficients (index = degree) and a
// Durand-Kerner simultaneous root iteration. Only used for the tiny
// polynomials of this project (degree <= ~12): discriminants in t and
// characteristic polynomials of small Hamilton matrices.

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <vector>

#include "common.hpp"

namespace effhyp::poly {

using cd = std::complex<double>;
using Poly = std::vector<double>; // p(t) = sum c[k] t^k

inline Poly trim(Poly p, double tol = 0.0) {
    while (p.size() > 1 && std::abs(p.back()) <= tol) p.pop_back();
    return p;
}

inline Poly add(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return r;
}

inline Poly scale(Poly a, double s) {
    for (auto& c : a) c *= s;
    return a;
}

inline Poly mul(const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

inline Poly pow3(const Poly& a) { return mul(a, mul(a, a)); }

inline double eval(const Poly& p, double t) {
    double r = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) r = r * t + p[i];
    return r;
}

inline cd eval(const Poly& p, cd t) {
    cd r = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) r = r * t + p[i];
    return r;
}

inline Poly derivative(const Poly& p) {
    if (p.size() <= 1) return {0.0};
    Poly r(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) r[i - 1] = p[i] * double(i);
    return r;
}

// All complex roots by Durand-Kerner. Deterministic start; fine for the small
// well-scaled polynomials used here.
inline std::vector<cd> roots(const Poly& p_in) {
    Poly p = trim(p_in);
    std::size_t n = p.size() - 1;
    if (n == 0) return {};
    std::vector<cd> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = p[i] / p[n];
    double radius = 1.0;
    for (auto& ci : c) radius = std::max(radius, std::abs(ci));
    radius = 1.0 + radius;
    std::vector<cd> w(n);
    for (std::size_t k = 0; k < n; ++k)
        w[k] = std::polar(radius, 2 * M_PI * double(k) / double(n) + 0.4);
    auto peval = [&](cd z) {
        cd r = 1.0;
        for (std::size_t i = n; i-- > 0;) r = r * z + c[i];
        return r;
    };
    for (int it = 0; it < 1000; ++it) {
        double moved = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            cd denom = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != k) denom *= (w[k] - w[j]);
            cd delta = peval(w[k]) / denom;
            w[k] -= delta;
            moved = std::max(moved, std::abs(delta));
        }
        if (moved < 1e-15 * radius) break;
    }
    std::sort(w.begin(), w.end(), [](cd a, cd b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return w;
}

} // namespace effhyp::poly

#endif
