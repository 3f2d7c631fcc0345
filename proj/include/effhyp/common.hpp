#ifndef EFFHYP_COMMON_HPP
#define EFFHYP_COMMON_HPP

// Shared small utilities: smooth cutoffs, deterministic parallel map,
// shortest round-trip number formatting, finite-difference helpers.

#include <charconv>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace effhyp {

inline void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::domain_error(std::string("non-finite ") + what);
}

// C^infty smoothstep: 0 for r<=0, 1 for r>=1.
inline double smoothstep(double r) {
    auto g = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
    double a = g(r), b = g(1.0 - r);
    if (a == 0.0) return 0.0;
    if (b == 0.0) return 1.0;
    return a / (a + b);
}

// Symmetric plateau cutoff: 1 on |s|<=1, 0 on |s|>=2 (localization chi of sec 4.1).
inline double chi_plateau(double s) { return smoothstep(2.0 - std::fabs(s)); }

// One-sided profile: 1 for s<=0, 0 for s>=1 (the psi cutoff of sec 3.2).
inline double chi_onesided(double s) { return smoothstep(1.0 - s); }

// Shortest round-trip decimal for a double (CSV determinism).
inline std::string fmt_double(double v) {
    if (v == 0.0) v = 0.0; // canonical zero: avoid "-0" in reports
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

// Deterministic parallel map over [0,n): results written by index, reduction
// (if any) done serially by the caller.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Central difference with Richardson extrapolation; err is a crude estimate
// from the difference of the two stencils.
template <class F>
double dcentral(F&& f, double x, double h, double* err = nullptr) {
    double d1 = (f(x + h) - f(x - h)) / (2 * h);
    double d2 = (f(x + h / 2) - f(x - h / 2)) / h;
    double d = (4 * d2 - d1) / 3;
    if (err) *err = std::fabs(d2 - d1);
    return d;
}

} // namespace effhyp

#endif
