#ifndef EFFHYP_SYMBOLS_HPP
#define EFFHYP_SYMBOLS_HPP

// Symbol families a(t,x,xi), b(t,x,xi) for the third order operator
//   p = tau^3 - a <xi>^2 tau - b <xi>^3   (minus-b convention throughout),
// triple-characteristic detection, Hamilton-map spectrum / effective
// hyperbolicity, effective factorization a = e(t + alpha), and the
// localization to a conic neighborhood of (0, xibar).

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"
#include "cubic.hpp"
#include "poly.hpp"

namespace effhyp::symbols {

using Vec = std::vector<double>;
using Evaluator = std::function<double(double, const Vec&, const Vec&)>;
// coefficients in t of a polynomial symbol at fixed (x, xi)
using PolyEvaluator = std::function<poly::Poly(const Vec&, const Vec&)>;

inline double norm2(const Vec& v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

struct SymbolFamily {
    Evaluator a_eval;
    Evaluator b_eval;
    int d = 1;
    std::string label;
    // optional exact t-polynomial backends (set for all built-ins)
    PolyEvaluator a_poly;
    PolyEvaluator b_poly;

    double a(double t, const Vec& x, const Vec& xi) const { return a_eval(t, x, xi); }
    double b(double t, const Vec& x, const Vec& xi) const { return b_eval(t, x, xi); }
};

struct FamilyParams {
    double m = 3.0;           // degeneracy order of example16's b
    double a2 = 1.0;          // BBP coefficient of t in a
    double b3 = 0.1;          // BBP coefficient of t^2 in -b
    double alpha_coeff = 1.0; // alpha(x) = alpha_coeff * |x|^2
    int d = 1;
    // validation grid for the constructor checks
    double t_max = 0.5;
    double x_max = 0.5;
};

namespace detail {

inline void validate_family(const SymbolFamily& f, const FamilyParams& prm) {
    Vec x(f.d, 0.0), xi(f.d, 0.0);
    xi[0] = 1.0;
    // degree-0 homogeneity in xi, by sampling
    for (double xv : {0.0, 0.3 * prm.x_max, prm.x_max}) {
        x.assign(f.d, xv);
        for (double t : {0.0, 0.5 * prm.t_max, prm.t_max}) {
            double a1 = f.a(t, x, xi), b1 = f.b(t, x, xi);
            for (double s : {2.0, 10.0}) {
                Vec sxi = xi;
                for (auto& c : sxi) c *= s;
                if (std::fabs(f.a(t, x, sxi) - a1) > 1e-9 || std::fabs(f.b(t, x, sxi) - b1) > 1e-9)
                    throw std::invalid_argument(f.label + ": not homogeneous of degree 0 at t=" +
                                                fmt_double(t) + " x=" + fmt_double(xv));
            }
        }
    }
    // hyperbolicity on the validation grid, t >= 0
    for (int it = 0; it <= 10; ++it)
        for (int ix = -4; ix <= 4; ++ix) {
            double t = prm.t_max * it / 10.0;
            x.assign(f.d, prm.x_max * ix / 4.0);
            double dis = cubic::discriminant({f.a(t, x, xi), f.b(t, x, xi)});
            if (dis < -1e-12)
                throw std::invalid_argument(f.label + ": hyperbolicity fails at t=" + fmt_double(t) +
                                            " x=" + fmt_double(x[0]) + " (Delta=" + fmt_double(dis) + ")");
        }
}

inline double alpha_quad(const FamilyParams& prm, const Vec& x) {
    double s = 0.0;
    for (double c : x) s += c * c;
    return prm.alpha_coeff * s;
}

} // namespace detail

enum class Builtin { tricomi_product, bbp, example16, custom };

// custom variant takes explicit evaluators
inline SymbolFamily builtin(Builtin name, const FamilyParams& prm = {},
                            Evaluator custom_a = nullptr, Evaluator custom_b = nullptr,
                            PolyEvaluator custom_a_poly = nullptr, PolyEvaluator custom_b_poly = nullptr) {
    SymbolFamily f;
    f.d = prm.d;
    switch (name) {
        case Builtin::tricomi_product:
            // q1*q2 with q1 = tau^2 - t|xi|^2, q2 = tau:  a = t, b = 0
            f.label = "tricomi_product";
            f.a_eval = [](double t, const Vec&, const Vec&) { return t; };
            f.b_eval = [](double, const Vec&, const Vec&) { return 0.0; };
            f.a_poly = [](const Vec&, const Vec&) { return poly::Poly{0.0, 1.0}; };
            f.b_poly = [](const Vec&, const Vec&) { return poly::Poly{0.0}; };
            break;
        case Builtin::bbp:
            // a = t*a2 + alpha(x), b = -t^2 b3
            f.label = "bbp";
            f.a_eval = [prm](double t, const Vec& x, const Vec&) { return t * prm.a2 + detail::alpha_quad(prm, x); };
            f.b_eval = [prm](double t, const Vec&, const Vec&) { return -t * t * prm.b3; };
            f.a_poly = [prm](const Vec& x, const Vec&) { return poly::Poly{detail::alpha_quad(prm, x), prm.a2}; };
            f.b_poly = [prm](const Vec&, const Vec&) { return poly::Poly{0.0, 0.0, -prm.b3}; };
            break;
        case Builtin::example16: {
            // a = t + alpha(x), b = -(t^m/2 - t) sqrt(alpha(x)), integer m >= 2
            f.label = "example16";
            int m = int(prm.m);
            if (m < 2 || double(m) != prm.m) throw std::invalid_argument("example16: m must be an integer >= 2");
            f.a_eval = [prm](double t, const Vec& x, const Vec&) { return t + detail::alpha_quad(prm, x); };
            f.b_eval = [prm, m](double t, const Vec& x, const Vec&) {
                return -(std::pow(t, m) / 2.0 - t) * std::sqrt(detail::alpha_quad(prm, x));
            };
            f.a_poly = [prm](const Vec& x, const Vec&) { return poly::Poly{detail::alpha_quad(prm, x), 1.0}; };
            f.b_poly = [prm, m](const Vec& x, const Vec&) {
                double r = std::sqrt(detail::alpha_quad(prm, x));
                poly::Poly p(std::size_t(m) + 1, 0.0);
                p[1] = r;        // +t sqrt(alpha)
                p[m] = -r / 2.0; // -t^m/2 sqrt(alpha)
                return p;
            };
            break;
        }
        case Builtin::custom:
            f.label = "custom";
            if (!custom_a || !custom_b) throw std::invalid_argument("custom family needs a and b evaluators");
            f.a_eval = std::move(custom_a);
            f.b_eval = std::move(custom_b);
            f.a_poly = std::move(custom_a_poly);
            f.b_poly = std::move(custom_b_poly);
            break;
    }
    detail::validate_family(f, prm);
    return f;
}

struct TriplePoint {
    double t = 0.0;
    Vec x;
    Vec xi; // unit covector
    double tau = 0.0;
    bool refined = false;
    double a_resid = 0.0, b_resid = 0.0;
};

inline std::vector<TriplePoint> find_triple_points(const SymbolFamily& f,
                                                   const std::vector<std::pair<Vec, Vec>>& grid,
                                                   double tol) {
    if (grid.empty()) throw std::invalid_argument("find_triple_points: empty grid");
    std::vector<TriplePoint> out;
    for (const auto& [x0, xi0] : grid) {
        Vec xi = xi0;
        double nx = norm2(xi);
        if (std::fabs(nx - 1.0) > 1e-12)
            throw std::invalid_argument("find_triple_points: xi samples must be normalized");
        Vec x = x0;
        double av = f.a(0.0, x, xi), bv = f.b(0.0, x, xi);
        if (std::fabs(av) > tol || std::fabs(bv) > tol) continue;

        // Gauss-Newton on (a,b)(0,x,xi) = 0 over x
        bool refined = false;
        const int d = f.d;
        // linear convergence only when the zero of a is degenerate (the
        // generic case here: a ~ alpha(x) with a double zero), so be generous
        for (int it = 0; it < 80; ++it) {
            av = f.a(0.0, x, xi);
            bv = f.b(0.0, x, xi);
            if (std::fabs(av) < 1e-14 && std::fabs(bv) < 1e-14) { refined = true; break; }
            // 2 x d Jacobian by central differences
            std::vector<double> Ja(d), Jb(d);
            double h = 1e-6;
            for (int j = 0; j < d; ++j) {
                Vec xp = x, xm = x;
                xp[j] += h;
                xm[j] -= h;
                Ja[j] = (f.a(0.0, xp, xi) - f.a(0.0, xm, xi)) / (2 * h);
                Jb[j] = (f.b(0.0, xp, xi) - f.b(0.0, xm, xi)) / (2 * h);
            }
            // normal equations (J^T J) dx = -J^T r, d x d; d is 1 or 2 here,
            // solve by Gaussian elimination with a singularity guard
            std::vector<std::vector<double>> N(d, std::vector<double>(d + 1, 0.0));
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < d; ++j) N[i][j] = Ja[i] * Ja[j] + Jb[i] * Jb[j];
                N[i][d] = -(Ja[i] * av + Jb[i] * bv);
            }
            bool singular = false;
            for (int c = 0; c < d; ++c) {
                int piv = c;
                for (int rr = c + 1; rr < d; ++rr)
                    if (std::fabs(N[rr][c]) > std::fabs(N[piv][c])) piv = rr;
                if (std::fabs(N[piv][c]) < 1e-14) { singular = true; break; }
                std::swap(N[c], N[piv]);
                for (int rr = 0; rr < d; ++rr) {
                    if (rr == c) continue;
                    double fac = N[rr][c] / N[c][c];
                    for (int cc = c; cc <= d; ++cc) N[rr][cc] -= fac * N[c][cc];
                }
            }
            if (singular) break; // degenerate Jacobian: keep the raw point, flag unrefined
            bool moved = false;
            for (int j = 0; j < d; ++j) {
                double dx = N[j][d] / N[j][j];
                if (std::fabs(dx) > 1e-18) moved = true;
                x[j] += dx;
            }
            if (!moved) { refined = true; break; }
        }
        av = f.a(0.0, x, xi);
        bv = f.b(0.0, x, xi);
        if (std::fabs(av) > tol || std::fabs(bv) > tol) { x = x0; av = f.a(0.0, x, xi); bv = f.b(0.0, x, xi); refined = false; }
        out.push_back({0.0, x, xi, 0.0, refined, av, bv});
    }
    return out;
}

struct EffReport {
    std::vector<std::complex<double>> eigenvalues;
    bool nonzero_pair = false;
    double e_bar = 0.0;
    double fd_error = 0.0; // Richardson error estimate on the Hessian
};

namespace detail {

// full symbol with homogeneous |xi| weights (see README: reproduces the
// eq:koyuti pair exactly at |xibar| = 1)
inline double full_symbol(const SymbolFamily& f, const std::vector<double>& z) {
    int d = f.d;
    double t = z[0];
    Vec x(z.begin() + 1, z.begin() + 1 + d);
    double tau = z[1 + d];
    Vec xi(z.begin() + 2 + d, z.end());
    double nxi = norm2(xi);
    double a = f.a(t, x, xi), b = f.b(t, x, xi);
    return tau * tau * tau - a * nxi * nxi * tau - b * nxi * nxi * nxi;
}

inline std::vector<std::vector<double>> hessian(const SymbolFamily& f, const std::vector<double>& z0,
                                                double h, double* err_out) {
    int n = int(z0.size());
    auto H_at = [&](double step) {
        std::vector<std::vector<double>> H(n, std::vector<double>(n, 0.0));
        double p0 = full_symbol(f, z0);
        for (int i = 0; i < n; ++i) {
            std::vector<double> zp = z0, zm = z0;
            zp[i] += step;
            zm[i] -= step;
            H[i][i] = (full_symbol(f, zp) - 2 * p0 + full_symbol(f, zm)) / (step * step);
            for (int j = i + 1; j < n; ++j) {
                std::vector<double> zpp = z0, zpm = z0, zmp = z0, zmm = z0;
                zpp[i] += step; zpp[j] += step;
                zpm[i] += step; zpm[j] -= step;
                zmp[i] -= step; zmp[j] += step;
                zmm[i] -= step; zmm[j] -= step;
                H[i][j] = H[j][i] = (full_symbol(f, zpp) - full_symbol(f, zpm) -
                                     full_symbol(f, zmp) + full_symbol(f, zmm)) / (4 * step * step);
            }
        }
        return H;
    };
    auto H1 = H_at(h), H2 = H_at(h / 2);
    double err = 0.0;
    std::vector<std::vector<double>> H(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            H[i][j] = (4 * H2[i][j] - H1[i][j]) / 3; // Richardson, O(h^4)
            err = std::max(err, std::fabs(H2[i][j] - H1[i][j]));
        }
    if (err_out) *err_out = err;
    return H;
}

// char-poly coefficients of a small dense matrix (Faddeev-LeVerrier):
// det(lambda I - A) = lambda^n + c[n-1] lambda^{n-1} + ... + c[0]
inline poly::Poly char_poly_dense(const std::vector<std::vector<double>>& A) {
    int n = int(A.size());
    std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
    poly::Poly c(std::size_t(n) + 1, 0.0);
    c[n] = 1.0;
    for (int i = 0; i < n; ++i) M[i][i] = 1.0;
    double ck = 0.0;
    for (int k = 1; k <= n; ++k) {
        // M <- A*(M + ck*I)
        std::vector<std::vector<double>> Mk = M;
        for (int i = 0; i < n; ++i) Mk[i][i] += ck;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int l = 0; l < n; ++l) s += A[i][l] * Mk[l][j];
                M[i][j] = s;
            }
        double tr = 0.0;
        for (int i = 0; i < n; ++i) tr += M[i][i];
        ck = -tr / k;
        c[n - k] = ck;
    }
    // correct recurrence: first step uses ck=0 -> M=A, c[n-1]=-tr(A); matches above
    return c;
}

} // namespace detail

inline EffReport hamilton_spectrum(const SymbolFamily& f, const TriplePoint& p, double h = 1e-5) {
    if (!(h > 0)) throw std::invalid_argument("hamilton_spectrum: h must be > 0");
    int d = f.d, n = 2 * d + 2;
    std::vector<double> z0(n, 0.0);
    z0[0] = p.t;
    for (int j = 0; j < d; ++j) z0[1 + j] = p.x[j];
    z0[1 + d] = p.tau;
    for (int j = 0; j < d; ++j) z0[2 + d + j] = p.xi[j];

    EffReport rep;
    auto H = detail::hessian(f, z0, h, &rep.fd_error);
    for (auto& row : H)
        for (double v : row) require_finite(v, "Hessian entry");

    // F = [[ H_{Xi X}, H_{Xi Xi} ], [ -H_{X X}, -H_{X Xi} ]],  X=(t,x), Xi=(tau,xi)
    int m = d + 1;
    std::vector<std::vector<double>> F(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            F[i][j] = H[m + i][j];          // d2p / dXi_i dX_j
            F[i][m + j] = H[m + i][m + j];  // d2p / dXi_i dXi_j
            F[m + i][j] = -H[i][j];         // -d2p / dX_i dX_j
            F[m + i][m + j] = -H[i][m + j]; // -d2p / dX_i dXi_j
        }

    auto cp = detail::char_poly_dense(F);
    rep.eigenvalues = poly::roots(cp);

    std::vector<std::complex<double>> big;
    for (auto ev : rep.eigenvalues)
        if (std::abs(ev) > 1e-6) big.push_back(ev);
    if (big.size() == 2 && std::fabs(big[0].imag()) < 1e-6 && std::fabs(big[1].imag()) < 1e-6 &&
        std::abs(big[0] + big[1]) < 1e-6) {
        rep.nonzero_pair = true;
        rep.e_bar = (std::abs(big[0]) + std::abs(big[1])) / 2.0;
    }
    return rep;
}

struct Factorization {
    double e_bar = 0.0; // dt a at the triple point
    // alpha(x,xi) >= 0 and e(t,x,xi) > 0 with a = e (t + alpha)
    std::function<double(const Vec&, const Vec&)> alpha;
    std::function<double(double, const Vec&, const Vec&)> e;
};

namespace detail {

inline double dt_a(const SymbolFamily& f, double t, const Vec& x, const Vec& xi, double h = 3e-6) {
    return dcentral([&](double s) { return f.a(s, x, xi); }, t, h);
}

// alpha = -(Newton root of t -> a(t,x,xi) started from 0); a = e(t+alpha)
// with e > 0 means -alpha is the unique nearby zero of a.
inline double alpha_of(const SymbolFamily& f, const Vec& x, const Vec& xi) {
    double t = 0.0;
    for (int it = 0; it < 60; ++it) {
        double av = f.a(t, x, xi);
        double dv = dt_a(f, t, x, xi);
        if (!(std::fabs(dv) > 1e-12)) break;
        double step = av / dv;
        t -= step;
        if (std::fabs(step) < 1e-16 * std::max(1.0, std::fabs(t))) break;
    }
    double al = -t;
    if (al < -1e-10)
        throw std::runtime_error(f.label + ": alpha < 0 at x=" + (x.empty() ? "" : fmt_double(x[0])));
    return std::max(al, 0.0);
}

} // namespace detail

inline Factorization effective_factorization(const SymbolFamily& f, const TriplePoint& p) {
    double ebar = detail::dt_a(f, 0.0, p.x, p.xi);
    if (!(ebar > 0))
        throw std::runtime_error(f.label + ": not effectively hyperbolic (dt a <= 0 at the triple point)");
    Factorization fac;
    fac.e_bar = ebar;
    auto fam = f; // capture by value: evaluators stay valid
    fac.alpha = [fam](const Vec& x, const Vec& xi) { return detail::alpha_of(fam, x, xi); };
    fac.e = [fam](double t, const Vec& x, const Vec& xi) {
        double al = detail::alpha_of(fam, x, xi);
        double den = t + al;
        if (std::fabs(den) > 1e-6) return fam.a(t, x, xi) / den;
        return detail::dt_a(fam, t, x, xi); // removable singularity: a'(-alpha) = e(-alpha)
    };
    return fac;
}

// -------------------------------------------------------------------------
// localization to the conic neighborhood W_M of (0, xibar)

struct LocalizedFamily {
    SymbolFamily base;
    Factorization fac; // of the base family, raw (x,xi) coordinates
    double M = 8.0;
    double gamma = 64.0;
    Vec xibar; // unit

    double bracket(const Vec& xi) const { // <xi> = (gamma^2 + |xi|^2)^{1/2}
        double s = gamma * gamma;
        for (double c : xi) s += c * c;
        return std::sqrt(s);
    }
    Vec y(const Vec& x) const {
        Vec r(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) r[j] = chi_plateau(M * M * x[j]) * x[j];
        return r;
    }
    Vec eta(const Vec& xi) const {
        double br = bracket(xi);
        Vec r(xi.size());
        for (std::size_t j = 0; j < xi.size(); ++j) {
            double s = M * M * (xi[j] / br - xibar[j]);
            r[j] = chi_plateau(s) * (xi[j] - xibar[j] * br) + xibar[j] * br;
        }
        return r;
    }
    double xi_loc(const Vec& xi) const { return norm2(eta(xi)); } // [xi] = |eta(xi)|

    // localized effective factorization pieces
    double alpha(const Vec& x, const Vec& xi) const { return fac.alpha(y(x), eta(xi)); }
    double e(double t, const Vec& x, const Vec& xi) const { return fac.e(t, y(x), eta(xi)); }
    double b(double t, const Vec& x, const Vec& xi) const { return base.b(t, y(x), eta(xi)); }
    double rho(const Vec& x, const Vec& xi) const { return alpha(x, xi) + M / bracket(xi); }
    double a_M(double t, const Vec& x, const Vec& xi) const {
        return e(t, x, xi) * (t + alpha(x, xi) + 2.0 * M / bracket(xi));
    }

    // base-coordinate accessors for the sec-3 (pre-localization) analysis
    double alpha_base(const Vec& x, const Vec& xi) const { return fac.alpha(x, xi); }
    double e_base(double t, const Vec& x, const Vec& xi) const { return fac.e(t, x, xi); }
    double b_base(double t, const Vec& x, const Vec& xi) const { return base.b(t, x, xi); }
};

inline LocalizedFamily localize(const SymbolFamily& f, double M, double gamma, const Vec& xibar) {
    if (!(M >= 1) || !(gamma >= 1)) throw std::invalid_argument("localize: need M >= 1 and gamma >= 1");
    if (std::fabs(norm2(xibar) - 1.0) > 1e-12) throw std::invalid_argument("localize: xibar must be unit");
    TriplePoint p;
    p.x.assign(std::size_t(f.d), 0.0);
    p.xi = xibar;
    auto rep = hamilton_spectrum(f, p);
    if (!rep.nonzero_pair)
        throw std::runtime_error(f.label + ": no effective factorization at (0, xibar)");
    LocalizedFamily lf;
    lf.base = f;
    lf.fac = effective_factorization(f, p);
    lf.M = M;
    lf.gamma = gamma;
    lf.xibar = xibar;
    return lf;
}

} // namespace effhyp::symbols

#endif
