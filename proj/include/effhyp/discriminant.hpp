#ifndef EFFHYP_DISCRIMINANT_HPP
#define EFFHYP_DISCRIMINANT_HPP

// Regularized discriminant Delta(t,X,eps) = 4 e^3 (t+alpha+eps^2)^3 - 27 b^2,
// its near-zero roots nu_1, nu_2, nu_3 (the monic cubic factor of the
// Malgrange preparation, extracted numerically), the time function psi, and
// grid verification of the sec.3/sec.4 inequality suite.
//
// All operations here work in the *base* (pre-localization) coordinates with
// rho = alpha(x,xi) + eps^2, which is what sec.3 of the analysis uses; the
// weights module feeds in the localized coordinates itself.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>

#include "common.hpp"
#include "poly.hpp"
#include "report.hpp"
#include "symbols.hpp"

namespace effhyp::discriminant {

using symbols::LocalizedFamily;
using symbols::Vec;
using cd = std::complex<double>;

inline constexpr double c1 = 1.0 / 27.0; // Lemma 3.5 cutoff constant
inline constexpr double cbar_default = 1.0 / 32.0;

struct NuTriple {
    double nu1 = 0.0;  // = inf{t : Dbar(t) > 0}, always real and <= 0
    cd nu2, nu3;       // conjugate pair or two reals
    double a1 = 0.0;   // -(nu1+nu2+nu3)
    bool exact_backend = true;

    double A1() const { return nu1 + a1; }
    // the monic cubic factor, real coefficients
    double dbar(double t) const {
        double p = (nu2 + nu3).real(), q = (nu2 * nu3).real();
        return (t - nu1) * (t * t - p * t + q);
    }
    double max_abs_nu() const {
        return std::max({std::fabs(nu1), std::abs(nu2), std::abs(nu3)});
    }
};

inline std::function<double(double)> delta_of_t(const LocalizedFamily& lf, const Vec& x, const Vec& xi,
                                                double eps) {
    if (!(eps >= 0)) throw std::invalid_argument("delta_of_t: eps must be >= 0");
    double al = lf.alpha_base(x, xi);
    return [&lf, x, xi, al, eps](double t) {
        double e = lf.e_base(t, x, xi);
        double b = lf.b_base(t, x, xi);
        double s = t + al + eps * eps;
        return 4.0 * e * e * e * s * s * s - 27.0 * b * b;
    };
}

namespace detail {

// divide p by (t - r); remainder discarded (r is a root up to rounding)
inline poly::Poly deflate(const poly::Poly& p, double r) {
    std::size_t n = p.size();
    if (n < 2) return {0.0};
    poly::Poly q(n - 1);
    double carry = p[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) {
        q[k] = carry;
        carry = p[k] + r * carry;
    }
    return q;
}

// exact t-polynomial of Delta when the family has polynomial a, b
inline std::optional<poly::Poly> delta_poly(const LocalizedFamily& lf, const Vec& x, const Vec& xi,
                                            double eps) {
    if (!lf.base.a_poly || !lf.base.b_poly) return std::nullopt;
    poly::Poly ap = lf.base.a_poly(x, xi);
    poly::Poly bp = lf.base.b_poly(x, xi);
    double al = lf.alpha_base(x, xi);
    poly::Poly ep = deflate(ap, -al); // a = e * (t + alpha)
    poly::Poly shift{al + eps * eps, 1.0};
    poly::Poly d = poly::scale(poly::mul(poly::pow3(ep), poly::pow3(shift)), 4.0);
    return poly::trim(poly::add(d, poly::scale(poly::mul(bp, bp), -27.0)));
}

inline int gauss_solve(std::vector<std::vector<double>>& A, std::vector<double>& rhs) {
    int n = int(rhs.size());
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
        if (std::fabs(A[piv][c]) < 1e-300) return -1;
        std::swap(A[c], A[piv]);
        std::swap(rhs[c], rhs[piv]);
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            double f = A[r][c] / A[c][c];
            for (int cc = c; cc < n; ++cc) A[r][cc] -= f * A[c][cc];
            rhs[r] -= f * rhs[c];
        }
    }
    for (int c = 0; c < n; ++c) rhs[c] /= A[c][c];
    return 0;
}

// pick nu1 per eq:defnu from the three cubic-factor roots: smallest real root
// whose right neighborhood has Dbar > 0; ties toward the larger root.
inline NuTriple assemble(std::vector<cd> r, bool exact) {
    if (r.size() != 3) throw std::runtime_error("nu_roots: cubic factor extraction failed");
    double scale = 1e-12;
    for (auto z : r) scale = std::max(scale, std::abs(z));
    // force conjugate symmetry of the off-real roots
    std::vector<int> cplx;
    for (int i = 0; i < 3; ++i) {
        if (std::fabs(r[i].imag()) > 1e-9 * scale) cplx.push_back(i);
        else r[i] = r[i].real(); // sub-threshold imaginary part: treat as real
    }
    if (cplx.size() == 3) {
        // near-triple root: the cluster acquires small imaginary parts of the
        // order eps_mach^{1/3}; demote the least-complex one to real
        int best = cplx[0];
        for (int i : cplx)
            if (std::fabs(r[i].imag()) < std::fabs(r[best].imag())) best = i;
        r[best] = r[best].real();
        cplx.erase(std::find(cplx.begin(), cplx.end(), best));
    }
    if (cplx.size() == 1) r[cplx[0]] = r[cplx[0]].real(); // lone tiny imaginary part: noise
    if (cplx.size() == 2) {
        cd m = (r[cplx[0]] + std::conj(r[cplx[1]])) / 2.0;
        r[cplx[0]] = m;
        r[cplx[1]] = std::conj(m);
    }

    std::vector<double> real_roots;
    std::vector<cd> others;
    for (auto z : r)
        if (std::fabs(z.imag()) == 0.0) real_roots.push_back(z.real());
        else others.push_back(z);
    std::sort(real_roots.begin(), real_roots.end());

    auto dbar_at = [&](double t) {
        cd v = 1.0;
        for (auto z : r) v *= (t - z);
        return v.real();
    };
    double nu1 = real_roots.front();
    if (real_roots.size() == 3) {
        double probe = 1e-6 * std::max(scale, 1e-6);
        for (double cand : real_roots) {
            double gap = 2 * probe;
            for (double o : real_roots)
                if (o > cand) { gap = o - cand; break; }
            if (dbar_at(cand + std::min(probe, gap / 2)) > 0.0) { nu1 = cand; break; }
        }
    }
    NuTriple nt;
    nt.nu1 = nu1;
    nt.exact_backend = exact;
    bool took = false;
    std::vector<cd> rest = others;
    for (double rr : real_roots) {
        if (!took && rr == nu1) { took = true; continue; }
        rest.push_back(rr);
    }
    nt.nu2 = rest[0];
    nt.nu3 = rest[1];
    // canonical order: (Re, Im)-ascending, so conjugates come out nu2 = lower half-plane
    if (nt.nu3.real() < nt.nu2.real() ||
        (nt.nu3.real() == nt.nu2.real() && nt.nu3.imag() < nt.nu2.imag()))
        std::swap(nt.nu2, nt.nu3);
    nt.a1 = -(nt.nu1 + nt.nu2.real() + nt.nu3.real());
    if (nt.nu1 > 1e-8)
        throw std::runtime_error("nu_roots: nu1 > 0 (consistency with eq:defnu violated), nu1=" +
                                 fmt_double(nt.nu1));
    return nt;
}

// generic backend: sign-scan + bisection for the real roots, Gauss-Newton fit
// of the residual factor of the local monic-cubic model Delta ~ etilde * Dbar
inline NuTriple nu_roots_generic(const std::function<double(double)>& Delta, double T0, double rho) {
    const int N = 512;
    std::vector<double> real_roots;
    double prev_t = -T0, prev_v = Delta(prev_t);
    for (int i = 1; i <= N; ++i) {
        double t = -T0 + 2.0 * T0 * i / N;
        double v = Delta(t);
        if (prev_v == 0.0) real_roots.push_back(prev_t);
        else if (v != 0.0 && std::signbit(v) != std::signbit(prev_v)) {
            double lo = prev_t, hi = t, flo = prev_v;
            for (int it = 0; it < 80; ++it) {
                double mid = (lo + hi) / 2;
                double fm = Delta(mid);
                if (fm == 0.0) { lo = hi = mid; break; }
                if (std::signbit(fm) == std::signbit(flo)) { lo = mid; flo = fm; }
                else hi = mid;
                if (hi - lo < 1e-14) break;
            }
            real_roots.push_back((lo + hi) / 2);
        }
        prev_t = t;
        prev_v = v;
    }
    // keep the (up to 3) roots nearest the origin
    std::sort(real_roots.begin(), real_roots.end(),
              [](double a, double b) { return std::fabs(a) < std::fabs(b); });
    if (real_roots.empty()) throw std::runtime_error("nu_roots: no real root in window (window error)");
    if (real_roots.size() > 3) real_roots.resize(3);
    int nr = int(real_roots.size());
    int r = 3 - nr; // degree of the remaining factor

    std::vector<cd> roots(real_roots.begin(), real_roots.end());
    if (r > 0) {
        // sample points around the near-root cluster
        double c = 0.0;
        for (double v : real_roots) c += v;
        c /= nr;
        double L = std::max({6.0 * rho, 3.0 * std::fabs(c), 1e-4});
        L = std::min(L, T0);
        const int npts = 24;
        std::vector<double> ts(npts), dv(npts);
        for (int i = 0; i < npts; ++i) {
            ts[i] = c + L * std::cos(M_PI * (i + 0.5) / npts);
            dv[i] = Delta(ts[i]);
        }
        auto known = [&](double t) {
            double p = 1.0;
            for (double rr : real_roots) p *= (t - rr);
            return p;
        };
        // linear seed: Delta/known = e0 * (t^r + q_{r-1} t^{r-1} + ... + q0),
        // unknowns (e0, e0*q_j) from r+1 equations
        int nq = r;
        std::vector<double> q(nq, 0.0);
        double e0 = 1.0;
        {
            std::vector<std::vector<double>> A(r + 1, std::vector<double>(r + 1));
            std::vector<double> rhs(r + 1);
            for (int i = 0; i <= r; ++i) {
                double t = c + L * (2.0 * (i + 1) / (r + 2) - 1.0);
                // keep seed samples clear of the already-found roots
                for (int nudge = 0; nudge < 8 && std::fabs(known(t)) < 1e-10 * std::pow(L, nr); ++nudge)
                    t += 0.0371 * L;
                double g = Delta(t) / known(t);
                for (int j = 0; j < r; ++j) A[i][j] = std::pow(t, j);
                A[i][r] = std::pow(t, r);
                rhs[i] = g;
                // model: g = e0 t^r + (e0 q_{r-1}) t^{r-1} + ... ; reorder columns
            }
            // columns: [q0*e0, ..., q_{r-1}*e0, e0]
            if (gauss_solve(A, rhs) == 0 && std::fabs(rhs[r]) > 1e-300) {
                e0 = rhs[r];
                for (int j = 0; j < r; ++j) q[j] = rhs[j] / e0;
            }
        }
        // Gauss-Newton: unknowns theta = (e0,e1,e2,e3, q0..q_{r-1});
        // model(t) = (sum e_k t^k) * known(t) * (t^r + sum q_j t^j)
        std::vector<double> e{e0, 0.0, 0.0, 0.0};
        int nu = 4 + nq;
        for (int it = 0; it < 60; ++it) {
            std::vector<std::vector<double>> JTJ(nu, std::vector<double>(nu, 0.0));
            std::vector<double> JTr(nu, 0.0);
            double rms = 0.0;
            for (int i = 0; i < npts; ++i) {
                double t = ts[i], kn = known(t);
                double qv = std::pow(t, r);
                for (int j = 0; j < nq; ++j) qv += q[j] * std::pow(t, j);
                double ev = e[0] + t * (e[1] + t * (e[2] + t * e[3]));
                double resid = dv[i] - ev * kn * qv;
                rms += resid * resid;
                std::vector<double> J(nu);
                for (int k = 0; k < 4; ++k) J[k] = std::pow(t, k) * kn * qv;
                for (int j = 0; j < nq; ++j) J[4 + j] = ev * kn * std::pow(t, j);
                for (int a = 0; a < nu; ++a) {
                    JTr[a] += J[a] * resid;
                    for (int b = 0; b < nu; ++b) JTJ[a][b] += J[a] * J[b];
                }
            }
            for (int a = 0; a < nu; ++a) JTJ[a][a] *= (1.0 + 1e-12);
            if (gauss_solve(JTJ, JTr) != 0) break;
            double moved = 0.0;
            for (int k = 0; k < 4; ++k) { e[k] += JTr[k]; moved = std::max(moved, std::fabs(JTr[k])); }
            for (int j = 0; j < nq; ++j) { q[j] += JTr[4 + j]; moved = std::max(moved, std::fabs(JTr[4 + j])); }
            if (moved < 1e-16 * std::max(1.0, std::fabs(e[0]))) break;
        }
        if (r == 1) {
            roots.push_back(cd(-q[0]));
        } else {
            double disc = q[1] * q[1] - 4.0 * q[0];
            if (disc >= 0) {
                double s = std::sqrt(disc);
                roots.push_back(cd((-q[1] - s) / 2));
                roots.push_back(cd((-q[1] + s) / 2));
            } else {
                double s = std::sqrt(-disc) / 2;
                roots.push_back(cd(-q[1] / 2, s));
                roots.push_back(cd(-q[1] / 2, -s));
            }
        }
    }
    return assemble(roots, false);
}

} // namespace detail

enum class Backend { automatic, polynomial, generic };

inline NuTriple nu_roots(const LocalizedFamily& lf, const Vec& x, const Vec& xi, double eps,
                         double T0 = 1.0, Backend be = Backend::automatic) {
    if (!(eps > 0)) throw std::invalid_argument("nu_roots: eps must be > 0 (psi is defined for eps != 0)");
    auto dp = (be == Backend::generic) ? std::nullopt : detail::delta_poly(lf, x, xi, eps);
    if (dp) {
        auto all = poly::roots(*dp);
        std::sort(all.begin(), all.end(), [](cd a, cd b) { return std::abs(a) < std::abs(b); });
        if (all.size() < 3 || std::abs(all[2]) > T0)
            throw std::runtime_error("nu_roots: fewer than 3 cubic-factor roots in window");
        return detail::assemble({all[0], all[1], all[2]}, true);
    }
    if (be == Backend::polynomial) throw std::invalid_argument("nu_roots: family has no polynomial backend");
    double rho = lf.alpha_base(x, xi) + eps * eps;
    return detail::nu_roots_generic(delta_of_t(lf, x, xi, eps), T0, rho);
}

inline double psi_from(const NuTriple& nt, double rho) {
    double A1 = nt.A1();
    return std::max(0.0, -chi_onesided(A1 / (2.0 * c1 * rho)) * A1 / 2.0);
}

inline double psi(const LocalizedFamily& lf, const Vec& x, const Vec& xi, double eps,
                  double T0 = 1.0, Backend be = Backend::automatic) {
    double rho = lf.alpha_base(x, xi) + eps * eps;
    return psi_from(nu_roots(lf, x, xi, eps, T0, be), rho);
}

// ---------------------------------------------------------------------------
// grid verification

struct Grid {
    std::vector<double> ts;
    std::vector<Vec> xs;
    std::vector<Vec> xis;
};

// Proposition pro:bound:Dis: Dbar(t) >= cbar * min{t^2, (t-psi)^2} * (t+rho)
inline BoundReport verify_lower_bound(const LocalizedFamily& lf, const Grid& g, double eps,
                                      double cbar = cbar_default, unsigned threads = 1) {
    BoundReport rep;
    rep.anchor = "pro:bound:Dis";
    rep.description = "Dbar >= cbar*min{t^2,(t-psi)^2}(t+rho), cbar=" + fmt_double(cbar);
    std::size_t nxy = g.xs.size() * g.xis.size();
    std::vector<BoundReport> partial(nxy);
    parallel_for(nxy, threads, [&](std::size_t k) {
        const Vec& x = g.xs[k / g.xis.size()];
        const Vec& xi = g.xis[k % g.xis.size()];
        double rho = lf.alpha_base(x, xi) + eps * eps;
        auto nt = nu_roots(lf, x, xi, eps);
        double ps = psi_from(nt, rho);
        BoundReport& pr = partial[k];
        pr.fitted_constant = std::numeric_limits<double>::infinity();
        for (double t : g.ts) {
            double lhs = nt.dbar(t);
            double mn = std::min(t * t, (t - ps) * (t - ps));
            double rhs = cbar * mn * (t + rho);
            BoundRow row{t, x.empty() ? 0.0 : x[0], xi.empty() ? 0.0 : xi[0], lhs, rhs, lhs - rhs};
            pr.record(row);
            if (row.margin < -1e-12) pr.violations.push_back(row);
            if (mn * (t + rho) > 1e-300)
                pr.fitted_constant = std::min(pr.fitted_constant, lhs / (mn * (t + rho)));
        }
    });
    rep.fitted_constant = std::numeric_limits<double>::infinity();
    for (auto& pr : partial) {
        rep.n_points += pr.n_points;
        if (pr.worst_margin < rep.worst_margin) { rep.worst_margin = pr.worst_margin; rep.worst = pr.worst; }
        rep.fitted_constant = std::min(rep.fitted_constant, pr.fitted_constant);
        rep.violations.insert(rep.violations.end(), pr.violations.begin(), pr.violations.end());
    }
    return rep;
}

// the bundle of auxiliary lemma checks (3.2, 3.4, 3.5, 3.7, 4.6)
inline std::vector<BoundReport> verify_aux_bounds(const LocalizedFamily& lf, const Grid& g, double eps) {
    BoundReport b1a;   // |bhat_1| <= 4 alpha^{1/2}
    b1a.anchor = "lem:b_1:alpha";
    b1a.description = "|bhat_1| <= 4 sqrt(alpha)";
    BoundReport nual;  // max_j |nu_j| >= rho/9
    nual.anchor = "lem:nu_j:al";
    nual.description = "max_j |nu_j| >= rho/9";
    BoundReport gap;   // |nu_1 - nu_j| >= c2 rho when A1 < 2 c1 rho
    gap.anchor = "lem:nu:1sa:nuj";
    gap.description = "root gap |nu1-nuj| with fitted c2";
    gap.fitted_constant = std::numeric_limits<double>::infinity();
    BoundReport pert;  // |dt Delta|/Delta <= C*(1/t + 1/(|t-psi|+sqrt(a) eps))
    pert.anchor = "lem:pert:Dis";
    pert.description = "fitted C* for the logarithmic derivative bound";
    BoundReport bhia;  // |dt b| <= (2 sqrt(2/3)) ebar sqrt(a_M), fitted prefactor
    bhia.anchor = "lem:b:hi:a";
    bhia.description = "|dt b| <= fitted * (2 sqrt(2/3)) ebar sqrt(a_M)";

    for (const auto& x : g.xs)
        for (const auto& xi : g.xis) {
            double al = lf.alpha_base(x, xi);
            double rho = al + eps * eps;
            auto nt = nu_roots(lf, x, xi, eps);
            double ps = psi_from(nt, rho);
            double X = x.empty() ? 0.0 : x[0], XI = xi.empty() ? 0.0 : xi[0];

            // Lemma 3.2
            double bhat1 = dcentral([&](double t) {
                double e = lf.e_base(t, x, xi);
                return 3.0 * std::sqrt(3.0) * lf.b_base(t, x, xi) / (2.0 * std::pow(e, 1.5));
            }, 0.0, 1e-5);
            {
                BoundRow row{0.0, X, XI, 4.0 * std::sqrt(al), std::fabs(bhat1),
                             4.0 * std::sqrt(al) - std::fabs(bhat1)};
                b1a.record(row);
                if (row.margin < -1e-12) b1a.violations.push_back(row);
                if (al > 1e-14)
                    b1a.fitted_constant = std::max(b1a.fitted_constant, std::fabs(bhat1) / std::sqrt(al));
            }
            // Lemma 3.4
            {
                BoundRow row{0.0, X, XI, nt.max_abs_nu(), rho / 9.0, nt.max_abs_nu() - rho / 9.0};
                nual.record(row);
                if (row.margin < -1e-12) nual.violations.push_back(row);
            }
            // Lemma 3.5 (fitted c2 on the applicable set)
            if (nt.A1() < 2.0 * c1 * rho) {
                double mgap = std::min(std::abs(cd(nt.nu1) - nt.nu2), std::abs(cd(nt.nu1) - nt.nu3));
                BoundRow row{0.0, X, XI, mgap, 0.0, mgap};
                gap.record(row);
                gap.fitted_constant = std::min(gap.fitted_constant, mgap / rho);
            }
            // Lemmas 3.7 and 4.6 need the t grid
            auto Delta = delta_of_t(lf, x, xi, eps);
            for (double t : g.ts) {
                if (t > 0.0) {
                    double a_eps = lf.e_base(t, x, xi) * (t + al + eps * eps);
                    double dD = dcentral(Delta, t, 1e-6 * std::max(1.0, t));
                    double Dv = Delta(t);
                    if (Dv > 1e-300) {
                        double lhs = std::fabs(dD) / Dv;
                        double rhs = 1.0 / t + 1.0 / (std::fabs(t - ps) + std::sqrt(std::max(a_eps, 0.0)) * eps);
                        pert.fitted_constant = std::max(pert.fitted_constant, lhs / rhs);
                        BoundRow row{t, X, XI, lhs, rhs, rhs - lhs};
                        pert.record(row);
                    }
                }
                // Lemma 4.6 in localized coordinates
                double aM = lf.a_M(t, x, xi);
                double dtb = dcentral([&](double s) { return lf.b(s, x, xi); }, t, 1e-6 * std::max(1.0, t));
                double bound = 2.0 * std::sqrt(2.0 / 3.0) * lf.fac.e_bar * std::sqrt(std::max(aM, 0.0));
                BoundRow row{t, X, XI, std::fabs(dtb), bound, bound - std::fabs(dtb)};
                bhia.record(row);
                if (bound > 1e-300)
                    bhia.fitted_constant = std::max(bhia.fitted_constant, std::fabs(dtb) / bound);
            }
        }
    return {b1a, nual, gap, pert, bhia};
}

} // namespace effhyp::discriminant

#endif
