#ifndef EFFHYP_BEZOUT_HPP
#define EFFHYP_BEZOUT_HPP

// Bezout matrix S of p-hat and dp-hat/dtau at a point (a_M, b), its spectral
// decomposition (closed-form eigenvalues + cofactor eigenvectors, Jacobi
// fallback), the companion matrix A and the reduced system T^{-1} A T with
// diagonal symmetrizer Lambda = diag(lambda).

#include <cmath>
#include <stdexcept>

#include "common.hpp"
#include "cubic.hpp"
#include "mat3.hpp"
#include "report.hpp"

namespace effhyp::bezout {

struct Bezout3 {
    double a = 0.0, b = 0.0;
    Mat3 S;
};

inline Bezout3 bezout_matrix(double a_M, double b) {
    require_finite(a_M, "a_M");
    require_finite(b, "b");
    Bezout3 bz;
    bz.a = a_M;
    bz.b = b;
    bz.S = {{{3.0, 0.0, -a_M}, {0.0, 2.0 * a_M, 3.0 * b}, {-a_M, 3.0 * b, a_M * a_M}}};
    return bz;
}

struct CharPoly {
    double q2, q1, q0; // det(lambda I - S) = lambda^3 + q2 lambda^2 + q1 lambda + q0
};

// coefficients computed two ways: direct minor expansion and the closed
// formula of eq:qkata; both must agree to 1e-12 relative.
inline CharPoly char_poly(const Bezout3& bz) {
    const double a = bz.a, b = bz.b;
    const Mat3& S = bz.S;
    double tr = S[0][0] + S[1][1] + S[2][2];
    double m01 = S[0][0] * S[1][1] - S[0][1] * S[1][0];
    double m02 = S[0][0] * S[2][2] - S[0][2] * S[2][0];
    double m12 = S[1][1] * S[2][2] - S[1][2] * S[2][1];
    CharPoly direct{-tr, m01 + m02 + m12, -det3(S)};
    CharPoly formula{-(3.0 + 2.0 * a + a * a),
                     6.0 * a + 2.0 * a * a + 2.0 * a * a * a - 9.0 * b * b,
                     -(4.0 * a * a * a - 27.0 * b * b)};
    double scale = std::max({1.0, std::fabs(formula.q2), std::fabs(formula.q1), std::fabs(formula.q0)});
    if (std::fabs(direct.q2 - formula.q2) > 1e-12 * scale ||
        std::fabs(direct.q1 - formula.q1) > 1e-12 * scale ||
        std::fabs(direct.q0 - formula.q0) > 1e-12 * scale)
        throw std::runtime_error("char_poly: coefficient routes disagree (internal consistency)");
    return formula;
}

struct SpectralDecomp {
    Vec3 lambda; // ascending
    Mat3 T;      // orthogonal, columns t1,t2,t3
    bool used_fallback = false;
};

namespace detail {

inline void fix_column_signs(Mat3& T) {
    for (int c = 0; c < 3; ++c) {
        int imax = 0;
        for (int r = 1; r < 3; ++r)
            if (std::fabs(T[r][c]) > std::fabs(T[imax][c])) imax = r;
        if (T[imax][c] < 0)
            for (int r = 0; r < 3; ++r) T[r][c] = -T[r][c];
    }
}

inline double qeval(const CharPoly& q, double l) {
    return ((l + q.q2) * l + q.q1) * l + q.q0;
}

inline double qderiv(const CharPoly& q, double l) {
    return (3.0 * l + 2.0 * q.q2) * l + q.q1;
}

} // namespace detail

inline SpectralDecomp spectral(const Bezout3& bz) {
    const double a = bz.a, b = bz.b;
    double Delta = 4.0 * a * a * a - 27.0 * b * b;
    if (Delta < -1e-12 || a < 0)
        throw std::runtime_error("spectral: S is outside the hyperbolic region (indefinite)");
    CharPoly q = char_poly(bz);

    // shift to depressed form: lambda = mu - q2/3, mu^3 - A mu - B = 0
    double A = q.q2 * q.q2 / 3.0 - q.q1;
    double B = -(q.q0 - q.q1 * q.q2 / 3.0 + 2.0 * q.q2 * q.q2 * q.q2 / 27.0);
    auto rt = cubic::roots({A, B}, 1e-9);
    Vec3 lam;
    for (int i = 0; i < 3; ++i) lam[i] = rt.roots[i].real() - q.q2 / 3.0;
    std::sort(lam.begin(), lam.end());
    // Newton polish on the exact coefficients
    for (auto& l : lam)
        for (int it = 0; it < 3; ++it) {
            double d = detail::qderiv(q, l);
            if (std::fabs(d) < 1e-300) break;
            l -= detail::qeval(q, l) / d;
        }
    if (lam[0] < -1e-8) throw std::runtime_error("spectral: lambda_1 < 0 (hyperbolicity violation)");

    SpectralDecomp sd;
    sd.lambda = lam;
    double snorm = norm_max(bz.S);

    // cofactor eigenvector columns of sec 5.3: (k,j) = (1,3), (2,2), (3,1)
    Vec3 cols[3];
    cols[0] = {a * (2.0 * a - lam[0]), 3.0 * b * (lam[0] - 3.0), (lam[0] - 3.0) * (lam[0] - 2.0 * a)};
    cols[1] = {-3.0 * a * b, (lam[1] - 3.0) * (lam[1] - a * a) - a * a, 3.0 * b * (lam[1] - 3.0)};
    cols[2] = {(lam[2] - 2.0 * a) * (lam[2] - a * a) - 9.0 * b * b, -3.0 * a * b, -a * (lam[2] - 2.0 * a)};

    bool degenerate = false;
    for (auto& c : cols) {
        double n = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
        if (n < 1e-12 * std::max(snorm, 1.0)) { degenerate = true; break; }
        for (auto& v : c) v /= n;
    }
    if (!degenerate) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) sd.T[r][c] = cols[c][r];
        // verify; fall back if the cofactor formulas lost too much accuracy
        Mat3 G = mul(transpose(sd.T), sd.T);
        Mat3 D = mul(transpose(sd.T), mul(bz.S, sd.T));
        double resid = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                resid = std::max(resid, std::fabs(G[i][j] - (i == j ? 1.0 : 0.0)));
                double want = (i == j) ? lam[i] : 0.0;
                resid = std::max(resid, std::fabs(D[i][j] - want) / (1.0 + snorm));
            }
        if (resid > 1e-11) degenerate = true;
    }
    if (degenerate) {
        Vec3 d;
        Mat3 V;
        jacobi_sym3(bz.S, d, V);
        int ord[3] = {0, 1, 2};
        std::sort(ord, ord + 3, [&](int i, int j) { return d[i] < d[j]; });
        for (int c = 0; c < 3; ++c) {
            sd.lambda[c] = d[ord[c]];
            for (int r = 0; r < 3; ++r) sd.T[r][c] = V[r][ord[c]];
        }
        sd.used_fallback = true;
    }
    detail::fix_column_signs(sd.T);
    return sd;
}

struct ReducedSystem {
    Mat3 A;      // companion matrix [[0,a,b],[1,0,0],[0,1,0]]
    Mat3 AT;     // T^{-1} A T = T^t A T
    Vec3 Lambda; // eigenvalues of S
    double sa_sym_resid = 0.0;
    double lam_at_sym_resid = 0.0;
};

inline ReducedSystem reduced_system(double a_M, double b) {
    auto bz = bezout_matrix(a_M, b);
    auto sd = spectral(bz);
    ReducedSystem rs;
    rs.A = {{{0.0, a_M, b}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}};
    rs.Lambda = sd.lambda;
    rs.AT = mul(transpose(sd.T), mul(rs.A, sd.T));

    Mat3 SA = mul(bz.S, rs.A);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            rs.sa_sym_resid = std::max(rs.sa_sym_resid, std::fabs(SA[i][j] - SA[j][i]));

    double scale = 1.0 + norm_max(rs.A);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            double lij = sd.lambda[i] * rs.AT[i][j], lji = sd.lambda[j] * rs.AT[j][i];
            rs.lam_at_sym_resid = std::max(rs.lam_at_sym_resid, std::fabs(lij - lji));
        }
    if (rs.lam_at_sym_resid > 1e-8 * scale)
        throw std::runtime_error("reduced_system: Lambda*AT not symmetric (consistency)");
    return rs;
}

// Proposition pro:Skon: six eigenvalue bounds with a single constant K.
// Returns worst margins at the given K and the smallest K that would make
// all six hold on the grid (fitted_constant).
inline BoundReport verify_eigen_bounds(const std::vector<double>& a_grid, const std::vector<double>& b_rel,
                                       double K, unsigned threads = 1) {
    BoundReport rep;
    rep.anchor = "pro:Skon";
    rep.description = "eigenvalue bounds, K=" + fmt_double(K);
    std::vector<BoundReport> partial(a_grid.size());
    const double bmax_c = 2.0 / (3.0 * std::sqrt(3.0));
    parallel_for(a_grid.size(), threads, [&](std::size_t i) {
        double a = a_grid[i];
        BoundReport& pr = partial[i];
        for (double s : b_rel) {
            double b = s * bmax_c * std::pow(a, 1.5);
            auto sd = spectral(bezout_matrix(a, b));
            double l1 = sd.lambda[0], l2 = sd.lambda[1], l3 = sd.lambda[2];
            double Delta = 4.0 * a * a * a - 27.0 * b * b;
            double den = 6.0 * a + 2.0 * a * a + 2.0 * a * a * a;
            double m[6] = {
                l1 - Delta / den,                        // K-free lower bound on lambda_1
                (2.0 / 3.0 + K * a) * a * a - l1,
                l2 - (2.0 - K * a) * a,
                (2.0 + K * a) * a - l2,
                l3 - 3.0,                                // K-free
                3.0 + K * a * a - l3,
            };
            double needK = 0.0;
            needK = std::max(needK, (l1 / (a * a) - 2.0 / 3.0) / a);
            needK = std::max(needK, (2.0 - l2 / a) / a);
            needK = std::max(needK, (l2 / a - 2.0) / a);
            needK = std::max(needK, (l3 - 3.0) / (a * a));
            pr.fitted_constant = std::max(pr.fitted_constant, needK);
            for (int k = 0; k < 6; ++k) {
                BoundRow row{0.0, a, b, m[k], 0.0, m[k]};
                pr.record(row);
                if (m[k] < -1e-12) pr.violations.push_back(row);
            }
        }
    });
    for (auto& pr : partial) {
        rep.n_points += pr.n_points;
        if (pr.worst_margin < rep.worst_margin) { rep.worst_margin = pr.worst_margin; rep.worst = pr.worst; }
        rep.fitted_constant = std::max(rep.fitted_constant, pr.fitted_constant);
        rep.violations.insert(rep.violations.end(), pr.violations.begin(), pr.violations.end());
    }
    return rep;
}

} // namespace effhyp::bezout

#endif
