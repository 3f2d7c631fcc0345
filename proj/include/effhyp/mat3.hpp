#ifndef EFFHYP_MAT3_HPP
#define EFFHYP_MAT3_HPP

// Minimal fixed-size 3x3 real matrix helpers plus a cyclic Jacobi eigensolver
// for symmetric matrices. Everything in this project is 3x3 (Bezout matrix,
// companion matrix) or assembled from 3-vectors per Fourier mode.

#include <array>
#include <cmath>

namespace effhyp {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 mat3_zero() { return {{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}}; }

inline Mat3 mat3_id() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

inline Mat3 mul(const Mat3& A, const Mat3& B) {
    Mat3 C = mat3_zero();
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j) C[i][j] += A[i][k] * B[k][j];
    return C;
}

inline Mat3 transpose(const Mat3& A) {
    Mat3 T;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) T[i][j] = A[j][i];
    return T;
}

inline double norm_max(const Mat3& A) {
    double m = 0.0;
    for (auto& r : A)
        for (double v : r) m = std::max(m, std::fabs(v));
    return m;
}

inline double det3(const Mat3& A) {
    return A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1])
         - A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0])
         + A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
}

// Cyclic Jacobi for symmetric 3x3: returns eigenvalues (unsorted, in d) and
// accumulates rotations into V (columns = eigenvectors).
inline void jacobi_sym3(Mat3 A, Vec3& d, Mat3& V) {
    V = mat3_id();
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = std::fabs(A[0][1]) + std::fabs(A[0][2]) + std::fabs(A[1][2]);
        if (off == 0.0) break;
        double scale = norm_max(A);
        if (off <= 1e-16 * scale) break;
        for (int p = 0; p < 2; ++p)
            for (int q = p + 1; q < 3; ++q) {
                if (A[p][q] == 0.0) continue;
                double theta = (A[q][q] - A[p][p]) / (2 * A[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
                double c = 1.0 / std::sqrt(t * t + 1), s = t * c;
                for (int k = 0; k < 3; ++k) {
                    double akp = A[k][p], akq = A[k][q];
                    A[k][p] = c * akp - s * akq;
                    A[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    double apk = A[p][k], aqk = A[q][k];
                    A[p][k] = c * apk - s * aqk;
                    A[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    double vkp = V[k][p], vkq = V[k][q];
                    V[k][p] = c * vkp - s * vkq;
                    V[k][q] = s * vkp + c * vkq;
                }
            }
    }
    for (int i = 0; i < 3; ++i) d[i] = A[i][i];
}

} // namespace effhyp

#endif
