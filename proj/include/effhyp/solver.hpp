#ifndef EFFHYP_SOLVER_HPP
#define EFFHYP_SOLVER_HPP

// Spectral (per-Fourier-mode) Cauchy solver for the regularized third-order
// operator reduced to the 3x3 first-order system
//   dU/dt = i (A(t,xi) <xi> + B(t,xi)) U + i F,
//   A = [[0, a_M, b], [1, 0, 0], [0, 1, 0]],   B row 1 = (b1, b2 + d_M, b3),
// with U = (Dt^2 u, <xi> Dt u, <xi>^2 u), Dt = -i dt. Coefficients are
// x-independent so every pseudodifferential operator acts as an exact Fourier
// multiplier and the weighted energies are finite sums over modes.
//
// Integrator: Dormand-Prince 5(4) with PI step control; output times hit
// exactly by step clipping.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "bezout.hpp"
#include "common.hpp"
#include "weights.hpp"

namespace effhyp::solver {

using cd = std::complex<double>;
using State = std::array<cd, 3>;
using weights::WeightParams;

struct ModelProblem {
    WeightParams prm;
    // raw principal coefficients (before regularization): a(t,xi), b(t,xi)
    std::function<double(double, double)> a = [](double t, double) { return t; };
    std::function<double(double, double)> b = [](double, double) { return 0.0; };
    // lower-order coefficients
    std::function<double(double, double)> b1 = [](double, double) { return 0.0; };
    std::function<double(double, double)> b2 = [](double, double) { return 0.0; };
    std::function<double(double, double)> b3 = [](double, double) { return 0.0; };
    double e_bar = 1.0;      // for the d_M = 2 M ebar compensator
    bool regularize = true;  // add 2M<xi>^{-1} e to a and d_M to B
    double alpha = 0.0;      // x-independent alpha of the factorization (for weights)
    std::vector<double> modes;

    double bracket(double xi) const { return std::hypot(prm.gamma, xi); }
    double aM(double t, double xi) const {
        // a = e (t + alpha) with e slowly varying; the regularized symbol is
        // e (t + alpha + 2M<xi>^{-1}) = a + 2M e <xi>^{-1}
        double av = a(t, xi);
        if (!regularize) return av;
        double e = e_bar; // x-independent model: e taken constant in t at leading order
        double den = t + alpha;
        if (std::fabs(den) > 1e-6) e = av / den;
        return av + 2.0 * prm.M * e / bracket(xi);
    }
    double dM() const { return regularize ? 2.0 * prm.M * e_bar : 0.0; }

    void set_modes(int N) {
        modes.clear();
        for (int k = -N; k <= N; ++k) modes.push_back(double(k));
    }
};

inline State reduce(cd u, cd ut, cd utt, double xi_bracket) {
    // (u, Dt u, Dt^2 u) -> U = (Dt^2 u, <xi> Dt u, <xi>^2 u)
    return {utt, xi_bracket * ut, xi_bracket * xi_bracket * u};
}

using Forcing = std::function<cd(double, double)>; // f(t, xi), first component

struct Trajectory {
    std::vector<double> times;
    std::vector<double> modes;
    // states[m][k] = U at times[k] for modes[m]
    std::vector<std::vector<State>> states;
    std::vector<std::vector<cd>> forcing; // recorded f(t_k, xi_m)
    std::size_t total_steps = 0;
};

namespace detail {

inline void rhs(const ModelProblem& mp, const Forcing& f, double t, double xi, const State& y, State& dy) {
    double br = mp.bracket(xi);
    double am = mp.aM(t, xi), bv = mp.b(t, xi);
    cd row1 = (am * y[1] + bv * y[2]) * br +
              mp.b1(t, xi) * y[0] + (mp.b2(t, xi) + mp.dM()) * y[1] + mp.b3(t, xi) * y[2];
    if (f) row1 += f(t, xi);
    dy[0] = cd(0, 1) * row1;
    dy[1] = cd(0, 1) * (br * y[0]);
    dy[2] = cd(0, 1) * (br * y[1]);
}

// Dormand-Prince 5(4) for one mode over [t0, T] hitting out_times exactly
inline std::vector<State> dopri5(const ModelProblem& mp, const Forcing& f, double xi, State y,
                                 double t0, const std::vector<double>& out_times, double rtol,
                                 std::size_t* steps_out) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    std::vector<State> out;
    out.reserve(out_times.size());
    double t = t0;
    double ynorm0 = std::sqrt(std::norm(y[0]) + std::norm(y[1]) + std::norm(y[2]));
    double atol = rtol * std::max(1.0, ynorm0);
    double h = 1e-4;
    double errold = 1.0;
    std::size_t nsteps = 0;
    State k1, k2, k3, k4, k5, k6, k7, yt, y5;
    bool have_k1 = false;

    for (double tout : out_times) {
        if (tout < t - 1e-14) throw std::invalid_argument("dopri5: out_times must be nondecreasing");
        while (t < tout - 1e-14 * std::max(1.0, tout)) {
            bool clipped = false;
            if (t + h >= tout) { h = tout - t; clipped = true; }
            if (!have_k1) { rhs(mp, f, t, xi, y, k1); have_k1 = true; }
            auto stage = [&](State& dst, double cc, std::initializer_list<std::pair<const State*, double>> terms) {
                for (int i = 0; i < 3; ++i) {
                    cd acc = y[i];
                    for (auto& [ks, w] : terms) acc += h * w * (*ks)[i];
                    yt[i] = acc;
                }
                rhs(mp, f, t + cc * h, xi, yt, dst);
            };
            stage(k2, c2, {{&k1, a21}});
            stage(k3, c3, {{&k1, a31}, {&k2, a32}});
            stage(k4, c4, {{&k1, a41}, {&k2, a42}, {&k3, a43}});
            stage(k5, c5, {{&k1, a51}, {&k2, a52}, {&k3, a53}, {&k4, a54}});
            stage(k6, 1.0, {{&k1, a61}, {&k2, a62}, {&k3, a63}, {&k4, a64}, {&k5, a65}});
            for (int i = 0; i < 3; ++i)
                y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
            rhs(mp, f, t + h, xi, y5, k7); // FSAL
            double err = 0.0;
            for (int i = 0; i < 3; ++i) {
                cd ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
                err = std::max(err, std::abs(ei) / sc);
            }
            if (err <= 1.0) {
                t += h;
                y = y5;
                k1 = k7;
                ++nsteps;
                // PI controller (beta = 0.08)
                double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) * std::pow(errold, 0.4 / 5.0);
                fac = std::clamp(fac, 0.2, 5.0);
                errold = std::max(err, 1e-10);
                if (!clipped) h *= fac;
                else h = std::min(h * fac, std::max(h, 1e-6));
            } else {
                h *= std::clamp(0.9 * std::pow(err, -1.0 / 5.0), 0.1, 0.9);
                if (h < 1e-15 * std::max(1.0, std::fabs(t)))
                    throw std::runtime_error("integrate: step-size underflow at mode xi=" + fmt_double(xi));
            }
        }
        out.push_back(y);
    }
    if (steps_out) *steps_out = nsteps;
    return out;
}

} // namespace detail

inline Trajectory integrate(const ModelProblem& mp, const std::vector<State>& U0, const Forcing& f,
                            double t0, double T, std::size_t nout, double rtol, unsigned threads = 1) {
    if (!(rtol >= 1e-13 && rtol <= 1e-6)) throw std::invalid_argument("integrate: rtol out of [1e-13, 1e-6]");
    if (U0.size() != mp.modes.size()) throw std::invalid_argument("integrate: data/mode mismatch");
    Trajectory tr;
    tr.modes = mp.modes;
    tr.times.resize(nout);
    for (std::size_t k = 0; k < nout; ++k)
        tr.times[k] = t0 + (T - t0) * double(k) / double(nout - 1);
    tr.states.resize(mp.modes.size());
    tr.forcing.resize(mp.modes.size());
    std::vector<std::size_t> steps(mp.modes.size(), 0);
    std::string error;
    parallel_for(mp.modes.size(), threads, [&](std::size_t m) {
        try {
            tr.states[m] = detail::dopri5(mp, f, mp.modes[m], U0[m], t0, tr.times, rtol, &steps[m]);
            tr.forcing[m].resize(nout);
            for (std::size_t k = 0; k < nout; ++k)
                tr.forcing[m][k] = f ? f(tr.times[k], mp.modes[m]) : cd(0.0);
        } catch (const std::exception& ex) {
            if (error.empty()) error = ex.what(); // benign race: any one message suffices
        }
    });
    if (!error.empty()) throw std::runtime_error(error);
    for (auto s : steps) tr.total_steps += s;
    return tr;
}

struct EnergyTrace {
    std::vector<double> times;
    std::vector<double> E, E1, E2;
    std::vector<double> modes;
    std::vector<double> amplification; // g(xi) = max_t |U(t,xi)| / |U(t0,xi)|
};

// psi per mode (t-independent); pass {} for psi == 0 (exact when b == 0)
inline EnergyTrace energy_trace(const Trajectory& tr, const ModelProblem& mp,
                                const std::function<double(double)>& psi_of_xi = nullptr) {
    EnergyTrace et;
    et.times = tr.times;
    et.modes = tr.modes;
    std::size_t nt = tr.times.size(), nm = tr.modes.size();
    et.E.assign(nt, 0.0);
    et.E1.assign(nt, 0.0);
    et.E2.assign(nt, 0.0);
    et.amplification.assign(nm, 0.0);
    double n = mp.prm.n, theta = mp.prm.theta, M = mp.prm.M;
    for (std::size_t m = 0; m < nm; ++m) {
        double xi = tr.modes[m];
        double br = mp.bracket(xi);
        double rho = mp.alpha + M / br;
        double ps = psi_of_xi ? psi_of_xi(xi) : 0.0;
        double u0 = 0.0;
        for (int i = 0; i < 3; ++i) u0 += std::norm(tr.states[m][0][i]);
        u0 = std::sqrt(u0);
        for (std::size_t k = 0; k < nt; ++k) {
            double t = tr.times[k];
            const State& U = tr.states[m][k];
            double un = std::sqrt(std::norm(U[0]) + std::norm(U[1]) + std::norm(U[2]));
            if (u0 > 0) et.amplification[m] = std::max(et.amplification[m], un / u0);
            if (!(t > 0)) continue; // kappa and (t phi)^{-2n} are singular at t = 0
            auto sd = bezout::spectral(bezout::bezout_matrix(mp.aM(t, xi), mp.b(t, xi)));
            // V = T^t U
            State V{};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) V[i] += sd.T[j][i] * U[j];
            double d = t - ps;
            double om = std::sqrt(d * d + M * rho / br);
            double ph = om + d;
            double ka = 1.0 / t + 1.0 / om;
            double w2n = std::pow(t * ph, -2.0 * n);
            double s2 = 0.0, s1 = 0.0;
            for (int j = 0; j < 3; ++j) {
                double term = sd.lambda[j] * w2n * std::norm(V[j]);
                s2 += term;
                s1 += ka * term;
            }
            et.E2[k] += s2;
            et.E1[k] += s1;
            et.E[k] += std::exp(-theta * t) * s2;
        }
    }
    return et;
}

struct AprioriReport {
    bool monotone = true;          // f = 0 path: E nonincreasing within slack
    double worst_step_ratio = 0.0; // max over steps of (E_{k+1}-E_k)/E_k
    double ratio = 0.0;            // forcing path: LHS/RHS of pro:fu:matome
};

inline AprioriReport apriori_check(const Trajectory& tr, const ModelProblem& mp, const EnergyTrace& et,
                                   double slack = 1e-8) {
    AprioriReport rep;
    for (std::size_t k = 0; k + 1 < et.E.size(); ++k) {
        if (et.E[k] <= 0) continue;
        double r = (et.E[k + 1] - et.E[k]) / et.E[k];
        rep.worst_step_ratio = std::max(rep.worst_step_ratio, r);
        if (r > slack) rep.monotone = false;
    }
    // empirical ratio of pro:fu:matome (norms in V coordinates; c_i = 1)
    double n = mp.prm.n, theta = mp.prm.theta;
    std::size_t nt = tr.times.size();
    auto vnorm2 = [&](std::size_t k, double s) {
        double acc = 0.0;
        for (std::size_t m = 0; m < tr.modes.size(); ++m) {
            double br = mp.bracket(tr.modes[m]);
            double t = tr.times[k];
            auto sd = bezout::spectral(bezout::bezout_matrix(mp.aM(t, tr.modes[m]), mp.b(t, tr.modes[m])));
            State V{};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) V[i] += sd.T[j][i] * tr.states[m][k][j];
            double w = std::pow(br, 2.0 * s);
            acc += w * (std::norm(V[0]) + std::norm(V[1]) + std::norm(V[2]));
        }
        return acc;
    };
    auto fnorm2 = [&](std::size_t k, double s) {
        double acc = 0.0;
        for (std::size_t m = 0; m < tr.modes.size(); ++m) {
            double br = mp.bracket(tr.modes[m]);
            acc += std::pow(br, 2.0 * s) * std::norm(tr.forcing[m][k]);
        }
        return acc;
    };
    double lhs_int1 = 0.0, lhs_int2 = 0.0, rhs_int = 0.0;
    for (std::size_t k = 0; k + 1 < nt; ++k) {
        double dt = tr.times[k + 1] - tr.times[k];
        auto piece = [&](std::size_t j) {
            double t = tr.times[j];
            double w = std::exp(-theta * t);
            lhs_int1 += 0.5 * dt * w * std::pow(t, -2 * n - 1) * vnorm2(j, -1.0);
            lhs_int2 += 0.5 * dt * theta * w * std::pow(t, -2 * n) * vnorm2(j, -1.0);
            rhs_int += 0.5 * dt * w * std::pow(t, -2 * n + 1) * fnorm2(j, n);
        };
        piece(k);
        piece(k + 1);
    }
    double tend = tr.times.back();
    double lhs = std::pow(tend, -2 * n) * std::exp(-theta * tend) * vnorm2(nt - 1, -1.0) + lhs_int1 + lhs_int2;
    rep.ratio = rhs_int > 0 ? lhs / rhs_int : 0.0;
    return rep;
}

// loss-of-derivatives sweep: for each strength c set b3 == c, integrate the
// modes from t = 0 with data u = 1, Dt u = Dt^2 u = 0, and fit the growth
// exponent s(c) = d log g / d log <xi> over the upper half of the mode range.
inline std::vector<double> loss_sweep(ModelProblem mp, const std::vector<double>& strengths,
                                      const std::vector<double>& sweep_modes, double T,
                                      double rtol = 1e-10, unsigned threads = 1) {
    std::vector<double> s_of_c;
    mp.modes = sweep_modes;
    for (double c : strengths) {
        mp.b3 = [c](double, double) { return c; };
        std::vector<State> U0(sweep_modes.size());
        for (std::size_t m = 0; m < sweep_modes.size(); ++m)
            U0[m] = reduce(1.0, 0.0, 0.0, mp.bracket(sweep_modes[m]));
        auto tr = integrate(mp, U0, nullptr, 0.0, T, 65, rtol, threads);
        auto et = energy_trace(tr, mp);
        // least-squares slope of log g vs log <xi>, upper half of the modes
        std::size_t lo = sweep_modes.size() / 2;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        double np = 0;
        for (std::size_t m = lo; m < sweep_modes.size(); ++m) {
            double X = std::log(mp.bracket(sweep_modes[m]));
            double Y = std::log(std::max(et.amplification[m], 1e-300));
            sx += X; sy += Y; sxx += X * X; sxy += X * Y;
            np += 1;
        }
        s_of_c.push_back((np * sxy - sx * sy) / (np * sxx - sx * sx));
    }
    return s_of_c;
}

} // namespace effhyp::solver

#endif
