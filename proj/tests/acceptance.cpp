// Acceptance suite: one pass/fail line per criterion. Usage:
//   acceptance <path-to-cli-binary>
// Exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <effhyp/bezout.hpp>
#include <effhyp/discriminant.hpp>
#include <effhyp/solver.hpp>
#include <effhyp/symbols.hpp>
#include <effhyp/weights.hpp>

using namespace effhyp;
using symbols::Vec;
namespace fs = std::filesystem;

static int failures = 0;

static void line(int idx, const char* what, bool ok, const std::string& detail = "") {
    std::printf("criterion %2d [%s] %s%s%s\n", idx, ok ? "PASS" : "FAIL", what,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

static double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ------------------------------------------------------------------- 1, 2 --

static void criterion_1_2() {
    std::mt19937_64 rng(20240815);
    std::uniform_real_distribution<double> ua(0.0, 1.0), ub(-1.0, 1.0);
    auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    bool routes_ok = true;
    for (int i = 0; i < 10000; ++i) {
        double a = ua(rng), b = ub(rng);
        auto bz = bezout::bezout_matrix(a, b);
        double want = 4 * a * a * a - 27 * b * b;
        worst = std::max(worst, std::fabs(det3(bz.S) - want) / std::max(1.0, std::fabs(want)));
        try {
            bezout::char_poly(bz); // throws if the two coefficient routes disagree
        } catch (...) {
            routes_ok = false;
        }
    }
    double dt = seconds_since(t0);
    line(1, "det S = 4a^3 - 27b^2, 1e4 samples, rel <= 1e-12, < 1 s",
         worst <= 1e-12 && dt < 1.0, "worst rel = " + fmt_double(worst) + ", " + fmt_double(dt) + " s");

    auto q = bezout::char_poly(bezout::bezout_matrix(1.0, 0.0));
    bool ref = std::fabs(q.q2 + 6.0) < 1e-12 && std::fabs(q.q1 - 10.0) < 1e-12 &&
               std::fabs(q.q0 + 4.0) < 1e-12;
    line(2, "char_poly routes agree to 1e-12; (1,0) -> l^3-6l^2+10l-4", routes_ok && ref);
}

// ------------------------------------------------------------------- 3, 4 --

static void criterion_3_4() {
    std::vector<double> a_grid, b_rel;
    for (int i = 1; i <= 200; ++i) a_grid.push_back(0.05 * i / 200.0);
    for (int j = 0; j < 200; ++j) b_rel.push_back(-1.0 + 2.0 * j / 199.0);

    auto t0 = std::chrono::steady_clock::now();
    auto rep = bezout::verify_eigen_bounds(a_grid, b_rel, 100.0);
    double dt = seconds_since(t0);
    line(3, "pro:Skon six bounds on 200x200 grid with K <= 100, < 10 s",
         rep.violations.empty() && rep.fitted_constant <= 100.0 && dt < 10.0,
         "K_fit = " + fmt_double(rep.fitted_constant) + ", worst margin = " +
             fmt_double(rep.worst_margin) + ", " + fmt_double(dt) + " s");

    const double bmax_c = 2.0 / (3.0 * std::sqrt(3.0));
    double worst_orth = 0.0, worst_diag = 0.0, worst_sym = 0.0;
    for (double a : a_grid)
        for (double s : b_rel) {
            double b = s * bmax_c * std::pow(a, 1.5);
            auto bz = bezout::bezout_matrix(a, b);
            auto sd = bezout::spectral(bz);
            Mat3 G = mul(transpose(sd.T), sd.T);
            Mat3 D = mul(transpose(sd.T), mul(bz.S, sd.T));
            double snorm = norm_max(bz.S);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    worst_orth = std::max(worst_orth, std::fabs(G[i][j] - (i == j ? 1.0 : 0.0)));
                    double want = (i == j) ? sd.lambda[i] : 0.0;
                    worst_diag = std::max(worst_diag, std::fabs(D[i][j] - want) / (1.0 + snorm));
                }
            auto rs = bezout::reduced_system(a, b);
            worst_sym = std::max(worst_sym, rs.lam_at_sym_resid / (1.0 + norm_max(rs.A)));
        }
    line(4, "||T^tT - I|| <= 1e-10, ||T^tST - diag|| <= 1e-10(1+||S||), Lam*AT symmetric 1e-9",
         worst_orth <= 1e-10 && worst_diag <= 1e-10 && worst_sym <= 1e-9,
         "orth = " + fmt_double(worst_orth) + ", diag = " + fmt_double(worst_diag) +
             ", sym = " + fmt_double(worst_sym));
}

// ------------------------------------------------------------------- 5, 6 --

static void criterion_5_6() {
    symbols::FamilyParams prm;
    prm.m = 3;
    auto lf = symbols::localize(symbols::builtin(symbols::Builtin::example16, prm), 8.0, 64.0, Vec{1.0});
    discriminant::Grid g;
    for (int i = 0; i < 200; ++i) g.ts.push_back(0.5 * i / 199.0);
    for (int i = 0; i < 101; ++i) g.xs.push_back(Vec{-0.5 + 1.0 * i / 100.0});
    g.xis.push_back(Vec{1.0});

    auto t0 = std::chrono::steady_clock::now();
    std::size_t viol5 = 0, viol6 = 0;
    double worst5 = std::numeric_limits<double>::infinity();
    double worst6 = std::numeric_limits<double>::infinity();
    for (double eps : {0.1, 0.05, 0.01}) {
        auto low = discriminant::verify_lower_bound(lf, g, eps);
        viol5 += low.violations.size();
        worst5 = std::min(worst5, low.worst_margin);
        // lemma 3.4 needs only the (x, eps) sweep
        for (const auto& x : g.xs) {
            double rho = lf.alpha_base(x, g.xis[0]) + eps * eps;
            auto nt = discriminant::nu_roots(lf, x, g.xis[0], eps);
            double m = nt.max_abs_nu() - rho / 9.0;
            worst6 = std::min(worst6, m);
            if (m < -1e-12) ++viol6;
        }
    }
    double dt = seconds_since(t0);
    line(5, "pro:bound:Dis with cbar = 1/32: zero violations on example grid, < 30 s",
         viol5 == 0 && dt < 30.0,
         "violations = " + std::to_string(viol5) + ", worst margin = " + fmt_double(worst5) +
             ", " + fmt_double(dt) + " s");
    line(6, "lem:nu_j:al |nu_j| >= rho/9: zero violations on the same grid", viol6 == 0,
         "worst margin = " + fmt_double(worst6));
}

// ---------------------------------------------------------------------- 7 --

static void criterion_7() {
    bool ok = true;
    std::string detail;
    for (auto which : {symbols::Builtin::tricomi_product, symbols::Builtin::example16}) {
        auto f = symbols::builtin(which, {});
        symbols::TriplePoint p;
        p.x = Vec{0.0};
        p.xi = Vec{1.0};
        auto rep = symbols::hamilton_spectrum(f, p);
        // both families have dt a = 1 at the triple point
        double err = std::fabs(rep.e_bar - 1.0);
        ok = ok && rep.nonzero_pair && err <= 1e-6;
        detail += f.label + ": |pair - dt a| = " + fmt_double(err) + "  ";
    }
    line(7, "Hamilton spectrum pair equals +-dt a within 1e-6", ok, detail);
}

// ------------------------------------------------------------------- 8, 9 --

static std::vector<weights::TXXi> sample_points(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(1e-4, 0.5), ux(-0.01, 0.01), uxi(64.0, 512.0);
    std::vector<weights::TXXi> g;
    for (int i = 0; i < n; ++i) g.push_back({ut(rng), Vec{ux(rng)}, Vec{uxi(rng)}});
    return g;
}

static void criterion_8_9() {
    auto lf = symbols::localize(symbols::builtin(symbols::Builtin::tricomi_product), 8.0, 64.0, Vec{1.0});
    auto w = weights::build(lf, nullptr, weights::WeightParams{});

    auto res = weights::check_weight_identity(w, sample_points(1000, 7777));
    line(8, "dt(t phi) = kappa t phi: analytic <= 1e-12, FD <= 1e-6, 1e3 points",
         res.analytic <= 1e-12 && res.finite_diff <= 1e-6,
         "analytic = " + fmt_double(res.analytic) + ", fd = " + fmt_double(res.finite_diff));

    auto lambda1 = [&w](double t, const Vec& x, const Vec& xi) {
        return bezout::spectral(bezout::bezout_matrix(w.lf.a_M(t, x, xi), w.lf.b(t, x, xi))).lambda[0];
    };
    std::vector<weights::TXXi> grid;
    for (int it = 1; it <= 25; ++it)
        for (int ix = -2; ix <= 2; ++ix)
            for (double xiv : {64.0, 128.0, 256.0, 512.0})
                grid.push_back({0.5 * it / 25.0, Vec{0.005 * ix}, Vec{xiv}});
    auto reps = weights::check_daiji(w, lambda1, w.lf.fac.e_bar, grid);
    line(9, "lem:daiji: fitted C < 10 on a tricomi grid at M = 8",
         reps[0].fitted_constant < 10.0 && reps[1].violations.empty(),
         "C = " + fmt_double(reps[0].fitted_constant));
}

// --------------------------------------------------------------------- 10 --

static void criterion_10() {
    auto t0 = std::chrono::steady_clock::now();
    solver::ModelProblem mp; // tricomi defaults
    mp.set_modes(64);
    std::vector<solver::State> U0;
    // nontrivial data: u = 1 with Dt u = Dt^2 u = 0 is a fixed point when b = 0
    for (double xi : mp.modes)
        U0.push_back(solver::reduce(1.0, std::complex<double>(0, 0.5), 0.25, mp.bracket(xi)));
    auto work = solver::integrate(mp, U0, nullptr, 0.0, 0.5, 21, 1e-10);
    auto ref = solver::integrate(mp, U0, nullptr, 0.0, 0.5, 21, 1e-12);
    double worst = 0.0;
    for (std::size_t m = 0; m < mp.modes.size(); ++m)
        for (std::size_t k = 0; k < work.times.size(); ++k) {
            double rn = 0.0, dn = 0.0;
            for (int i = 0; i < 3; ++i) {
                rn += std::norm(ref.states[m][k][i]);
                dn += std::norm(work.states[m][k][i] - ref.states[m][k][i]);
            }
            worst = std::max(worst, std::sqrt(dn) / std::max(1.0, std::sqrt(rn)));
        }

    // a = b = 0: exact quadratic solution
    solver::ModelProblem free_mp;
    free_mp.a = [](double, double) { return 0.0; };
    free_mp.regularize = false;
    free_mp.modes = {8.0, 64.0};
    std::vector<solver::State> V0(2, solver::State{1.0, 0.0, 0.0});
    auto tr = solver::integrate(free_mp, V0, nullptr, 0.0, 0.5, 11, 1e-10);
    double worst_free = 0.0;
    for (std::size_t m = 0; m < free_mp.modes.size(); ++m) {
        double br = free_mp.bracket(free_mp.modes[m]);
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            double t = tr.times[k];
            std::complex<double> w0 = 1.0, w1 = std::complex<double>(0, 1) * br * t,
                                 w2 = -br * br * t * t / 2.0;
            worst_free = std::max({worst_free, std::abs(tr.states[m][k][0] - w0),
                                   std::abs(tr.states[m][k][1] - w1) / std::max(1.0, std::abs(w1)),
                                   std::abs(tr.states[m][k][2] - w2) / std::max(1.0, std::abs(w2))});
        }
    }
    double dt = seconds_since(t0);
    line(10, "solver matches rtol=1e-12 reference to 1e-8; a=b=0 exact to 1e-10; < 30 s",
         worst <= 1e-8 && worst_free <= 1e-10 && dt < 30.0,
         "ref diff = " + fmt_double(worst) + ", exact diff = " + fmt_double(worst_free) + ", " +
             fmt_double(dt) + " s");
}

// --------------------------------------------------------------------- 11 --

static void criterion_11() {
    solver::ModelProblem mp; // n = 8, theta = 50, M = 8, regularized tricomi
    mp.set_modes(16);
    std::vector<solver::State> U0;
    for (double xi : mp.modes) {
        double br = mp.bracket(xi);
        U0.push_back(solver::reduce(1.0 / (br * br), std::complex<double>(0, 0.5) / br, 0.25, br));
    }
    double t0 = 1e-4, T = 4.0 * std::pow(mp.prm.M, -4.0);
    auto tr = solver::integrate(mp, U0, nullptr, t0, T, 65, 1e-10);
    auto et = solver::energy_trace(tr, mp);
    auto rep = solver::apriori_check(tr, mp, et);
    line(11, "E(t_k) nonincreasing within 1e-8 relative slack per step (f = 0)",
         rep.monotone, "worst step ratio = " + fmt_double(rep.worst_step_ratio));
}

// --------------------------------------------------------------------- 12 --

static void criterion_12() {
    auto t0 = std::chrono::steady_clock::now();
    solver::ModelProblem mp;
    mp.prm.gamma = 1.0;
    std::vector<double> modes = {16.0, 32.0, 64.0, 128.0, 256.0};
    std::vector<double> cs = {0.0, 0.5, 1.0, 2.0, 4.0};
    auto s = solver::loss_sweep(mp, cs, modes, 0.5);
    bool nondecr = true;
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
        if (s[i + 1] < s[i]) nondecr = false; // Spearman = 1 for 5 distinct ordered values

    solver::ModelProblem mp2 = mp;
    mp2.e_bar = 2.0;
    auto s2 = solver::loss_sweep(mp2, {4.0}, modes, 0.5);
    double dt = seconds_since(t0);
    std::string detail = "s = [";
    for (std::size_t i = 0; i < s.size(); ++i) detail += (i ? " " : "") + fmt_double(s[i]);
    detail += "], s(4) at 2*ebar = " + fmt_double(s2[0]) + ", " + fmt_double(dt) + " s";
    line(12, "loss sweep nondecreasing, s(0) <= 0.2, doubled ebar reduces s(4), < 2 min",
         nondecr && std::fabs(s[0]) <= 0.2 && s2[0] < s.back() && dt < 120.0, detail);
}

// --------------------------------------------------------------------- 13 --

static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

static void criterion_13(const std::string& cli) {
    fs::path work = fs::temp_directory_path() / "effhyp_accept";
    fs::remove_all(work);
    fs::create_directories(work);

    std::ofstream(work / "disc.json")
        << R"({"family":{"name":"example16","m":3},"grid":{"nt":40,"nx":21,"eps":[0.1]}})";
    std::ofstream(work / "bez.json") << R"({"bezout":{"na":40,"nb":21}})";
    std::ofstream(work / "solve.json") << R"({"solver":{"modes":8,"T":0.25,"nout":9}})";

    bool ok = true;
    std::string detail;
    struct Run {
        const char* cmd;
        const char* cfg;
        const char* csv;
    };
    for (const Run& r : {Run{"verify-discriminant", "disc.json", "verify-discriminant.csv"},
                         Run{"verify-bezout", "bez.json", "verify-bezout.csv"},
                         Run{"solve", "solve.json", "solve.csv"}}) {
        for (const char* d : {"r1", "r2"}) {
            std::string cmd = "'" + cli + "' " + r.cmd + " --config '" + (work / r.cfg).string() +
                              "' --out '" + (work / d / r.cmd).string() + "' >/dev/null 2>&1";
            int rc = std::system(cmd.c_str());
            if (rc != 0) {
                ok = false;
                detail += std::string(r.cmd) + ": exit " + std::to_string(rc) + "  ";
            }
        }
        std::string c1 = slurp(work / "r1" / r.cmd / r.csv);
        std::string c2 = slurp(work / "r2" / r.cmd / r.csv);
        if (c1.empty() || c1 != c2) {
            ok = false;
            detail += std::string(r.cmd) + ": CSV mismatch  ";
        }
    }
    line(13, "CLI re-runs produce byte-identical CSVs", ok, detail);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <path-to-cli-binary>\n");
        return 2;
    }
    criterion_1_2();
    criterion_3_4();
    criterion_5_6();
    criterion_7();
    criterion_8_9();
    criterion_10();
    criterion_11();
    criterion_12();
    criterion_13(argv[1]);
    if (failures) {
        std::printf("%d criterion(s) FAILED\n", failures);
        return 1;
    }
    std::printf("all 13 criteria passed\n");
    return 0;
}
