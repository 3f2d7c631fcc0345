// effhyp: batch front end for the verification library.
//   effhyp <command> --config cfg.json [--out dir] [--threads k] [--profile theory|desk]
// Commands: analyze, verify-discriminant, verify-bezout, verify-weights,
//           solve, loss-sweep, validate.
// Exit codes: 0 clean, 2 inequality violations found (reported, not fatal),
//             1 software/config error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include <effhyp/bezout.hpp>
#include <effhyp/cubic.hpp>
#include <effhyp/discriminant.hpp>
#include <effhyp/solver.hpp>
#include <effhyp/symbols.hpp>
#include <effhyp/weights.hpp>

using json = nlohmann::json;
using namespace effhyp;
using symbols::Vec;

namespace {

// ---------------------------------------------------------------- schema ---

struct Diagnostics {
    std::vector<std::string> msgs;
    void add(const std::string& m) { msgs.push_back(m); }
    bool ok() const { return msgs.empty(); }
};

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed,
                Diagnostics& d) {
    if (!j.is_object()) {
        d.add(path + ": expected an object");
        return;
    }
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) d.add(path + ": unknown key '" + it.key() + "'");
}

double num(const json& j, const std::string& path, const std::string& key, double dflt,
           Diagnostics& d, bool positive = false, bool nonneg = false) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number()) {
        d.add(path + "." + key + ": expected a number");
        return dflt;
    }
    double v = j[key].get<double>();
    if (positive && !(v > 0)) d.add(path + "." + key + ": must be > 0");
    if (nonneg && !(v >= 0)) d.add(path + "." + key + ": must be >= 0");
    return v;
}

int integer(const json& j, const std::string& path, const std::string& key, int dflt,
            Diagnostics& d, int lo = 1) {
    double v = num(j, path, key, double(dflt), d);
    if (v != std::floor(v)) d.add(path + "." + key + ": expected an integer");
    if (v < lo) d.add(path + "." + key + ": must be >= " + std::to_string(lo));
    return int(v);
}

std::vector<double> num_array(const json& j, const std::string& path, const std::string& key,
                              std::vector<double> dflt, Diagnostics& d) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_array()) {
        d.add(path + "." + key + ": expected an array of numbers");
        return dflt;
    }
    std::vector<double> v;
    for (const auto& e : j[key]) {
        if (!e.is_number()) {
            d.add(path + "." + key + ": expected an array of numbers");
            return dflt;
        }
        v.push_back(e.get<double>());
    }
    return v;
}

// the full run configuration with desk-scale defaults
struct Config {
    // family
    std::string family = "tricomi_product";
    symbols::FamilyParams fp;
    // localization + weights
    double M = 8.0, gamma = 64.0;
    std::vector<double> xibar{1.0};
    double n = 8.0, theta = 50.0;
    // grids
    double t_min = 0.0, t_max = 0.5;
    int nt = 200;
    double x_min = -0.5, x_max = 0.5;
    int nx = 101;
    std::vector<double> xi{1.0};
    std::vector<double> eps{0.1, 0.05, 0.01};
    // bezout sweep
    double a_max = 0.05;
    int na = 200, nb = 200;
    double K = 100.0;
    // solver
    int modes = 64;
    double t0 = 0.0, T = 0.5, rtol = 1e-10;
    int nout = 65;
    double u0_re = 1.0, ut0_re = 0.0, utt0_re = 0.0;
    // sweep
    std::vector<double> strengths{0.0, 0.5, 1.0, 2.0, 4.0};
    std::vector<double> sweep_modes;
    double sweep_T = 0.5;
    double sweep_ebar = 1.0;
    // misc
    double tolerance = 1e-12;
    std::uint64_t seed = 1234;
    int npoints = 1000; // random sample count (verify-weights)
};

Config parse_config(const json& j, Diagnostics& d) {
    Config c;
    check_keys(j, "config",
               {"family", "localization", "weights", "grid", "bezout", "solver", "sweep",
                "tolerance", "seed", "npoints"},
               d);
    if (!d.ok()) return c;

    if (j.contains("family")) {
        const auto& f = j["family"];
        check_keys(f, "family", {"name", "m", "a2", "b3", "alpha_coeff"}, d);
        if (f.contains("name")) {
            if (!f["name"].is_string()) d.add("family.name: expected a string");
            else c.family = f["name"].get<std::string>();
        }
        if (c.family != "tricomi_product" && c.family != "bbp" && c.family != "example16")
            d.add("family.name: must be one of tricomi_product, bbp, example16");
        c.fp.m = num(f, "family", "m", c.fp.m, d, true);
        c.fp.a2 = num(f, "family", "a2", c.fp.a2, d, true);
        c.fp.b3 = num(f, "family", "b3", c.fp.b3, d);
        c.fp.alpha_coeff = num(f, "family", "alpha_coeff", c.fp.alpha_coeff, d, true);
    }
    if (j.contains("localization")) {
        const auto& l = j["localization"];
        check_keys(l, "localization", {"M", "gamma", "xibar"}, d);
        c.M = num(l, "localization", "M", c.M, d, true);
        c.gamma = num(l, "localization", "gamma", c.gamma, d, true);
        c.xibar = num_array(l, "localization", "xibar", c.xibar, d);
        if (c.M < 1) d.add("localization.M: must be >= 1");
        if (c.gamma < 1) d.add("localization.gamma: must be >= 1");
    }
    if (j.contains("weights")) {
        const auto& w = j["weights"];
        check_keys(w, "weights", {"n", "theta"}, d);
        c.n = num(w, "weights", "n", c.n, d, true);
        c.theta = num(w, "weights", "theta", c.theta, d, true);
    }
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        check_keys(g, "grid", {"t_min", "t_max", "nt", "x_min", "x_max", "nx", "xi", "eps"}, d);
        c.t_min = num(g, "grid", "t_min", c.t_min, d, false, true);
        c.t_max = num(g, "grid", "t_max", c.t_max, d, true);
        c.nt = integer(g, "grid", "nt", c.nt, d, 2);
        c.x_min = num(g, "grid", "x_min", c.x_min, d);
        c.x_max = num(g, "grid", "x_max", c.x_max, d);
        c.nx = integer(g, "grid", "nx", c.nx, d, 1);
        c.xi = num_array(g, "grid", "xi", c.xi, d);
        c.eps = num_array(g, "grid", "eps", c.eps, d);
        for (double e : c.eps)
            if (!(e > 0)) d.add("grid.eps: entries must be > 0");
        if (c.t_min >= c.t_max) d.add("grid: t_min must be < t_max");
    }
    if (j.contains("bezout")) {
        const auto& b = j["bezout"];
        check_keys(b, "bezout", {"a_max", "na", "nb", "K"}, d);
        c.a_max = num(b, "bezout", "a_max", c.a_max, d, true);
        c.na = integer(b, "bezout", "na", c.na, d, 1);
        c.nb = integer(b, "bezout", "nb", c.nb, d, 1);
        c.K = num(b, "bezout", "K", c.K, d, true);
    }
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        check_keys(s, "solver", {"modes", "t0", "T", "rtol", "nout", "u0", "ut0", "utt0"}, d);
        c.modes = integer(s, "solver", "modes", c.modes, d, 1);
        c.t0 = num(s, "solver", "t0", c.t0, d, false, true);
        c.T = num(s, "solver", "T", c.T, d, true);
        c.rtol = num(s, "solver", "rtol", c.rtol, d, true);
        c.nout = integer(s, "solver", "nout", c.nout, d, 2);
        c.u0_re = num(s, "solver", "u0", c.u0_re, d);
        c.ut0_re = num(s, "solver", "ut0", c.ut0_re, d);
        c.utt0_re = num(s, "solver", "utt0", c.utt0_re, d);
        if (c.t0 >= c.T) d.add("solver: t0 must be < T");
        if (!(c.rtol >= 1e-13 && c.rtol <= 1e-6)) d.add("solver.rtol: out of [1e-13, 1e-6]");
    }
    for (int k = 4; k <= 8; ++k) c.sweep_modes.push_back(std::ldexp(1.0, k)); // 16..256
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        check_keys(s, "sweep", {"strengths", "modes", "T", "e_bar"}, d);
        c.strengths = num_array(s, "sweep", "strengths", c.strengths, d);
        c.sweep_modes = num_array(s, "sweep", "modes", c.sweep_modes, d);
        c.sweep_T = num(s, "sweep", "T", c.sweep_T, d, true);
        c.sweep_ebar = num(s, "sweep", "e_bar", c.sweep_ebar, d, true);
    }
    c.tolerance = num(j, "config", "tolerance", c.tolerance, d, true);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) d.add("seed: expected a nonnegative integer");
        else c.seed = j["seed"].get<std::uint64_t>();
    }
    c.npoints = integer(j, "config", "npoints", c.npoints, d, 1);
    return c;
}

// --------------------------------------------------------------- helpers ---

symbols::SymbolFamily make_family(const Config& c) {
    if (c.family == "tricomi_product") return symbols::builtin(symbols::Builtin::tricomi_product, c.fp);
    if (c.family == "bbp") return symbols::builtin(symbols::Builtin::bbp, c.fp);
    return symbols::builtin(symbols::Builtin::example16, c.fp);
}

discriminant::Grid make_grid(const Config& c) {
    discriminant::Grid g;
    for (int i = 0; i < c.nt; ++i)
        g.ts.push_back(c.t_min + (c.t_max - c.t_min) * double(i) / double(c.nt - 1));
    for (int i = 0; i < c.nx; ++i) {
        double x = c.nx == 1 ? c.x_min : c.x_min + (c.x_max - c.x_min) * double(i) / double(c.nx - 1);
        g.xs.push_back(Vec{x});
    }
    for (double xv : c.xi) g.xis.push_back(Vec{xv});
    return g;
}

std::vector<weights::TXXi> random_points(const Config& c) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> ut(1e-4, 0.5), ux(-0.01, 0.01), uxi(64.0, 512.0);
    std::vector<weights::TXXi> g;
    for (int i = 0; i < c.npoints; ++i) g.push_back({ut(rng), Vec{ux(rng)}, Vec{uxi(rng)}});
    return g;
}

struct Out {
    std::filesystem::path dir;
    json manifest;
    std::vector<std::string> files;

    std::ofstream open_csv(const std::string& name) {
        std::filesystem::create_directories(dir);
        files.push_back(name);
        return std::ofstream(dir / name, std::ios::binary);
    }
    void finish(int exit_code, double ms) {
        manifest["exit_code"] = exit_code;
        manifest["elapsed_ms"] = ms;
        manifest["files"] = files;
        auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[64];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        manifest["timestamp"] = buf; // only the manifest carries a timestamp
        std::filesystem::create_directories(dir);
        std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
    }
};

void report_rows(std::ostream& os, const BoundReport& rep, double eps) {
    os << fmt_double(eps) << ',' << fmt_double(rep.worst.t) << ',' << fmt_double(rep.worst.x) << ','
       << fmt_double(rep.worst.xi) << ',' << fmt_double(rep.worst.lhs) << ','
       << fmt_double(rep.worst.rhs) << ',' << fmt_double(rep.worst.margin) << ','
       << fmt_double(rep.fitted_constant) << ',' << rep.n_points << ','
       << rep.violations.size() << ',' << rep.anchor << '\n';
}

void violation_rows(std::ostream& os, const BoundReport& rep, double eps) {
    for (const auto& v : rep.violations)
        os << fmt_double(eps) << ',' << fmt_double(v.t) << ',' << fmt_double(v.x) << ','
           << fmt_double(v.xi) << ',' << fmt_double(v.lhs) << ',' << fmt_double(v.rhs) << ','
           << fmt_double(v.margin) << ',' << rep.anchor << '\n';
}

// -------------------------------------------------------------- commands ---

int cmd_analyze(const Config& c, Out& out) {
    auto f = make_family(c);
    std::vector<std::pair<Vec, Vec>> seeds = {{Vec{0.0}, c.xibar}};
    auto pts = symbols::find_triple_points(f, seeds, 1e-9);
    auto os = out.open_csv("analyze.csv");
    os << "quantity,value,anchor\n";
    if (pts.empty()) {
        os << "triple_point_found,0,eq:takata\n";
        return 2;
    }
    const auto& p = pts[0];
    auto rep = symbols::hamilton_spectrum(f, p);
    os << "triple_point_found,1,eq:takata\n";
    os << "triple_x," << fmt_double(p.x[0]) << ",eq:takata\n";
    os << "nonzero_pair," << (rep.nonzero_pair ? 1 : 0) << ",eq:koyuti\n";
    std::vector<double> big;
    for (auto ev : rep.eigenvalues)
        if (std::abs(ev) > 1e-6) big.push_back(ev.real());
    std::sort(big.begin(), big.end());
    for (std::size_t i = 0; i < big.size(); ++i)
        os << "eigenvalue_" << i << ',' << fmt_double(big[i]) << ",eq:koyuti\n";
    os << "hessian_fd_error," << fmt_double(rep.fd_error) << ",eq:koyuti\n";
    if (!rep.nonzero_pair) return 2;
    auto fac = symbols::effective_factorization(f, p);
    os << "e_bar," << fmt_double(fac.e_bar) << ",eq:outl:b\n";
    os << "alpha_origin," << fmt_double(fac.alpha(p.x, p.xi)) << ",eq:outl:b\n";
    out.manifest["e_bar"] = fac.e_bar;
    return 0;
}

int cmd_verify_discriminant(const Config& c, Out& out, unsigned threads) {
    auto lf = symbols::localize(make_family(c), c.M, c.gamma, c.xibar);
    auto g = make_grid(c);
    auto os = out.open_csv("verify-discriminant.csv");
    os << "eps,t,x,xi,lhs,rhs,margin,fitted,n_points,violations,anchor\n";
    std::size_t nviol = 0;
    std::string vbuf;
    for (double eps : c.eps) {
        auto low = discriminant::verify_lower_bound(lf, g, eps, discriminant::cbar_default, threads);
        auto aux = discriminant::verify_aux_bounds(lf, g, eps);
        report_rows(os, low, eps);
        for (const auto& r : aux) report_rows(os, r, eps);
        std::ostringstream vs;
        violation_rows(vs, low, eps);
        for (const auto& r : aux) violation_rows(vs, r, eps);
        vbuf += vs.str();
        nviol += low.violations.size();
        for (const auto& r : aux) nviol += r.violations.size();
    }
    if (nviol) {
        auto vf = out.open_csv("violations.csv");
        vf << "eps,t,x,xi,lhs,rhs,margin,anchor\n" << vbuf;
    }
    out.manifest["violations"] = nviol;
    return nviol ? 2 : 0;
}

int cmd_verify_bezout(const Config& c, Out& out, unsigned threads) {
    std::vector<double> a_grid, b_rel;
    for (int i = 1; i <= c.na; ++i) a_grid.push_back(c.a_max * double(i) / double(c.na));
    for (int j = 0; j < c.nb; ++j)
        b_rel.push_back(c.nb == 1 ? 0.0 : -1.0 + 2.0 * double(j) / double(c.nb - 1));
    auto rep = bezout::verify_eigen_bounds(a_grid, b_rel, c.K, threads);
    double K_fit = rep.fitted_constant;

    auto os = out.open_csv("verify-bezout.csv");
    os << "a_M,b,lambda1,lambda2,lambda3,margin,K_fit,anchor\n";
    const double bmax_c = 2.0 / (3.0 * std::sqrt(3.0));
    for (double a : a_grid)
        for (double s : b_rel) {
            double b = s * bmax_c * std::pow(a, 1.5);
            auto sd = bezout::spectral(bezout::bezout_matrix(a, b));
            double l1 = sd.lambda[0], l2 = sd.lambda[1], l3 = sd.lambda[2];
            double Delta = 4 * a * a * a - 27 * b * b;
            double den = 6 * a + 2 * a * a + 2 * a * a * a;
            double m = std::min({l1 - Delta / den, (2.0 / 3.0 + c.K * a) * a * a - l1,
                                 l2 - (2.0 - c.K * a) * a, (2.0 + c.K * a) * a - l2, l3 - 3.0,
                                 3.0 + c.K * a * a - l3});
            os << fmt_double(a) << ',' << fmt_double(b) << ',' << fmt_double(l1) << ','
               << fmt_double(l2) << ',' << fmt_double(l3) << ',' << fmt_double(m) << ','
               << fmt_double(K_fit) << ",pro:Skon\n";
        }
    if (!rep.violations.empty()) {
        auto vf = out.open_csv("violations.csv");
        vf << "eps,t,x,xi,lhs,rhs,margin,anchor\n";
        violation_rows(vf, rep, 0.0);
    }
    out.manifest["K_fit"] = K_fit;
    out.manifest["worst_margin"] = rep.worst_margin;
    out.manifest["violations"] = rep.violations.size();
    return rep.violations.empty() ? 0 : 2;
}

int cmd_verify_weights(const Config& c, Out& out) {
    auto lf = symbols::localize(make_family(c), c.M, c.gamma, c.xibar);
    weights::WeightParams wp;
    wp.M = c.M;
    wp.gamma = c.gamma;
    wp.n = c.n;
    wp.theta = c.theta;
    auto w = weights::build(lf, nullptr, wp);
    auto pts = random_points(c);

    auto ident = weights::check_weight_identity(w, pts);
    auto phis = weights::check_phi_bounds(w, pts);
    auto lambda1 = [&w](double t, const Vec& x, const Vec& xi) {
        return bezout::spectral(bezout::bezout_matrix(w.lf.a_M(t, x, xi), w.lf.b(t, x, xi))).lambda[0];
    };
    auto daiji = weights::check_daiji(w, lambda1, w.lf.fac.e_bar, pts);
    double phi_seminorm = weights::seminorm_estimate(
        [&w](double t, const Vec& x, const Vec& xi) { return w.phi(t, x, xi); },
        [&w](double t, const Vec& x, const Vec& xi) { return w.phi(t, x, xi); }, 2, pts, c.M, c.gamma);

    auto os = out.open_csv("verify-weights.csv");
    os << "eps,t,x,xi,lhs,rhs,margin,fitted,n_points,violations,anchor\n";
    // identity residuals as pseudo-reports (lhs = residual, rhs = tolerance)
    BoundReport idr;
    idr.anchor = "outline:t:phi:kappa";
    idr.record({0.0, 0.0, 0.0, ident.analytic, c.tolerance, c.tolerance - ident.analytic});
    idr.fitted_constant = ident.finite_diff;
    report_rows(os, idr, 0.0);
    for (const auto& r : phis) report_rows(os, r, 0.0);
    for (const auto& r : daiji) report_rows(os, r, 0.0);
    BoundReport sem;
    sem.anchor = "lem:dif:Phi";
    sem.record({0.0, 0.0, 0.0, phi_seminorm, 0.0, phi_seminorm});
    sem.fitted_constant = phi_seminorm;
    report_rows(os, sem, 0.0);

    std::size_t nviol = phis[0].violations.size() + daiji[1].violations.size();
    bool ident_bad = ident.analytic > c.tolerance || ident.finite_diff > 1e-6;
    if (nviol || ident_bad) {
        auto vf = out.open_csv("violations.csv");
        vf << "eps,t,x,xi,lhs,rhs,margin,anchor\n";
        violation_rows(vf, phis[0], 0.0);
        violation_rows(vf, daiji[1], 0.0);
        if (ident_bad) violation_rows(vf, idr, 0.0);
    }
    out.manifest["identity_analytic"] = ident.analytic;
    out.manifest["identity_fd"] = ident.finite_diff;
    out.manifest["daiji_C"] = daiji[0].fitted_constant;
    out.manifest["phi_seminorm"] = phi_seminorm;
    return (nviol || ident_bad) ? 2 : 0;
}

int cmd_solve(const Config& c, Out& out, unsigned threads) {
    auto f = make_family(c);
    solver::ModelProblem mp;
    mp.prm.M = c.M;
    mp.prm.gamma = c.gamma;
    mp.prm.n = c.n;
    mp.prm.theta = c.theta;
    // coefficients taken along x = 0 (degree-0 homogeneous in xi)
    mp.a = [f](double t, double) { return f.a(t, Vec{0.0}, Vec{1.0}); };
    mp.b = [f](double t, double) { return f.b(t, Vec{0.0}, Vec{1.0}); };
    symbols::TriplePoint p;
    p.x = Vec{0.0};
    p.xi = c.xibar;
    auto fac = symbols::effective_factorization(f, p);
    mp.e_bar = fac.e_bar;
    mp.alpha = fac.alpha(Vec{0.0}, c.xibar);
    mp.set_modes(c.modes);

    std::vector<solver::State> U0;
    for (double xi : mp.modes)
        U0.push_back(solver::reduce(c.u0_re, c.ut0_re, c.utt0_re, mp.bracket(xi)));
    auto tr = solver::integrate(mp, U0, nullptr, c.t0, c.T, std::size_t(c.nout), c.rtol, threads);
    auto et = solver::energy_trace(tr, mp);
    auto rep = solver::apriori_check(tr, mp, et);

    auto os = out.open_csv("solve.csv");
    os << "t,xi,ReU1,ImU1,ReU2,ImU2,ReU3,ImU3,E,E1,E2\n";
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        for (std::size_t m = 0; m < tr.modes.size(); ++m) {
            const auto& U = tr.states[m][k];
            os << fmt_double(tr.times[k]) << ',' << fmt_double(tr.modes[m]);
            for (int i = 0; i < 3; ++i)
                os << ',' << fmt_double(U[i].real()) << ',' << fmt_double(U[i].imag());
            os << ',' << fmt_double(et.E[k]) << ',' << fmt_double(et.E1[k]) << ','
               << fmt_double(et.E2[k]) << '\n';
        }
    out.manifest["total_steps"] = tr.total_steps;
    out.manifest["energy_monotone"] = rep.monotone;
    out.manifest["worst_step_ratio"] = rep.worst_step_ratio;
    out.manifest["anchor"] = "eq:dif:ene:fu";
    return (c.t0 > 0 && !rep.monotone) ? 2 : 0;
}

int cmd_loss_sweep(const Config& c, Out& out, unsigned threads) {
    solver::ModelProblem mp;
    mp.prm.M = c.M;
    mp.prm.gamma = 1.0; // <xi> ~ |xi|: the fitted slope reads the loss directly
    mp.prm.n = c.n;
    mp.prm.theta = c.theta;
    mp.e_bar = c.sweep_ebar;
    auto s = solver::loss_sweep(mp, c.strengths, c.sweep_modes, c.sweep_T, 1e-10, threads);
    auto os = out.open_csv("loss-sweep.csv");
    os << "c,s,anchor\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        os << fmt_double(c.strengths[i]) << ',' << fmt_double(s[i]) << ",eq:n:P:sub\n";
    bool nondecr = true;
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
        if (s[i + 1] < s[i] - 1e-9) nondecr = false;
    out.manifest["nondecreasing"] = nondecr;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"effhyp: numerical checks for triply characteristic effectively hyperbolic operators"};
    app.require_subcommand(1);
    std::string config_path, out_dir = ".", profile = "desk";
    unsigned threads = 1;

    std::vector<CLI::App*> subs;
    for (const char* name : {"analyze", "verify-discriminant", "verify-bezout", "verify-weights",
                             "solve", "loss-sweep", "validate"}) {
        auto* sc = app.add_subcommand(name);
        sc->add_option("--config", config_path)->required();
        sc->add_option("--out", out_dir);
        sc->add_option("--threads", threads)->check(CLI::Range(1u, 256u));
        sc->add_option("--profile", profile)->check(CLI::IsMember({"theory", "desk"}));
        subs.push_back(sc);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 1 : 0;
    }
    std::string command = app.get_subcommands()[0]->get_name();

    json j;
    {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open config '" << config_path << "'\n";
            return 1;
        }
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            std::cerr << "error: " << config_path << ": " << e.what() << "\n";
            return 1;
        }
    }
    Diagnostics d;
    Config c = parse_config(j, d);
    if (command == "validate") {
        for (const auto& m : d.msgs) std::cout << m << "\n";
        std::cout << (d.ok() ? "config is valid\n" : "config is invalid\n");
        return d.ok() ? 0 : 1;
    }
    if (!d.ok()) {
        for (const auto& m : d.msgs) std::cerr << "config error: " << m << "\n";
        return 1;
    }
    if (profile == "theory") {
        // theoretical-regime overrides: gamma >= M^5 and the t <= M^-4 window
        c.gamma = std::max(c.gamma, std::pow(c.M, 5.0));
        c.t_max = std::min(c.t_max, std::pow(c.M, -4.0));
        c.T = std::min(c.T, std::pow(c.M, -4.0));
        if (c.t0 >= c.t_max) c.t_min = 0.0;
    }

    Out out;
    out.dir = out_dir;
    out.manifest["command"] = command;
    out.manifest["profile"] = profile;
    out.manifest["threads"] = threads;
    out.manifest["config"] = j;
    out.manifest["version"] = "effhyp 0.1.0";

    auto tic = std::chrono::steady_clock::now();
    int rc = 1;
    try {
        if (command == "analyze") rc = cmd_analyze(c, out);
        else if (command == "verify-discriminant") rc = cmd_verify_discriminant(c, out, threads);
        else if (command == "verify-bezout") rc = cmd_verify_bezout(c, out, threads);
        else if (command == "verify-weights") rc = cmd_verify_weights(c, out);
        else if (command == "solve") rc = cmd_solve(c, out, threads);
        else if (command == "loss-sweep") rc = cmd_loss_sweep(c, out, threads);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        out.manifest["error"] = ex.what();
        rc = 1;
    }
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - tic).count();
    out.finish(rc, ms);
    if (rc == 2) std::cerr << command << ": violations recorded (see violations.csv)\n";
    return rc;
}
