#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <effhyp/discriminant.hpp>

using namespace effhyp;
using namespace effhyp::discriminant;
using symbols::Builtin;
using symbols::Vec;

static symbols::LocalizedFamily lf16() {
    symbols::FamilyParams prm;
    prm.m = 3;
    auto f = symbols::builtin(Builtin::example16, prm);
    return symbols::localize(f, 8.0, 64.0, Vec{1.0});
}

TEST_CASE("delta polynomial matches the pointwise evaluation") {
    auto lf = lf16();
    Vec x{0.2}, xi{1.0};
    double eps = 0.1;
    auto dp = detail::delta_poly(lf, x, xi, eps);
    REQUIRE(dp.has_value());
    auto D = delta_of_t(lf, x, xi, eps);
    for (double t : {-0.3, -0.05, 0.0, 0.04, 0.2, 0.5}) {
        double want = D(t);
        CHECK(poly::eval(*dp, t) == doctest::Approx(want).epsilon(1e-11));
    }
}

TEST_CASE("nu_roots: triple root at -eps^2 when b vanishes") {
    // example family at x = 0: b = 0, alpha = 0, Delta = 4(t+eps^2)^3
    auto lf = lf16();
    Vec x{0.0}, xi{1.0};
    double eps = 0.1;
    for (auto be : {Backend::polynomial, Backend::generic}) {
        auto nt = nu_roots(lf, x, xi, eps, 1.0, be);
        CHECK(nt.nu1 == doctest::Approx(-eps * eps).epsilon(1e-6));
        CHECK(std::abs(nt.nu2 - std::complex<double>(-eps * eps)) < 1e-4);
        CHECK(std::abs(nt.nu3 - std::complex<double>(-eps * eps)) < 1e-4);
        CHECK(nt.a1 == doctest::Approx(3 * eps * eps).epsilon(1e-3));
    }
    CHECK_THROWS_AS(nu_roots(lf, x, xi, 0.0), std::invalid_argument);
}

TEST_CASE("generic backend agrees with the polynomial one") {
    auto lf = lf16();
    double eps = 0.1;
    for (double xv : {0.05, 0.2, 0.45}) {
        Vec x{xv}, xi{1.0};
        auto pe = nu_roots(lf, x, xi, eps, 1.0, Backend::polynomial);
        auto ge = nu_roots(lf, x, xi, eps, 1.0, Backend::generic);
        CHECK(pe.exact_backend);
        CHECK_FALSE(ge.exact_backend);
        CHECK(std::fabs(pe.nu1 - ge.nu1) < 1e-9);
        CHECK(std::abs(pe.nu2 - ge.nu2) < 1e-7);
        CHECK(std::abs(pe.nu3 - ge.nu3) < 1e-7);
        // dbar agrees where it matters, near the origin
        for (double t : {0.0, 0.02, 0.1, 0.3})
            CHECK(std::fabs(pe.dbar(t) - ge.dbar(t)) < 1e-7 * std::max(1.0, std::fabs(pe.dbar(t))));
    }
}

TEST_CASE("psi_from: clamp and cutoff behaviour") {
    // handcrafted triples, rho = 1
    NuTriple nt;
    nt.nu1 = -0.3;
    nt.nu2 = 0.1;
    nt.nu3 = 0.1;
    nt.a1 = -(nt.nu1 + 0.2);
    // A1 = nu1 + a1 = -0.2 < 0, far below 2 c1 rho: chi = 1, psi = -A1/2 = 0.1
    CHECK(psi_from(nt, 1.0) == doctest::Approx(0.1).epsilon(1e-12));

    // A1 >= 2 c1 rho: cutoff kills psi
    nt.nu1 = -0.01;
    nt.nu2 = -0.2;
    nt.nu3 = -0.2;
    nt.a1 = 0.41;
    CHECK(psi_from(nt, 1.0) == 0.0);
    CHECK(psi_from(nt, 1.0) >= 0.0);
}

TEST_CASE("lower bound pro:bound:Dis on a small grid") {
    auto lf = lf16();
    Grid g;
    for (int i = 0; i <= 40; ++i) g.ts.push_back(0.5 * i / 40.0);
    for (int i = -4; i <= 4; ++i) g.xs.push_back(Vec{0.5 * i / 4.0});
    g.xis.push_back(Vec{1.0});
    auto rep = verify_lower_bound(lf, g, 0.1);
    CHECK(rep.anchor == "pro:bound:Dis");
    CHECK(rep.n_points == 41 * 9);
    CHECK(rep.ok(1e-12));
    CHECK(rep.violations.empty());
    CHECK(rep.fitted_constant >= 1.0 / 32.0);

    // threads must not change the result
    auto rep2 = verify_lower_bound(lf, g, 0.1, cbar_default, 4);
    CHECK(rep2.worst_margin == rep.worst_margin);
    CHECK(rep2.fitted_constant == rep.fitted_constant);
}

TEST_CASE("auxiliary lemma suite") {
    auto lf = lf16();
    Grid g;
    for (int i = 1; i <= 20; ++i) g.ts.push_back(0.5 * i / 20.0);
    for (int i = 0; i <= 4; ++i) g.xs.push_back(Vec{0.5 * i / 4.0});
    g.xis.push_back(Vec{1.0});
    auto reps = verify_aux_bounds(lf, g, 0.1);
    REQUIRE(reps.size() == 5);
    CHECK(reps[0].anchor == "lem:b_1:alpha");
    CHECK(reps[0].ok(1e-12)); // |bhat_1| <= 4 sqrt(alpha): equality-free here
    CHECK(reps[1].anchor == "lem:nu_j:al");
    CHECK(reps[1].ok(1e-12));
    CHECK(reps[1].violations.empty());
    CHECK(reps[2].anchor == "lem:nu:1sa:nuj");
    CHECK(reps[3].anchor == "lem:pert:Dis");
    CHECK(reps[3].fitted_constant > 0.0);
    CHECK(reps[3].fitted_constant < 50.0);
    CHECK(reps[4].anchor == "lem:b:hi:a");
    CHECK(reps[4].fitted_constant <= 1.0 + 1e-9);
}
