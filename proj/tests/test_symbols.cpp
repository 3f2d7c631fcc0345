#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <effhyp/symbols.hpp>

using namespace effhyp;
using namespace effhyp::symbols;

TEST_CASE("builtin validation rejects bad input") {
    FamilyParams bad;
    bad.m = 2.5;
    CHECK_THROWS_AS(builtin(Builtin::example16, bad), std::invalid_argument);

    // not homogeneous of degree 0 in xi
    auto a_inhom = [](double t, const Vec&, const Vec& xi) { return t + xi[0]; };
    auto b_zero = [](double, const Vec&, const Vec&) { return 0.0; };
    CHECK_THROWS_AS(builtin(Builtin::custom, {}, a_inhom, b_zero), std::invalid_argument);

    // hyperbolicity violated on the validation grid (a < 0, b != 0)
    auto a_neg = [](double, const Vec&, const Vec&) { return -1.0; };
    auto b_one = [](double, const Vec&, const Vec&) { return 1.0; };
    CHECK_THROWS_AS(builtin(Builtin::custom, {}, a_neg, b_one), std::invalid_argument);
}

TEST_CASE("polynomial backends agree with the evaluators") {
    FamilyParams prm;
    prm.m = 3;
    for (auto which : {Builtin::tricomi_product, Builtin::bbp, Builtin::example16}) {
        auto f = builtin(which, prm);
        Vec x{0.23}, xi{1.0};
        auto ap = f.a_poly(x, xi), bp = f.b_poly(x, xi);
        for (double t : {0.0, 0.07, 0.31, 0.5}) {
            CHECK(poly::eval(ap, t) == doctest::Approx(f.a(t, x, xi)).epsilon(1e-13));
            CHECK(poly::eval(bp, t) == doctest::Approx(f.b(t, x, xi)).epsilon(1e-13));
        }
    }
}

TEST_CASE("find_triple_points refines onto the characteristic point") {
    auto f = builtin(Builtin::example16);
    std::vector<std::pair<Vec, Vec>> grid = {{Vec{2e-2}, Vec{1.0}}, {Vec{0.4}, Vec{1.0}}};
    auto pts = find_triple_points(f, grid, 1e-3);
    // only the near-origin seed qualifies (a(0,x)=x^2 must be < tol)
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].refined);
    CHECK(std::fabs(pts[0].x[0]) < 1e-6);
    CHECK(std::fabs(pts[0].a_resid) < 1e-12);
    CHECK(std::fabs(pts[0].b_resid) < 1e-12);

    CHECK_THROWS_AS(find_triple_points(f, {{Vec{0.0}, Vec{2.0}}}, 1e-3), std::invalid_argument);
}

TEST_CASE("Hamilton spectrum: nonzero pair +-dt a") {
    TriplePoint p;
    p.x = Vec{0.0};
    p.xi = Vec{1.0};

    auto tric = builtin(Builtin::tricomi_product);
    auto rep = hamilton_spectrum(tric, p);
    CHECK(rep.nonzero_pair);
    CHECK(rep.e_bar == doctest::Approx(1.0).epsilon(1e-7));

    FamilyParams prm;
    prm.a2 = 2.0;
    auto b2 = builtin(Builtin::bbp, prm);
    rep = hamilton_spectrum(b2, p);
    CHECK(rep.nonzero_pair);
    CHECK(rep.e_bar == doctest::Approx(2.0).epsilon(1e-7));

    auto e16 = builtin(Builtin::example16);
    rep = hamilton_spectrum(e16, p);
    CHECK(rep.nonzero_pair);
    CHECK(rep.e_bar == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("effective factorization recovers e and alpha") {
    // a = (1+t)(t + x^2): e = 1+t, alpha = x^2 exactly
    auto a_ev = [](double t, const Vec& x, const Vec&) { return (1.0 + t) * (t + x[0] * x[0]); };
    auto b_ev = [](double, const Vec&, const Vec&) { return 0.0; };
    auto f = builtin(Builtin::custom, {}, a_ev, b_ev);
    TriplePoint p;
    p.x = Vec{0.0};
    p.xi = Vec{1.0};
    auto fac = effective_factorization(f, p);
    CHECK(fac.e_bar == doctest::Approx(1.0).epsilon(1e-9));
    Vec x{0.3}, xi{1.0};
    CHECK(fac.alpha(x, xi) == doctest::Approx(0.09).epsilon(1e-9));
    CHECK(fac.e(0.2, x, xi) == doctest::Approx(1.2).epsilon(1e-9));
    // removable singularity at t = -alpha
    CHECK(fac.e(-0.09, x, xi) == doctest::Approx(0.91).epsilon(1e-6));

    // dt a <= 0 at the triple point is rejected
    auto a_flat = [](double, const Vec& x, const Vec&) { return x[0] * x[0]; };
    auto f2 = builtin(Builtin::custom, {}, a_flat, b_ev);
    CHECK_THROWS_AS(effective_factorization(f2, p), std::runtime_error);
}

TEST_CASE("localization: cutoffs and localized symbols") {
    auto f = builtin(Builtin::tricomi_product);
    auto lf = localize(f, 8.0, 64.0, Vec{1.0});

    CHECK(lf.bracket(Vec{0.0}) == doctest::Approx(64.0));
    CHECK(lf.bracket(Vec{64.0}) == doctest::Approx(64.0 * std::sqrt(2.0)).epsilon(1e-14));

    // y is the identity on the plateau |x| <= M^{-2} and vanishes far out
    CHECK(lf.y(Vec{0.01})[0] == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(lf.y(Vec{1.0})[0] == 0.0);

    // eta snaps to xibar<xi> outside the cone
    Vec far{-50.0};
    CHECK(lf.eta(far)[0] == doctest::Approx(lf.bracket(far)).epsilon(1e-14));

    // tricomi: alpha = 0, e = 1, so rho = M/<xi> and a_M = t + 2M/<xi>
    Vec x{0.02}, xi{128.0};
    double br = lf.bracket(xi);
    CHECK(lf.alpha(x, xi) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(lf.rho(x, xi) == doctest::Approx(8.0 / br).epsilon(1e-12));
    CHECK(lf.a_M(0.1, x, xi) == doctest::Approx(0.1 + 16.0 / br).epsilon(1e-8));

    CHECK_THROWS_AS(localize(f, 0.5, 64.0, Vec{1.0}), std::invalid_argument);
    CHECK_THROWS_AS(localize(f, 8.0, 64.0, Vec{2.0}), std::invalid_argument);
}
