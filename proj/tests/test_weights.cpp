#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <effhyp/bezout.hpp>
#include <effhyp/weights.hpp>

using namespace effhyp;
using namespace effhyp::weights;
using symbols::Builtin;
using symbols::Vec;

static WeightField tricomi_field() {
    auto f = symbols::builtin(Builtin::tricomi_product);
    auto lf = symbols::localize(f, 8.0, 64.0, Vec{1.0});
    return build(lf, nullptr, WeightParams{});
}

static std::vector<TXXi> random_grid(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(1e-4, 0.5), ux(-0.01, 0.01), uxi(64.0, 512.0);
    std::vector<TXXi> g;
    for (int i = 0; i < n; ++i) g.push_back({ut(rng), Vec{ux(rng)}, Vec{uxi(rng)}});
    return g;
}

TEST_CASE("weight definitions are consistent") {
    auto w = tricomi_field();
    // tricomi: alpha = 0, so rho = M/<xi> and psi = 0 (b = 0 => A1 = 3 eps^2 > 0 region)
    Vec x{0.0}, xi{128.0};
    double br = w.bracket(xi);
    CHECK(w.rho(x, xi) == doctest::Approx(8.0 / br).epsilon(1e-12));
    CHECK(w.psi(x, xi) >= 0.0);
    double t = 0.02;
    double om = w.omega(t, x, xi);
    double want = std::sqrt((t - w.psi(x, xi)) * (t - w.psi(x, xi)) + 8.0 * w.rho(x, xi) / br);
    CHECK(om == doctest::Approx(want).epsilon(1e-12));
    CHECK(w.phi(t, x, xi) == doctest::Approx(om + t - w.psi(x, xi)).epsilon(1e-12));
    CHECK(w.sigma(t, x, xi) == doctest::Approx(t + w.rho(x, xi) + 8.0 / br).epsilon(1e-12));
}

TEST_CASE("dt(t phi) = kappa t phi") {
    auto w = tricomi_field();
    auto res = check_weight_identity(w, random_grid(1000, 31337));
    CHECK(res.analytic <= 1e-12);
    CHECK(res.finite_diff <= 1e-6);

    CHECK_THROWS_AS(check_weight_identity(w, {{0.0, Vec{0.0}, Vec{64.0}}}), std::invalid_argument);
}

TEST_CASE("phi lower bounds") {
    auto w = tricomi_field();
    auto reps = check_phi_bounds(w, random_grid(2000, 555));
    REQUIRE(reps.size() == 2);
    CHECK(reps[0].anchor == "eq:Phi:sita");
    CHECK(reps[0].ok(1e-12));
    CHECK(reps[0].violations.empty());
    CHECK(reps[1].anchor == "lem:psi:t:sei");
    CHECK(reps[1].fitted_constant > 0.0);
    CHECK(reps[1].fitted_constant < 100.0);
}

TEST_CASE("lem:daiji with the Bezout lambda_1") {
    auto w = tricomi_field();
    auto lambda1 = [&w](double t, const Vec& x, const Vec& xi) {
        double aM = w.lf.a_M(t, x, xi);
        double b = w.lf.b(t, x, xi);
        return bezout::spectral(bezout::bezout_matrix(aM, b)).lambda[0];
    };
    auto reps = check_daiji(w, lambda1, w.lf.fac.e_bar, random_grid(500, 808));
    REQUIRE(reps.size() == 2);
    CHECK(reps[0].anchor == "lem:daiji");
    CHECK(reps[0].fitted_constant < 10.0);
    CHECK(reps[1].anchor == "lem:daiji:sigma");
    CHECK(reps[1].ok(1e-12));
    CHECK(reps[1].violations.empty());
}

TEST_CASE("seminorm estimate: closed-form checks") {
    std::vector<TXXi> g = {{0.1, Vec{0.0}, Vec{100.0}}, {0.3, Vec{0.005}, Vec{200.0}}};
    double M = 8.0, gamma = 64.0;
    // constant symbol against itself: all derivatives vanish, sup = 1
    auto cst = [](double, const Vec&, const Vec&) { return 2.5; };
    CHECK(seminorm_estimate(cst, cst, 3, g, M, gamma) == doctest::Approx(1.0).epsilon(1e-9));
    // f = x against m = 1: the x-derivative term dominates with weight sqrt(M/<xi>)
    auto lin = [](double, const Vec& x, const Vec&) { return x[0]; };
    auto one = [](double, const Vec&, const Vec&) { return 1.0; };
    double got = seminorm_estimate(lin, one, 1, g, M, gamma);
    double want = 0.0;
    for (const auto& p : g) {
        double bxi = std::hypot(gamma, p.xi[0]);
        want = std::max({want, std::fabs(p.x[0]), std::sqrt(M / bxi)});
    }
    CHECK(got == doctest::Approx(want).epsilon(1e-7));

    CHECK_THROWS_AS(seminorm_estimate(cst, cst, 4, g, M, gamma), std::invalid_argument);
}
