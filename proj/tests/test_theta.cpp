#include "doctest.h"

#include <cmath>

#include "esov/error.hpp"
#include "esov/params.hpp"
#include "esov/theta.hpp"

using namespace esov;

namespace {

const cplx kTau{0.31, 1.07};

Theta make_theta() { return Theta(Lattice(kTau)); }

struct Frozen {
    double re, im;
    int d;
    cplx value;
};

// 40-digit direct summation of the defining series (160 terms, no
// fundamental-domain reduction) at tau = 0.31 + 1.07i.
const Frozen kFrozen[] = {
    {0.3, 0.2, 0, {0.73193335798958654816, 0.53005659472658016139}},
    {0.3, 0.2, 1, {2.1907018696465259675, -0.94498323622159417967}},
    {0.3, 0.2, 2, {-7.0694408181973340122, -5.0161870235079166932}},
    {0.3, 0.2, 3, {-19.557197508585006782, 7.7590627664191009333}},
    {-1.7, 2.9, 0, {-50267499469.310811186, 4809061404.6707722135}},
    {-1.7, 2.9, 1, {53723948937.083918611, 821405840255.56012}},
    {-1.7, 2.9, 2, {13620028075550.63236, -339698610793.85513682}},
    {-1.7, 2.9, 3, {5981642631252.1581661, -229887434404920.52362}},
    {0.45, -0.8, 0, {5.1948139810796895542, 1.439008282438010568}},
    {0.45, -0.8, 1, {-10.501552200458120703, 15.206859697848405874}},
    {0.45, -0.8, 2, {-39.833734215403443326, -90.421181289958777931}},
    {0.45, -0.8, 3, {821.7241177271389708, -42.472737098803029366}},
};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST_CASE("theta matches high precision series values")
{
    const Theta th = make_theta();
    for (const auto& f : kFrozen)
        CHECK(rel(th.theta({f.re, f.im}, f.d), f.value) < 1e-12);
}

TEST_CASE("theta vanishes at the origin and is odd")
{
    const Theta th = make_theta();
    CHECK(std::abs(th.theta(0.0)) < 1e-15);
    const cplx z{0.3, 0.2};
    CHECK(rel(th.theta(-z), -th.theta(z)) < 1e-12);
    Sampler rng(7);
    for (int i = 0; i < 100; ++i) {
        const cplx x = rng.box(-2, 2, -2 * kTau.imag(), 2 * kTau.imag());
        CHECK(rel(th.theta(-x), -th.theta(x)) < 1e-12);
    }
}

TEST_CASE("quasi periodicity on random points")
{
    const Theta th = make_theta();
    Sampler rng(11);
    for (int i = 0; i < 100; ++i) {
        const cplx z = rng.box(-1, 1, -2 * kTau.imag(), 2 * kTau.imag());
        const cplx t = th.theta(z);
        CHECK(std::abs(th.theta(z + 1.0) + t) <= 1e-12 * std::abs(t));
        const cplx tt = th.theta(z + kTau);
        const cplx m = std::exp(-kI * kPi * kTau - 2.0 * kI * kPi * z);
        CHECK(std::abs(tt + m * t) <= 1e-12 * std::max(std::abs(tt), std::abs(t)));
    }
}

TEST_CASE("derivatives agree with jet coefficients of the value")
{
    const Theta th = make_theta();
    Sampler rng(3);
    for (int i = 0; i < 20; ++i) {
        const cplx z = rng.cell_point(kTau, -1.5, 1.5);
        const ScalarJet j = th.jet(z, 3);
        double fact = 1.0;
        for (int d = 0; d <= 3; ++d) {
            if (d > 0)
                fact *= d;
            CHECK(rel(th.theta(z, d), j[d] * fact) < 1e-12);
        }
    }
}

TEST_CASE("derived functions match frozen values")
{
    const Theta th = make_theta();
    const cplx lam{0.23, 0.17}, z{0.41, 0.29};
    CHECK(rel(th.theta_prime0(), {2.6372149942444335177, 0.64571316205298827469}) < 1e-12);
    CHECK(rel(th.sigma(lam, z), {-1.668361752891133524, 0.34453172927856834728}) < 1e-12);
    CHECK(rel(th.zeta_bar(z), {0.44554359207270358229, -2.3167797350046210861}) < 1e-12);
    CHECK(rel(th.wp_bar(z), {4.2617651338490071658, -1.7893432455385342952}) < 1e-12);
    CHECK(rel(th.sigma_dlambda(lam, z), {6.9231762660907428663, -11.221450473606281937}) < 1e-11);
}

TEST_CASE("sigma: residue one at the origin and multiplier in z")
{
    const Theta th = make_theta();
    const cplx lam{0.23, 0.17};
    // contour average of eps * sigma(eps) on a small circle
    const int N = 64;
    cplx acc = 0.0;
    for (int k = 0; k < N; ++k) {
        const cplx e = 1e-2 * std::exp(2.0 * kPi * kI * double(k) / double(N));
        acc += e * th.sigma(lam, e);
    }
    CHECK(std::abs(acc / double(N) - 1.0) < 1e-12);
    CHECK(std::abs(1e-5 * th.sigma(lam, 1e-5) - 1.0) < 1e-4);

    Sampler rng(5);
    for (int i = 0; i < 10; ++i) {
        const cplx l = rng.cell_point(kTau, 0.1, 0.9);
        const cplx z = rng.cell_point(kTau, 0.1, 0.9);
        CHECK(rel(th.sigma(l, z + kTau) / th.sigma(l, z), std::exp(2.0 * kPi * kI * l)) < 1e-11);
        CHECK(rel(th.sigma(l, z + 1.0), th.sigma(l, z)) < 1e-11);
        const cplx direct = th.theta(l - z) * th.theta(0.0, 1) / (th.theta(z) * th.theta(l));
        CHECK(rel(th.sigma(l, z), direct) < 1e-14);
    }
}

TEST_CASE("zeta_bar and wp_bar properties")
{
    const Theta th = make_theta();
    Sampler rng(9);
    for (int i = 0; i < 10; ++i) {
        const cplx z = rng.cell_point(kTau, 0.1, 0.9);
        CHECK(rel(th.zeta_bar(-z), -th.zeta_bar(z)) < 1e-12);
        CHECK(rel(th.wp_bar(z + 1.0), th.wp_bar(z)) < 1e-11);
        CHECK(rel(th.wp_bar(z + kTau), th.wp_bar(z)) < 1e-10);
        CHECK(rel(th.zeta_bar(z + kTau), th.zeta_bar(z) - 2.0 * kPi * kI) < 1e-11);
        // derivative of zeta_bar through a degree-2 jet
        const ScalarJet j = th.jet(z, 3);
        const ScalarJet zb = j.derivative() / j;
        CHECK(std::abs(zb[1] + th.wp_bar(z)) <= 1e-11 * std::abs(th.wp_bar(z)));
    }
}

TEST_CASE("sigma_dlambda: jet oracle, diagonal limit, periodicity")
{
    const Theta th = make_theta();
    Sampler rng(13);
    for (int i = 0; i < 10; ++i) {
        const cplx l = rng.cell_point(kTau, 0.1, 0.9);
        const cplx z = rng.cell_point(kTau, 0.1, 0.9);
        const ScalarJet s = th.sigma_jet(l, z, 2);
        CHECK(rel(th.sigma_dlambda(l, z), s[1]) < 1e-10);
        CHECK(rel(th.sigma_dlambda(l + 1.0, z), th.sigma_dlambda(l, z)) < 1e-10);
    }
    // as z -> 0 the pole of sigma cancels in the derivative and the
    // limit is -(theta'/theta)'(lambda) = wp_bar(lambda)
    const cplx l{0.23, 0.17};
    const double e = 1e-5;
    const cplx lim = 0.5 * (th.sigma_dlambda(l, e) + th.sigma_dlambda(l, -e));
    CHECK(rel(lim, th.wp_bar(l)) < 1e-8);
}

TEST_CASE("errors: lattice floor, pole proximity, truncation")
{
    CHECK_THROWS_AS(Lattice(cplx(0.1, 0.0)), ConfigError);
    CHECK_THROWS_AS(Lattice(cplx(0.1, -1.0)), ConfigError);
    const Theta th = make_theta();
    CHECK_THROWS_AS(th.sigma({0.2, 0.1}, kTau + 1e-9), PoleProximityError);
    CHECK_THROWS_AS(th.zeta_bar(1.0), PoleProximityError);
    CHECK_THROWS_AS(th.theta(0.1, 4), std::invalid_argument);
    ThetaOptions opt;
    opt.max_terms = 64;
    // a lattice above the floor but too thin for 64 terms
    CHECK_THROWS_AS(Theta(Lattice(cplx(0.0, 2e-3)), opt), TruncationError);
}
