#include "doctest.h"

#include <cmath>

#include "esov/eqg.hpp"
#include "esov/error.hpp"

using namespace esov;

namespace {

const cplx kTau{0.31, 1.07};
const cplx kEta{0.137, 0.041};

ModelParams model(std::vector<Site> sites)
{
    return ModelParams(Theta(Lattice(kTau)), kEta, std::move(sites));
}

const std::vector<Site> kN1{{cplx(0.13, 0.07), 1}};
const std::vector<Site> kN2{{cplx(0.13, 0.07), 1}, {cplx(0.52, 0.33), 1}};
const std::vector<Site> kN2b{{cplx(0.13, 0.07), 2}, {cplx(0.52, 0.33), 1}};

} // namespace

TEST_CASE("R-matrix structure")
{
    const Theta th{Lattice(kTau)};
    const cplx l{0.29, 0.44};
    const Mat4 R0 = r_matrix(th, kEta, 0.0, l);
    Mat4 flip = Mat4::Zero();
    flip(0, 0) = flip(3, 3) = flip(1, 2) = flip(2, 1) = 1.0;
    CHECK((R0 - flip).cwiseAbs().maxCoeff() < 1e-13);

    const cplx z{0.21, 0.33};
    const Mat4 R = r_matrix(th, kEta, z, l);
    CHECK(R(1, 1) == r_alpha(th, kEta, z, l));
    CHECK(R(1, 2) == r_beta(th, kEta, z, l));
    CHECK(R(2, 1) == r_beta(th, kEta, z, -l));
    CHECK(R(2, 2) == r_alpha(th, kEta, z, -l));
    // weight preservation: commutes with h (x) 1 + 1 (x) h
    Mat4 H = Mat4::Zero();
    H(0, 0) = 2.0;
    H(3, 3) = -2.0;
    CHECK((H * R - R * H).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(r_matrix(th, kEta, 2.0 * kEta, l), PoleProximityError);
}

TEST_CASE("dynamical Yang-Baxter and K twist")
{
    const Theta th{Lattice(kTau)};
    Sampler rng(21);
    for (int i = 0; i < 20; ++i) {
        const cplx z = rng.cell_point(kTau), w = rng.cell_point(kTau), l = rng.cell_point(kTau);
        CHECK(qybe_residual(th, kEta, z, w, l) < 1e-9);
        CHECK(ktwist_residual(th, kEta, z, l) < 1e-12);
    }
}

TEST_CASE("grid indexing and weights")
{
    const Grid g({2, 1});
    CHECK(g.size() == 6);
    CHECK(g.index({0, 0}) == 0);
    CHECK(g.index({2, 1}) == 5);
    CHECK(g.index({3, 0}) == -1);
    CHECK(g.h(0) == 3);
    CHECK(g.h(5) == -3);
}

TEST_CASE("shift algebra composition and associativity")
{
    const DifferenceModule mod(model(kN2));
    const cplx z{0.31, 0.22}, w{0.62, 0.41};
    const auto A = mod.a(z), B = mod.b(w), C = mod.c(z + 0.1);
    const cplx l{0.27, 0.19};
    CHECK(coefficient_residual(A.compose(B).compose(C), A.compose(B.compose(C)), l) < 1e-11);

    // composition against direct application to a sampled function
    auto f = [](int s, cplx lam) { return std::exp(cplx(0.3, 0.1) * double(s + 1) * lam) + double(s); };
    const auto AB = A.compose(B);
    for (int t = 0; t < mod.grid().size(); ++t) {
        auto Bf = [&](int s, cplx lam) { return B.apply(f, s, lam); };
        const cplx direct = A.apply(Bf, t, l);
        const cplx composed = AB.apply(f, t, l);
        CHECK(std::abs(direct - composed) <= 1e-12 * std::max(1.0, std::abs(direct)));
    }
    // a and its inverse
    const auto I = mod.a(z).compose(mod.a_inverse(z));
    CHECK(coefficient_residual(I, mod.identity(), l) < 1e-13);
}

TEST_CASE("grading: a, d keep the weight, b lowers and c raises it")
{
    const DifferenceModule mod(model(kN2b));
    const cplx z{0.31, 0.22};
    const Grid& g = mod.grid();
    const auto A = mod.a(z), B = mod.b(z), C = mod.c(z), D = mod.d(z);
    for (const auto& [k, c] : A.terms())
        CHECK(g.h(k.target) == g.h(k.source));
    for (const auto& [k, c] : D.terms())
        CHECK(g.h(k.target) == g.h(k.source));
    for (const auto& [k, c] : B.terms()) {
        CHECK(g.h(k.source) - g.h(k.target) == 2);
        CHECK(k.shift == 1);
    }
    for (const auto& [k, c] : C.terms()) {
        CHECK(g.h(k.target) - g.h(k.source) == 2);
        CHECK(k.shift == -1);
    }
}

TEST_CASE("restriction to the grid: which Delta factor closes b and c")
{
    for (const auto& sites : {kN1, kN2, kN2b}) {
        const DifferenceModule mod(model(sites));
        const BoundaryReport r = mod.boundary_report({0.31, 0.22});
        CHECK(r.b_with_delta_plus <= 1e-12 * r.scale);
        CHECK(r.c_with_delta_minus <= 1e-12 * r.scale);
        CHECK(r.b_with_delta_minus > 1e-6 * r.scale);
        CHECK(r.c_with_delta_plus > 1e-6 * r.scale);
    }
}

TEST_CASE("n = 1 operators reproduce the single-site formulas")
{
    for (int L : {1, 2, 3}) {
        const DifferenceModule mod(model({{cplx(0.13, 0.07), L}}));
        const cplx z{0.41, 0.28};
        Sampler rng(31);
        const auto Lz = mod.L(z);
        for (int s = 0; s < 3; ++s) {
            const cplx l = rng.cell_point(kTau, 0.1, 0.9);
            for (int which = 0; which < 4; ++which) {
                const auto& op = Lz[which / 2][which % 2];
                const auto got = op.coefficients(l);
                const auto want = n1_example(mod, which, z, l);
                double scale = 0.0, diff = 0.0;
                for (const auto& [k, v] : want)
                    scale = std::max(scale, std::abs(v));
                for (const auto& [k, v] : want) {
                    auto it = got.find(k);
                    diff = std::max(diff, std::abs(v - (it == got.end() ? cplx(0.0) : it->second)));
                }
                for (const auto& [k, v] : got)
                    if (!want.count(k))
                        diff = std::max(diff, std::abs(v));
                CHECK(diff <= 1e-10 * scale);
            }
        }
    }
}

TEST_CASE("RLL relations")
{
    const std::vector<cplx> lams{{0.27, 0.19}, {0.5, 0.3}, {0.13, 0.71}, {0.66, 0.42}, {0.38, 0.9}};
    const cplx z{0.31, 0.22}, w{0.62, 0.41};
    for (const auto& sites : {kN1, kN2, kN2b}) {
        const DifferenceModule mod(model(sites));
        const RllReport rep = rll_residual(mod, z, w, lams);
        CHECK(rep.max_residual < 1e-9);
    }
}

TEST_CASE("operators depend on eta")
{
    const DifferenceModule mod(model(kN2));
    const DifferenceModule other(ModelParams(Theta(Lattice(kTau)), kEta * 1.01, kN2));
    CHECK(coefficient_residual(mod.b({0.31, 0.22}), other.b({0.31, 0.22}), {0.27, 0.19}) > 1e-4);
}

TEST_CASE("exchange relation scalar identity")
{
    const Theta th{Lattice(kTau)};
    Sampler rng(41);
    for (int i = 0; i < 20; ++i) {
        const cplx z = rng.cell_point(kTau), w = rng.cell_point(kTau);
        const cplx l = rng.cell_point(kTau), x = rng.cell_point(kTau);
        CHECK(ab_exchange_scalar_residual(th, kEta, z, w, l, x) < 1e-10);
    }
}

TEST_CASE("d satisfies the determinant relation")
{
    const DifferenceModule mod(model(kN2));
    const cplx z{0.31, 0.22};
    const cplx eta = kEta;
    const auto lhs = mod.a(z + 2.0 * eta).compose(mod.d(z)) - mod.c(z + 2.0 * eta).compose(mod.b(z));
    const Theta th = mod.params().th;
    const Grid g = mod.grid();
    const cplx detz = mod.det(z);
    const auto rhs = mod.multiply([&](cplx l, int t) {
        return th.theta(l - 2.0 * eta * double(g.h(t))) / th.theta(l) * detz;
    });
    const cplx l{0.27, 0.19};
    CHECK(coefficient_residual(lhs, rhs, l) < 1e-11);
}

TEST_CASE("residue sum of the auxiliary elliptic function")
{
    for (const auto& sites : {kN1, kN2, kN2b}) {
        const DifferenceModule mod(model(sites));
        int nontrivial = 0;
        for (int t = 0; t < mod.grid().size(); ++t)
            for (int i = 0; i < mod.params().n(); ++i) {
                const auto r = residue_sum(mod, t, i);
                CHECK(r.relative() < 1e-10);
                if (r.scale > 1e-6 * r.magnitude)
                    ++nontrivial;
            }
        CHECK(nontrivial > 0);
    }
}

TEST_CASE("highest weight vector")
{
    for (const auto& sites : {kN1, kN2, kN2b}) {
        const DifferenceModule mod(model(sites));
        const auto r = highest_weight_check(mod, {0.41, 0.28}, {0.23, 0.37});
        CHECK(r.c_annihilation <= 1e-12);
        CHECK(r.a_eigen_residual <= 1e-10);
        CHECK(r.d_eigen_residual <= 1e-10);
        CHECK(r.normalized_residual <= 1e-10);
        CHECK(r.h_value == r.expected_h);
    }
}
