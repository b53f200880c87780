#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "esov/eqg.hpp"
#include "esov/error.hpp"
#include "esov/irf.hpp"

using namespace esov;

namespace {

const cplx kTau{0.31, 1.07};
const cplx kEta{0.137, 0.041};

ModelParams model(std::vector<Site> sites)
{
    return ModelParams(Theta(Lattice(kTau)), kEta, std::move(sites));
}

const std::vector<Site> kN1{{cplx(0.13, 0.07), 1}};
const std::vector<Site> kN3{{cplx(0.13, 0.07), 1}, {cplx(0.52, 0.33), 1}, {cplx(0.81, 0.18), 1}};
const std::vector<Site> kN5{{cplx(0.11, 0.05), 1}, {cplx(0.29, 0.41), 1}, {cplx(0.47, 0.16), 1},
                            {cplx(0.68, 0.62), 1}, {cplx(0.86, 0.27), 1}};

double rel(const MatrixXcd& a, const MatrixXcd& b) { return (a - b).norm() / b.norm(); }

} // namespace

TEST_CASE("paths are antiperiodic")
{
    for (int n : {1, 3, 5}) {
        const auto P = paths(n);
        REQUIRE(P.size() == std::size_t(1) << n);
        for (const auto& p : P) {
            CHECK(p.a.size() == std::size_t(n + 1));
            CHECK(p.a.back() == -p.a.front());
            CHECK(p.a.front() == 0.5 * p.weight());
        }
    }
    // bit (n-1-i) set iff sigma_i = -1
    const auto P = paths(3);
    CHECK(P[0b100].sigma == std::vector<int>{-1, 1, 1});
    CHECK(P[0b001].sigma == std::vector<int>{1, 1, -1});
}

TEST_CASE("Boltzmann weights")
{
    const Theta th{Lattice(kTau)};
    const cplx z{0.23, 0.17};
    for (double l : {-1.5, -0.5, 0.5, 1.5}) {
        CHECK(std::abs(boltzmann_weight(th, kEta, l + 1, l + 2, l + 1, l, z) - 1.0) < 1e-14);
        CHECK(std::abs(boltzmann_weight(th, kEta, l - 1, l - 2, l - 1, l, z) - 1.0) < 1e-14);
        // the other orientation is a genuine alpha entry
        const cplx w = boltzmann_weight(th, kEta, l, l + 1, l + 2, l + 1, z);
        CHECK(std::abs(w - r_alpha(th, kEta, z, 2.0 * kEta * (l + 1))) < 1e-14);
        CHECK(std::abs(w - 1.0) > 1e-2);
        // inadmissible configurations
        CHECK(boltzmann_weight(th, kEta, l + 2, l + 3, l + 2, l, z) == cplx(0.0));
        CHECK(boltzmann_weight(th, kEta, l + 2, l + 1, l, l, z) == cplx(0.0));
    }
    // R(0) is the flip: W(c,b,a,d|0) = delta(a, c)
    const auto ws = boltzmann_weights(model(kN3), 0.0);
    CHECK(ws.size() > 20);
    for (const auto& e : ws)
        CHECK(std::abs(e.W - (e.a == e.c ? 1.0 : 0.0)) < 1e-13);
}

TEST_CASE("n = 1 transfer matrix")
{
    const auto p = model(kN1);
    const DifferenceModule mod(p);
    for (const cplx z : {cplx(0.37, 0.29), cplx(-0.2, 0.6)}) {
        const MatrixXcd Tp = build_T_irf_paths(p, z);
        const MatrixXcd Ts = build_T_irf_sov(p, z);
        CHECK(Tp(0, 0) == cplx(0.0));
        CHECK(Tp(1, 1) == cplx(0.0));
        CHECK(std::abs(Ts(0, 0)) < 1e-15);
        CHECK(std::abs(Ts(1, 1)) < 1e-15);
        // entries of b + c read off the explicit n = 1 operators at lambda = eta h
        MatrixXcd want = MatrixXcd::Zero(2, 2);
        for (int which : {1, 2})
            for (int t = 0; t < 2; ++t)
                for (const auto& [k, v] : n1_example(mod, which, z, kEta * double(mod.grid().h(t))))
                    if (k.target == t)
                        want(k.target, k.source) += v;
        CHECK(rel(Ts, want) < 1e-13);
        CHECK(partition_function(p, {z}) == cplx(0.0));
    }
}

TEST_CASE("weights and difference transfer matrices are intertwined")
{
    Sampler rng(5);
    for (const auto& sites : {kN1, kN3, kN5}) {
        const auto p = model(sites);
        std::vector<cplx> zs;
        for (int i = 0; i < 4; ++i)
            zs.push_back(rng.cell_point(kTau));
        const DualReport r = dual_check(p, zs, rng);
        CAPTURE(sites.size());
        CHECK(r.trace_residual < 1e-12);
        CHECK(r.spectrum_residual < 1e-10);
        CHECK(r.intertwined_residual < 1e-9);
        CHECK(r.fit.null_singular < 1e-12);
        CHECK(r.fit.next_singular > 1e-4);
        CHECK(r.off_grid < 1e-13);
        // grid point = path with no normalization: the matrices differ
        CHECK(r.literal_residual > 1e-2);
    }
}

TEST_CASE("commuting family")
{
    Sampler rng(8);
    for (const auto& sites : {kN3, kN5}) {
        std::vector<std::pair<cplx, cplx>> pairs;
        for (int i = 0; i < 5; ++i)
            pairs.emplace_back(rng.cell_point(kTau), rng.cell_point(kTau));
        const auto r = commuting_family(model(sites), pairs);
        CHECK(r.sov < 1e-12);
        CHECK(r.paths < 1e-12);
    }
}

TEST_CASE("spectral certificates, n = 3")
{
    const auto p = model(kN3);
    Sampler rng(13);
    const SpectrumReport rep = certify_spectrum(p, cplx(0.37, 0.29), rng);
    REQUIRE(rep.certificates.size() == 8);
    CHECK(rep.pass);
    CHECK(rep.span_singular > 1e-6);
    CHECK(rep.min_gap > 1e-7);
    for (const auto& c : rep.certificates) {
        CHECK(c.pass);
        CHECK(c.membership.pass);
        CHECK(c.character_residual < 1e-10);
        CHECK(*std::max_element(c.quadratic.begin(), c.quadratic.end()) < 1e-10);
        CHECK(*std::max_element(c.second_line.begin(), c.second_line.end()) < 1e-10);
        CHECK(c.angle < 1e-8);
        CHECK(c.impostor_quadratic > 1e-4);
        CHECK(std::abs(c.eigenvalue - rayleigh_eigenvalue(p, c.v, rep.z0)) < 1e-10 * std::abs(c.eigenvalue));
    }

    MatrixXcd V(8, 8);
    for (int a = 0; a < 8; ++a)
        V.col(a) = rep.certificates[a].v;
    const cplx z{0.11, 0.53};
    const VectorXcd batch = rayleigh_eigenvalues(p, V, z);
    for (int a = 0; a < 8; ++a)
        CHECK(std::abs(batch[a] - rayleigh_eigenvalue(p, V.col(a), z)) < 1e-13 * std::abs(batch[a]));
}

TEST_CASE("eigenvalue fails membership under the wrong character")
{
    const auto p = model(kN3);
    Sampler rng(17);
    const SpectrumReport rep = certify_spectrum(p, cplx(0.37, 0.29), rng);
    const VectorXcd v = rep.certificates[3].v;
    const Character chi = irf_character(p);
    const Character wrong{-chi.chi1, chi.chiTau};
    auto eps = [&](cplx z) { return rayleigh_eigenvalue(p, v, z); };
    CHECK(membership_test(p.th, eps, 3, chi, rng).pass);
    CHECK_FALSE(membership_test(p.th, eps, 3, wrong, rng).pass);
    CHECK_FALSE(membership_test(p.th, eps, 2, chi, rng).pass);
}

TEST_CASE("partition function")
{
    const auto p = model(kN3);
    Sampler rng(21);
    std::vector<cplx> rows;
    for (int i = 0; i < 4; ++i)
        rows.push_back(rng.cell_point(kTau));
    const cplx Z = partition_function(p, rows);
    std::vector<cplx> rev(rows.rbegin(), rows.rend());
    std::vector<cplx> rot{rows[2], rows[0], rows[3], rows[1]};
    CHECK(std::abs(partition_function(p, rev) - Z) < 1e-10 * std::abs(Z));
    CHECK(std::abs(partition_function(p, rot) - Z) < 1e-10 * std::abs(Z));

    // one row: the trace is the sum of the certified eigenvalues
    const cplx z0{0.37, 0.29};
    const SpectrumReport rep = certify_spectrum(p, z0, rng);
    cplx sum = 0.0;
    for (const auto& c : rep.certificates)
        sum += c.eigenvalue;
    const cplx Z1 = partition_function(p, {z0}, TransferBuild::difference);
    CHECK(std::abs(Z1 - sum) < 1e-10 * std::max(1.0, std::abs(Z1)));
}

TEST_CASE("difference formula restricted to the grid")
{
    // T(-z) from the operator formula agrees with b(-z) + c(-z) on grid functions
    const auto p = model(kN3);
    const int n = 3, N = 8;
    Sampler rng(3);
    VectorXcd u(N);
    for (int i = 0; i < N; ++i)
        u[i] = rng.gaussian();
    auto x_of = [&](int I) {
        std::vector<cplx> x;
        for (int i = 0; i < n; ++i)
            x.push_back(((I >> (n - 1 - i)) & 1) ? -p.sites[i].z + kEta : -p.sites[i].z - kEta);
        return x;
    };
    auto ufn = [&](const std::vector<cplx>& x) {
        for (int I = 0; I < N; ++I) {
            const auto g = x_of(I);
            bool same = true;
            for (int i = 0; i < n; ++i)
                same = same && std::abs(g[i] - x[i]) < 1e-9;
            if (same)
                return u[I];
        }
        return cplx(0.0); // off the grid reads carry zero coefficients
    };
    const cplx z{0.37, 0.29};
    const VectorXcd Tu = build_T_irf_sov(p, -z) * u;
    for (int I = 0; I < N; ++I)
        CHECK(std::abs(apply_T_minus(p, z, ufn, x_of(I)) - Tu[I]) < 1e-10 * std::abs(Tu[I]));
}

TEST_CASE("continuous Bethe ansatz")
{
    Sampler rng(31);
    SUBCASE("n = 2, Lambda = (1, 1)")
    {
        const auto p = model({{cplx(0.13, 0.07), 1}, {cplx(0.52, 0.33), 1}});
        const auto r = continuous_bethe(p, rng, cplx(0.3, -0.2));
        CHECK(r.m == 1);
        CHECK(r.bethe_residual < 1e-9);
        CHECK(r.character_residual < 1e-9);
        CHECK(r.eigen_residual < 1e-8);
    }
    SUBCASE("n = 3, Lambda = (1, 1, 2)")
    {
        const auto p = model({{cplx(0.13, 0.07), 1}, {cplx(0.52, 0.33), 1}, {cplx(0.81, 0.18), 2}});
        const auto r = continuous_bethe(p, rng, cplx(0.3, -0.2));
        CHECK(r.m == 2);
        CHECK_FALSE(r.singular_string);
        CHECK(r.bethe_residual < 1e-9);
        CHECK(r.character_residual < 1e-9);
        CHECK(r.eigen_residual < 1e-8);

        // a root on a zero of A+ and its partner 2 eta above: both Bethe
        // terms vanish, u is still an eigenfunction
        const cplx w1 = -p.sites[0].z - kEta;
        const auto s = continuous_bethe(p, rng, cplx(0.3, -0.2), {w1, w1 + 2.0 * kEta});
        CHECK(s.singular_string);
        CHECK(s.bethe_residual < 1e-9);
        CHECK(s.eigen_residual < 1e-8);
    }
    CHECK_THROWS_AS(continuous_bethe(model(kN3), rng, 0.0), ConfigError);
}

TEST_CASE("IRF input validation")
{
    const auto even = model({{cplx(0.13, 0.07), 1}, {cplx(0.52, 0.33), 1}});
    CHECK_THROWS_AS(build_T_irf_paths(even, 0.3), ConfigError);
    const auto heavy = model({{cplx(0.13, 0.07), 2}});
    CHECK_THROWS_AS(build_T_irf_sov(heavy, 0.3), ConfigError);
    // z_2 = z_1 + 2 eta is excluded
    const auto resonant = model({{cplx(0.13, 0.07), 1}, {cplx(0.13, 0.07) + 2.0 * kEta, 1}, {cplx(0.7, 0.2), 1}});
    Sampler rng(1);
    CHECK_THROWS_AS(certify_spectrum(resonant, 0.3, rng), ConfigError);
}
