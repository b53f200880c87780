#include "esov/irf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "esov/eqg.hpp"
#include "esov/error.hpp"

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace esov {

namespace {

void require_irf(const ModelParams& params)
{
    const int n = params.n();
    if (n < 1 || n % 2 == 0)
        throw ConfigError("Model invariant violated: the IRF model needs an odd number of sites, got " +
                          std::to_string(n));
    for (const auto& s : params.sites)
        if (s.Lambda != 1)
            throw ConfigError("Model invariant violated: the IRF model needs Lambda_i = 1 at every site");
    params.validate_irf();
}

int sign_index(long d) { return d == 1 ? 0 : 1; }

int path_bit(int I, int i, int n) { return (I >> (n - 1 - i)) & 1; }

int path_weight(int I, int n)
{
    int w = 0;
    for (int i = 0; i < n; ++i)
        w += 1 - 2 * path_bit(I, i, n);
    return w;
}

// grid index of each path, for all Lambda_i = 1
std::vector<int> path_to_grid(const Grid& g, int n)
{
    std::vector<int> perm(1 << n);
    for (int I = 0; I < (1 << n); ++I) {
        std::vector<int> m(n);
        for (int i = 0; i < n; ++i)
            m[i] = path_bit(I, i, n);
        perm[I] = g.index(m);
    }
    return perm;
}

double max_abs(const MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

struct Eigenpairs {
    VectorXcd values;
    MatrixXcd vectors; // right eigenvectors, unit columns
};

// zgeev; Eigen's complex Schur is too slow past a few hundred rows
Eigenpairs eigen_general(const MatrixXcd& A, bool vectors = true)
{
    const lapack_int N = static_cast<lapack_int>(A.rows());
    MatrixXcd a = A;
    Eigenpairs e{VectorXcd(N), MatrixXcd(vectors ? N : 1, vectors ? N : 1)};
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', vectors ? 'V' : 'N', N, a.data(), N,
                                          e.values.data(), nullptr, 1, e.vectors.data(), vectors ? N : 1);
    if (info != 0)
        throw SolverError("eigensolver failed, info = " + std::to_string(info));
    return e;
}

cplx theta_product(const Theta& th, const std::vector<cplx>& args)
{
    cplx p = 1.0;
    for (const cplx a : args)
        p *= th.theta(a);
    return p;
}

} // namespace

int PathState::weight() const { return std::accumulate(sigma.begin(), sigma.end(), 0); }

std::vector<PathState> paths(int n)
{
    std::vector<PathState> out;
    for (int I = 0; I < (1 << n); ++I) {
        PathState p;
        for (int i = 0; i < n; ++i)
            p.sigma.push_back(1 - 2 * path_bit(I, i, n));
        p.a.push_back(0.5 * p.weight());
        for (int s : p.sigma)
            p.a.push_back(p.a.back() - s);
        out.push_back(std::move(p));
    }
    return out;
}

cplx boltzmann_weight(const Theta& th, cplx eta, double c, double b, double a, double d, cplx z)
{
    const long cd = std::lround(c - d), bc = std::lround(b - c), ba = std::lround(b - a), ad = std::lround(a - d);
    for (long v : {cd, bc, ba, ad})
        if (v != 1 && v != -1)
            return 0.0;
    const int col = 2 * sign_index(cd) + sign_index(bc);
    const int row = 2 * sign_index(ba) + sign_index(ad);
    return r_matrix(th, eta, z, -2.0 * eta * d)(row, col);
}

std::vector<WeightEntry> boltzmann_weights(const ModelParams& params, cplx z)
{
    const int n = params.n();
    const double hmax = 0.5 * n;
    std::vector<WeightEntry> out;
    for (double d = -hmax; d <= hmax + 1e-9; d += 1.0)
        for (int s1 : {1, -1})
            for (int s2 : {1, -1})
                for (int s3 : {1, -1}) {
                    const double c = d + s1, b = c + s2, a = b - s3;
                    if (std::abs(a - d) != 1.0)
                        continue;
                    out.push_back({c, b, a, d, boltzmann_weight(params.th, params.eta, c, b, a, d, z)});
                }
    return out;
}

MatrixXcd build_T_irf_paths(const ModelParams& params, cplx z, cplx site_shift)
{
    require_irf(params);
    const int n = params.n();
    const auto P = paths(n);
    const int N = static_cast<int>(P.size());
    MatrixXcd T = MatrixXcd::Zero(N, N);
    for (int J = 0; J < N; ++J) {
        const auto& a = P[J].a;
        for (int I = 0; I < N; ++I) {
            const auto& b = P[I].a;
            cplx w = 1.0;
            for (int i = 0; i < n && w != cplx(0.0); ++i)
                w *= boltzmann_weight(params.th, params.eta, a[i + 1], a[i], b[i], b[i + 1],
                                      z - params.sites[i].z - site_shift);
            T(I, J) = w;
        }
    }
    return T;
}

MatrixXcd build_T_irf_sov(const ModelParams& params, cplx z)
{
    require_irf(params);
    const int n = params.n();
    const DifferenceModule mod(params);
    const Grid& g = mod.grid();
    const auto perm = path_to_grid(g, n);
    std::vector<int> inv(perm.size());
    for (std::size_t I = 0; I < perm.size(); ++I)
        inv[perm[I]] = static_cast<int>(I);
    const int N = 1 << n;
    MatrixXcd T = MatrixXcd::Zero(N, N);
    const ShiftOperator op = mod.b(z) + mod.c(z);
    for (const auto& [k, c] : op.terms())
        T(inv[k.target], inv[k.source]) += c(params.eta * double(g.h(k.target)));
    return T;
}

double sov_off_grid_coefficient(const ModelParams& params, cplx z)
{
    require_irf(params);
    const DifferenceModule mod(params);
    const BoundaryReport r = mod.boundary_report(z);
    return std::max(r.b_with_delta_plus, r.c_with_delta_minus) / std::max(r.scale, 1e-300);
}

LBlocks L_sov_offdiagonal(const ModelParams& params, cplx z, cplx lambda)
{
    require_irf(params);
    const int n = params.n();
    const DifferenceModule mod(params);
    const auto perm = path_to_grid(mod.grid(), n);
    std::vector<int> inv(perm.size());
    for (std::size_t I = 0; I < perm.size(); ++I)
        inv[perm[I]] = static_cast<int>(I);
    const int N = 1 << n;
    LBlocks L;
    const ShiftOperator ops[2] = {mod.b(z), mod.c(z)};
    for (int q = 0; q < 2; ++q) {
        MatrixXcd M = MatrixXcd::Zero(N, N);
        for (const auto& [k, c] : ops[q].terms())
            M(inv[k.target], inv[k.source]) += c(lambda);
        if (q == 0)
            L[0][1] = std::move(M);
        else
            L[1][0] = std::move(M);
    }
    return L;
}

LBlocks L_paths(const ModelParams& params, cplx z, cplx lambda, cplx site_shift)
{
    const int n = params.n();
    const int N = 1 << n;
    const int D = 2 * N;
    MatrixXcd Ltot = MatrixXcd::Identity(D, D);
    for (int i = 0; i < n; ++i) {
        MatrixXcd Mi = MatrixXcd::Zero(D, D);
        for (int J = 0; J < D; ++J) {
            const int aux = J >> n, rest = J & (N - 1);
            int spect = 0;
            for (int k = i + 1; k < n; ++k)
                spect += 1 - 2 * path_bit(rest, k, n);
            const Mat4 R = r_matrix(params.th, params.eta, z - params.sites[i].z - site_shift,
                                    lambda - 2.0 * params.eta * double(spect));
            const int si = path_bit(rest, i, n);
            const int col = 2 * aux + si;
            for (int row = 0; row < 4; ++row) {
                const int na = row >> 1, ns = row & 1;
                const int nrest = (rest & ~(1 << (n - 1 - i))) | (ns << (n - 1 - i));
                Mi((na << n) | nrest, J) += R(row, col);
            }
        }
        Ltot = Ltot * Mi;
    }
    LBlocks L;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            L[i][j] = Ltot.block(i * N, j * N, N, N);
    return L;
}

MatrixXcd build_T_irf_rmatrix(const ModelParams& params, cplx z, cplx site_shift)
{
    require_irf(params);
    const int n = params.n();
    const int N = 1 << n;
    MatrixXcd T = MatrixXcd::Zero(N, N);
    std::map<int, LBlocks> cache;
    for (int I = 0; I < N; ++I) {
        const int h = path_weight(I, n);
        auto it = cache.find(h);
        if (it == cache.end())
            it = cache.emplace(h, L_paths(params, z, params.eta * double(h), site_shift)).first;
        T.row(I) = it->second[0][1].row(I) + it->second[1][0].row(I);
    }
    return T;
}

IntertwinerFit fit_intertwiner(const ModelParams& params, Sampler& rng, int z_samples)
{
    require_irf(params);
    const int n = params.n();
    const int N = 1 << n;
    const cplx eta = params.eta;
    std::vector<int> h(N);
    for (int I = 0; I < N; ++I)
        h[I] = path_weight(I, n);
    std::vector<std::pair<int, int>> mask;
    std::map<std::pair<int, int>, int> slot;
    for (int I = 0; I < N; ++I)
        for (int J = 0; J < N; ++J)
            if (h[I] == h[J]) {
                slot[{I, J}] = static_cast<int>(mask.size());
                mask.emplace_back(I, J);
            }
    const int U = static_cast<int>(mask.size());

    std::vector<Eigen::RowVectorXcd> rows;
    for (int s = 0; s < z_samples; ++s) {
        const cplx z = rng.cell_point(params.th.tau());
        cplx kp = 1.0;
        for (const auto& site : params.sites)
            kp *= params.th.theta(z - site.z - eta);
        const cplx kappa = 1.0 / kp;
        std::map<int, std::pair<LBlocks, LBlocks>> cache;
        for (int I = 0; I < N; ++I)
            if (!cache.count(h[I])) {
                const cplx l = eta * double(h[I]);
                cache.emplace(h[I], std::make_pair(L_sov_offdiagonal(params, z, l), L_paths(params, z, l, -eta)));
            }
        for (const auto& [i, j] : {std::pair{0, 1}, std::pair{1, 0}})
            for (int I = 0; I < N; ++I) {
                const MatrixXcd& Ls = cache.at(h[I]).first[i][j];
                const MatrixXcd& Lp = cache.at(h[I]).second[i][j];
                for (int J = 0; J < N; ++J) {
                    Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Zero(U);
                    // sum_b G[I,b] kappa Ls[b,J] - sum_a Lp[I,a] G[a,J]
                    for (int b = 0; b < N; ++b)
                        if (h[b] == h[I])
                            row[slot.at({I, b})] += kappa * Ls(b, J);
                    for (int a = 0; a < N; ++a)
                        if (h[a] == h[J])
                            row[slot.at({a, J})] -= Lp(I, a);
                    if (row.cwiseAbs().maxCoeff() > 0.0)
                        rows.push_back(std::move(row));
                }
            }
    }
    MatrixXcd A(rows.size(), U);
    for (std::size_t r = 0; r < rows.size(); ++r)
        A.row(r) = rows[r];
    // a QR pass first keeps the SVD at U x U
    const Eigen::HouseholderQR<MatrixXcd> qr(A);
    const MatrixXcd R = qr.matrixQR().topRows(U).triangularView<Eigen::Upper>();
    const Eigen::JacobiSVD<MatrixXcd> svd(R, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();

    IntertwinerFit fit;
    fit.equations = static_cast<int>(rows.size());
    fit.unknowns = U;
    fit.null_singular = sv[U - 1] / sv[0];
    fit.next_singular = U > 1 ? sv[U - 2] / sv[0] : 1.0;
    const VectorXcd g = svd.matrixV().col(U - 1);
    MatrixXcd G = MatrixXcd::Zero(N, N);
    for (int q = 0; q < U; ++q)
        G(mask[q].first, mask[q].second) = g[q];
    Eigen::Index r0, c0;
    G.cwiseAbs().maxCoeff(&r0, &c0);
    G /= G(r0, c0);
    const Eigen::JacobiSVD<MatrixXcd> gs(G);
    fit.condition = gs.singularValues()[0] / gs.singularValues()[N - 1];
    fit.G = std::move(G);
    return fit;
}

namespace {

// max over eigenvalues of A of the distance to the matched eigenvalue of B,
// relative to the spectral radius; matching is greedy by distance
double spectrum_distance(const MatrixXcd& A, const MatrixXcd& B)
{
    const VectorXcd ea = eigen_general(A, false).values;
    const VectorXcd eb = eigen_general(B, false).values;
    const int N = static_cast<int>(ea.size());
    std::vector<bool> used(N, false);
    double worst = 0.0;
    for (int a = 0; a < N; ++a) {
        int best = -1;
        for (int b = 0; b < N; ++b)
            if (!used[b] && (best < 0 || std::abs(ea[a] - eb[b]) < std::abs(ea[a] - eb[best])))
                best = b;
        used[best] = true;
        worst = std::max(worst, std::abs(ea[a] - eb[best]));
    }
    return worst / std::max(ea.cwiseAbs().maxCoeff(), 1e-300);
}

} // namespace

DualReport dual_check(const ModelParams& params, const std::vector<cplx>& zs, Sampler& rng)
{
    const Theta& th = params.th;
    const cplx eta = params.eta;
    DualReport rep;
    rep.fit = fit_intertwiner(params, rng);
    const MatrixXcd& G = rep.fit.G;
    const MatrixXcd Ginv = Eigen::FullPivLU<MatrixXcd>(G).inverse();
    std::vector<Site> moved = params.sites;
    for (auto& site : moved)
        site.z += eta;
    const ModelParams shifted(th, eta, moved);
    for (const cplx z : zs) {
        cplx kp = 1.0, kp2 = 1.0;
        for (const auto& site : params.sites) {
            kp *= th.theta(z - site.z - eta);
            kp2 *= th.theta(z - site.z - 2.0 * eta);
        }
        const MatrixXcd Ts = build_T_irf_sov(params, z);
        const MatrixXcd Tp = build_T_irf_paths(params, z, -eta);
        const MatrixXcd X = G * Ts * Ginv / kp;
        rep.intertwined_residual = std::max(rep.intertwined_residual, max_abs(X - Tp) / max_abs(Tp));

        const MatrixXcd T0 = build_T_irf_paths(params, z);
        rep.trace_residual = std::max(rep.trace_residual, max_abs(T0 - build_T_irf_rmatrix(params, z)) / max_abs(T0));
        const MatrixXcd Tm = build_T_irf_sov(shifted, z) / kp2;
        rep.spectrum_residual = std::max(rep.spectrum_residual, spectrum_distance(T0, Tm));
        rep.literal_residual = std::max(rep.literal_residual, max_abs(T0 - Ts) / max_abs(T0));
        rep.off_grid = std::max(rep.off_grid, sov_off_grid_coefficient(params, z));
    }
    return rep;
}

CommutingReport commuting_family(const ModelParams& params, const std::vector<std::pair<cplx, cplx>>& pairs)
{
    CommutingReport rep;
    for (const auto& [z, w] : pairs) {
        const MatrixXcd A = build_T_irf_sov(params, z), B = build_T_irf_sov(params, w);
        rep.sov = std::max(rep.sov, (A * B - B * A).norm() / (A.norm() * B.norm()));
        const MatrixXcd C = build_T_irf_paths(params, z), D = build_T_irf_paths(params, w);
        rep.paths = std::max(rep.paths, (C * D - D * C).norm() / (C.norm() * D.norm()));
    }
    return rep;
}

Character irf_character(const ModelParams& params)
{
    cplx s = 0.0;
    for (const auto& site : params.sites)
        s += site.z;
    const double sgn = params.n() % 2 == 0 ? 1.0 : -1.0;
    return {sgn, sgn * std::exp(2.0 * kPi * kI * s)};
}

cplx rayleigh_eigenvalue(const ModelParams& params, const VectorXcd& v, cplx z)
{
    Eigen::Index k;
    v.cwiseAbs().maxCoeff(&k);
    const VectorXcd Tv = build_T_irf_sov(params, z) * v;
    return Tv[k] / v[k];
}

VectorXcd rayleigh_eigenvalues(const ModelParams& params, const MatrixXcd& V, cplx z)
{
    const MatrixXcd T = build_T_irf_sov(params, z);
    VectorXcd out(V.cols());
    for (Eigen::Index a = 0; a < V.cols(); ++a) {
        Eigen::Index k;
        V.col(a).cwiseAbs().maxCoeff(&k);
        out[a] = (T.row(k) * V.col(a)).value() / V(k, a);
    }
    return out;
}

namespace {

// max_i |eps(z_i - eta) eps(z_i + eta) - prod_k theta(z_k - z_i + 2eta) theta(z_k - z_i - 2eta)| / scale
std::vector<double> quadratic_residuals(const ModelParams& params, const std::function<cplx(cplx)>& eps)
{
    const Theta& th = params.th;
    const cplx eta = params.eta;
    std::vector<double> out;
    for (const auto& si : params.sites) {
        cplx prod = 1.0;
        for (const auto& sk : params.sites)
            prod *= th.theta(sk.z - si.z + 2.0 * eta) * th.theta(sk.z - si.z - 2.0 * eta);
        const cplx lhs = eps(si.z - eta) * eps(si.z + eta);
        out.push_back(std::abs(lhs - prod) / std::max(std::abs(prod), std::abs(lhs)));
    }
    return out;
}

} // namespace

SpectrumReport certify_spectrum(const ModelParams& params, cplx z0, Sampler& rng, const SpectrumOptions& opt)
{
    require_irf(params);
    const Theta& th = params.th;
    const cplx eta = params.eta;
    const cplx tau = th.tau();
    const int n = params.n();
    const int N = 1 << n;
    const Character chi0 = irf_character(params);

    SpectrumReport rep;
    rep.z0 = z0;
    const MatrixXcd T0 = build_T_irf_sov(params, z0);
    const Eigenpairs es = eigen_general(T0);

    // deterministic order: by real part, then imaginary part
    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    const VectorXcd ev = es.values;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (ev[a].real() != ev[b].real())
            return ev[a].real() < ev[b].real();
        return ev[a].imag() < ev[b].imag();
    });
    const double evscale = ev.cwiseAbs().maxCoeff();

    // clusters of eigenvalues closer than gap_tol (relative)
    std::vector<int> cluster(N, -1);
    int nclusters = 0;
    rep.min_gap = 1e300;
    for (int a = 0; a < N; ++a) {
        for (int b = a + 1; b < N; ++b) {
            const double gap = std::abs(ev[order[a]] - ev[order[b]]) / evscale;
            rep.min_gap = std::min(rep.min_gap, gap);
        }
    }
    for (int a = 0; a < N; ++a) {
        if (cluster[a] >= 0)
            continue;
        cluster[a] = nclusters;
        for (int b = a + 1; b < N; ++b)
            if (cluster[b] < 0 && std::abs(ev[order[a]] - ev[order[b]]) / evscale < opt.gap_tol)
                cluster[b] = nclusters;
        ++nclusters;
    }
    if (N == 1)
        rep.min_gap = 1.0;

    rep.nodes = generic_nodes(th, n, chi0, rng);
    std::vector<cplx> char_pts;
    for (int i = 0; i < 3; ++i)
        char_pts.push_back(rng.cell_point(tau));

    MatrixXcd V(N, N);
    for (int a = 0; a < N; ++a) {
        VectorXcd v = es.vectors.col(order[a]);
        Eigen::Index kmax;
        v.cwiseAbs().maxCoeff(&kmax);
        v *= std::abs(v[kmax]) / v[kmax];
        V.col(a) = v.normalized();
    }
    // Rayleigh ratios of all eigenvectors per sample point, built once
    std::map<std::pair<double, double>, VectorXcd> cache;
    auto eps_all = [&](cplx z) -> const VectorXcd& {
        const auto key = std::make_pair(z.real(), z.imag());
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, rayleigh_eigenvalues(params, V, z)).first;
        return it->second;
    };
    // every certificate sees the same membership sample points
    const Sampler membership_rng = rng;

    MatrixXcd Ustack(N, N);
    bool all_pass = true;
    for (int a = 0; a < N; ++a) {
        SpectralCertificate cert;
        cert.eigenvalue = ev[order[a]];
        cert.v = V.col(a);

        auto eps_direct = [&](cplx z) { return eps_all(z)[a]; };
        for (const cplx z : rep.nodes)
            cert.eps_nodes.push_back(eps_direct(z));
        const ThetaInterpolant eps(th, n, chi0, rep.nodes, cert.eps_nodes);
        Sampler mrng = membership_rng;
        cert.membership = membership_test(th, eps_direct, n, chi0, mrng, opt.tol);
        if (a == N - 1)
            rng = mrng;

        for (const cplx z : char_pts) {
            const cplx e = eps_direct(z), e1 = eps_direct(z + 1.0), et = eps_direct(z + tau);
            const cplx mult = std::exp(-kI * kPi * double(n) * (2.0 * z + tau));
            const double s = std::max({std::abs(e), std::abs(e1), std::abs(et)});
            cert.character_residual = std::max(cert.character_residual, std::abs(e1 - chi0.chi1 * e) / s);
            cert.character_residual = std::max(cert.character_residual, std::abs(et - chi0.chiTau * mult * e) / s);
        }

        auto eps_fn = [&](cplx z) { return eps(z); };
        cert.quadratic = quadratic_residuals(params, eps_fn);

        for (int i = 0; i < n; ++i) {
            const cplx zi = params.sites[i].z;
            std::vector<cplx> plus, minus;
            for (const auto& sk : params.sites) {
                plus.push_back(sk.z - zi + 2.0 * eta);
                minus.push_back(sk.z - zi - 2.0 * eta);
            }
            const cplx Pp = theta_product(th, plus), Pm = theta_product(th, minus);
            const cplx Qm = eps(zi - eta), Qp = Pp;
            cert.Q.push_back({Qm, Qp});
            const cplx lhs = Pm * Qp, rhs = eps(zi + eta) * Qm;
            cert.second_line.push_back(std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs)));
        }
        VectorXcd u(N);
        for (int I = 0; I < N; ++I) {
            cplx val = 1.0;
            for (int i = 0; i < n; ++i)
                val *= cert.Q[i][path_bit(I, i, n)];
            u[I] = val;
        }
        cert.u = u;
        const VectorXcd un = u / u.norm();
        Ustack.col(a) = un;

        std::vector<int> members;
        for (int b = 0; b < N; ++b)
            if (cluster[b] == cluster[a])
                members.push_back(b);
        cert.cluster_size = static_cast<int>(members.size());
        MatrixXcd Vc(N, members.size());
        for (std::size_t q = 0; q < members.size(); ++q)
            Vc.col(q) = es.vectors.col(order[members[q]]);
        const Eigen::HouseholderQR<MatrixXcd> vq(Vc);
        const MatrixXcd Qc = vq.householderQ() * MatrixXcd::Identity(N, members.size());
        cert.angle = (un - Qc * (Qc.adjoint() * un)).norm();
        cert.angle_checked = cert.cluster_size == 1;

        std::vector<cplx> bad = cert.eps_nodes;
        bad[0] *= 1.0 + opt.impostor_factor;
        const ThetaInterpolant imp(th, n, chi0, rep.nodes, bad);
        auto imp_fn = [&](cplx z) { return imp(z); };
        const auto iq = quadratic_residuals(params, imp_fn);
        cert.impostor_quadratic = *std::max_element(iq.begin(), iq.end());

        const double qmax = *std::max_element(cert.quadratic.begin(), cert.quadratic.end());
        const double smax = *std::max_element(cert.second_line.begin(), cert.second_line.end());
        cert.pass = cert.membership.pass && cert.character_residual <= opt.tol && qmax <= opt.tol &&
                    smax <= opt.tol && (!cert.angle_checked || cert.angle <= opt.angle_tol);
        all_pass = all_pass && cert.pass && cert.impostor_quadratic >= 1e-4;
        rep.certificates.push_back(std::move(cert));
    }
    const Eigen::BDCSVD<MatrixXcd> us(Ustack);
    rep.span_singular = us.singularValues()[N - 1];
    rep.pass = all_pass && rep.span_singular > 1e-6;
    return rep;
}

cplx partition_function(const ModelParams& params, const std::vector<cplx>& rows, TransferBuild build)
{
    require_irf(params);
    const int N = 1 << params.n();
    MatrixXcd M = MatrixXcd::Identity(N, N);
    for (const cplx w : rows)
        M = M * (build == TransferBuild::weights ? build_T_irf_paths(params, w) : build_T_irf_sov(params, w));
    return M.trace();
}

cplx apply_T_minus(const ModelParams& params, cplx z, const std::function<cplx(const std::vector<cplx>&)>& u,
                   const std::vector<cplx>& x)
{
    const Theta& th = params.th;
    const cplx eta = params.eta;
    const int n = params.n();
    cplx lambda = 0.0;
    for (int k = 0; k < n; ++k)
        lambda -= x[k] + params.sites[k].z;
    th.require_off_lattice(lambda, "apply_T_minus");
    cplx total = 0.0;
    for (int i = 0; i < n; ++i) {
        cplx coef = th.theta(lambda - z + x[i]) / th.theta(lambda);
        for (int j = 0; j < n; ++j)
            if (j != i)
                coef *= th.theta(z - x[j]) / th.theta(x[i] - x[j]);
        cplx ap = 1.0, am = 1.0;
        for (const auto& s : params.sites) {
            ap *= th.theta(x[i] + s.z + eta * double(s.Lambda));
            am *= th.theta(x[i] + s.z - eta * double(s.Lambda));
        }
        std::vector<cplx> xm = x, xp = x;
        xm[i] -= 2.0 * eta;
        xp[i] += 2.0 * eta;
        total += coef * (ap * u(xm) + am * u(xp));
    }
    return total;
}

namespace {

bool is_singular_string(const Theta& th, const EllipticPoly& Ap, const EllipticPoly& Am, cplx gamma,
                        const std::vector<cplx>& w)
{
    const double tol = 1e-6;
    for (const cplx wi : w) {
        for (const cplx r : Ap.zeros)
            if (th.lattice_distance(wi - r) < tol)
                return true;
        for (const cplx r : Am.zeros)
            if (th.lattice_distance(wi - r) < tol)
                return true;
        for (const cplx wj : w)
            if (th.lattice_distance(wi - wj - gamma) < tol)
                return true;
    }
    return false;
}

} // namespace

ContinuousBetheReport continuous_bethe(const ModelParams& params, Sampler& rng, cplx seed_a,
                                       std::vector<cplx> seed_w, int samples)
{
    params.validate();
    const Theta& th = params.th;
    const cplx eta = params.eta;
    const cplx tau = th.tau();
    const int n = params.n();
    const int total = params.total_weight();
    if (total % 2 != 0 || total == 0)
        throw ConfigError("Model invariant violated: the Bethe ansatz needs sum(Lambda) = 2m with m > 0");
    const int m = total / 2;
    EllipticPoly Ap, Am;
    for (const auto& s : params.sites) {
        Ap.zeros.push_back(-s.z - eta * double(s.Lambda));
        Am.zeros.push_back(-s.z + eta * double(s.Lambda));
    }
    const cplx gamma = 2.0 * eta;

    ContinuousBetheReport rep;
    rep.m = m;
    if (!seed_w.empty()) {
        rep.solution = solve_difference_bethe(th, n, Ap, Am, gamma, m, seed_a, seed_w);
    } else {
        std::string last = "no attempts";
        bool ok = false;
        for (int attempt = 0; attempt < 20 && !ok; ++attempt) {
            std::vector<cplx> w;
            for (int j = 0; j < m; ++j)
                w.push_back(rng.cell_point(tau, 0.05, 0.95));
            try {
                rep.solution = solve_difference_bethe(th, n, Ap, Am, gamma, m, seed_a, w);
                ok = !is_singular_string(th, Ap, Am, gamma, rep.solution.w);
                if (!ok)
                    last = "singular string";
            } catch (const Error& e) {
                last = e.what();
            } catch (const std::invalid_argument& e) {
                last = e.what();
            }
        }
        if (!ok)
            throw SolverError("continuous Bethe: no convergence from 20 seeds; last failure: " + last);
    }
    const EllipticPoly Q = rep.solution.Q();

    rep.chi = character_of(Q, tau);
    cplx sw = 0.0;
    for (const cplx w : rep.solution.w)
        sw += w;
    const double sgn = m % 2 == 0 ? 1.0 : -1.0;
    const cplx a = rep.solution.a;
    rep.chi_formula = {sgn * std::exp(a), sgn * std::exp(a * tau + 2.0 * kPi * kI * sw)};
    rep.character_residual =
        std::max(std::abs(rep.chi.chi1 - rep.chi_formula.chi1) / std::abs(rep.chi_formula.chi1),
                 std::abs(rep.chi.chiTau - rep.chi_formula.chiTau) / std::abs(rep.chi_formula.chiTau));

    rep.singular_string = is_singular_string(th, Ap, Am, gamma, rep.solution.w);
    for (const cplx w : rep.solution.w) {
        const cplx ap = eval_elliptic_poly(th, Ap, w), am = eval_elliptic_poly(th, Am, w);
        const cplx qm = eval_elliptic_poly(th, Q, w - gamma), qp = eval_elliptic_poly(th, Q, w + gamma);
        const double scale = std::max(std::abs(ap), std::abs(am)) * std::max(std::abs(qm), std::abs(qp));
        rep.bethe_residual = std::max(rep.bethe_residual, std::abs(ap * qm + am * qp) / scale);
    }

    auto u = [&](const std::vector<cplx>& x) {
        cplx p = 1.0;
        for (const cplx xi : x)
            p *= eval_elliptic_poly(th, Q, xi);
        return p;
    };
    for (int s = 0; s < samples; ++s) {
        std::vector<cplx> x;
        for (int i = 0; i < n; ++i)
            x.push_back(rng.cell_point(tau));
        const cplx z = rng.cell_point(tau);
        const cplx lhs = apply_T_minus(params, z, u, x);
        const cplx rhs = difference_eigenvalue(th, Ap, Am, gamma, Q, z) * u(x);
        rep.eigen_residual = std::max(rep.eigen_residual, std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs)));
    }
    return rep;
}

} // namespace esov
