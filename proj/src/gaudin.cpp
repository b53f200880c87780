#include "esov/gaudin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "esov/error.hpp"

namespace esov {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

Sl2Rep::Sl2Rep(int L) : Lambda(L)
{
    if (L < 0)
        throw ConfigError("Sl2Rep: negative highest weight");
    const int d = L + 1;
    e = Eigen::MatrixXi::Zero(d, d);
    f = Eigen::MatrixXi::Zero(d, d);
    h = Eigen::MatrixXi::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        h(k, k) = L - 2 * k;
        if (k + 1 < d)
            f(k + 1, k) = 1;
        if (k >= 1)
            e(k - 1, k) = k * (L - k + 1);
    }
}

bool Sl2Rep::brackets_exact() const
{
    const Eigen::MatrixXi ef = e * f - f * e;
    const Eigen::MatrixXi he = h * e - e * h;
    const Eigen::MatrixXi hf = h * f - f * h;
    return ef == h && he == 2 * e && hf == -2 * f;
}

// ---------------------------------------------------------------- operators

VecJet LambdaDiffOp::apply(const VecJet& u, cplx lambda0) const
{
    const int r = u.degree() - order;
    if (r < 0)
        throw std::invalid_argument("LambdaDiffOp::apply: jet degree below operator order");
    const std::vector<MatJet> c = coeffs(lambda0, r);
    VecJet du = u;
    VecJet out;
    for (int d = 0; d <= order; ++d) {
        if (d > 0)
            du = du.derivative();
        VecJet term = jet_product<VectorXcd>(c[d], du.truncated(r));
        if (d == 0)
            out = std::move(term);
        else
            out += term;
    }
    return out;
}

namespace {

MatrixXcd kron_site(const std::vector<int>& dims, int i, const MatrixXcd& X)
{
    MatrixXcd M = MatrixXcd::Identity(1, 1);
    for (std::size_t j = 0; j < dims.size(); ++j) {
        const MatrixXcd B = (int(j) == i) ? X : MatrixXcd::Identity(dims[j], dims[j]);
        MatrixXcd K(M.rows() * B.rows(), M.cols() * B.cols());
        for (int a = 0; a < M.rows(); ++a)
            for (int b = 0; b < M.cols(); ++b)
                K.block(a * B.rows(), b * B.cols(), B.rows(), B.cols()) = M(a, b) * B;
        M = std::move(K);
    }
    return M;
}

MatJet const_mat_jet(const MatrixXcd& m, int degree)
{
    std::vector<MatrixXcd> c(degree + 1, MatrixXcd::Zero(m.rows(), m.cols()));
    c[0] = m;
    return MatJet(std::move(c));
}

MatJet zero_mat_jet(int rows, int degree)
{
    return MatJet(std::vector<MatrixXcd>(degree + 1, MatrixXcd::Zero(rows, rows)));
}

} // namespace

GaudinModel::GaudinModel(const ModelParams& params) : params_(params)
{
    params_.validate();
    const int n = params_.n();
    if (n < 1)
        throw ConfigError("Model invariant violated: at least one site is required");
    int total = 0;
    std::vector<int> dims;
    for (const auto& s : params_.sites) {
        if (s.Lambda < 0)
            throw ConfigError("Model invariant violated: negative Lambda");
        total += s.Lambda;
        dims.push_back(s.Lambda + 1);
    }
    if (total % 2 != 0)
        throw ConfigError("Model invariant violated: sum of Lambda is odd, zero weight space is empty");
    zw_.m = total / 2;
    for (int i = 0; i < n; ++i) {
        const Sl2Rep rep(params_.sites[i].Lambda);
        E_.push_back(kron_site(dims, i, rep.e.cast<cplx>()));
        F_.push_back(kron_site(dims, i, rep.f.cast<cplx>()));
        H_.push_back(kron_site(dims, i, rep.h.cast<cplx>()));
    }
    // tensor basis, first site most significant
    const int N = static_cast<int>(E_[0].rows());
    for (int pos = 0; pos < N; ++pos) {
        std::vector<int> k(n);
        int rem = pos;
        for (int i = n - 1; i >= 0; --i) {
            k[i] = rem % dims[i];
            rem /= dims[i];
        }
        int wt = 0;
        for (int i = 0; i < n; ++i)
            wt += params_.sites[i].Lambda - 2 * k[i];
        if (wt == 0) {
            zw_.index.push_back(k);
            zw_.full_position.push_back(pos);
        }
    }
    P_ = MatrixXcd::Zero(N, zw_.dimension());
    for (int a = 0; a < zw_.dimension(); ++a)
        P_(zw_.full_position[a], a) = 1.0;
}

double GaudinModel::casimir(int k) const
{
    const double L = params_.sites[k].Lambda;
    return 0.5 * L * (L + 2.0);
}

MatrixXcd GaudinModel::restrict(const MatrixXcd& m) const
{
    return P_.transpose() * m * P_;
}

MatJet GaudinModel::restrict(const MatJet& m) const
{
    std::vector<MatrixXcd> c;
    c.reserve(m.c.size());
    for (const auto& x : m.c)
        c.push_back(restrict(x));
    return MatJet(std::move(c));
}

MatrixXcd GaudinModel::h_field(cplx z) const
{
    const Theta& th = params_.th;
    MatrixXcd h = MatrixXcd::Zero(full_dimension(), full_dimension());
    for (int i = 0; i < params_.n(); ++i)
        h += th.zeta_bar(z - params_.sites[i].z) * H_[i];
    return h;
}

MatrixXcd GaudinModel::h_prime(cplx z) const
{
    const Theta& th = params_.th;
    MatrixXcd h = MatrixXcd::Zero(full_dimension(), full_dimension());
    for (int i = 0; i < params_.n(); ++i)
        h -= th.wp_bar(z - params_.sites[i].z) * H_[i];
    return h;
}

MatJet GaudinModel::e_jet(cplx z, cplx lambda0, int degree) const
{
    MatJet out = zero_mat_jet(full_dimension(), degree);
    for (int i = 0; i < params_.n(); ++i)
        out += scale_constant(params_.th.sigma_neg_jet(lambda0, z - params_.sites[i].z, degree), E_[i]);
    return out;
}

MatJet GaudinModel::f_jet(cplx z, cplx lambda0, int degree) const
{
    MatJet out = zero_mat_jet(full_dimension(), degree);
    for (int i = 0; i < params_.n(); ++i)
        out += scale_constant(params_.th.sigma_jet(lambda0, z - params_.sites[i].z, degree), F_[i]);
    return out;
}

FieldOps GaudinModel::field_ops(cplx z, cplx lambda) const
{
    const Theta& th = params_.th;
    for (const auto& s : params_.sites)
        th.require_off_lattice(z - s.z, "field_ops");
    th.require_off_lattice(lambda, "field_ops");
    FieldOps out;
    out.h = h_field(z);
    out.e = MatrixXcd::Zero(full_dimension(), full_dimension());
    out.f = out.e;
    for (int i = 0; i < params_.n(); ++i) {
        const cplx x = z - params_.sites[i].z;
        out.e += th.sigma(-lambda, x) * E_[i];
        out.f += th.sigma(lambda, x) * F_[i];
    }
    return out;
}

LambdaDiffOp GaudinModel::hamiltonian(int j) const
{
    const int d0 = zw_.dimension();
    LambdaDiffOp op;
    if (j == 0) {
        op.order = 2;
        op.coeffs = [this, d0](cplx l0, int deg) {
            const Theta& th = params_.th;
            const int n = params_.n();
            const int N = full_dimension();
            MatrixXcd hh = MatrixXcd::Zero(N, N);
            MatJet ef = zero_mat_jet(N, deg);
            MatrixXcd diag = MatrixXcd::Zero(N, N);
            const cplx t2_0 = th.theta(0.0, 3) / th.theta_prime0();
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    if (a == b) {
                        hh += 0.125 * t2_0 * H_[a] * H_[a];
                        diag += E_[a] * F_[a] + F_[a] * E_[a];
                        continue;
                    }
                    const cplx x = params_.sites[a].z - params_.sites[b].z;
                    hh += 0.125 * (th.theta(x, 2) / th.theta(x)) * H_[a] * H_[b];
                    const ScalarJet ds = th.sigma_jet(l0, x, deg + 1).derivative();
                    ef -= scale_constant(ds, MatrixXcd(E_[a] * F_[b]));
                }
            MatJet c0 = restrict(ef + const_mat_jet(hh, deg) -
                                 scale_constant(th.wp_bar_jet(l0, deg) * cplx(0.5), diag));
            return std::vector<MatJet>{c0, zero_mat_jet(d0, deg),
                                       const_mat_jet(MatrixXcd::Identity(d0, d0), deg)};
        };
        return op;
    }
    if (j < 1 || j > params_.n())
        throw std::out_of_range("GaudinModel::hamiltonian: index out of range");
    const int a = j - 1;
    op.order = 1;
    op.coeffs = [this, a](cplx l0, int deg) {
        const Theta& th = params_.th;
        const int N = full_dimension();
        MatJet c0 = zero_mat_jet(N, deg);
        MatrixXcd hh = MatrixXcd::Zero(N, N);
        for (int b = 0; b < params_.n(); ++b) {
            if (b == a)
                continue;
            const cplx x = params_.sites[a].z - params_.sites[b].z;
            hh += 0.5 * th.zeta_bar(x) * H_[a] * H_[b];
            c0 += scale_constant(th.sigma_jet(l0, x, deg), MatrixXcd(E_[a] * F_[b]));
            c0 += scale_constant(th.sigma_neg_jet(l0, x, deg), MatrixXcd(F_[a] * E_[b]));
        }
        c0 += const_mat_jet(hh, deg);
        return std::vector<MatJet>{restrict(c0), const_mat_jet(restrict(MatrixXcd(-H_[a])), deg)};
    };
    return op;
}

std::vector<LambdaDiffOp> GaudinModel::hamiltonians() const
{
    std::vector<LambdaDiffOp> out;
    for (int j = 0; j <= params_.n(); ++j)
        out.push_back(hamiltonian(j));
    return out;
}

LambdaDiffOp GaudinModel::S(cplx z, double weight) const
{
    for (const auto& s : params_.sites)
        params_.th.require_off_lattice(z - s.z, "S");
    LambdaDiffOp op;
    op.order = 2;
    op.coeffs = [this, z, weight](cplx l0, int deg) {
        const int d0 = zw_.dimension();
        const MatrixXcd h = h_field(z);
        const MatJet e = e_jet(z, l0, deg), f = f_jet(z, l0, deg);
        MatJet c0 = jet_product<MatrixXcd>(e, f) + jet_product<MatrixXcd>(f, e);
        c0 *= cplx(weight);
        c0 += const_mat_jet(MatrixXcd(0.25 * h * h), deg);
        return std::vector<MatJet>{restrict(c0), const_mat_jet(restrict(MatrixXcd(-h)), deg),
                                   const_mat_jet(MatrixXcd::Identity(d0, d0), deg)};
    };
    return op;
}

LambdaDiffOp GaudinModel::S_alternative(cplx z, double weight) const
{
    for (const auto& s : params_.sites)
        params_.th.require_off_lattice(z - s.z, "S");
    LambdaDiffOp op;
    op.order = 2;
    op.coeffs = [this, z, weight](cplx l0, int deg) {
        const int d0 = zw_.dimension();
        const MatrixXcd h = h_field(z);
        const MatJet e = e_jet(z, l0, deg), f = f_jet(z, l0, deg);
        MatJet c0 = jet_product<MatrixXcd>(f, e);
        c0 *= cplx(2.0 * weight);
        c0 += const_mat_jet(MatrixXcd(0.25 * h * h - weight * h_prime(z)), deg);
        return std::vector<MatJet>{restrict(c0), const_mat_jet(restrict(MatrixXcd(-h)), deg),
                                   const_mat_jet(MatrixXcd::Identity(d0, d0), deg)};
    };
    return op;
}

std::vector<MatrixXcd> GaudinModel::hamiltonian_coefficients(int j, cplx lambda) const
{
    const LambdaDiffOp op = hamiltonian(j);
    std::vector<MatrixXcd> out;
    for (const auto& c : op.coeffs(lambda, 0))
        out.push_back(c[0]);
    return out;
}

VectorXcd GaudinModel::quasi_periodicity_factor() const
{
    VectorXcd d(zw_.dimension());
    for (int a = 0; a < zw_.dimension(); ++a) {
        cplx s = 0.0;
        for (int i = 0; i < params_.n(); ++i)
            s += params_.sites[i].z * double(params_.sites[i].Lambda - 2 * zw_.index[a][i]);
        d[a] = std::exp(kPi * kI * s);
    }
    return d;
}

// ---------------------------------------------------------------- checks

VecJet random_vec_jet(int dim, int degree, Sampler& rng)
{
    std::vector<VectorXcd> c;
    for (int k = 0; k <= degree; ++k) {
        VectorXcd v(dim);
        for (int a = 0; a < dim; ++a)
            v[a] = rng.gaussian();
        c.push_back(v / v.norm());
    }
    return VecJet(std::move(c));
}

double jet_distance(const VecJet& a, const VecJet& b)
{
    const int d = std::min(a.degree(), b.degree());
    double m = 0.0;
    for (int k = 0; k <= d; ++k)
        m = std::max(m, (a.c[k] - b.c[k]).cwiseAbs().maxCoeff());
    return m;
}

double jet_norm(const VecJet& a)
{
    double m = 0.0;
    for (const auto& v : a.c)
        m = std::max(m, v.cwiseAbs().maxCoeff());
    return m;
}

CommutatorReport hamiltonian_commutators(const GaudinModel& model, const std::vector<cplx>& lambdas,
                                         Sampler& rng, int degree)
{
    const auto H = model.hamiltonians();
    const int d0 = model.zero_weight().dimension();
    CommutatorReport rep;
    for (const cplx l0 : lambdas) {
        const VecJet u = random_vec_jet(d0, degree, rng);
        std::vector<VecJet> Hu;
        for (const auto& op : H)
            Hu.push_back(op.apply(u, l0));
        for (std::size_t i = 0; i < H.size(); ++i)
            for (std::size_t j = i + 1; j < H.size(); ++j) {
                const VecJet ij = H[i].apply(Hu[j], l0);
                const VecJet ji = H[j].apply(Hu[i], l0);
                const double scale = std::max({jet_norm(ij), jet_norm(ji), 1e-300});
                rep.max_residual = std::max(rep.max_residual, jet_distance(ij, ji) / scale);
            }
        VecJet sum = Hu[1];
        for (std::size_t j = 2; j < Hu.size(); ++j)
            sum += Hu[j];
        double hs = 0.0;
        for (std::size_t j = 1; j < Hu.size(); ++j)
            hs = std::max(hs, jet_norm(Hu[j]));
        rep.sum_residual = std::max(rep.sum_residual, jet_norm(sum) / std::max(hs, 1e-300));
    }
    return rep;
}

double decomposition_residual(const GaudinModel& model, cplx z, cplx lambda0, Sampler& rng,
                              double weight, int degree)
{
    const ModelParams& p = model.params();
    const Theta& th = p.th;
    const VecJet u = random_vec_jet(model.zero_weight().dimension(), degree, rng);
    const VecJet Su = model.S(z, weight).apply(u, lambda0);
    VecJet rest = model.hamiltonian(0).apply(u, lambda0);
    cplx scalar = 0.0;
    for (int k = 0; k < p.n(); ++k) {
        const cplx x = z - p.sites[k].z;
        scalar += 0.5 * model.casimir(k) * th.wp_bar(x);
        rest += model.hamiltonian(k + 1).apply(u, lambda0) * th.zeta_bar(x);
    }
    rest += u * scalar;
    return jet_distance(Su, rest) / std::max(jet_norm(Su), 1e-300);
}

double s_commutator_residual(const GaudinModel& model, cplx z, cplx w, cplx lambda0, Sampler& rng,
                             double weight, int degree)
{
    const VecJet u = random_vec_jet(model.zero_weight().dimension(), degree, rng);
    const LambdaDiffOp Sz = model.S(z, weight), Sw = model.S(w, weight);
    const VecJet zw = Sz.apply(Sw.apply(u, lambda0), lambda0);
    const VecJet wz = Sw.apply(Sz.apply(u, lambda0), lambda0);
    return jet_distance(zw, wz) / std::max({jet_norm(zw), jet_norm(wz), 1e-300});
}

// ---------------------------------------------------------------- Bethe ansatz

std::vector<cplx> gaudin_bethe_residuals(const ModelParams& params, cplx c, const std::vector<cplx>& w,
                                         double pair_weight)
{
    const Theta& th = params.th;
    std::vector<cplx> r(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        cplx acc = -2.0 * c;
        for (const auto& s : params.sites)
            acc += double(s.Lambda) * th.zeta_bar(w[j] - s.z);
        for (std::size_t k = 0; k < w.size(); ++k)
            if (k != j)
                acc -= pair_weight * th.zeta_bar(w[j] - w[k]);
        r[j] = acc;
    }
    return r;
}

GaudinBetheResult solve_gaudin_bethe(const ModelParams& params, cplx seed_c,
                                     const std::vector<cplx>& seed_w, const NewtonOptions& opt,
                                     double pair_weight)
{
    const Theta& th = params.th;
    const int m = params.total_weight() / 2;
    if (params.total_weight() % 2 != 0)
        throw ConfigError("Model invariant violated: sum of Lambda is odd");
    if (static_cast<int>(seed_w.size()) != m)
        throw ConfigError("solve_gaudin_bethe: seed must have sum(Lambda)/2 roots");
    for (int j = 0; j < m; ++j)
        for (int k = j + 1; k < m; ++k)
            if (th.lattice_distance(seed_w[j] - seed_w[k]) < params.rho())
                throw ConfigError("solve_gaudin_bethe: seed roots are not pairwise distinct");

    auto F = [&](const VecC& x) {
        const std::vector<cplx> w(x.data(), x.data() + m);
        const auto r = gaudin_bethe_residuals(params, seed_c, w, pair_weight);
        return VecC(Eigen::Map<const VecC>(r.data(), m));
    };
    auto J = [&](const VecC& x) {
        MatC jac = MatC::Zero(m, m);
        for (int j = 0; j < m; ++j) {
            for (const auto& s : params.sites)
                jac(j, j) -= double(s.Lambda) * th.wp_bar(x[j] - s.z);
            for (int k = 0; k < m; ++k) {
                if (k == j)
                    continue;
                const cplx wp = pair_weight * th.wp_bar(x[j] - x[k]);
                jac(j, j) += wp;
                jac(j, k) -= wp;
            }
        }
        return jac;
    };
    VecC x0(m);
    for (int j = 0; j < m; ++j)
        x0[j] = seed_w[j];
    GaudinBetheResult res;
    res.c = seed_c;
    if (m == 0)
        return res;
    const NewtonResult nr = damped_newton(F, J, x0, opt);
    res.w.assign(nr.x.data(), nr.x.data() + m);
    res.residual = nr.residual;
    res.iterations = nr.iterations;
    for (int j = 0; j < m; ++j) {
        for (const auto& s : params.sites)
            if (th.lattice_distance(res.w[j] - s.z) < params.rho())
                throw SolverError("Gaudin Bethe: root collided with a marked point");
        for (int k = j + 1; k < m; ++k)
            if (th.lattice_distance(res.w[j] - res.w[k]) < params.rho())
                throw SolverError("Gaudin Bethe: roots collided");
    }
    return res;
}

GaudinBetheResult solve_gaudin_bethe(const ModelParams& params, Sampler& rng, int attempts,
                                     const NewtonOptions& opt, double pair_weight)
{
    const int m = params.total_weight() / 2;
    std::string last = "no attempts";
    for (int a = 0; a < attempts; ++a) {
        const cplx c = rng.box(-1.0, 1.0, -1.0, 1.0);
        std::vector<cplx> w;
        for (int j = 0; j < m; ++j)
            w.push_back(rng.cell_point(params.th.tau(), 0.05, 0.95));
        try {
            return solve_gaudin_bethe(params, c, w, opt, pair_weight);
        } catch (const SolverError& e) {
            last = e.what();
        } catch (const ConfigError& e) {
            last = e.what();
        } catch (const PoleProximityError& e) {
            last = e.what();
        }
    }
    throw SolverError("Gaudin Bethe: no convergence from " + std::to_string(attempts) +
                      " seeds; last failure: " + last);
}

VecJet bethe_vector_jet(const GaudinModel& model, cplx c, const std::vector<cplx>& w, cplx lambda0,
                        int degree)
{
    const ModelParams& p = model.params();
    const int N = model.full_dimension();
    VectorXcd v0 = VectorXcd::Zero(N);
    v0[0] = 1.0;
    std::vector<VectorXcd> coeffs(degree + 1, VectorXcd::Zero(N));
    coeffs[0] = v0;
    VecJet u(std::move(coeffs));
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        MatJet f = zero_mat_jet(N, degree);
        for (int i = 0; i < p.n(); ++i)
            f += scale_constant(p.th.sigma_jet(lambda0, *it - p.sites[i].z, degree), model.F(i));
        u = jet_product<VectorXcd>(f, u);
    }
    u = jet_product<VectorXcd>(exp_jet(c, lambda0, degree), u);
    std::vector<VectorXcd> out;
    for (const auto& v : u.c)
        out.push_back(model.projector().transpose() * v);
    return VecJet(std::move(out));
}

BetheVectorReport bethe_eigenvector(const GaudinModel& model, cplx c, const std::vector<cplx>& w,
                                    const std::vector<cplx>& lambdas, const std::vector<cplx>& zs,
                                    int degree)
{
    const ModelParams& p = model.params();
    const Theta& th = p.th;
    const auto H = model.hamiltonians();
    BetheVectorReport rep;
    for (std::size_t s = 0; s < lambdas.size(); ++s) {
        const cplx l0 = lambdas[s];
        const VecJet u = bethe_vector_jet(model, c, w, l0, degree);
        const double un = jet_norm(u);
        // the leading coefficient carries the value of u itself
        const double u0 = u.c[0].cwiseAbs().maxCoeff();
        if (!(u0 > 1e-12 * std::max(1.0, un)))
            throw DegenerateVectorError("Bethe vector vanishes at the sample point");
        if (s == 0)
            rep.u_norm = u0;
        Eigen::Index kmax;
        u.c[0].cwiseAbs().maxCoeff(&kmax);
        std::vector<cplx> eps;
        for (const auto& op : H) {
            const VecJet Hu = op.apply(u, l0);
            const cplx e = Hu.c[0][kmax] / u.c[0][kmax];
            eps.push_back(e);
            rep.eigen_residual = std::max(rep.eigen_residual, jet_distance(Hu, u * e) / un);
        }
        if (s == 0) {
            rep.eps = eps;
            cplx sum = 0.0;
            for (std::size_t j = 1; j < eps.size(); ++j)
                sum += eps[j];
            rep.eps_sum = std::abs(sum);
            for (const cplx z : zs) {
                cplx q = eps[0];
                for (int k = 0; k < p.n(); ++k) {
                    const cplx x = z - p.sites[k].z;
                    q += 0.5 * model.casimir(k) * th.wp_bar(x) + eps[k + 1] * th.zeta_bar(x);
                }
                const VecJet Su = model.S(z).apply(u, l0);
                rep.s_residual = std::max(rep.s_residual, jet_distance(Su, u * q) / un);
            }
        } else {
            for (std::size_t j = 0; j < eps.size(); ++j)
                rep.eps_spread = std::max(rep.eps_spread,
                                          std::abs(eps[j] - rep.eps[j]) / std::max(1.0, std::abs(rep.eps[j])));
        }
    }
    return rep;
}

} // namespace esov
