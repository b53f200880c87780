#include "esov/eqg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "esov/error.hpp"

namespace esov {

// ---------------------------------------------------------------- R-matrix

cplx r_alpha(const Theta& th, cplx eta, cplx z, cplx lambda)
{
    return th.theta(lambda + 2.0 * eta) * th.theta(z) / (th.theta(lambda) * th.theta(z - 2.0 * eta));
}

cplx r_beta(const Theta& th, cplx eta, cplx z, cplx lambda)
{
    return -th.theta(lambda + z) * th.theta(2.0 * eta) / (th.theta(lambda) * th.theta(z - 2.0 * eta));
}

Mat4 r_matrix(const Theta& th, cplx eta, cplx z, cplx lambda)
{
    th.require_off_lattice(lambda, "r_matrix");
    th.require_off_lattice(z - 2.0 * eta, "r_matrix");
    Mat4 R = Mat4::Zero();
    R(0, 0) = 1.0;
    R(3, 3) = 1.0;
    R(1, 1) = r_alpha(th, eta, z, lambda);
    R(2, 2) = r_alpha(th, eta, z, -lambda);
    R(1, 2) = r_beta(th, eta, z, lambda);
    R(2, 1) = r_beta(th, eta, z, -lambda);
    return R;
}

namespace {

int weight_of_bit(int b) { return 1 - 2 * b; }

int bit(int I, int pos) { return (I >> (2 - pos)) & 1; }

// R acting on factors (p, q) of V (x) V (x) V. When spect >= 0 the matrix
// depends on the weight of that spectator factor.
Eigen::Matrix<cplx, 8, 8> embed3(const std::function<Mat4(int)>& fn, int p, int q, int spect)
{
    Eigen::Matrix<cplx, 8, 8> out = Eigen::Matrix<cplx, 8, 8>::Zero();
    Mat4 cache[2];
    if (spect >= 0) {
        cache[0] = fn(weight_of_bit(0));
        cache[1] = fn(weight_of_bit(1));
    } else {
        cache[0] = cache[1] = fn(0);
    }
    for (int J = 0; J < 8; ++J) {
        const Mat4& R = cache[spect >= 0 ? bit(J, spect) : 0];
        const int col = 2 * bit(J, p) + bit(J, q);
        for (int row = 0; row < 4; ++row) {
            int I = J;
            const int bp = row >> 1, bq = row & 1;
            I = (I & ~(1 << (2 - p))) | (bp << (2 - p));
            I = (I & ~(1 << (2 - q))) | (bq << (2 - q));
            out(I, J) += R(row, col);
        }
    }
    return out;
}

} // namespace

double qybe_residual(const Theta& th, cplx eta, cplx z, cplx w, cplx l)
{
    auto R = [&](cplx zz, cplx ll) { return r_matrix(th, eta, zz, ll); };
    const Eigen::Matrix<cplx, 8, 8> lhs = embed3([&](int m) { return R(z - w, l - 2.0 * eta * double(m)); }, 0, 1, 2) *
                     embed3([&](int) { return R(z, l); }, 0, 2, -1) *
                     embed3([&](int m) { return R(w, l - 2.0 * eta * double(m)); }, 1, 2, 0);
    const Eigen::Matrix<cplx, 8, 8> rhs = embed3([&](int) { return R(w, l); }, 1, 2, -1) *
                     embed3([&](int m) { return R(z, l - 2.0 * eta * double(m)); }, 0, 2, 1) *
                     embed3([&](int) { return R(z - w, l); }, 0, 1, -1);
    return (lhs - rhs).norm() / rhs.norm();
}

double ktwist_residual(const Theta& th, cplx eta, cplx z, cplx lambda)
{
    Eigen::Matrix2cd K;
    K << 0, 1, 1, 0;
    Mat4 KK;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    KK(2 * i + j, 2 * k + l) = K(i, k) * K(j, l);
    const Mat4 d = KK * r_matrix(th, eta, z, lambda) - r_matrix(th, eta, z, -lambda) * KK;
    return d.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------- grid

Grid::Grid(std::vector<int> lambdas) : lambdas_(std::move(lambdas))
{
    const int n = int(lambdas_.size());
    stride_.assign(n, 1);
    for (int i = n - 2; i >= 0; --i)
        stride_[i] = stride_[i + 1] * (lambdas_[i + 1] + 1);
    int total = 1;
    for (int L : lambdas_)
        total *= (L + 1);
    points_.reserve(total);
    for (int idx = 0; idx < total; ++idx) {
        std::vector<int> m(n);
        int rest = idx;
        for (int i = 0; i < n; ++i) {
            m[i] = rest / stride_[i];
            rest %= stride_[i];
        }
        points_.push_back(std::move(m));
    }
}

int Grid::index(const std::vector<int>& m) const
{
    int idx = 0;
    for (int i = 0; i < n(); ++i) {
        if (m[i] < 0 || m[i] > lambdas_[i])
            return -1;
        idx += m[i] * stride_[i];
    }
    return idx;
}

int Grid::h(int idx) const
{
    int s = 0;
    for (int i = 0; i < n(); ++i)
        s += lambdas_[i] - 2 * points_[idx][i];
    return s;
}

// ---------------------------------------------------------------- shift algebra

void ShiftOperator::add(ShiftKey key, Coeff c)
{
    auto it = terms_.find(key);
    if (it == terms_.end()) {
        terms_.emplace(key, std::move(c));
        return;
    }
    Coeff prev = std::move(it->second);
    it->second = [prev = std::move(prev), c = std::move(c)](cplx l) { return prev(l) + c(l); };
}

ShiftOperator ShiftOperator::operator+(const ShiftOperator& o) const
{
    ShiftOperator out = *this;
    if (out.size_ == 0) {
        out.size_ = o.size_;
        out.eta_ = o.eta_;
    }
    for (const auto& [k, c] : o.terms_)
        out.add(k, c);
    return out;
}

ShiftOperator ShiftOperator::operator-(const ShiftOperator& o) const { return *this + o.scaled(-1.0); }

ShiftOperator ShiftOperator::scaled(cplx s) const
{
    ShiftOperator out(size_, eta_);
    for (const auto& [k, c] : terms_)
        out.terms_.emplace(k, [c, s](cplx l) { return s * c(l); });
    return out;
}

ShiftOperator ShiftOperator::compose(const ShiftOperator& b) const
{
    ShiftOperator out(std::max(size_, b.size_), size_ ? eta_ : b.eta_);
    const cplx two_eta = 2.0 * out.eta_;
    // index b's terms by their target for the inner join
    std::multimap<int, std::pair<ShiftKey, const Coeff*>> by_target;
    for (const auto& [k, c] : b.terms_)
        by_target.emplace(k.target, std::make_pair(k, &c));
    for (const auto& [ka, ca] : terms_) {
        auto range = by_target.equal_range(ka.source);
        for (auto it = range.first; it != range.second; ++it) {
            const ShiftKey kb = it->second.first;
            const Coeff& cb = *it->second.second;
            const cplx off = two_eta * double(ka.shift);
            out.add({ka.target, kb.source, ka.shift + kb.shift},
                    [ca, cb, off](cplx l) { return ca(l) * cb(l + off); });
        }
    }
    return out;
}

std::map<ShiftKey, cplx> ShiftOperator::coefficients(cplx lambda) const
{
    std::map<ShiftKey, cplx> out;
    for (const auto& [k, c] : terms_)
        out.emplace(k, c(lambda));
    return out;
}

cplx ShiftOperator::apply(const std::function<cplx(int, cplx)>& f, int target, cplx lambda) const
{
    cplx acc = 0.0;
    for (const auto& [k, c] : terms_)
        if (k.target == target)
            acc += c(lambda) * f(k.source, lambda + 2.0 * eta_ * double(k.shift));
    return acc;
}

double coefficient_residual(const ShiftOperator& x, const ShiftOperator& y, cplx lambda)
{
    const auto cx = x.coefficients(lambda);
    const auto cy = y.coefficients(lambda);
    double scale = 0.0, diff = 0.0;
    for (const auto& [k, v] : cx)
        scale = std::max(scale, std::abs(v));
    for (const auto& [k, v] : cy)
        scale = std::max(scale, std::abs(v));
    for (const auto& [k, v] : cx) {
        auto it = cy.find(k);
        diff = std::max(diff, std::abs(v - (it == cy.end() ? cplx(0.0) : it->second)));
    }
    for (const auto& [k, v] : cy)
        if (!cx.count(k))
            diff = std::max(diff, std::abs(v));
    return scale > 0.0 ? diff / scale : diff;
}

// ---------------------------------------------------------------- module

namespace {

std::vector<int> lambdas_of(const ModelParams& p)
{
    std::vector<int> out;
    for (const auto& s : p.sites)
        out.push_back(s.Lambda);
    return out;
}

} // namespace

DifferenceModule::DifferenceModule(const ModelParams& params)
    : params_(params), grid_(lambdas_of(params))
{
    params_.validate();
}

std::vector<cplx> DifferenceModule::x(int idx) const
{
    const auto& m = grid_.point(idx);
    std::vector<cplx> out(params_.n());
    for (int i = 0; i < params_.n(); ++i)
        out[i] = -params_.sites[i].z - params_.eta * double(params_.sites[i].Lambda - 2 * m[i]);
    return out;
}

cplx DifferenceModule::delta_plus(cplx v) const
{
    cplx p = 1.0;
    for (const auto& s : params_.sites)
        p *= params_.th.theta(v - s.z - double(s.Lambda) * params_.eta);
    return p;
}

cplx DifferenceModule::delta_minus(cplx v) const
{
    cplx p = 1.0;
    for (const auto& s : params_.sites)
        p *= params_.th.theta(v - s.z + double(s.Lambda) * params_.eta);
    return p;
}

cplx DifferenceModule::det(cplx z) const
{
    const cplx eta = params_.eta;
    cplx p = 1.0;
    for (const auto& s : params_.sites)
        p *= params_.th.theta(z - s.z - double(s.Lambda) * eta) *
             params_.th.theta(z - s.z + double(s.Lambda) * eta + 2.0 * eta);
    return p;
}

ShiftOperator DifferenceModule::a(cplx z) const
{
    const Theta& th = params_.th;
    ShiftOperator op(grid_.size(), params_.eta);
    for (int t = 0; t < grid_.size(); ++t) {
        const auto xs = x(t);
        cplx pre = 1.0, S = 0.0;
        for (int l = 0; l < params_.n(); ++l) {
            pre *= th.theta(z + xs[l]);
            S += xs[l] + params_.sites[l].z + double(params_.sites[l].Lambda) * params_.eta;
        }
        const Theta thv = params_.th;
        op.add({t, t, -1}, [thv, pre, S](cplx l) { return pre * thv.theta(l + S) / thv.theta(l); });
    }
    return op;
}

ShiftOperator DifferenceModule::b_or_c(cplx z, bool is_b, bool use_delta_plus, double* off_grid_max) const
{
    const Theta& th = params_.th;
    const Theta thv = params_.th;
    const int n = params_.n();
    ShiftOperator op(grid_.size(), params_.eta);
    double off = 0.0;

    // theta factors depend on (site, m) only: tabulate them
    std::vector<int> offset(n + 1, 0);
    for (int i = 0; i < n; ++i)
        offset[i + 1] = offset[i] + params_.sites[i].Lambda + 1;
    const int K = offset[n];
    std::vector<cplx> xv(K), thz(K), del(K), thd(K * K);
    for (int i = 0; i < n; ++i)
        for (int m = 0; m <= params_.sites[i].Lambda; ++m) {
            const int q = offset[i] + m;
            xv[q] = -params_.sites[i].z - params_.eta * double(params_.sites[i].Lambda - 2 * m);
            thz[q] = th.theta(z + xv[q]);
            del[q] = use_delta_plus ? delta_plus(-xv[q]) : delta_minus(-xv[q]);
        }
    for (int q = 0; q < K; ++q)
        for (int r = 0; r < K; ++r)
            thd[q * K + r] = th.theta(xv[q] - xv[r]);

    std::vector<int> qs(n);
    for (int t = 0; t < grid_.size(); ++t) {
        const auto& mt = grid_.point(t);
        std::vector<cplx> xs(n);
        for (int l = 0; l < n; ++l) {
            qs[l] = offset[l] + mt[l];
            xs[l] = xv[qs[l]];
        }
        cplx s = 0.0;
        for (int l = 0; l < n; ++l)
            s += xs[l] + params_.sites[l].z;
        for (int i = 0; i < n; ++i) {
            cplx pre = -del[qs[i]];
            for (int j = 0; j < n; ++j)
                if (j != i)
                    pre *= thz[qs[j]] / thd[qs[i] * K + qs[j]];
            std::vector<int> src = mt;
            src[i] += is_b ? -1 : +1;
            const int sidx = grid_.index(src);
            const cplx xi = xs[i];
            if (sidx < 0) {
                // the whole term is pre * (lambda-dependent ratio); track pre
                off = std::max(off, std::abs(pre));
                continue;
            }
            if (is_b)
                op.add({t, sidx, +1}, [thv, pre, xi, z](cplx l) { return pre * thv.theta(l + z + xi) / thv.theta(l); });
            else
                op.add({t, sidx, -1}, [thv, pre, xi, z, s](cplx l) {
                    return pre * thv.theta(-l + z + xi - 2.0 * s) / thv.theta(l);
                });
        }
    }
    if (off_grid_max)
        *off_grid_max = off;
    return op;
}

ShiftOperator DifferenceModule::b(cplx z) const { return b_or_c(z, true, true, nullptr); }
ShiftOperator DifferenceModule::c(cplx z) const { return b_or_c(z, false, false, nullptr); }

BoundaryReport DifferenceModule::boundary_report(cplx z) const
{
    BoundaryReport r;
    const ShiftOperator b = b_or_c(z, true, true, &r.b_with_delta_plus);
    b_or_c(z, true, false, &r.b_with_delta_minus);
    const ShiftOperator c = b_or_c(z, false, false, &r.c_with_delta_minus);
    b_or_c(z, false, true, &r.c_with_delta_plus);
    // scale: largest on-grid prefactor magnitude at a reference lambda
    const cplx lref{0.29, 0.17};
    for (const auto& [k, v] : b.coefficients(lref))
        r.scale = std::max(r.scale, std::abs(v));
    for (const auto& [k, v] : c.coefficients(lref))
        r.scale = std::max(r.scale, std::abs(v));
    return r;
}

ShiftOperator DifferenceModule::multiply(const std::function<cplx(cplx, int)>& fn) const
{
    ShiftOperator op(grid_.size(), params_.eta);
    for (int t = 0; t < grid_.size(); ++t)
        op.add({t, t, 0}, [fn, t](cplx l) { return fn(l, t); });
    return op;
}

ShiftOperator DifferenceModule::identity() const
{
    return multiply([](cplx, int) { return cplx(1.0); });
}

ShiftOperator DifferenceModule::a_inverse(cplx z) const
{
    const ShiftOperator az = a(z);
    const cplx two_eta = 2.0 * params_.eta;
    ShiftOperator inv(grid_.size(), params_.eta);
    for (const auto& [k, c] : az.terms())
        inv.add({k.target, k.target, +1}, [c, two_eta](cplx l) { return 1.0 / c(l + two_eta); });
    return inv;
}

ShiftOperator DifferenceModule::d(cplx z) const
{
    const cplx eta = params_.eta;
    const cplx detz = det(z);
    const Theta thv = params_.th;
    std::vector<double> hs(grid_.size());
    for (int t = 0; t < grid_.size(); ++t)
        hs[t] = grid_.h(t);
    const ShiftOperator rhs =
        multiply([thv, hs, eta, detz](cplx l, int t) {
            return thv.theta(l - 2.0 * eta * hs[t]) / thv.theta(l) * detz;
        }) +
        c(z + 2.0 * eta).compose(b(z));
    return a_inverse(z + 2.0 * eta).compose(rhs);
}

std::array<std::array<ShiftOperator, 2>, 2> DifferenceModule::L(cplx z) const
{
    return {{{a(z), b(z)}, {c(z), d(z)}}};
}

// ---------------------------------------------------------------- RLL

RllReport rll_residual(const DifferenceModule& mod, cplx z, cplx w, const std::vector<cplx>& lambdas)
{
    const Theta& th = mod.params().th;
    const Theta thv = th;
    const cplx eta = mod.eta();
    std::vector<double> hs(mod.grid().size());
    for (int t = 0; t < mod.grid().size(); ++t)
        hs[t] = mod.grid().h(t);
    const auto Lz = mod.L(z);
    const auto Lw = mod.L(w);
    // products needed on both sides
    std::array<std::array<std::array<std::array<ShiftOperator, 2>, 2>, 2>, 2> zw, wz;
    for (int p = 0; p < 2; ++p)
        for (int j = 0; j < 2; ++j)
            for (int q = 0; q < 2; ++q)
                for (int k = 0; k < 2; ++k) {
                    zw[p][j][q][k] = Lz[p][j].compose(Lw[q][k]);
                    wz[q][k][p][j] = Lw[q][k].compose(Lz[p][j]);
                }
    RllReport rep;
    for (int i = 0; i < 2; ++i)
        for (int l = 0; l < 2; ++l)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) {
                    ShiftOperator lhs, rhs;
                    for (int ip = 0; ip < 2; ++ip)
                        for (int lp = 0; lp < 2; ++lp) {
                            const int row = 2 * i + l, col = 2 * ip + lp;
                            const auto r1 = mod.multiply([thv, hs, eta, z, w, row, col](cplx lam, int t) {
                                return r_matrix(thv, eta, z - w, lam - 2.0 * eta * hs[t])(row, col);
                            });
                            lhs = lhs + r1.compose(zw[ip][j][lp][k]);
                            const int row2 = 2 * ip + lp, col2 = 2 * j + k;
                            const auto r2 = mod.multiply([thv, eta, z, w, row2, col2](cplx lam, int) {
                                return r_matrix(thv, eta, z - w, lam)(row2, col2);
                            });
                            rhs = rhs + wz[l][lp][i][ip].compose(r2);
                        }
                    double worst = 0.0;
                    for (const cplx lam : lambdas)
                        worst = std::max(worst, coefficient_residual(lhs, rhs, lam));
                    rep.residual[8 * i + 4 * l + 2 * j + k] = worst;
                    rep.max_residual = std::max(rep.max_residual, worst);
                }
    return rep;
}

double ab_exchange_scalar_residual(const Theta& th, cplx eta, cplx z, cplx w, cplx l, cplx xk)
{
    auto t = [&](cplx v) { return th.theta(v); };
    const cplx f1 = t(z + xk) * t(l + w + xk - 2.0 * eta) / t(l - 2.0 * eta);
    const cplx f2 = t(z - w) * t(l + w + xk) * t(z + xk - 2.0 * eta) / (t(z - w - 2.0 * eta) * t(l));
    const cplx f3 = t(z - w - l) * t(2.0 * eta) * t(w + xk) * t(l + z + xk - 2.0 * eta) /
                    (t(z - w - 2.0 * eta) * t(l) * t(l - 2.0 * eta));
    return std::abs(f1 - f2 - f3) / std::max({std::abs(f1), std::abs(f2), std::abs(f3)});
}

ResidueSumReport residue_sum(const DifferenceModule& mod, int idx, int i, int quad_points)
{
    const ModelParams& p = mod.params();
    const Theta& th = p.th;
    const cplx eta = p.eta;
    const int n = p.n();
    const auto xs = mod.x(idx);
    cplx s = 0.0;
    for (int l = 0; l < n; ++l)
        s += xs[l] + p.sites[l].z;
    auto f = [&](cplx v) {
        cplx val = th.theta(2.0 * s + xs[i] + v + 2.0 * eta) / th.theta(v + xs[i] + 2.0 * eta);
        for (int l = 0; l < n; ++l) {
            const double L = double(p.sites[l].Lambda);
            val *= th.theta(v - p.sites[l].z - L * eta) * th.theta(v - p.sites[l].z + L * eta + 2.0 * eta) /
                   (th.theta(v + xs[l]) * th.theta(v + xs[l] + 2.0 * eta));
        }
        return val;
    };
    std::vector<cplx> poles;
    for (int j = 0; j < n; ++j) {
        poles.push_back(-xs[j] - 2.0 * eta);
        poles.push_back(-xs[j]);
    }
    // circle radius well inside the nearest other pole
    double sep = 1e300;
    for (std::size_t a = 0; a < poles.size(); ++a)
        for (std::size_t b = 0; b < poles.size(); ++b)
            if (a != b)
                sep = std::min(sep, th.lattice_distance(poles[a] - poles[b]));
    const double r = 0.3 * sep;
    ResidueSumReport rep;

    for (const cplx c : poles) {
        cplx acc = 0.0;
        for (int q = 0; q < quad_points; ++q) {
            const cplx e = r * std::exp(2.0 * kPi * kI * double(q) / double(quad_points));
            const cplx t = e * f(c + e);
            acc += t;
            rep.magnitude = std::max(rep.magnitude, std::abs(t));
        }
        const cplx res = acc / double(quad_points);
        rep.sum += res;
        rep.scale = std::max(rep.scale, std::abs(res));
    }
    return rep;
}

// ---------------------------------------------------------------- highest weight

HighestWeightReport highest_weight_check(const DifferenceModule& mod, cplx z, cplx lambda)
{
    const ModelParams& p = mod.params();
    const Theta& th = p.th;
    const cplx eta = p.eta;
    const Grid& g = mod.grid();
    const int hw = g.index(std::vector<int>(p.n(), 0));
    HighestWeightReport rep;
    rep.h_value = g.h(hw);
    rep.expected_h = p.total_weight();

    auto v_hw = [hw](int s, cplx) { return s == hw ? cplx(1.0) : cplx(0.0); };
    auto image = [&](const ShiftOperator& X) {
        std::vector<cplx> out(g.size());
        for (int t = 0; t < g.size(); ++t)
            out[t] = X.apply(v_hw, t, lambda);
        return out;
    };

    cplx A = 1.0, Dprod = 1.0;
    for (const auto& s : p.sites) {
        A *= th.theta(z - s.z - double(s.Lambda) * eta);
        Dprod *= th.theta(z - s.z + double(s.Lambda) * eta);
    }
    const cplx D = th.theta(lambda - 2.0 * eta * double(p.total_weight())) / th.theta(lambda) * Dprod;
    rep.A = A;
    rep.D = D;
    rep.Dbar = D / A;

    const auto av = image(mod.a(z));
    const auto dv = image(mod.d(z));
    const auto cv = image(mod.c(z));
    double c_norm = 0.0, a_off = 0.0, d_off = 0.0;
    for (int t = 0; t < g.size(); ++t) {
        c_norm = std::max(c_norm, std::abs(cv[t]));
        if (t != hw) {
            a_off = std::max(a_off, std::abs(av[t]));
            d_off = std::max(d_off, std::abs(dv[t]));
        }
    }
    rep.c_annihilation = c_norm / std::max(std::abs(A), 1e-300);
    rep.a_eigen_residual = std::max(std::abs(av[hw] - A), a_off) / std::abs(A);
    rep.d_eigen_residual = std::max(std::abs(dv[hw] - D), d_off) / std::abs(D);
    const cplx kappa = 1.0 / A;
    rep.normalized_residual =
        std::max(std::abs(kappa * av[hw] - 1.0), std::abs(kappa * dv[hw] - rep.Dbar) / std::abs(rep.Dbar));
    return rep;
}

std::map<ShiftKey, cplx> n1_example(const DifferenceModule& mod, int which, cplx z, cplx l)
{
    const ModelParams& p = mod.params();
    if (p.n() != 1)
        throw std::invalid_argument("n1_example: needs a single site");
    const Theta& th = p.th;
    const cplx eta = p.eta;
    const cplx z1 = p.sites[0].z;
    const double L = double(p.sites[0].Lambda);
    const Grid& g = mod.grid();
    std::map<ShiftKey, cplx> out;
    for (int t = 0; t < g.size(); ++t) {
        const double h = double(g.h(t));
        auto at_h = [&](double hs) { return g.index({(p.sites[0].Lambda - int(hs)) / 2}); };
        switch (which) {
        case 0:
            out[{t, t, -1}] = th.theta(z - z1 - eta * h) * th.theta(l - eta * h + L * eta) / th.theta(l);
            break;
        case 1: {
            const int s = at_h(h + 2);
            if (s >= 0)
                out[{t, s, +1}] = th.theta(l + z - z1 - eta * h) / th.theta(l) * th.theta(-eta * h + L * eta);
            break;
        }
        case 2: {
            const int s = at_h(h - 2);
            if (s >= 0)
                out[{t, s, -1}] = -th.theta(-l + z - z1 + eta * h) / th.theta(l) * th.theta(eta * h + L * eta);
            break;
        }
        default:
            out[{t, t, +1}] = th.theta(z - z1 + eta * h) * th.theta(l - eta * h - L * eta) / th.theta(l);
        }
    }
    return out;
}

} // namespace esov
