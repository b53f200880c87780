#include "esov/theta_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "esov/error.hpp"

namespace esov {

namespace {

cplx log_branch(cplx v, long shift) { return std::log(v) + 2.0 * kPi * kI * double(shift); }

long ipow_sign(long e) { return (e % 2 == 0) ? 1 : -1; }

} // namespace

cplx Character::at(long r, long s) const
{
    return std::pow(chi1, double(r)) * std::pow(chiTau, double(s));
}

cplx phi(const Character& chi, cplx tau)
{
    return (std::log(chi.chiTau) - tau * std::log(chi.chi1)) / (2.0 * kPi * kI);
}

double lattice_distance(cplx z, cplx tau)
{
    const double s = std::floor(z.imag() / tau.imag());
    const cplx z1 = z - s * tau;
    const cplx w = z1 - std::floor(z1.real());
    double best = std::abs(w);
    for (int p = -1; p <= 1; ++p)
        for (int q = -1; q <= 1; ++q)
            best = std::min(best, std::abs(w - (double(p) + double(q) * tau)));
    return best;
}

EllipticPoly normalized(const Theta& th, EllipticPoly p)
{
    const cplx tau = th.tau();
    for (auto& w : p.zeros) {
        const Reduced red = th.reduce(w);
        const double s = double(red.s);
        // theta(z - w' - r - s tau) = (-1)^{r+s} e^{-i pi s^2 tau + 2 pi i s (z - w')} theta(z - w')
        p.a += 2.0 * kPi * kI * s;
        p.scale *= double(ipow_sign(red.r + red.s)) *
                   std::exp(-kI * kPi * s * s * tau - 2.0 * kPi * kI * s * red.w);
        w = red.w;
    }
    return p;
}

cplx eval_elliptic_poly(const Theta& th, const EllipticPoly& p, cplx z)
{
    cplx v = p.scale * std::exp(p.a * z);
    for (const auto& w : p.zeros)
        v *= th.theta(z - w);
    return v;
}

cplx eval_elliptic_poly_derivative(const Theta& th, const EllipticPoly& p, cplx z)
{
    const int m = p.order();
    std::vector<cplx> f(m), fp(m);
    for (int j = 0; j < m; ++j) {
        const auto d = th.derivatives(z - p.zeros[j], 1);
        f[j] = d[0];
        fp[j] = d[1];
    }
    cplx prod = 1.0;
    for (const auto& x : f)
        prod *= x;
    cplx sum = p.a * prod;
    for (int j = 0; j < m; ++j) {
        cplx t = fp[j];
        for (int l = 0; l < m; ++l)
            if (l != j)
                t *= f[l];
        sum += t;
    }
    return p.scale * std::exp(p.a * z) * sum;
}

cplx elliptic_poly_log_derivative(const Theta& th, const EllipticPoly& p, cplx z)
{
    cplx v = p.a;
    for (const auto& w : p.zeros)
        v += th.zeta_bar(z - w);
    return v;
}

Character character_of(const EllipticPoly& p, cplx tau)
{
    const int m = p.order();
    const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
    cplx sw = 0.0;
    for (const auto& w : p.zeros)
        sw += w;
    return {sgn * std::exp(p.a), sgn * std::exp(p.a * tau + 2.0 * kPi * kI * sw)};
}

std::pair<cplx, cplx> interpolation_constants(int k, const Character& chi, cplx tau,
                                              const std::vector<cplx>& nodes, BranchChoice branch)
{
    const cplx l1 = log_branch(chi.chi1, branch.shift1);
    const cplx lt = log_branch(chi.chiTau, branch.shiftTau);
    cplx sz = 0.0;
    for (const auto& z : nodes)
        sz += z;
    const cplx a = l1 / (2.0 * kPi * kI) - 0.5 * double(k);
    const cplx b = (tau * l1 - lt) / (2.0 * kPi * kI) + sz - 0.5 * double(k) * (1.0 + tau);
    return {a, b};
}

ThetaInterpolant::ThetaInterpolant(const Theta& th, int k, Character chi, std::vector<cplx> nodes,
                                   std::vector<cplx> values)
    : th_(&th), k_(k), chi_(chi), nodes_(std::move(nodes)), values_(std::move(values))
{
    if (k_ < 1)
        throw std::invalid_argument("interpolate: level must be at least 1");
    if (int(nodes_.size()) != k_ || int(values_.size()) != k_)
        throw std::invalid_argument("interpolate: need exactly k nodes and k values");
    const double rho = th.options().rho;
    for (int i = 0; i < k_; ++i)
        for (int j = i + 1; j < k_; ++j)
            if (th.lattice_distance(nodes_[i] - nodes_[j]) < rho) {
                std::ostringstream os;
                os << "interpolate: nodes " << i << " and " << j << " coincide mod lattice";
                throw DegenerateNodesError(os.str());
            }
    std::tie(a_, b_) = interpolation_constants(k_, chi_, th.tau(), nodes_);
    if (th.lattice_distance(b_) < rho)
        throw ResonantCharacterError(
            "interpolate: sum of nodes lies on the resonant locus phi(chi) + k delta");
    theta_b_ = th.theta(b_);
    denom_.resize(k_);
    for (int j = 0; j < k_; ++j) {
        cplx d = theta_b_;
        for (int l = 0; l < k_; ++l)
            if (l != j)
                d *= th.theta(nodes_[j] - nodes_[l]);
        denom_[j] = d;
    }
}

cplx ThetaInterpolant::operator()(cplx z) const
{
    const Theta& th = *th_;
    std::vector<cplx> tz(k_);
    for (int l = 0; l < k_; ++l)
        tz[l] = th.theta(z - nodes_[l]);
    cplx f = 0.0;
    for (int j = 0; j < k_; ++j) {
        if (values_[j] == cplx(0.0))
            continue;
        cplx t = values_[j] * std::exp(2.0 * kPi * kI * a_ * (z - nodes_[j])) *
                 th.theta(z - nodes_[j] + b_);
        for (int l = 0; l < k_; ++l)
            if (l != j)
                t *= tz[l];
        f += t / denom_[j];
    }
    return f;
}

std::vector<cplx> generic_nodes(const Theta& th, int k, const Character& chi, Sampler& rng,
                                const std::function<bool(cplx)>& extra_ok)
{
    const double sep = 0.05;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<cplx> nodes;
        int guard = 0;
        while (int(nodes.size()) < k && guard++ < 10000) {
            const cplx z = rng.cell_point(th.tau(), 0.05, 0.95);
            bool ok = !extra_ok || extra_ok(z);
            for (const auto& y : nodes)
                ok = ok && th.lattice_distance(z - y) > sep;
            if (ok)
                nodes.push_back(z);
        }
        if (int(nodes.size()) < k)
            continue;
        const auto ab = interpolation_constants(k, chi, th.tau(), nodes);
        if (th.lattice_distance(ab.second) > sep)
            return nodes;
    }
    throw DegenerateNodesError("could not draw generic interpolation nodes");
}

ThetaSpaceBasis::ThetaSpaceBasis(const Theta& th, int k, Character chi, Sampler& rng) : k_(k)
{
    nodes_ = generic_nodes(th, k, chi, rng);
    for (int j = 0; j < k; ++j) {
        std::vector<cplx> v(k, cplx(0.0));
        v[j] = 1.0;
        cardinal_.emplace_back(th, k, chi, nodes_, v);
    }
}

cplx ThetaSpaceBasis::eval(int j, cplx z) const { return cardinal_.at(j)(z); }

MembershipReport membership_test(const Theta& th, const std::function<cplx(cplx)>& f, int k,
                                 const Character& chi, Sampler& rng, double tol, int n_qp_points)
{
    MembershipReport rep;
    rep.tol = tol;
    const cplx tau = th.tau();
    const auto nodes = generic_nodes(th, k, chi, rng);
    std::vector<cplx> vals;
    for (const auto& z : nodes)
        vals.push_back(f(z));
    const ThetaInterpolant interp(th, k, chi, nodes, vals);

    double scale = 0.0;
    std::vector<cplx> pts, fv;
    for (int i = 0; i < std::max(k, n_qp_points); ++i) {
        const cplx z = rng.cell_point(tau);
        pts.push_back(z);
        fv.push_back(f(z));
        scale = std::max(scale, std::abs(fv.back()));
    }
    for (const auto& y : vals)
        scale = std::max(scale, std::abs(y));
    if (scale == 0.0)
        scale = 1.0;

    double dev = 0.0;
    for (int i = 0; i < k; ++i)
        dev = std::max(dev, std::abs(fv[i] - interp(pts[i])));
    rep.interpolation_residual = dev / scale;

    double qp = 0.0;
    for (int i = 0; i < n_qp_points; ++i) {
        const cplx z = pts[i];
        const cplx f1 = f(z + 1.0);
        const cplx ft = f(z + tau);
        const cplx mult = std::exp(-kI * kPi * double(k) * (tau + 2.0 * z));
        const double s = std::max({std::abs(fv[i]), std::abs(f1), std::abs(ft), scale});
        qp = std::max(qp, std::abs(f1 - chi.chi1 * fv[i]) / s);
        qp = std::max(qp, std::abs(ft - chi.chiTau * mult * fv[i]) / s);
    }
    rep.quasi_periodicity_residual = qp;
    rep.pass = rep.interpolation_residual <= tol && rep.quasi_periodicity_residual <= tol;
    return rep;
}

double zero_count(const Theta& th, const EllipticPoly& p, Sampler& rng)
{
    const cplx tau = th.tau();
    // corner c0 such that no zero sits within margin of the cell boundary
    cplx c0 = 0.0;
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
        c0 = rng.cell_point(tau, -0.5, 0.5);
        ok = true;
        for (const auto& w : p.zeros) {
            // coordinates of w - c0 in the basis (1, tau), reduced to [0,1)
            const double y = (w - c0).imag() / tau.imag();
            const double x = ((w - c0) - y * tau).real();
            const double fx = x - std::floor(x);
            const double fy = y - std::floor(y);
            const double margin = 0.03;
            if (fx < margin || fx > 1 - margin || fy < margin || fy > 1 - margin)
                ok = false;
        }
    }
    if (!ok)
        throw SolverError("zero_count: no admissible contour corner");

    using boost::math::quadrature::gauss_kronrod;
    auto edge = [&](cplx from, cplx to) {
        const cplx dz = to - from;
        auto g = [&](double t) { return elliptic_poly_log_derivative(th, p, from + t * dz) * dz; };
        return gauss_kronrod<double, 61>::integrate(g, 0.0, 1.0, 10, 1e-13);
    };
    const cplx c1 = c0 + 1.0;
    const cplx c2 = c0 + 1.0 + tau;
    const cplx c3 = c0 + tau;
    const cplx total = edge(c0, c1) + edge(c1, c2) + edge(c2, c3) + edge(c3, c0);
    return (total / (2.0 * kPi * kI)).real();
}

namespace {

// prod over j of theta(w_i - w_j + shift) including j == i, plus its
// derivatives with respect to every w_l.
struct ProdWithGrad {
    cplx value;
    std::vector<cplx> grad;
};

ProdWithGrad shifted_product(const Theta& th, const std::vector<cplx>& w, int i, cplx shift)
{
    const int m = int(w.size());
    std::vector<cplx> f(m), fp(m);
    for (int j = 0; j < m; ++j) {
        const auto d = th.derivatives(w[i] - w[j] + shift, 1);
        f[j] = d[0];
        fp[j] = d[1];
    }
    ProdWithGrad out{1.0, std::vector<cplx>(m, cplx(0.0))};
    for (int j = 0; j < m; ++j)
        out.value *= f[j];
    for (int j = 0; j < m; ++j) {
        if (j == i)
            continue; // d/dw_i of theta(shift) term vanishes
        cplx t = fp[j];
        for (int l = 0; l < m; ++l)
            if (l != j)
                t *= f[l];
        // d/dw_i gets +t, d/dw_j gets -t
        out.grad[i] += t;
        out.grad[j] -= t;
    }
    return out;
}

} // namespace

std::vector<cplx> difference_bethe_residuals(const Theta& th, const EllipticPoly& A_plus,
                                             const EllipticPoly& A_minus, cplx gamma, cplx a,
                                             const std::vector<cplx>& w)
{
    const int m = int(w.size());
    std::vector<cplx> r(m);
    for (int i = 0; i < m; ++i) {
        const auto pm = shifted_product(th, w, i, -gamma);
        const auto pp = shifted_product(th, w, i, gamma);
        r[i] = eval_elliptic_poly(th, A_plus, w[i]) * std::exp(-gamma * a) * pm.value +
               eval_elliptic_poly(th, A_minus, w[i]) * std::exp(gamma * a) * pp.value;
    }
    return r;
}

DifferenceBetheResult solve_difference_bethe(const Theta& th, int k, const EllipticPoly& A_plus,
                                             const EllipticPoly& A_minus, cplx gamma, int m,
                                             cplx seed_a, const std::vector<cplx>& seed_w,
                                             const NewtonOptions& opt)
{
    const cplx tau = th.tau();
    const double rho = th.options().rho;
    if (A_plus.order() != k || A_minus.order() != k)
        throw std::invalid_argument("solve_difference_bethe: A+- must have order k");
    if (int(seed_w.size()) != m)
        throw std::invalid_argument("solve_difference_bethe: seed must have m roots");
    if (th.lattice_distance(gamma) < rho)
        throw PoleProximityError("solve_difference_bethe: gamma lies on the lattice");
    {
        const Character cp = character_of(A_plus, tau);
        const Character cm = character_of(A_minus, tau);
        const cplx want = cm.chiTau * std::exp(-4.0 * kPi * kI * gamma * double(m));
        if (std::abs(cp.chi1 - cm.chi1) > 1e-9 * std::abs(cp.chi1) ||
            std::abs(cp.chiTau - want) > 1e-9 * std::abs(want))
            throw SolverError("solve_difference_bethe: characters of A+ and A- are incompatible");
    }

    auto unpack = [m](const VecC& x) {
        std::vector<cplx> w(m);
        for (int i = 0; i < m; ++i)
            w[i] = x[i + 1];
        return w;
    };
    auto F = [&](const VecC& x) {
        const cplx a = x[0];
        const auto w = unpack(x);
        VecC f(m + 1);
        f[0] = a - seed_a;
        const auto r = difference_bethe_residuals(th, A_plus, A_minus, gamma, a, w);
        for (int i = 0; i < m; ++i)
            f[i + 1] = r[i];
        return f;
    };
    auto J = [&](const VecC& x) {
        const cplx a = x[0];
        const auto w = unpack(x);
        MatC jac = MatC::Zero(m + 1, m + 1);
        jac(0, 0) = 1.0;
        for (int i = 0; i < m; ++i) {
            const auto pm = shifted_product(th, w, i, -gamma);
            const auto pp = shifted_product(th, w, i, gamma);
            const cplx ap = eval_elliptic_poly(th, A_plus, w[i]);
            const cplx am = eval_elliptic_poly(th, A_minus, w[i]);
            const cplx apd = eval_elliptic_poly_derivative(th, A_plus, w[i]);
            const cplx amd = eval_elliptic_poly_derivative(th, A_minus, w[i]);
            const cplx em = std::exp(-gamma * a);
            const cplx ep = std::exp(gamma * a);
            jac(i + 1, 0) = -gamma * ap * em * pm.value + gamma * am * ep * pp.value;
            for (int l = 0; l < m; ++l) {
                cplx v = ap * em * pm.grad[l] + am * ep * pp.grad[l];
                if (l == i)
                    v += apd * em * pm.value + amd * ep * pp.value;
                jac(i + 1, l + 1) = v;
            }
        }
        return jac;
    };
    VecC x0(m + 1);
    x0[0] = seed_a;
    for (int i = 0; i < m; ++i)
        x0[i + 1] = seed_w[i];
    const NewtonResult res = damped_newton(F, J, x0, opt);

    DifferenceBetheResult out;
    out.a = res.x[0];
    out.w = unpack(res.x);
    out.residual = res.residual;
    out.iterations = res.iterations;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            if (th.lattice_distance(out.w[i] - out.w[j]) < rho)
                throw SolverError("solve_difference_bethe: invalid solution, colliding roots");
    return out;
}

cplx difference_eigenvalue(const Theta& th, const EllipticPoly& A_plus, const EllipticPoly& A_minus,
                           cplx gamma, const EllipticPoly& Q, cplx z)
{
    const cplx q = eval_elliptic_poly(th, Q, z);
    if (std::abs(q) < th.options().rho)
        throw PoleProximityError("difference_eigenvalue: z is too close to a zero of Q");
    return (eval_elliptic_poly(th, A_plus, z) * eval_elliptic_poly(th, Q, z - gamma) +
            eval_elliptic_poly(th, A_minus, z) * eval_elliptic_poly(th, Q, z + gamma)) /
           q;
}

} // namespace esov
