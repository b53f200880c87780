#include "esov/theta.hpp"

#include <cmath>
#include <sstream>

#include "esov/error.hpp"

namespace esov {

Lattice::Lattice(cplx tau_, double im_floor) : tau(tau_)
{
    if (!(tau.imag() >= im_floor)) {
        std::ostringstream os;
        os << "Lattice invariant violated: Im(tau) = " << tau.imag()
           << " is below the floor " << im_floor;
        throw ConfigError(os.str());
    }
}

Theta::Theta(Lattice lat, ThetaOptions opt) : lat_(lat), opt_(opt)
{
    tp0_ = series(cplx(0.0), 1)[1];
}

Reduced Theta::reduce(cplx z) const
{
    const cplx tau = lat_.tau;
    const double s = std::floor(z.imag() / tau.imag());
    const cplx z1 = z - s * tau;
    const double r = std::floor(z1.real());
    Reduced out{z1 - r, static_cast<long>(r), static_cast<long>(s)};
    // floor can land exactly on the upper edge after rounding
    if (out.w.imag() >= tau.imag()) {
        out.w -= tau;
        out.s += 1;
    }
    if (out.w.real() >= 1.0) {
        out.w -= 1.0;
        out.r += 1;
    }
    return out;
}

double Theta::lattice_distance(cplx z) const
{
    const cplx w = reduce(z).w;
    double best = std::abs(w);
    for (int p = -1; p <= 1; ++p)
        for (int q = -1; q <= 1; ++q)
            best = std::min(best, std::abs(w - (double(p) + double(q) * lat_.tau)));
    return best;
}

void Theta::require_off_lattice(cplx z, const char* what) const
{
    const double d = lattice_distance(z);
    if (d < opt_.rho) {
        std::ostringstream os;
        os << what << ": argument " << z.real() << (z.imag() < 0 ? "" : "+") << z.imag()
           << "i lies within " << d << " of a lattice point (margin " << opt_.rho << ")";
        throw PoleProximityError(os.str());
    }
}

// Sum at a reduced point w. Index n = j + 1/2 runs outward in both
// directions until the modulus bound of the next term (including the
// derivative factor) drops below trunc_tol times the largest term seen.
std::vector<cplx> Theta::series(cplx w, int dmax) const
{
    const cplx tau = lat_.tau;
    const double qi = tau.imag();
    std::vector<cplx> acc(dmax + 1, cplx(0.0));
    double running_max = 0.0;

    auto bound = [&](double n) {
        const double base = std::exp(-kPi * n * n * qi - 2.0 * kPi * n * w.imag());
        return base * std::pow(2.0 * kPi * std::abs(n), dmax);
    };

    for (int dir = 0; dir < 2; ++dir) {
        bool converged = false;
        double last_tail = 0.0;
        for (int t = 0; t < opt_.max_terms; ++t) {
            const double n = dir == 0 ? t + 0.5 : -t - 0.5;
            const cplx term = std::exp(kI * kPi * n * n * tau + 2.0 * kI * kPi * n * (w + 0.5));
            const cplx fac = 2.0 * kI * kPi * n;
            cplx p = term;
            for (int d = 0; d <= dmax; ++d) {
                acc[d] += p;
                running_max = std::max(running_max, std::abs(p));
                p *= fac;
            }
            const double nn = dir == 0 ? n + 1.0 : n - 1.0;
            last_tail = bound(nn);
            // geometric-squared decay: once the next term is negligible and
            // the sequence is decreasing the tail is bounded by it
            if (last_tail < opt_.trunc_tol * running_max && bound(nn) <= bound(n)) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            std::ostringstream os;
            os << "theta series did not converge within " << opt_.max_terms
               << " terms (tail bound " << last_tail << ")";
            throw TruncationError(os.str(), last_tail);
        }
    }
    for (auto& x : acc)
        x = -x;
    return acc;
}

std::vector<cplx> Theta::derivatives(cplx z, int dmax) const
{
    const Reduced red = reduce(z);
    std::vector<cplx> base = series(red.w, dmax);
    if (red.r == 0 && red.s == 0)
        return base;
    // theta(z) = (-1)^{r+s} exp(i pi s^2 tau - 2 pi i s z) theta(z - r - s tau)
    const double s = static_cast<double>(red.s);
    const double sign = ((red.r + red.s) % 2 == 0) ? 1.0 : -1.0;
    const cplx pref = sign * std::exp(kI * kPi * s * s * lat_.tau - 2.0 * kI * kPi * s * z);
    const cplx g = -2.0 * kI * kPi * s;
    std::vector<cplx> gpow(dmax + 1, cplx(1.0));
    for (int k = 1; k <= dmax; ++k)
        gpow[k] = gpow[k - 1] * g;
    std::vector<cplx> out(dmax + 1, cplx(0.0));
    for (int d = 0; d <= dmax; ++d) {
        // Leibniz with the exponential prefactor
        double binom = 1.0;
        for (int k = 0; k <= d; ++k) {
            out[d] += binom * gpow[d - k] * base[k];
            binom = binom * (d - k) / (k + 1);
        }
        out[d] *= pref;
    }
    return out;
}

cplx Theta::theta(cplx z, int d) const
{
    if (d < 0 || d > 3)
        throw std::invalid_argument("theta: derivative order must be in 0..3");
    return derivatives(z, d)[d];
}

ScalarJet Theta::jet(cplx z, int degree) const
{
    std::vector<cplx> der = derivatives(z, degree);
    double fact = 1.0;
    for (int k = 0; k <= degree; ++k) {
        if (k > 0)
            fact *= k;
        der[k] /= fact;
    }
    return ScalarJet(std::move(der));
}

cplx Theta::sigma(cplx lambda, cplx z) const
{
    require_off_lattice(z, "sigma");
    require_off_lattice(lambda, "sigma");
    return theta(lambda - z) * tp0_ / (theta(z) * theta(lambda));
}

cplx Theta::zeta_bar(cplx z) const
{
    require_off_lattice(z, "zeta_bar");
    const auto d = derivatives(z, 1);
    return d[1] / d[0];
}

cplx Theta::wp_bar(cplx z) const
{
    require_off_lattice(z, "wp_bar");
    const auto d = derivatives(z, 2);
    const cplx zb = d[1] / d[0];
    return zb * zb - d[2] / d[0];
}

cplx Theta::sigma_dlambda(cplx lambda, cplx z) const
{
    require_off_lattice(lambda - z, "sigma_dlambda");
    return sigma(lambda, z) * (zeta_bar(lambda - z) - zeta_bar(lambda));
}

ScalarJet Theta::sigma_jet(cplx lambda0, cplx z, int degree) const
{
    require_off_lattice(z, "sigma");
    require_off_lattice(lambda0, "sigma");
    const cplx pref = tp0_ / theta(z);
    return (jet(lambda0 - z, degree) / jet(lambda0, degree)) * pref;
}

ScalarJet Theta::sigma_neg_jet(cplx lambda0, cplx z, int degree) const
{
    require_off_lattice(z, "sigma");
    require_off_lattice(lambda0, "sigma");
    const cplx pref = tp0_ / theta(z);
    return (jet(-lambda0 - z, degree).reflected() / jet(-lambda0, degree).reflected()) * pref;
}

ScalarJet Theta::wp_bar_jet(cplx lambda0, int degree) const
{
    require_off_lattice(lambda0, "wp_bar");
    const ScalarJet th = jet(lambda0, degree + 2);
    const ScalarJet zb = th.derivative() / th;
    return zb.derivative() * cplx(-1.0);
}

} // namespace esov
