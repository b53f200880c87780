#pragma once

#include <complex>
#include <vector>

#include "esov/jet.hpp"

namespace esov {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

struct Lattice {
    cplx tau;

    // Throws ConfigError("Lattice invariant violated ...") when Im tau is
    // below the floor.
    explicit Lattice(cplx tau_, double im_floor = 1e-3);
};

struct ThetaOptions {
    double trunc_tol = 1e-16;
    int max_terms = 64;
    double rho = 1e-6;
};

// z = w + r + s*tau with w in the fundamental cell [0,1) + [0,1)*tau.
struct Reduced {
    cplx w;
    long r;
    long s;
};

// Odd Jacobi theta function
//   theta(z) = -sum_j exp(i pi (j+1/2)^2 tau + 2 pi i (j+1/2)(z+1/2))
// and the elliptic functions built from it. Immutable once built.
class Theta {
public:
    explicit Theta(Lattice lat, ThetaOptions opt = {});

    cplx tau() const { return lat_.tau; }
    const ThetaOptions& options() const { return opt_; }

    Reduced reduce(cplx z) const;
    // Distance from z to the nearest lattice point.
    double lattice_distance(cplx z) const;

    // d-th derivative, d in 0..3.
    cplx theta(cplx z, int d = 0) const;
    // theta^{(k)}(z) / k! for k = 0..degree, i.e. the Taylor jet at z.
    ScalarJet jet(cplx z, int degree) const;
    // All derivatives theta^{(k)}(z), k = 0..dmax, from one series pass.
    std::vector<cplx> derivatives(cplx z, int dmax) const;

    cplx theta_prime0() const { return tp0_; }

    cplx sigma(cplx lambda, cplx z) const;
    cplx zeta_bar(cplx z) const;
    cplx wp_bar(cplx z) const;
    cplx sigma_dlambda(cplx lambda, cplx z) const;

    // sigma_{lambda0 + t}(z) as a jet in t.
    ScalarJet sigma_jet(cplx lambda0, cplx z, int degree) const;
    // sigma_{-(lambda0 + t)}(z) as a jet in t.
    ScalarJet sigma_neg_jet(cplx lambda0, cplx z, int degree) const;
    // wp_bar(lambda0 + t) as a jet in t.
    ScalarJet wp_bar_jet(cplx lambda0, int degree) const;

    void require_off_lattice(cplx z, const char* what) const;

private:
    std::vector<cplx> series(cplx w, int dmax) const;

    Lattice lat_;
    ThetaOptions opt_;
    cplx tp0_;
};

} // namespace esov
