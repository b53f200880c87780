#pragma once

// Spaces Theta_k(chi) of theta functions of level k and character chi:
//   f(z + r + s tau) = chi(r + s tau) exp(-i pi k (s^2 tau + 2 s z)) f(z).

#include <functional>
#include <vector>

#include "esov/newton.hpp"
#include "esov/params.hpp"
#include "esov/theta.hpp"

namespace esov {

struct Character {
    cplx chi1;
    cplx chiTau;

    // chi(r + s tau)
    cplx at(long r, long s) const;
};

// (1/2 pi i)(ln chi(tau) - tau ln chi(1)), principal branch.
cplx phi(const Character& chi, cplx tau);

// Distance of z to the lattice generated by 1 and tau (no evaluator needed).
double lattice_distance(cplx z, cplx tau);

// scale * e^{a z} prod_j theta(z - w_j)
struct EllipticPoly {
    cplx a = 0.0;
    std::vector<cplx> zeros;
    cplx scale = 1.0;

    int order() const { return static_cast<int>(zeros.size()); }
};

// Moves every zero into the fundamental cell, compensating in a and scale
// so the represented function is unchanged.
EllipticPoly normalized(const Theta& th, EllipticPoly p);

cplx eval_elliptic_poly(const Theta& th, const EllipticPoly& p, cplx z);
cplx eval_elliptic_poly_derivative(const Theta& th, const EllipticPoly& p, cplx z);
// p'/p = a + sum zeta_bar(z - w_j)
cplx elliptic_poly_log_derivative(const Theta& th, const EllipticPoly& p, cplx z);

Character character_of(const EllipticPoly& p, cplx tau);

// Unique f in Theta_k(chi) with f(nodes_i) = values_i.
class ThetaInterpolant {
public:
    ThetaInterpolant(const Theta& th, int k, Character chi, std::vector<cplx> nodes,
                     std::vector<cplx> values);

    cplx operator()(cplx z) const;

    int level() const { return k_; }
    const Character& character() const { return chi_; }
    cplx a() const { return a_; }
    cplx b() const { return b_; }
    const std::vector<cplx>& nodes() const { return nodes_; }
    const std::vector<cplx>& values() const { return values_; }

private:
    const Theta* th_;
    int k_;
    Character chi_;
    std::vector<cplx> nodes_;
    std::vector<cplx> values_;
    cplx a_;
    cplx b_;
    cplx theta_b_;
    std::vector<cplx> denom_;
};

// Optional branch shifts for ln chi(1), ln chi(tau): adds 2 pi i * shift.
struct BranchChoice {
    long shift1 = 0;
    long shiftTau = 0;
};

// Interpolation constants (a, b) for the given nodes.
std::pair<cplx, cplx> interpolation_constants(int k, const Character& chi, cplx tau,
                                              const std::vector<cplx>& nodes,
                                              BranchChoice branch = {});

// Basis of Theta_k(chi): cardinal functions at k fixed generic nodes.
class ThetaSpaceBasis {
public:
    ThetaSpaceBasis(const Theta& th, int k, Character chi, Sampler& rng);

    int dimension() const { return k_; }
    cplx eval(int j, cplx z) const;
    const std::vector<cplx>& nodes() const { return nodes_; }

private:
    int k_;
    std::vector<ThetaInterpolant> cardinal_;
    std::vector<cplx> nodes_;
};

// k generic nodes for Theta_k(chi): pairwise separated and off the
// resonant locus sum(nodes) = phi(chi) + k delta.
std::vector<cplx> generic_nodes(const Theta& th, int k, const Character& chi, Sampler& rng,
                                const std::function<bool(cplx)>& extra_ok = {});

struct MembershipReport {
    double interpolation_residual = 0.0;
    double quasi_periodicity_residual = 0.0;
    double tol = 1e-8;
    bool pass = false;
};

MembershipReport membership_test(const Theta& th, const std::function<cplx(cplx)>& f, int k,
                                 const Character& chi, Sampler& rng, double tol = 1e-8,
                                 int n_qp_points = 8);

// (1/2 pi i) * contour integral of p'/p around a fundamental cell whose
// corner is chosen away from the zeros.
double zero_count(const Theta& th, const EllipticPoly& p, Sampler& rng);

struct DifferenceBetheResult {
    cplx a;
    std::vector<cplx> w;
    double residual = 0.0;
    int iterations = 0;
    EllipticPoly Q() const { return EllipticPoly{a, w, 1.0}; }
};

// Residuals of the Bethe system in the proof form
//   A+(w_i) e^{-gamma a} prod_j theta(w_i - w_j - gamma)
//     + A-(w_i) e^{gamma a} prod_j theta(w_i - w_j + gamma)
std::vector<cplx> difference_bethe_residuals(const Theta& th, const EllipticPoly& A_plus,
                                             const EllipticPoly& A_minus, cplx gamma, cplx a,
                                             const std::vector<cplx>& w);

// Newton over (a, w_1..w_m). The Bethe equations give m conditions on m+1
// unknowns; the extra row pins a to its seed value, which fixes chi(1)
// of the solution.
DifferenceBetheResult solve_difference_bethe(const Theta& th, int k, const EllipticPoly& A_plus,
                                             const EllipticPoly& A_minus, cplx gamma, int m,
                                             cplx seed_a, const std::vector<cplx>& seed_w,
                                             const NewtonOptions& opt = {});

// eps(z) = (A+(z) Q(z - gamma) + A-(z) Q(z + gamma)) / Q(z)
cplx difference_eigenvalue(const Theta& th, const EllipticPoly& A_plus, const EllipticPoly& A_minus,
                           cplx gamma, const EllipticPoly& Q, cplx z);

} // namespace esov
