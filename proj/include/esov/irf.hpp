#pragma once

// Antiperiodic IRF model: Boltzmann weights, the path basis, the transfer
// matrix built from weights and from the difference representation,
// spectral certificates from the quadratic relations, partition functions,
// and the Bethe ansatz for the continuous difference operator.

#include <array>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "esov/params.hpp"
#include "esov/theta_space.hpp"

namespace esov {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// Heights a_1..a_{n+1}, a_{i+1} = a_i - sigma_i, a_1 = sum(sigma) / 2, so
// a_{n+1} = -a_1. Path index: bit (n-1-i) set iff sigma_i = -1.
struct PathState {
    std::vector<int> sigma;
    std::vector<double> a;
    int weight() const;
};

std::vector<PathState> paths(int n);

// W(c,b,a,d|z): R(z, -2 eta d) e[c-d] (x) e[b-c] = sum_a W e[b-a] (x) e[a-d].
// Zero unless c-d, b-c, b-a, a-d are all +-1.
cplx boltzmann_weight(const Theta& th, cplx eta, double c, double b, double a, double d, cplx z);

struct WeightEntry {
    double c, b, a, d;
    cplx W;
};
// Every admissible (c,b,a,d) with d a path height, |d| <= n/2.
std::vector<WeightEntry> boltzmann_weights(const ModelParams& params, cplx z);

// T(z)[I, J] = prod_i W(a_{i+1}, a_i, b_i, b_{i+1} | z - z_i - site_shift)
// with a = path J, b = path I.
MatrixXcd build_T_irf_paths(const ModelParams& params, cplx z, cplx site_shift = 0.0);

// b(z) + c(z) of the difference representation on the 2^n grid with all
// Lambda_i = 1 and lambda = eta h, in path order (sigma_i = 1 - 2 m_i).
MatrixXcd build_T_irf_sov(const ModelParams& params, cplx z);

// Largest |coefficient| of an off-grid read in b(z), c(z).
double sov_off_grid_coefficient(const ModelParams& params, cplx z);

// Blocks [i][j] of the L operator at fixed lambda, path order.
using LBlocks = std::array<std::array<MatrixXcd, 2>, 2>;
// b and c blocks of the difference representation (a, d left empty).
LBlocks L_sov_offdiagonal(const ModelParams& params, cplx z, cplx lambda);
// R_{01}(z - z_1, lambda - 2 eta (h_2 + ... + h_n)) ... R_{0n}(z - z_n, lambda),
// sites at z_i + site_shift.
LBlocks L_paths(const ModelParams& params, cplx z, cplx lambda, cplx site_shift = 0.0);

// Twisted trace tr K L(z, lambda) T^{-2 eta mu} restricted to lambda = eta h,
// i.e. the b and c blocks of L_paths at lambda = eta h(target).
MatrixXcd build_T_irf_rmatrix(const ModelParams& params, cplx z, cplx site_shift = 0.0);

// Weight-preserving G with G kappa(z) L_sov(z, eta h) = L_paths(z, eta h) G
// on the b and c blocks, sites of L_paths at z_i - eta, kappa(z) = 1 / prod theta(z - z_i - eta).
struct IntertwinerFit {
    MatrixXcd G;
    double null_singular = 0.0; // smallest singular value / largest
    double next_singular = 0.0; // second smallest / largest
    double condition = 0.0;     // cond(G)
    int equations = 0;
    int unknowns = 0;
};
IntertwinerFit fit_intertwiner(const ModelParams& params, Sampler& rng, int z_samples = 6);

struct DualReport {
    // |T_paths - T_rmatrix| / |T_paths|: weights against the twisted trace, same basis
    double trace_residual = 0.0;
    // eigenvalues of T_paths(z) against those of T_sov(z) / prod theta(z - z_i - 2 eta)
    // with sites moved to z_i + eta; no basis identification involved
    double spectrum_residual = 0.0;
    // max over z of |G kappa T_sov G^-1 - T_paths(z_i - eta)| / |T_paths|
    double intertwined_residual = 0.0;
    // |T_paths(z) - T_sov(z)| / |T_paths(z)| with no identification
    double literal_residual = 0.0;
    double off_grid = 0.0;
    IntertwinerFit fit;
};
DualReport dual_check(const ModelParams& params, const std::vector<cplx>& zs, Sampler& rng);

// max over pairs of |[T(z), T(w)]|_F / (|T(z)|_F |T(w)|_F), both constructions.
struct CommutingReport {
    double sov = 0.0;
    double paths = 0.0;
};
CommutingReport commuting_family(const ModelParams& params, const std::vector<std::pair<cplx, cplx>>& pairs);

// chi_0(1) = (-1)^n, chi_0(tau) = (-1)^n exp(2 pi i sum z_k)
Character irf_character(const ModelParams& params);

struct SpectralCertificate {
    cplx eigenvalue;            // of T(z0)
    VectorXcd v;                // eigensolver vector
    std::vector<cplx> eps_nodes;// eps at the interpolation nodes
    MembershipReport membership;
    double character_residual = 0.0; // eps(z+1), eps(z+tau) laws, relative
    std::vector<double> quadratic;   // |eps(z_i - eta) eps(z_i + eta) - prod| / scale
    std::vector<double> second_line; // prod theta(z_k - z_i - 2eta) Q_i(+) - eps(z_i + eta) Q_i(-), relative
    std::vector<std::array<cplx, 2>> Q; // (Q_i(-z_i - eta), Q_i(-z_i + eta))
    VectorXcd u;                 // prod_i Q_i(x_i) on the grid, path order
    double angle = 0.0;          // sin of the angle between u and the eigenspace
    int cluster_size = 1;
    bool angle_checked = true;   // false for degenerate clusters
    double impostor_quadratic = 0.0; // quadratic residual after perturbing one sample
    bool pass = false;
};

struct SpectrumOptions {
    double tol = 1e-8;
    double angle_tol = 1e-6;
    double gap_tol = 1e-7;
    double impostor_factor = 1e-3;
};

struct SpectrumReport {
    cplx z0;
    std::vector<cplx> nodes;
    std::vector<SpectralCertificate> certificates;
    double span_singular = 0.0; // smallest singular value of the normalized u stack
    double min_gap = 0.0;       // smallest relative eigenvalue gap
    bool pass = false;
};

// eps(z) = (T(z) v)_k / v_k with k the largest component of v.
cplx rayleigh_eigenvalue(const ModelParams& params, const VectorXcd& v, cplx z);
// Same for every column of V at once; one transfer matrix per point.
VectorXcd rayleigh_eigenvalues(const ModelParams& params, const MatrixXcd& V, cplx z);

SpectrumReport certify_spectrum(const ModelParams& params, cplx z0, Sampler& rng,
                                const SpectrumOptions& opt = {});

enum class TransferBuild { weights, difference };

// tr T(w_1) ... T(w_m)
cplx partition_function(const ModelParams& params, const std::vector<cplx>& rows,
                        TransferBuild build = TransferBuild::weights);

// T(-z) u(x) from the difference-operator formula with
// lambda = -sum(x_k + z_k), for any u on C^n.
cplx apply_T_minus(const ModelParams& params, cplx z, const std::function<cplx(const std::vector<cplx>&)>& u,
                   const std::vector<cplx>& x);

struct ContinuousBetheReport {
    DifferenceBetheResult solution;
    Character chi;              // character_of(Q)
    Character chi_formula;      // (-1)^m e^a, (-1)^m e^{a tau + 2 pi i sum w}
    double character_residual = 0.0;
    double eigen_residual = 0.0; // max |T(-z)u(x) - eps(-z) u(x)| / scale at random x, z
    // max |A+(w_j) Q(w_j - 2eta) + A-(w_j) Q(w_j + 2eta)| / (max|A+-(w_j)| max|Q(w_j -+ 2eta)|)
    double bethe_residual = 0.0;
    // a root on a zero of A+- or two roots 2 eta apart: both terms vanish
    bool singular_string = false;
    int m = 0;
};

// Bethe eigenfunction u = prod Q(x_i) for sum Lambda = 2m, with Newton
// started from seed_a, seed_w (multistart from rng when seed_w is empty;
// multistart skips singular strings).
ContinuousBetheReport continuous_bethe(const ModelParams& params, Sampler& rng, cplx seed_a,
                                       std::vector<cplx> seed_w = {}, int samples = 8);

} // namespace esov
