#pragma once

// Elliptic Gaudin model: sl2 representations L_Lambda, the fields
// h(z), e_lambda(z), f_lambda(z), the generating operator S(z), the
// Hamiltonians H_0..H_n as lambda-differential operators on M[0]-valued
// functions, and Bethe vectors.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "esov/jet.hpp"
#include "esov/newton.hpp"
#include "esov/params.hpp"

namespace esov {

using MatJet = Jet<Eigen::MatrixXcd>;
using VecJet = Jet<Eigen::VectorXcd>;

// Basis v_0..v_Lambda: f v_k = v_{k+1}, h v_k = (Lambda - 2k) v_k,
// e v_k = k (Lambda - k + 1) v_{k-1}.
struct Sl2Rep {
    int Lambda;
    Eigen::MatrixXi e, f, h;

    explicit Sl2Rep(int Lambda);

    // [e,f] = h, [h,e] = 2e, [h,f] = -2f, checked in integers
    bool brackets_exact() const;
};

// Zero weight subspace of the tensor product, as multi-indices (k_1..k_n).
struct ZeroWeightSpace {
    std::vector<std::vector<int>> index;
    std::vector<int> full_position; // position of each index in the tensor basis
    int m = 0;                      // sum Lambda / 2

    int dimension() const { return static_cast<int>(index.size()); }
};

// sum_{d <= order} c_d(lambda) d^d/dlambda^d on M[0]-valued functions.
// coeffs(lambda0, degree) returns the jets of c_0..c_order at lambda0.
struct LambdaDiffOp {
    int order = 0;
    std::function<std::vector<MatJet>(cplx, int)> coeffs;

    // u is the jet of u(lambda0 + t); the result has degree deg(u) - order.
    VecJet apply(const VecJet& u, cplx lambda0) const;
};

struct FieldOps {
    Eigen::MatrixXcd h, e, f;
};

class GaudinModel {
public:
    // Throws ConfigError when sum Lambda is odd (M[0] = 0).
    explicit GaudinModel(const ModelParams& params);

    const ModelParams& params() const { return params_; }
    const ZeroWeightSpace& zero_weight() const { return zw_; }
    int full_dimension() const { return static_cast<int>(E_[0].rows()); }
    const Eigen::MatrixXcd& E(int i) const { return E_[i]; }
    const Eigen::MatrixXcd& F(int i) const { return F_[i]; }
    const Eigen::MatrixXcd& H(int i) const { return H_[i]; }
    // columns: zero weight basis vectors inside the tensor product
    const Eigen::MatrixXcd& projector() const { return P_; }

    // On the whole tensor product.
    FieldOps field_ops(cplx z, cplx lambda) const;
    // h'(z) = -sum wp_bar(z - z_i) h^(i)
    Eigen::MatrixXcd h_prime(cplx z) const;

    // H_0 for j = 0, H_j for j = 1..n.
    LambdaDiffOp hamiltonian(int j) const;
    std::vector<LambdaDiffOp> hamiltonians() const;
    // (d - h/2)^2 + weight (e f + f e). weight 1/2 makes the partial
    // fraction decomposition hold; weight 1 is the printed normalization.
    LambdaDiffOp S(cplx z, double weight = 0.5) const;
    // (d - h/2)^2 + 2 weight f e - weight h'
    LambdaDiffOp S_alternative(cplx z, double weight = 0.5) const;
    // c_k = Lambda_k (Lambda_k + 2) / 2
    double casimir(int k) const;

    // Coefficient matrices of H_j at lambda, restricted to M[0].
    std::vector<Eigen::MatrixXcd> hamiltonian_coefficients(int j, cplx lambda) const;
    // diag(exp(i pi sum_j z_j h^(j))) restricted to M[0]
    Eigen::VectorXcd quasi_periodicity_factor() const;

private:
    Eigen::MatrixXcd restrict(const Eigen::MatrixXcd& m) const;
    MatJet restrict(const MatJet& m) const;
    // e_lambda(z), f_lambda(z) as jets in lambda, full space
    MatJet e_jet(cplx z, cplx lambda0, int degree) const;
    MatJet f_jet(cplx z, cplx lambda0, int degree) const;
    Eigen::MatrixXcd h_field(cplx z) const;

    ModelParams params_;
    std::vector<Eigen::MatrixXcd> E_, F_, H_;
    ZeroWeightSpace zw_;
    Eigen::MatrixXcd P_;
};

// A random M[0]-valued jet with normalized gaussian coefficients.
VecJet random_vec_jet(int dim, int degree, Sampler& rng);

// max_k |a_k - b_k| over the common degree.
double jet_distance(const VecJet& a, const VecJet& b);
double jet_norm(const VecJet& a);

struct CommutatorReport {
    double max_residual = 0.0; // relative to |H_i H_j u|
    double sum_residual = 0.0; // |sum_{j>=1} H_j u| / |u|
};

// [H_i, H_j] on random jets for every pair, at the given lambda samples.
CommutatorReport hamiltonian_commutators(const GaudinModel& model, const std::vector<cplx>& lambdas,
                                         Sampler& rng, int degree = 6);

// S(z) - sum (c_k/2) wp_bar(z - z_k) - sum zeta_bar(z - z_k) H_k - H_0 on a random jet.
double decomposition_residual(const GaudinModel& model, cplx z, cplx lambda0, Sampler& rng,
                              double weight = 0.5, int degree = 6);
// [S(z), S(w)] on a random jet, relative to |S(z) S(w) u|.
double s_commutator_residual(const GaudinModel& model, cplx z, cplx w, cplx lambda0, Sampler& rng,
                             double weight = 0.5, int degree = 6);

// Bethe equations
//   sum_l Lambda_l zeta_bar(w_j - z_l) - p sum_{k != j} zeta_bar(w_j - w_k) = 2c
// with pair weight p. Evaluating the separated equation at a zero of
// e^{cy} prod theta(y - w_k) gives p = 2; the printed form has p = 1.
// The two agree for a single root.
constexpr double kBethePairWeight = 2.0;
constexpr double kBethePairWeightPrinted = 1.0;

std::vector<cplx> gaudin_bethe_residuals(const ModelParams& params, cplx c, const std::vector<cplx>& w,
                                         double pair_weight = kBethePairWeight);

struct GaudinBetheResult {
    cplx c;
    std::vector<cplx> w;
    double residual = 0.0;
    int iterations = 0;
};

// m = sum Lambda / 2 equations in m + 1 unknowns: c stays at its seed and
// Newton runs over w.
GaudinBetheResult solve_gaudin_bethe(const ModelParams& params, cplx seed_c,
                                     const std::vector<cplx>& seed_w, const NewtonOptions& opt = {},
                                     double pair_weight = kBethePairWeight);
// Seeds drawn from rng; retries up to `attempts` times.
GaudinBetheResult solve_gaudin_bethe(const ModelParams& params, Sampler& rng, int attempts = 20,
                                     const NewtonOptions& opt = {},
                                     double pair_weight = kBethePairWeight);

struct BetheVectorReport {
    std::vector<cplx> eps;        // eps_0..eps_n at the first sample
    double eigen_residual = 0.0;  // max over j, lambda of |H_j u - eps_j u| / |u|
    double eps_spread = 0.0;      // variation of the extracted eps_j across lambda samples
    double eps_sum = 0.0;         // |eps_1 + ... + eps_n|
    double s_residual = 0.0;      // |S(z) u - q(z) u| / |u| at a few z
    double u_norm = 0.0;
};

// u(lambda) = exp(c lambda) f_lambda(w_1) ... f_lambda(w_m) v_0 as a jet.
VecJet bethe_vector_jet(const GaudinModel& model, cplx c, const std::vector<cplx>& w, cplx lambda0,
                        int degree);

// Throws DegenerateVectorError when u vanishes.
BetheVectorReport bethe_eigenvector(const GaudinModel& model, cplx c, const std::vector<cplx>& w,
                                    const std::vector<cplx>& lambdas, const std::vector<cplx>& zs,
                                    int degree = 4);

} // namespace esov
