#pragma once

#include <functional>

#include <Eigen/Dense>

#include "esov/jet.hpp"

namespace esov {

using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 200;
    int max_halvings = 20;
    // Jacobian with reciprocal condition below this counts as singular.
    double singular_rcond = 1e-14;
};

struct NewtonResult {
    VecC x;
    double residual = 0.0;
    int iterations = 0;
};

// Damped Newton for holomorphic square systems F(x) = 0 with analytic
// Jacobian. Steps are halved until the residual norm decreases.
// Throws SolverError on a singular Jacobian or when the cap is hit.
NewtonResult damped_newton(const std::function<VecC(const VecC&)>& F,
                           const std::function<MatC(const VecC&)>& J,
                           VecC x0, const NewtonOptions& opt = {});

} // namespace esov
