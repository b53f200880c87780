#include "esov/newton.hpp"

#include <sstream>

#include "esov/error.hpp"

namespace esov {

NewtonResult damped_newton(const std::function<VecC(const VecC&)>& F,
                           const std::function<MatC(const VecC&)>& J,
                           VecC x0, const NewtonOptions& opt)
{
    VecC x = std::move(x0);
    VecC f = F(x);
    double r = f.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < opt.max_iter; ++it) {
        if (r <= opt.tol)
            return {x, r, it};
        const MatC jac = J(x);
        Eigen::FullPivLU<MatC> lu(jac);
        if (lu.rcond() < opt.singular_rcond) {
            std::ostringstream os;
            os << "Newton: singular Jacobian at iteration " << it << " (rcond " << lu.rcond() << ")";
            throw SolverError(os.str());
        }
        const VecC step = lu.solve(f);
        double t = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opt.max_halvings; ++h) {
            const VecC trial = x - t * step;
            const VecC ft = F(trial);
            const double rt = ft.lpNorm<Eigen::Infinity>();
            if (std::isfinite(rt) && rt < r) {
                x = trial;
                f = ft;
                r = rt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            std::ostringstream os;
            os << "Newton: no decrease after " << opt.max_halvings << " halvings (residual " << r << ")";
            throw SolverError(os.str());
        }
    }
    if (r <= opt.tol)
        return {x, r, opt.max_iter};
    std::ostringstream os;
    os << "Newton: no convergence in " << opt.max_iter << " iterations (residual " << r << ")";
    throw SolverError(os.str());
}

} // namespace esov
