#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "esov/theta.hpp"

namespace esov {

struct Site {
    cplx z;
    int Lambda;
};

// Shared model description: lattice, eta, marked points with weights.
struct ModelParams {
    Theta th;
    cplx eta;
    std::vector<Site> sites;

    ModelParams(Theta th_, cplx eta_, std::vector<Site> sites_);

    int n() const { return static_cast<int>(sites.size()); }
    double rho() const { return th.options().rho; }
    int total_weight() const;

    // z_i != z_j mod lattice, eta off the lattice.
    void validate() const;
    // Additionally z_i != z_j + 2 eta l, l in {0, +-1}.
    void validate_irf() const;
};

// Seeded sampler of "generic" points. Every random draw in the library
// goes through one of these so runs are reproducible from the seed.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi)
    {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(gen_);
    }
    // Uniform in the fundamental cell x + y*tau, x, y in [lo, hi).
    cplx cell_point(cplx tau, double lo = 0.0, double hi = 1.0)
    {
        const double x = uniform(lo, hi);
        const double y = uniform(lo, hi);
        return x + y * tau;
    }
    cplx box(double re_lo, double re_hi, double im_lo, double im_hi)
    {
        const double x = uniform(re_lo, re_hi);
        const double y = uniform(im_lo, im_hi);
        return {x, y};
    }
    cplx gaussian()
    {
        std::normal_distribution<double> d(0.0, 1.0);
        const double x = d(gen_);
        const double y = d(gen_);
        return {x, y};
    }
    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

} // namespace esov
