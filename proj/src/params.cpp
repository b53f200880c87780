#include "esov/params.hpp"

#include <sstream>

#include "esov/error.hpp"

namespace esov {

ModelParams::ModelParams(Theta th_, cplx eta_, std::vector<Site> sites_)
    : th(std::move(th_)), eta(eta_), sites(std::move(sites_))
{
}

int ModelParams::total_weight() const
{
    int s = 0;
    for (const auto& site : sites)
        s += site.Lambda;
    return s;
}

void ModelParams::validate() const
{
    if (sites.empty())
        throw ConfigError("Model invariant violated: no sites");
    for (const auto& s : sites)
        if (s.Lambda < 0)
            throw ConfigError("Model invariant violated: negative highest weight");
    if (th.lattice_distance(eta) < rho())
        throw ConfigError("Model invariant violated: eta lies on the lattice");
    for (int i = 0; i < n(); ++i)
        for (int j = i + 1; j < n(); ++j)
            if (th.lattice_distance(sites[i].z - sites[j].z) < rho()) {
                std::ostringstream os;
                os << "Model invariant violated: z_" << i + 1 << " = z_" << j + 1 << " mod lattice";
                throw ConfigError(os.str());
            }
}

void ModelParams::validate_irf() const
{
    validate();
    for (int i = 0; i < n(); ++i)
        for (int j = 0; j < n(); ++j) {
            if (i == j)
                continue;
            for (int l = -1; l <= 1; ++l)
                if (th.lattice_distance(sites[i].z - sites[j].z - 2.0 * eta * double(l)) < rho()) {
                    std::ostringstream os;
                    os << "Model invariant violated: z_" << i + 1 << " = z_" << j + 1 << " + "
                       << 2 * l << " eta mod lattice";
                    throw ConfigError(os.str());
                }
        }
}

} // namespace esov
