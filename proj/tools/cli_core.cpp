#include "cli_core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "esov/eqg.hpp"
#include "esov/error.hpp"
#include "esov/gaudin.hpp"
#include "esov/irf.hpp"
#include "esov/theta_space.hpp"

namespace esov::cli {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

[[noreturn]] void schema_error(const std::string& msg) { throw ConfigError("Schema violation: " + msg); }

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed)
{
    if (!j.is_object())
        schema_error(where + " must be an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k))
            schema_error("unknown key '" + k + "' in " + where);
}

int get_int(const json& block, const char* key, int dflt, int lo, const std::string& where)
{
    if (!block.contains(key))
        return dflt;
    const json& v = block.at(key);
    if (!v.is_number_integer() || v.get<long long>() < lo)
        schema_error(where + "." + key + " must be an integer >= " + std::to_string(lo));
    return v.get<int>();
}

double get_double(const json& block, const char* key, double dflt, const std::string& where)
{
    if (!block.contains(key))
        return dflt;
    const json& v = block.at(key);
    if (!v.is_number())
        schema_error(where + "." + key + " must be a number");
    return v.get<double>();
}

std::optional<cplx> get_complex(const json& block, const char* key, const std::string& where)
{
    if (!block.contains(key))
        return std::nullopt;
    return parse_complex(block.at(key), where + "." + key);
}

std::vector<cplx> get_complex_list(const json& block, const char* key, const std::string& where)
{
    std::vector<cplx> out;
    if (!block.contains(key))
        return out;
    const json& v = block.at(key);
    if (!v.is_array())
        schema_error(where + "." + key + " must be a list of [re, im]");
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(parse_complex(v[i], where + "." + key + "[" + std::to_string(i) + "]"));
    return out;
}

json matrix_json(const MatrixXcd& M)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            row.push_back(complex_json(M(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const std::vector<cplx>& v)
{
    json out = json::array();
    for (const cplx x : v)
        out.push_back(complex_json(x));
    return out;
}

json vector_json(const VectorXcd& v) { return vector_json(std::vector<cplx>(v.data(), v.data() + v.size())); }

double rel_diff(cplx a, cplx b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

template <class C>
double max_of(const C& c)
{
    double m = 0.0;
    for (double x : c)
        m = std::max(m, x);
    return m;
}

std::vector<cplx> random_points(Sampler& rng, cplx tau, int count, double lo = 0.05, double hi = 0.95)
{
    std::vector<cplx> out;
    for (int i = 0; i < count; ++i)
        out.push_back(rng.cell_point(tau, lo, hi));
    return out;
}

// ---------------------------------------------------------------- theta

TaskOutput theta_eval(const ModelConfig& cfg)
{
    const ModelParams p = cfg.params();
    const Theta& th = p.th;
    const cplx tau = th.tau();
    const double tol = cfg.tol.residual_tol;
    Sampler rng(cfg.seed);
    TaskOutput out;

    std::vector<cplx> pts = get_complex_list(cfg.theta, "points", "theta");
    const int nrand = get_int(cfg.theta, "random_points", 100, 1, "theta");
    const double box = 2.0 * tau.imag();
    std::vector<cplx> samples;
    for (int i = 0; i < nrand; ++i)
        samples.push_back(rng.box(-1.0, 1.0, -box, box));

    double qp1 = 0.0, qpt = 0.0, odd = 0.0, jet = 0.0;
    for (const cplx z : samples) {
        const auto d = th.derivatives(z, 3);
        qp1 = std::max(qp1, std::abs(th.theta(z + 1.0) + d[0]) / std::abs(d[0]));
        const cplx mult = std::exp(-kI * kPi * tau - 2.0 * kPi * kI * z);
        const cplx zt = th.theta(z + tau);
        qpt = std::max(qpt, std::abs(zt + mult * d[0]) / std::max(std::abs(zt), std::abs(d[0])));
        odd = std::max(odd, std::abs(th.theta(-z) + d[0]) / std::abs(d[0]));
        const ScalarJet J = th.jet(z, 3);
        double fact = 1.0;
        for (int k = 0; k <= 3; ++k) {
            if (k > 0)
                fact *= k;
            jet = std::max(jet, std::abs(fact * J[k] - th.theta(z, k)) / std::max(std::abs(d[k]), 1e-300));
        }
    }
    out.checks.push_back({"quasi_periodicity_1", qp1, tol});
    out.checks.push_back({"quasi_periodicity_tau", qpt, tol});
    out.checks.push_back({"oddness", odd, tol});
    out.checks.push_back({"derivative_vs_jet", jet, tol});

    if (pts.empty())
        pts = samples;
    json values = json::array();
    CsvTable csv{"theta_eval.csv",
                 {"re_z", "im_z", "re_theta", "im_theta", "re_theta1", "im_theta1", "re_theta2", "im_theta2",
                  "re_theta3", "im_theta3"},
                 {}};
    for (const cplx z : pts) {
        const auto d = th.derivatives(z, 3);
        json e;
        e["z"] = complex_json(z);
        e["theta"] = vector_json(d);
        if (th.lattice_distance(z) >= p.rho()) {
            e["zeta_bar"] = complex_json(th.zeta_bar(z));
            e["wp_bar"] = complex_json(th.wp_bar(z));
        } else {
            e["zeta_bar"] = nullptr;
            e["wp_bar"] = nullptr;
        }
        values.push_back(std::move(e));
        std::vector<double> row{z.real(), z.imag()};
        for (const cplx v : d) {
            row.push_back(v.real());
            row.push_back(v.imag());
        }
        csv.rows.push_back(std::move(row));
    }
    out.results["theta_prime_0"] = complex_json(th.theta_prime0());
    out.results["values"] = std::move(values);
    out.csv.push_back(std::move(csv));
    return out;
}

// ---------------------------------------------------------------- gaudin

struct GaudinSettings {
    int lambda_samples, z_samples, degree;
};

GaudinSettings gaudin_settings(const ModelConfig& cfg)
{
    return {get_int(cfg.gaudin, "lambda_samples", 3, 1, "gaudin"), get_int(cfg.gaudin, "z_samples", 5, 1, "gaudin"),
            get_int(cfg.gaudin, "jet_degree", 6, 3, "gaudin")};
}

TaskOutput gaudin_check(const ModelConfig& cfg)
{
    const ModelParams p = cfg.params();
    const GaudinModel model(p);
    const GaudinSettings s = gaudin_settings(cfg);
    const cplx tau = p.th.tau();
    const double tol = cfg.tol.residual_tol;
    Sampler rng(cfg.seed);
    TaskOutput out;

    const auto lambdas = random_points(rng, tau, s.lambda_samples, 0.1, 0.9);
    const CommutatorReport cr = hamiltonian_commutators(model, lambdas, rng, s.degree);
    out.checks.push_back({"hamiltonian_commutators", cr.max_residual, tol});
    out.checks.push_back({"sum_of_hamiltonians", cr.sum_residual, tol});

    double dec = 0.0, dec_printed = 0.0, scomm = 0.0, alt = 0.0;
    const auto zs = random_points(rng, tau, s.z_samples);
    for (const cplx z : zs) {
        const cplx l0 = rng.cell_point(tau, 0.1, 0.9);
        dec = std::max(dec, decomposition_residual(model, z, l0, rng, 0.5, s.degree));
        dec_printed = std::max(dec_printed, decomposition_residual(model, z, l0, rng, 1.0, s.degree));
        const cplx w = rng.cell_point(tau, 0.05, 0.95);
        scomm = std::max(scomm, s_commutator_residual(model, z, w, l0, rng, 0.5, s.degree));
        const VecJet u = random_vec_jet(model.zero_weight().dimension(), s.degree, rng);
        const VecJet a = model.S(z).apply(u, l0), b = model.S_alternative(z).apply(u, l0);
        alt = std::max(alt, jet_distance(a, b) / std::max(jet_norm(a), 1e-300));
    }
    out.checks.push_back({"decomposition", dec, tol});
    out.checks.push_back({"s_commutation", scomm, tol});
    out.checks.push_back({"alternative_form", alt, tol});

    out.results["dimension"] = model.zero_weight().dimension();
    json cas = json::array();
    for (int k = 0; k < p.n(); ++k)
        cas.push_back(model.casimir(k));
    out.results["casimirs"] = cas;
    out.results["lambda_samples"] = vector_json(lambdas);
    // informational: the (e f + f e) weight 1 normalization
    out.results["decomposition_weight_one"] = dec_printed;
    return out;
}

TaskOutput gaudin_bethe(const ModelConfig& cfg)
{
    const ModelParams p = cfg.params();
    const GaudinModel model(p);
    const cplx tau = p.th.tau();
    const double tol = cfg.tol.residual_tol;
    Sampler rng(cfg.seed);
    TaskOutput out;

    const json bethe = cfg.gaudin.value("bethe", json::object());
    const double pw = get_double(bethe, "pair_weight", kBethePairWeight, "gaudin.bethe");
    NewtonOptions opt;
    GaudinBetheResult sol;
    const auto seed_c = get_complex(bethe, "c", "gaudin.bethe");
    const auto seed_w = get_complex_list(bethe, "w", "gaudin.bethe");
    if (seed_c && !seed_w.empty()) {
        if (static_cast<int>(seed_w.size()) != model.zero_weight().m)
            throw ConfigError("Schema violation: gaudin.bethe.w needs sum(Lambda)/2 = " +
                              std::to_string(model.zero_weight().m) + " roots");
        sol = solve_gaudin_bethe(p, *seed_c, seed_w, opt, pw);
    } else {
        sol = solve_gaudin_bethe(p, rng, get_int(bethe, "attempts", 20, 1, "gaudin.bethe"), opt, pw);
    }
    out.checks.push_back({"bethe_equations", sol.residual, std::max(tol, opt.tol)});

    const auto lambdas = random_points(rng, tau, 5, 0.1, 0.9);
    const auto zs = random_points(rng, tau, 3);
    const BetheVectorReport r = bethe_eigenvector(model, sol.c, sol.w, lambdas, zs);
    out.checks.push_back({"eigen_residual", r.eigen_residual, tol});
    out.checks.push_back({"eigenvalue_sum", r.eps_sum, tol});
    out.checks.push_back({"eigenvalue_lambda_independence", r.eps_spread, tol});
    out.checks.push_back({"generating_operator_eigen_residual", r.s_residual, tol});

    out.results["c"] = complex_json(sol.c);
    out.results["w"] = vector_json(sol.w);
    out.results["iterations"] = sol.iterations;
    out.results["pair_weight"] = pw;
    out.results["eigenvalues"] = vector_json(r.eps);
    out.results["vector_norm"] = r.u_norm;
    return out;
}

// ---------------------------------------------------------------- eqg

struct EqgPoints {
    cplx z, w;
    std::vector<cplx> lambdas;
};

EqgPoints eqg_points(const ModelConfig& cfg, Sampler& rng, cplx tau)
{
    EqgPoints e;
    e.z = get_complex(cfg.eqg, "z", "eqg").value_or(rng.cell_point(tau, 0.05, 0.95));
    e.w = get_complex(cfg.eqg, "w", "eqg").value_or(rng.cell_point(tau, 0.05, 0.95));
    e.lambdas = get_complex_list(cfg.eqg, "lambda", "eqg");
    if (e.lambdas.empty())
        e.lambdas = random_points(rng, tau, get_int(cfg.eqg, "lambda_samples", 5, 1, "eqg"), 0.1, 0.9);
    return e;
}

double op_vs_map(const ShiftOperator& op, const std::map<ShiftKey, cplx>& want, cplx l)
{
    const auto got = op.coefficients(l);
    double scale = 0.0, diff = 0.0;
    for (const auto& [k, v] : want)
        scale = std::max(scale, std::abs(v));
    for (const auto& [k, v] : want) {
        auto it = got.find(k);
        diff = std::max(diff, std::abs(v - (it == got.end() ? cplx(0.0) : it->second)));
    }
    for (const auto& [k, v] : got)
        if (!want.count(k))
            diff = std::max(diff, std::abs(v));
    return diff / std::max(scale, 1e-300);
}

TaskOutput eqg_rll_check(const ModelConfig& cfg)
{
    const ModelParams p = cfg.params();
    const Theta& th = p.th;
    const cplx tau = th.tau(), eta = p.eta;
    const double tol = cfg.tol.residual_tol;
    Sampler rng(cfg.seed);
    const DifferenceModule mod(p);
    TaskOutput out;

    const EqgPoints pts = eqg_points(cfg, rng, tau);
    const RllReport rll = rll_residual(mod, pts.z, pts.w, pts.lambdas);
    out.checks.push_back({"rll", rll.max_residual, tol});
    json rel = json::array();
    for (int q = 0; q < 16; ++q)
        rel.push_back({{"relation", {q >> 3, (q >> 2) & 1, (q >> 1) & 1, q & 1}}, {"residual", rll.residual[q]}});
    out.results["rll_relations"] = std::move(rel);

    const int nq = get_int(cfg.eqg, "qybe_samples", 20, 1, "eqg");
    double qybe = 0.0, kt = 0.0, ab = 0.0;
    for (int i = 0; i < nq; ++i) {
        const cplx z = rng.cell_point(tau), w = rng.cell_point(tau), l = rng.cell_point(tau);
        qybe = std::max(qybe, qybe_residual(th, eta, z, w, l));
        kt = std::max(kt, ktwist_residual(th, eta, z, l));
        ab = std::max(ab, ab_exchange_scalar_residual(th, eta, z, w, l, rng.cell_point(tau)));
    }
    out.checks.push_back({"dynamical_yang_baxter", qybe, tol});
    out.checks.push_back({"k_twist", kt, std::min(tol, 1e-12)});
    out.checks.push_back({"ab_exchange_identity", ab, tol});

    double res = 0.0;
    int nontrivial = 0;
    for (int t = 0; t < mod.grid().size(); ++t)
        for (int i = 0; i < p.n(); ++i) {
            const auto r = residue_sum(mod, t, i);
            res = std::max(res, r.relative());
            if (r.scale > 1e-6 * r.magnitude)
                ++nontrivial;
        }
    out.checks.push_back({"residue_sum", res, std::min(tol, 1e-10)});
    out.results["residue_sum_nontrivial"] = nontrivial;

    // a(z + 2 eta) d(z) - c(z + 2 eta) b(z) = theta(lambda - 2 eta h) / theta(lambda) Det(z)
    const cplx z = pts.z;
    const auto lhs = mod.a(z + 2.0 * eta).compose(mod.d(z)) - mod.c(z + 2.0 * eta).compose(mod.b(z));
    const Grid& g = mod.grid();
    const cplx detz = mod.det(z);
    const auto rhs = mod.multiply(
        [&](cplx l, int t) { return th.theta(l - 2.0 * eta * double(g.h(t))) / th.theta(l) * detz; });
    double det = 0.0;
    for (const cplx l : pts.lambdas)
        det = std::max(det, coefficient_residual(lhs, rhs, l));
    out.checks.push_back({"determinant_relation", det, tol});

    if (p.n() == 1) {
        const auto L = mod.L(z);
        double worst = 0.0;
        json per = json::object();
        const char* names[4] = {"a", "b", "c", "d"};
        for (int which = 0; which < 4; ++which) {
            double r = 0.0;
            for (const cplx l : pts.lambdas)
                r = std::max(r, op_vs_map(L[which / 2][which % 2], n1_example(mod, which, z, l), l));
            per[names[which]] = r;
            worst = std::max(worst, r);
        }
        out.checks.push_back({"single_site_formulas", worst, std::min(tol, 1e-10)});
        out.results["single_site_formulas"] = per;
    }
    out.results["z"] = complex_json(pts.z);
    out.results["w"] = complex_json(pts.w);
    out.results["lambda_samples"] = vector_json(pts.lambdas);
    out.results["grid_size"] = mod.grid().size();
    return out;
}

TaskOutput eqg_hw_check(const ModelConfig& cfg)
{
    const ModelParams p = cfg.params();
    const cplx tau = p.th.tau();
    const double tol = cfg.tol.residual_tol;
    Sampler rng(cfg.seed);
    const DifferenceModule mod(p);
    TaskOutput out;

    const EqgPoints pts = eqg_points(cfg, rng, tau);
    double cann = 0.0, ar = 0.0, dr = 0.0, nr = 0.0, hr = 0.0;
    json samples = json::array();
    for (const cplx l : pts.lambdas) {
        const auto r = highest_weight_check(mod, pts.z, l);
        cann = std::max(cann, r.c_annihilation);
        ar = std::max(ar, r.a_eigen_residual);
        dr = std::max(dr, r.d_eigen_residual);
        nr = std::max(nr, r.normalized_residual);
        hr = std::max(hr, double(std::abs(r.h_value - r.expected_h)));
        samples.push_back({{"lambda", complex_json(l)},
                           {"A", complex_json(r.A)},
                           {"D", complex_json(r.D)},
                           {"D_bar", complex_json(r.Dbar)},
                           {"h", r.h_value}});
    }
    out.checks.push_back({"c_annihilates", cann, 1e-12});
    out.checks.push_back({"a_eigenvalue", ar, std::min(tol, 1e-10)});
    out.checks.push_back({"d_eigenvalue", dr, std::min(tol, 1e-10)});
    out.checks.push_back({"normalized_eigenvalues", nr, std::min(tol, 1e-10)});
    out.checks.push_back({"highest_weight", hr, 0.0});
    out.results["z"] = complex_json(pts.z);
    out.results["samples"] = std::move(samples);
    return out;
}

// ---------------------------------------------------------------- irf

cplx irf_z0(const ModelConfig& cfg, Sampler& rng, cplx tau)
{
    return get_complex(cfg.irf, "z0", "irf").value_or(rng.cell_point(tau, 0.05, 0.95));
}

TaskOutput irf_build(const ModelConfig& cfg)
{
    const ModelParams p = cfg.params();
    const cplx tau = p.th.tau();
    const double tol = cfg.tol.residual_tol;
    Sampler rng(cfg.seed);
    TaskOutput out;

    const cplx z0 = irf_z0(cfg, rng, tau);
    const MatrixXcd Tp = build_T_irf_paths(p, z0);
    const MatrixXcd Ts = build_T_irf_sov(p, z0);

    const auto zs = random_points(rng, tau, get_int(cfg.irf, "z_samples", 5, 1, "irf"));
    const DualReport dual = dual_check(p, zs, rng);
    out.checks.push_back({"weights_vs_twisted_trace", dual.trace_residual, tol});
    out.checks.push_back({"weights_vs_difference_spectrum", dual.spectrum_residual, tol});
    out.checks.push_back({"weights_vs_difference_intertwined", dual.intertwined_residual, tol});
    out.checks.push_back({"difference_off_grid", dual.off_grid, tol});

    std::vector<std::pair<cplx, cplx>> pairs;
    const int npairs = get_int(cfg.irf, "commuting_pairs", 10, 1, "irf");
    for (int i = 0; i < npairs; ++i)
        pairs.emplace_back(rng.cell_point(tau), rng.cell_point(tau));
    const CommutingReport cr = commuting_family(p, pairs);
    out.checks.push_back({"commuting_difference", cr.sov, tol});
    out.checks.push_back({"commuting_weights", cr.paths, tol});

    double wn = 0.0;
    const cplx zw = rng.cell_point(tau);
    for (double l = -0.5 * p.n(); l <= 0.5 * p.n() + 1e-9; l += 1.0) {
        for (const auto& [c, b, a, d] : {std::array<double, 4>{l + 1, l + 2, l + 1, l},
                                         std::array<double, 4>{l - 1, l - 2, l - 1, l}})
            wn = std::max(wn, std::abs(boltzmann_weight(p.th, p.eta, c, b, a, d, zw) - 1.0));
    }
    out.checks.push_back({"weight_normalization", wn, tol});

    json fit;
    fit["null_singular"] = dual.fit.null_singular;
    fit["next_singular"] = dual.fit.next_singular;
    fit["condition"] = dual.fit.condition;
    fit["equations"] = dual.fit.equations;
    fit["unknowns"] = dual.fit.unknowns;
    out.results["intertwiner"] = std::move(fit);
    // informational: grid point = path with no normalization or site shift
    out.results["unidentified_residual"] = dual.literal_residual;
    out.results["z0"] = complex_json(z0);
    out.results["T_weights"] = matrix_json(Tp);
    out.results["T_difference"] = matrix_json(Ts);
    json paths_json = json::array();
    for (const auto& ps : paths(p.n()))
        paths_json.push_back(ps.a);
    out.results["paths"] = std::move(paths_json);
    return out;
}

TaskOutput irf_spectrum(const ModelConfig& cfg)
{
    const ModelParams p = cfg.params();
    const cplx tau = p.th.tau();
    const double tol = cfg.tol.residual_tol;
    Sampler rng(cfg.seed);
    TaskOutput out;

    const cplx z0 = irf_z0(cfg, rng, tau);
    SpectrumOptions opt;
    opt.tol = tol;
    opt.gap_tol = cfg.tol.gap_tol;
    const SpectrumReport rep = certify_spectrum(p, z0, rng, opt);
    const int N = 1 << p.n();

    double memb = 0.0, chr = 0.0, quad = 0.0, second = 0.0, angle = 0.0, impostor = 1e300;
    int passing = 0;
    json certs = json::array();
    for (const auto& c : rep.certificates) {
        memb = std::max({memb, c.membership.interpolation_residual, c.membership.quasi_periodicity_residual});
        chr = std::max(chr, c.character_residual);
        quad = std::max(quad, max_of(c.quadratic));
        second = std::max(second, max_of(c.second_line));
        if (c.angle_checked)
            angle = std::max(angle, c.angle);
        impostor = std::min(impostor, c.impostor_quadratic);
        passing += c.pass ? 1 : 0;
        json q = json::array();
        for (const auto& pr : c.Q)
            q.push_back({complex_json(pr[0]), complex_json(pr[1])});
        certs.push_back({{"eigenvalue", complex_json(c.eigenvalue)},
                         {"eigenvector", vector_json(c.v)},
                         {"eps_nodes", vector_json(c.eps_nodes)},
                         {"membership",
                          {{"interpolation_residual", c.membership.interpolation_residual},
                           {"quasi_periodicity_residual", c.membership.quasi_periodicity_residual},
                           {"pass", c.membership.pass}}},
                         {"character_residual", c.character_residual},
                         {"quadratic", c.quadratic},
                         {"second_line", c.second_line},
                         {"Q", std::move(q)},
                         {"u", vector_json(c.u)},
                         {"angle", c.angle},
                         {"angle_checked", c.angle_checked},
                         {"cluster_size", c.cluster_size},
                         {"impostor_quadratic", c.impostor_quadratic},
                         {"pass", c.pass}});
    }
    out.checks.push_back({"membership", memb, tol});
    out.checks.push_back({"character", chr, tol});
    out.checks.push_back({"quadratic_relations", quad, tol});
    out.checks.push_back({"second_line", second, tol});
    out.checks.push_back({"reconstruction_angle", angle, opt.angle_tol});
    out.checks.push_back({"impostor_rejected", impostor, 1e-4, true});
    out.checks.push_back({"span", rep.span_singular, 1e-6, true});
    out.checks.push_back({"passing_certificates", double(N - passing), 0.0});

    const Character chi = irf_character(p);
    out.results["z0"] = complex_json(z0);
    out.results["character"] = {{"chi_1", complex_json(chi.chi1)}, {"chi_tau", complex_json(chi.chiTau)}};
    out.results["nodes"] = vector_json(rep.nodes);
    out.results["min_gap"] = rep.min_gap;
    out.results["span_singular"] = rep.span_singular;
    out.results["certificates"] = std::move(certs);

    // eps_k(z0 + t), t in [0, 1]: one Rayleigh ratio per eigenvector
    const int npts = get_int(cfg.irf, "csv_points", 64, 2, "irf");
    CsvTable csv{"spectrum_eps.csv", {"t", "re_z", "im_z"}, {}};
    for (int k = 0; k < N; ++k) {
        csv.header.push_back("re_eps" + std::to_string(k));
        csv.header.push_back("im_eps" + std::to_string(k));
    }
    MatrixXcd V(N, N);
    for (int k = 0; k < N; ++k)
        V.col(k) = rep.certificates[k].v;
    for (int s = 0; s < npts; ++s) {
        const double t = double(s) / double(npts - 1);
        const cplx z = z0 + t;
        std::vector<double> row{t, z.real(), z.imag()};
        const VectorXcd e = rayleigh_eigenvalues(p, V, z);
        for (int k = 0; k < N; ++k) {
            row.push_back(e[k].real());
            row.push_back(e[k].imag());
        }
        csv.rows.push_back(std::move(row));
    }
    out.csv.push_back(std::move(csv));
    return out;
}

TaskOutput irf_partition(const ModelConfig& cfg)
{
    const ModelParams p = cfg.params();
    const cplx tau = p.th.tau();
    const double tol = cfg.tol.residual_tol;
    Sampler rng(cfg.seed);
    TaskOutput out;

    std::vector<cplx> rows = get_complex_list(cfg.irf, "rows", "irf");
    if (rows.empty())
        rows = random_points(rng, tau, get_int(cfg.irf, "row_count", 4, 1, "irf"));
    const cplx Z = partition_function(p, rows);
    const int m = static_cast<int>(rows.size());

    double perm = 0.0;
    int tried = 0;
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    auto test = [&] {
        std::vector<cplx> r;
        for (int i : idx)
            r.push_back(rows[i]);
        perm = std::max(perm, rel_diff(partition_function(p, r), Z));
        ++tried;
    };
    if (m <= 6) {
        while (std::next_permutation(idx.begin(), idx.end()))
            test();
    } else {
        for (int s = 0; s < 20; ++s) {
            std::shuffle(idx.begin(), idx.end(), rng.engine());
            test();
        }
    }
    out.checks.push_back({"permutation_invariance", perm, tol});

    // one row: trace against the eigenvalue sum
    const MatrixXcd T1 = build_T_irf_sov(p, rows[0]);
    const VectorXcd ev = Eigen::ComplexEigenSolver<MatrixXcd>(T1, false).eigenvalues();
    const cplx Z1 = partition_function(p, {rows[0]}, TransferBuild::difference);
    out.checks.push_back({"single_row_eigenvalue_sum", std::abs(Z1 - ev.sum()) / std::max(1.0, std::abs(Z1)), tol});

    out.results["rows"] = vector_json(rows);
    out.results["partition_function"] = complex_json(Z);
    out.results["partition_function_difference"] = complex_json(partition_function(p, rows, TransferBuild::difference));
    out.results["permutations_tested"] = tried;
    return out;
}

TaskOutput irf_bethe(const ModelConfig& cfg)
{
    const ModelParams p = cfg.params();
    const Theta& th = p.th;
    const cplx tau = th.tau(), eta = p.eta;
    const double tol = cfg.tol.residual_tol;
    Sampler rng(cfg.seed);
    TaskOutput out;

    const json bethe = cfg.irf.value("bethe", json::object());
    const cplx seed_a = get_complex(bethe, "a", "irf.bethe").value_or(rng.box(-0.5, 0.5, -0.5, 0.5));
    const auto seed_w = get_complex_list(bethe, "w", "irf.bethe");
    const int samples = get_int(bethe, "samples", 8, 1, "irf.bethe");
    if (!seed_w.empty() && p.total_weight() != 2 * static_cast<int>(seed_w.size()))
        throw ConfigError("Schema violation: irf.bethe.w needs sum(Lambda)/2 roots");
    const ContinuousBetheReport r = continuous_bethe(p, rng, seed_a, seed_w, samples);
    out.checks.push_back({"bethe_equations", r.solution.residual, std::max(tol, 1e-10)});
    out.checks.push_back({"bethe_normalized", r.bethe_residual, tol});
    out.checks.push_back({"eigen_residual", r.eigen_residual, tol});
    out.checks.push_back({"character", r.character_residual, tol});

    out.results["m"] = r.m;
    out.results["a"] = complex_json(r.solution.a);
    out.results["w"] = vector_json(r.solution.w);
    out.results["singular_string"] = r.singular_string;
    out.results["character"] = {{"chi_1", complex_json(r.chi.chi1)}, {"chi_tau", complex_json(r.chi.chiTau)}};
    out.results["character_formula"] = {{"chi_1", complex_json(r.chi_formula.chi1)},
                                        {"chi_tau", complex_json(r.chi_formula.chiTau)}};

    EllipticPoly Ap, Am;
    for (const auto& s : p.sites) {
        Ap.zeros.push_back(-s.z - eta * double(s.Lambda));
        Am.zeros.push_back(-s.z + eta * double(s.Lambda));
    }
    const cplx z0 = irf_z0(cfg, rng, tau);
    const int npts = get_int(cfg.irf, "csv_points", 64, 2, "irf");
    CsvTable csv{"bethe_eps.csv", {"t", "re_z", "im_z", "re_eps", "im_eps"}, {}};
    for (int s = 0; s < npts; ++s) {
        const double t = double(s) / double(npts - 1);
        const cplx z = z0 + t;
        const cplx e = difference_eigenvalue(th, Ap, Am, 2.0 * eta, r.solution.Q(), z);
        csv.rows.push_back({t, z.real(), z.imag(), e.real(), e.imag()});
    }
    out.csv.push_back(std::move(csv));
    return out;
}

using TaskFn = TaskOutput (*)(const ModelConfig&);

const std::vector<std::pair<std::string, TaskFn>>& task_table()
{
    static const std::vector<std::pair<std::string, TaskFn>> table{
        {"theta eval", theta_eval},       {"gaudin check", gaudin_check},   {"gaudin bethe", gaudin_bethe},
        {"eqg rll-check", eqg_rll_check}, {"eqg hw-check", eqg_hw_check},   {"irf build", irf_build},
        {"irf spectrum", irf_spectrum},   {"irf partition", irf_partition}, {"irf bethe", irf_bethe},
    };
    return table;
}

void write_csv(const std::string& dir, const CsvTable& t)
{
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / t.file;
    std::ofstream f(path);
    if (!f)
        throw ConfigError("cannot write " + path.string());
    for (std::size_t i = 0; i < t.header.size(); ++i)
        f << (i ? "," : "") << t.header[i];
    f << "\n" << std::setprecision(17);
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            f << (i ? "," : "") << row[i];
        f << "\n";
    }
}

void emit(const json& report, const std::string& out_path, std::ostream& out)
{
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(out_path);
    if (!f)
        throw ConfigError("cannot write report to " + out_path);
    f << text;
}

json error_report(const std::string& command, const std::string& kind, const std::string& msg)
{
    return {{"task", command}, {"pass", false}, {"error", {{"kind", kind}, {"message", msg}}}};
}

} // namespace

cplx parse_complex(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        schema_error(where + " must be a complex number [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

ModelParams ModelConfig::params() const
{
    ThetaOptions opt;
    opt.trunc_tol = tol.trunc_tol;
    opt.rho = tol.rho;
    ModelParams p(Theta(Lattice(tau), opt), eta, sites);
    p.validate();
    return p;
}

json ModelConfig::to_json() const
{
    json j;
    j["tau"] = complex_json(tau);
    j["eta"] = complex_json(eta);
    j["sites"] = json::array();
    for (const auto& s : sites)
        j["sites"].push_back({{"z", complex_json(s.z)}, {"lambda", s.Lambda}});
    j["seed"] = seed;
    j["tolerances"] = {{"trunc_tol", tol.trunc_tol},
                       {"residual_tol", tol.residual_tol},
                       {"rho", tol.rho},
                       {"gap_tol", tol.gap_tol}};
    j["theta"] = theta;
    j["gaudin"] = gaudin;
    j["eqg"] = eqg;
    j["irf"] = irf;
    return j;
}

ModelConfig parse_config(const json& j)
{
    check_keys(j, "config", {"description", "tau", "eta", "sites", "seed", "tolerances", "theta", "gaudin", "eqg", "irf"});
    ModelConfig c;
    for (const char* key : {"tau", "eta", "sites"})
        if (!j.contains(key))
            schema_error(std::string("missing required key '") + key + "'");
    c.tau = parse_complex(j.at("tau"), "tau");
    if (c.tau.imag() <= 0.0)
        throw ConfigError("Lattice invariant violated: Im(tau) = " + std::to_string(c.tau.imag()) + " must be positive");
    c.eta = parse_complex(j.at("eta"), "eta");

    const json& sites = j.at("sites");
    if (!sites.is_array() || sites.empty())
        schema_error("sites must be a non-empty list");
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const std::string where = "sites[" + std::to_string(i) + "]";
        check_keys(sites[i], where, {"z", "lambda"});
        if (!sites[i].contains("z") || !sites[i].contains("lambda"))
            schema_error(where + " needs z and lambda");
        const json& L = sites[i].at("lambda");
        if (!L.is_number_integer() || L.get<long long>() < 1)
            schema_error(where + ".lambda must be a positive integer");
        c.sites.push_back({parse_complex(sites[i].at("z"), where + ".z"), L.get<int>()});
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned())
            schema_error("seed must be a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        check_keys(t, "tolerances", {"trunc_tol", "residual_tol", "rho", "gap_tol"});
        auto pos = [&](const char* key, double& field) {
            if (!t.contains(key))
                return;
            if (!t.at(key).is_number() || t.at(key).get<double>() <= 0.0)
                schema_error(std::string("tolerances.") + key + " must be a positive number");
            field = t.at(key).get<double>();
        };
        pos("trunc_tol", c.tol.trunc_tol);
        pos("residual_tol", c.tol.residual_tol);
        pos("rho", c.tol.rho);
        pos("gap_tol", c.tol.gap_tol);
    }
    if (j.contains("theta")) {
        c.theta = j.at("theta");
        check_keys(c.theta, "theta", {"points", "random_points"});
        get_complex_list(c.theta, "points", "theta");
        get_int(c.theta, "random_points", 100, 1, "theta");
    }
    if (j.contains("gaudin")) {
        c.gaudin = j.at("gaudin");
        check_keys(c.gaudin, "gaudin", {"lambda_samples", "z_samples", "jet_degree", "bethe"});
        gaudin_settings(c);
        if (c.gaudin.contains("bethe")) {
            const json& b = c.gaudin.at("bethe");
            check_keys(b, "gaudin.bethe", {"c", "w", "pair_weight", "attempts"});
            get_complex(b, "c", "gaudin.bethe");
            get_complex_list(b, "w", "gaudin.bethe");
            get_double(b, "pair_weight", 2.0, "gaudin.bethe");
            get_int(b, "attempts", 20, 1, "gaudin.bethe");
        }
    }
    if (j.contains("eqg")) {
        c.eqg = j.at("eqg");
        check_keys(c.eqg, "eqg", {"z", "w", "lambda", "lambda_samples", "qybe_samples"});
        get_complex(c.eqg, "z", "eqg");
        get_complex(c.eqg, "w", "eqg");
        get_complex_list(c.eqg, "lambda", "eqg");
        get_int(c.eqg, "lambda_samples", 5, 1, "eqg");
        get_int(c.eqg, "qybe_samples", 20, 1, "eqg");
    }
    if (j.contains("irf")) {
        c.irf = j.at("irf");
        check_keys(c.irf, "irf", {"z0", "z_samples", "commuting_pairs", "rows", "row_count", "csv_points", "bethe"});
        get_complex(c.irf, "z0", "irf");
        get_complex_list(c.irf, "rows", "irf");
        for (const char* key : {"z_samples", "commuting_pairs", "row_count"})
            get_int(c.irf, key, 1, 1, "irf");
        get_int(c.irf, "csv_points", 64, 2, "irf");
        if (c.irf.contains("bethe")) {
            const json& b = c.irf.at("bethe");
            check_keys(b, "irf.bethe", {"a", "w", "samples"});
            get_complex(b, "a", "irf.bethe");
            get_complex_list(b, "w", "irf.bethe");
            get_int(b, "samples", 8, 1, "irf.bethe");
        }
    }
    return c;
}

ModelConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot read config " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        schema_error(std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return parse_config(j);
}

bool Check::pass() const
{
    if (std::isnan(residual))
        return false;
    return at_least ? residual >= tolerance : residual <= tolerance;
}

bool TaskOutput::pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
}

const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, fn] : task_table())
            v.push_back(name);
        return v;
    }();
    return names;
}

TaskOutput run_task(const std::string& command, const ModelConfig& cfg)
{
    for (const auto& [name, fn] : task_table())
        if (name == command)
            return fn(cfg);
    throw ConfigError("unknown subcommand '" + command + "'");
}

json make_report(const std::string& command, const ModelConfig& cfg, const TaskOutput& out, double seconds)
{
    json checks = json::array();
    for (const auto& c : out.checks)
        checks.push_back({{"name", c.name},
                          {"residual", c.residual},
                          {"tolerance", c.tolerance},
                          {"relation", c.at_least ? ">=" : "<="},
                          {"pass", c.pass()}});
    json r;
    r["task"] = command;
    r["config"] = cfg.to_json();
    r["checks"] = std::move(checks);
    r["pass"] = out.pass();
    r["results"] = out.results;
    r["timing"] = {{"seconds", seconds}};
    return r;
}

int run(const std::string& command, const RunOptions& opt, std::ostream& out, std::ostream& err)
{
    ModelConfig cfg;
    try {
        cfg = load_config(opt.config_path);
        if (opt.seed)
            cfg.seed = *opt.seed;
        if (opt.tol) {
            if (!(*opt.tol > 0.0))
                schema_error("--tol must be positive");
            cfg.tol.residual_tol = *opt.tol;
        }
        cfg.params();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        try {
            emit(error_report(command, "config", e.what()), opt.out_path, out);
        } catch (const ConfigError&) {
        }
        return kConfigError;
    }

    const auto t0 = std::chrono::steady_clock::now();
    TaskOutput result;
    try {
        result = run_task(command, cfg);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        emit(error_report(command, "config", e.what()), opt.out_path, out);
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        emit(error_report(command, "runtime", e.what()), opt.out_path, out);
        return kCheckFailed;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    try {
        emit(make_report(command, cfg, result, secs), opt.out_path, out);
        if (!opt.csv_dir.empty())
            for (const auto& t : result.csv)
                write_csv(opt.csv_dir, t);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }
    for (const auto& c : result.checks)
        if (!c.pass())
            err << "check failed: " << c.name << " residual " << c.residual << (c.at_least ? " < " : " > ")
                << c.tolerance << "\n";
    return result.pass() ? kPass : kCheckFailed;
}

} // namespace esov::cli
