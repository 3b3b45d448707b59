#pragma once

// Maximum of the total correlation -sum_{n,a} p ln p over independent onsite
// distributions, subject to per-site normalization, total magnetization
//   sum_n (p_{n,+1} - p_{n,-1}) = S_z
// and total onsite energy
//   sum_{n,a} eps_{n,a} p_{n,a} = E0.
//
// Interior optima take the generalized one-body Boltzmann form
//   p_{n,a} = exp(-beta_E eps_{n,a} - beta_S a) / Z_n
// with two multipliers shared by all sites.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magrelax/error.hpp"
#include "magrelax/hamiltonian.hpp"
#include "magrelax/observables.hpp"

namespace magrelax {

inline constexpr double kBoundaryThreshold = 1e-12;

// N x 3 onsite energies, columns ordered as levels (-1, 0, +1).
using EnergyTable = PopulationTable;

inline EnergyTable homogeneous_energy_table(const ModelParams& params, int sites) {
    EnergyTable eps(sites, 3);
    for (int n = 0; n < sites; ++n)
        for (int e = 0; e < 3; ++e) eps(n, e) = onsite_energy(e - 1, params);
    return eps;
}

struct GobbsSolution {
    PopulationTable populations;
    std::optional<double> beta_energy;  // undefined on the simplex boundary
    std::optional<double> beta_spin;
    double correlation_max = 0.0;
    bool boundary = false;
    double magnetization_residual = 0.0;
    double energy_residual = 0.0;
    int iterations = 0;

    int sites() const noexcept { return int(populations.rows()); }
    double correlation_max_per_site() const { return correlation_max / sites(); }
};

// -sum p ln p over the solution's populations.
inline double correlation_max(const GobbsSolution& s) { return total_correlation(s.populations); }

namespace detail {

inline void fill_residuals(GobbsSolution& s, const EnergyTable& eps, double sz, double e0) {
    double mag = 0.0, energy = 0.0;
    for (int n = 0; n < s.populations.rows(); ++n) {
        mag += s.populations(n, 2) - s.populations(n, 0);
        for (int e = 0; e < 3; ++e) energy += eps(n, e) * s.populations(n, e);
    }
    s.magnetization_residual = mag - sz;
    s.energy_residual = energy - e0;
}

struct Moments {
    double mean_spin = 0.0, mean_energy = 0.0;
    double var_spin = 0.0, var_energy = 0.0, cov = 0.0;
};

// Boltzmann populations of one site and their first two moments.
inline Moments site_moments(const EnergyTable& eps, int n, double beta_e, double beta_s, double* probs) {
    double logw[3];
    double top = -std::numeric_limits<double>::infinity();
    for (int e = 0; e < 3; ++e) {
        logw[e] = -beta_e * eps(n, e) - beta_s * (e - 1);
        top = std::max(top, logw[e]);
    }
    double z = 0.0;
    for (int e = 0; e < 3; ++e) {
        probs[e] = std::exp(logw[e] - top);
        z += probs[e];
    }
    Moments m;
    for (int e = 0; e < 3; ++e) {
        probs[e] /= z;
        m.mean_spin += probs[e] * (e - 1);
        m.mean_energy += probs[e] * eps(n, e);
    }
    for (int e = 0; e < 3; ++e) {
        const double da = (e - 1) - m.mean_spin;
        const double de = eps(n, e) - m.mean_energy;
        m.var_spin += probs[e] * da * da;
        m.var_energy += probs[e] * de * de;
        m.cov += probs[e] * da * de;
    }
    return m;
}

struct Feasibility {
    double min_slack = 0.0;  // signed distance to the attainable region's boundary (negative outside)
    std::string violated;
};

// The attainable (S_z, E0) set is the Minkowski sum of the per-site
// triangles with vertices (a, eps_{n,a}). Its support function is the sum of
// the triangles' support functions; every edge normal of the sum is an edge
// normal of some triangle, and edge directions cover the degenerate
// (collinear) case.
inline Feasibility check_feasibility(const EnergyTable& eps, double sz, double e0) {
    std::vector<std::array<double, 2>> dirs;
    for (int n = 0; n < eps.rows(); ++n) {
        for (int i = 0; i < 3; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                const double dx = double(j - i), dy = eps(n, j) - eps(n, i);
                const double len = std::hypot(dx, dy);
                for (const auto& u : {std::array{dx / len, dy / len}, std::array{-dy / len, dx / len}}) {
                    dirs.push_back(u);
                    dirs.push_back({-u[0], -u[1]});
                }
            }
        }
    }
    Feasibility f;
    f.min_slack = std::numeric_limits<double>::infinity();
    for (const auto& u : dirs) {
        double support = 0.0;
        for (int n = 0; n < eps.rows(); ++n) {
            double best = -std::numeric_limits<double>::infinity();
            for (int e = 0; e < 3; ++e) best = std::max(best, u[0] * (e - 1) + u[1] * eps(n, e));
            support += best;
        }
        const double slack = support - (u[0] * sz + u[1] * e0);
        if (slack < f.min_slack) {
            f.min_slack = slack;
            f.violated = "direction (" + std::to_string(u[0]) + ", " + std::to_string(u[1]) + ")";
        }
    }
    return f;
}

inline bool is_homogeneous(const EnergyTable& eps) {
    for (int n = 1; n < eps.rows(); ++n)
        for (int e = 0; e < 3; ++e)
            if (eps(n, e) != eps(0, e)) return false;
    return true;
}

} // namespace detail

// Closed-form solution when all sites share one energy table: the three
// constraints fix the common distribution directly.
inline GobbsSolution solve_homogeneous(const ModelParams& params, int sites, double sz, double e0) {
    if (sites < 1) throw InvalidArgument("GOBBS: need at least one site");
    const double em = onsite_energy(-1, params), ez = onsite_energy(0, params), ep = onsite_energy(1, params);
    Eigen::Matrix3d a;
    a << -1.0, 0.0, 1.0,  //
        em, ez, ep,       //
        1.0, 1.0, 1.0;
    const Eigen::Vector3d rhs(sz / sites, e0 / sites, 1.0);
    if (std::abs(a.determinant()) < 1e-14)
        throw InvalidArgument("GOBBS: energy constraint is degenerate with normalization and magnetization "
                              "(2 eps_0 - eps_+1 - eps_-1 = 0)");
    Eigen::Vector3d p = a.fullPivLu().solve(rhs);

    static constexpr const char* kLevelName[3] = {"p(-1)", "p(0)", "p(+1)"};
    for (int e = 0; e < 3; ++e) {
        if (p[e] < -kBoundaryThreshold || p[e] > 1.0 + kBoundaryThreshold)
            throw InfeasibleError("GOBBS: targets S_z=" + std::to_string(sz) + ", E0=" + std::to_string(e0) +
                                  " give " + kLevelName[e] + " = " + std::to_string(p[e]) +
                                  " outside [0, 1]");
    }

    GobbsSolution s;
    s.populations.resize(sites, 3);
    for (int e = 0; e < 3; ++e) {
        if (p[e] <= kBoundaryThreshold) {
            p[e] = 0.0;
            s.boundary = true;
        }
    }
    for (int n = 0; n < sites; ++n)
        for (int e = 0; e < 3; ++e) s.populations(n, e) = p[e];

    if (!s.boundary) {
        // ln(p+/p0) = -beta_E (eps+ - eps0) - beta_S, ln(p-/p0) = -beta_E (eps- - eps0) + beta_S
        const double lp = std::log(p[2] / p[1]), lm = std::log(p[0] / p[1]);
        const double beta_e = -(lp + lm) / (ep + em - 2.0 * ez);
        s.beta_energy = beta_e;
        s.beta_spin = -lp - beta_e * (ep - ez);
    }
    s.correlation_max = correlation_max(s);
    detail::fill_residuals(s, homogeneous_energy_table(params, sites), sz, e0);
    return s;
}

struct NewtonOptions {
    int max_iterations = 200;
    double tolerance = 1e-10;
};

// Two-dimensional damped Newton solve for (beta_E, beta_S) on an arbitrary
// per-site energy table.
inline GobbsSolution solve_general(const EnergyTable& eps, double sz, double e0, NewtonOptions opt = {}) {
    const int sites = int(eps.rows());
    if (sites < 1) throw InvalidArgument("GOBBS: empty energy table");
    if (!eps.allFinite()) throw InvalidArgument("GOBBS: energy table must be finite");

    const double scale = std::max(1.0, eps.cwiseAbs().maxCoeff()) * sites;
    const auto feas = detail::check_feasibility(eps, sz, e0);
    if (feas.min_slack < -1e-12 * scale)
        throw InfeasibleError("GOBBS: targets S_z=" + std::to_string(sz) + ", E0=" + std::to_string(e0) +
                              " lie outside the attainable region (violated along " + feas.violated + ")");
    if (feas.min_slack <= 1e-12 * scale) {
        if (detail::is_homogeneous(eps)) {
            ModelParams p;
            p.sites = sites;
            p.quadratic_zeeman = 0.5 * (eps(0, 2) + eps(0, 0)) - eps(0, 1);
            p.linear_zeeman = 0.5 * (eps(0, 2) - eps(0, 0));
            // Energies are measured from eps_0 inside solve_homogeneous.
            auto s = solve_homogeneous(p, sites, sz, e0 - sites * eps(0, 1));
            detail::fill_residuals(s, eps, sz, e0);
            return s;
        }
        throw InfeasibleError("GOBBS: targets lie on the boundary of the attainable region; the optimum has "
                              "vanishing populations and no finite multipliers");
    }

    auto residual = [&](double be, double bs, Eigen::Vector2d& r, Eigen::Matrix2d* jac) {
        double probs[3];
        r.setZero();
        if (jac) jac->setZero();
        for (int n = 0; n < sites; ++n) {
            const auto m = detail::site_moments(eps, n, be, bs, probs);
            r[0] += m.mean_energy;
            r[1] += m.mean_spin;
            if (jac) {
                (*jac)(0, 0) -= m.var_energy;
                (*jac)(0, 1) -= m.cov;
                (*jac)(1, 0) -= m.cov;
                (*jac)(1, 1) -= m.var_spin;
            }
        }
        r[0] -= e0;
        r[1] -= sz;
    };

    double be = 0.0, bs = 0.0;
    Eigen::Vector2d r;
    Eigen::Matrix2d jac;
    residual(be, bs, r, &jac);
    int it = 0;
    for (; it < opt.max_iterations && r.norm() >= opt.tolerance; ++it) {
        const Eigen::Vector2d step = -jac.fullPivLu().solve(r);
        double lambda = 1.0;
        Eigen::Vector2d trial;
        int halvings = 0;
        for (;;) {
            residual(be + lambda * step[0], bs + lambda * step[1], trial, nullptr);
            if (trial.norm() < r.norm() || halvings >= 60) break;
            lambda *= 0.5;
            ++halvings;
        }
        be += lambda * step[0];
        bs += lambda * step[1];
        residual(be, bs, r, &jac);
    }
    if (!(r.norm() < opt.tolerance))
        throw ConvergenceError("GOBBS: Newton iteration stopped after " + std::to_string(it) +
                                   " iterations with residual " + std::to_string(r.norm()),
                               r.norm());

    GobbsSolution s;
    s.populations.resize(sites, 3);
    double probs[3];
    for (int n = 0; n < sites; ++n) {
        detail::site_moments(eps, n, be, bs, probs);
        for (int e = 0; e < 3; ++e) s.populations(n, e) = probs[e];
    }
    s.beta_energy = be;
    s.beta_spin = bs;
    s.iterations = it;
    s.correlation_max = correlation_max(s);
    detail::fill_residuals(s, eps, sz, e0);
    return s;
}

} // namespace magrelax
