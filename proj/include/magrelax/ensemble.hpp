#pragma once

// Infinite-time averages of diagonal observables.
//
// With degenerate levels the time average keeps the cross terms inside each
// degenerate group g, so the averaged state is sum_g P_g |psi0><psi0| P_g
// rather than sum_k |c_k|^2 |E_k><E_k|.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "magrelax/basis.hpp"
#include "magrelax/error.hpp"
#include "magrelax/evolve.hpp"
#include "magrelax/observables.hpp"

namespace magrelax {

inline constexpr double kDefaultDegeneracyTolerance = 1e-9;  // relative to the spectral radius

// Index ranges [begin, end) of eigenvalues closer than tol to their neighbour.
inline std::vector<std::pair<std::size_t, std::size_t>> degeneracy_groups(const Eigen::VectorXd& ascending,
                                                                          double absolute_tol) {
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    const auto n = std::size_t(ascending.size());
    std::size_t begin = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        if (k == n || ascending[Eigen::Index(k)] - ascending[Eigen::Index(k - 1)] >= absolute_tol) {
            groups.emplace_back(begin, k);
            begin = k;
        }
    }
    return groups;
}

// Diagonal of the time-averaged density matrix in the product basis.
struct DiagonalEnsemble {
    Eigen::VectorXd weights;
    std::size_t group_count = 0;
};

inline DiagonalEnsemble diagonal_ensemble(const SpectralDecomposition& spec,
                                          double relative_tol = kDefaultDegeneracyTolerance) {
    const auto& c = spec.overlaps();
    const auto& v = spec.eigenvectors();
    const double tol = relative_tol * std::max(spec.spectral_radius(), 1e-300);
    const auto groups = degeneracy_groups(spec.eigenvalues(), tol);

    DiagonalEnsemble out;
    out.weights = Eigen::VectorXd::Zero(Eigen::Index(spec.dim()));
    out.group_count = groups.size();
    Eigen::VectorXcd projected(Eigen::Index(spec.dim()));
    for (const auto& [begin, end] : groups) {
        const auto width = Eigen::Index(end - begin);
        const auto cols = v.middleCols(Eigen::Index(begin), width);
        const auto coeff = c.segment(Eigen::Index(begin), width);
        projected.real() = cols * coeff.real();
        projected.imag() = cols * coeff.imag();
        out.weights += projected.cwiseAbs2();
    }
    return out;
}

// Time average of <psi(t)| diag(observable) |psi(t)>.
inline double diagonal_ensemble_average(const SpectralDecomposition& spec, const Eigen::VectorXd& observable,
                                        double relative_tol = kDefaultDegeneracyTolerance) {
    if (observable.size() != Eigen::Index(spec.dim()))
        throw InvalidArgument("observable dimension does not match the sector");
    return diagonal_ensemble(spec, relative_tol).weights.dot(observable);
}

struct SteadyReport {
    PopulationTable populations;
    double total_correlation = 0.0;
    double total_onsite_energy = 0.0;
    double initial_onsite_energy = 0.0;
    std::size_t degeneracy_groups = 0;
};

inline PopulationTable steady_populations(const SpectralDecomposition& spec, const MagnonBasis& basis,
                                          double relative_tol = kDefaultDegeneracyTolerance) {
    if (spec.dim() != basis.size()) throw InvalidArgument("spectral decomposition does not match the basis");
    return populations_from_probabilities(diagonal_ensemble(spec, relative_tol).weights, basis);
}

inline SteadyReport steady_report(const SpectralDecomposition& spec, const MagnonBasis& basis,
                                  const ModelParams& params, double relative_tol = kDefaultDegeneracyTolerance) {
    if (spec.dim() != basis.size()) throw InvalidArgument("spectral decomposition does not match the basis");
    const auto ensemble = diagonal_ensemble(spec, relative_tol);
    SteadyReport r;
    r.populations = populations_from_probabilities(ensemble.weights, basis);
    r.total_correlation = total_correlation(r.populations);
    r.total_onsite_energy = onsite_energies(r.populations, params).total;
    r.initial_onsite_energy = onsite_energies(populations(spec.initial_state(), basis), params).total;
    r.degeneracy_groups = ensemble.group_count;
    return r;
}

// Arithmetic means over grid points with t_lo <= t <= t_hi.
struct WindowAverage {
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t samples = 0;
    PopulationTable populations;
    Eigen::VectorXd onsite_entropy;
    Eigen::VectorXd onsite_energy;
    double total_correlation = 0.0;
    double total_onsite_energy = 0.0;
};

inline WindowAverage finite_time_average(const ObservableSeries& s, double t_lo, double t_hi) {
    WindowAverage w;
    w.t_lo = t_lo;
    w.t_hi = t_hi;
    Eigen::RowVectorXd pop = Eigen::RowVectorXd::Zero(s.populations.cols());
    Eigen::RowVectorXd ent = Eigen::RowVectorXd::Zero(s.sites);
    Eigen::RowVectorXd en = Eigen::RowVectorXd::Zero(s.sites);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.times[i] < t_lo || s.times[i] > t_hi) continue;
        const auto r = Eigen::Index(i);
        pop += s.populations.row(r);
        ent += s.onsite_entropy.row(r);
        en += s.onsite_energy.row(r);
        w.total_correlation += s.total_correlation[r];
        w.total_onsite_energy += s.total_onsite_energy[r];
        ++w.samples;
    }
    if (w.samples == 0)
        throw InvalidArgument("averaging window [" + std::to_string(t_lo) + ", " + std::to_string(t_hi) +
                              "] contains no grid points");
    const double inv = 1.0 / double(w.samples);
    w.populations.resize(s.sites, 3);
    for (int n = 0; n < s.sites; ++n)
        for (int e = 0; e < 3; ++e) w.populations(n, e) = pop[3 * n + e] * inv;
    w.onsite_entropy = ent.transpose() * inv;
    w.onsite_energy = en.transpose() * inv;
    w.total_correlation *= inv;
    w.total_onsite_energy *= inv;
    return w;
}

// [tau, 3 tau] when a recurrence estimate exists, else the last half of the grid.
inline std::pair<double, double> default_average_window(const ObservableSeries& s,
                                                        std::optional<double> recurrence_time) {
    if (s.size() == 0) throw InvalidArgument("empty series");
    if (recurrence_time && *recurrence_time > 0.0) return {*recurrence_time, 3.0 * *recurrence_time};
    return {0.5 * (s.times.front() + s.times.back()), s.times.back()};
}

} // namespace magrelax
