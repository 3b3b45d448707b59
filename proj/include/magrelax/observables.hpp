#pragma once

// One-body observables of a pure sector state. Each reduced state rho_n is
// diagonal in the S^z basis (magnetization conservation forbids coherences
// between onsite levels), so the populations P[n][a] carry it completely.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "magrelax/basis.hpp"
#include "magrelax/error.hpp"
#include "magrelax/evolve.hpp"
#include "magrelax/hamiltonian.hpp"

namespace magrelax {

// N x 3 population table; column e = a + 1 holds level a in {-1, 0, +1}.
using PopulationTable = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

template <typename Derived>
PopulationTable populations_from_probabilities(const Eigen::MatrixBase<Derived>& prob, const MagnonBasis& basis) {
    PopulationTable p = PopulationTable::Zero(basis.sites(), 3);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const double w = prob[Eigen::Index(i)];
        if (w == 0.0) continue;
        const auto e = basis.excitations(i);
        for (int n = 0; n < basis.sites(); ++n) p(n, e[n]) += w;
    }
    return p;
}

inline PopulationTable populations(const StateVector& state, const MagnonBasis& basis) {
    if (state.size() != Eigen::Index(basis.size()))
        throw InvalidArgument("state dimension does not match the basis");
    return populations_from_probabilities(state.cwiseAbs2(), basis);
}

// -sum p ln p in nats; roundoff negatives down to -1e-12 count as zero.
inline double onsite_entropy(std::span<const double> row) {
    double s = 0.0;
    for (double p : row) {
        if (p < -1e-12) throw InvalidArgument("negative probability " + std::to_string(p));
        if (p > 0.0) s -= p * std::log(p);
    }
    return s;
}

inline double onsite_entropy(const PopulationTable& p, int site) {
    const std::array<double, 3> row{p(site, 0), p(site, 1), p(site, 2)};
    return onsite_entropy(row);
}

// Sum of onsite entropies minus the entropy of the full state. The full
// state is pure throughout, so its entropy is exactly zero.
inline constexpr double kFullStateEntropy = 0.0;

inline double total_correlation(const PopulationTable& p) {
    double c = 0.0;
    for (int n = 0; n < p.rows(); ++n) c += onsite_entropy(p, n);
    return c - kFullStateEntropy;
}

struct OnsiteEnergies {
    std::vector<double> per_site;
    double total = 0.0;
};

inline OnsiteEnergies onsite_energies(const PopulationTable& p, const ModelParams& params) {
    const double eps[3] = {onsite_energy(-1, params), onsite_energy(0, params), onsite_energy(1, params)};
    OnsiteEnergies out;
    out.per_site.resize(std::size_t(p.rows()));
    for (int n = 0; n < p.rows(); ++n) {
        out.per_site[std::size_t(n)] = eps[0] * p(n, 0) + eps[1] * p(n, 1) + eps[2] * p(n, 2);
        out.total += out.per_site[std::size_t(n)];
    }
    return out;
}

// Time series of every one-body quantity along a trajectory. Row index is the
// time index; site-resolved arrays are T x N (populations T x 3N, column 3n+e).
struct ObservableSeries {
    int sites = 0;
    double hopping = 1.0;  // J, for Jt columns
    std::vector<double> times;
    Eigen::MatrixXd populations;
    Eigen::MatrixXd onsite_energy;
    Eigen::MatrixXd onsite_entropy;
    Eigen::VectorXd total_correlation;
    Eigen::VectorXd total_onsite_energy;
    Eigen::VectorXd norm;
    Eigen::VectorXd energy;  // <H>
    double full_state_entropy = kFullStateEntropy;

    std::size_t size() const noexcept { return times.size(); }

    double population(std::size_t t, int site, int level) const {
        return populations(Eigen::Index(t), 3 * site + level + 1);
    }

    PopulationTable population_table(std::size_t t) const {
        PopulationTable p(sites, 3);
        for (int n = 0; n < sites; ++n)
            for (int e = 0; e < 3; ++e) p(n, e) = populations(Eigen::Index(t), 3 * n + e);
        return p;
    }
};

namespace detail {

inline void resize_series(ObservableSeries& s, std::size_t count) {
    const auto t = Eigen::Index(count);
    s.populations.resize(t, 3 * s.sites);
    s.onsite_energy.resize(t, s.sites);
    s.onsite_entropy.resize(t, s.sites);
    s.total_correlation.resize(t);
    s.total_onsite_energy.resize(t);
    s.norm.resize(t);
    s.energy.resize(t);
}

inline void record_state(ObservableSeries& s, std::size_t row, const Eigen::Ref<const Eigen::VectorXcd>& psi,
                         const MagnonBasis& basis, const ModelParams& params,
                         const Eigen::SparseMatrix<double>& h) {
    const auto r = Eigen::Index(row);
    const Eigen::VectorXd prob = psi.cwiseAbs2();
    const auto p = populations_from_probabilities(prob, basis);
    const auto energies = onsite_energies(p, params);
    double ct = 0.0;
    for (int n = 0; n < s.sites; ++n) {
        for (int e = 0; e < 3; ++e) s.populations(r, 3 * n + e) = p(n, e);
        s.onsite_energy(r, n) = energies.per_site[std::size_t(n)];
        const double sn = onsite_entropy(p, n);
        s.onsite_entropy(r, n) = sn;
        ct += sn;
    }
    s.total_correlation[r] = ct - kFullStateEntropy;
    s.total_onsite_energy[r] = energies.total;
    s.norm[r] = std::sqrt(prob.sum());
    const Eigen::VectorXd hr = h * psi.real();
    const Eigen::VectorXd hi = h * psi.imag();
    s.energy[r] = psi.real().dot(hr) + psi.imag().dot(hi);
}

} // namespace detail

inline ObservableSeries observe(const StateTrajectory& traj, const MagnonBasis& basis, const ModelParams& params,
                                const SectorMatrix& hamiltonian) {
    ObservableSeries s;
    s.sites = basis.sites();
    s.hopping = params.hopping;
    s.times = traj.times;
    detail::resize_series(s, traj.times.size());
    const auto h = hamiltonian.to_sparse();
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        if (std::abs(traj.amplitudes[i].norm() - 1.0) > 1e-8)
            throw InvalidArgument("trajectory state at index " + std::to_string(i) + " is not normalized");
        detail::record_state(s, i, traj.amplitudes[i], basis, params, h);
    }
    return s;
}

// Propagates and measures in one pass without holding the full trajectory.
inline ObservableSeries evolve_observables(const SpectralDecomposition& bound, const MagnonBasis& basis,
                                           const ModelParams& params, const SectorMatrix& hamiltonian,
                                           std::span<const double> times) {
    ObservableSeries s;
    s.sites = basis.sites();
    s.hopping = params.hopping;
    s.times.assign(times.begin(), times.end());
    detail::resize_series(s, times.size());
    const auto h = hamiltonian.to_sparse();
    propagate_blocked(bound, times, [&](std::size_t first, const Eigen::MatrixXcd& block) {
        for (Eigen::Index j = 0; j < block.cols(); ++j) {
            const std::size_t row = first + std::size_t(j);
            if (times[row] == 0.0)
                detail::record_state(s, row, bound.initial_state(), basis, params, h);
            else
                detail::record_state(s, row, block.col(j), basis, params, h);
        }
    });
    return s;
}

// ---- CSV emitters -----------------------------------------------------------

namespace detail {

inline std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    return out;
}

inline const char* level_tag(int e) { return e == 0 ? "m1" : (e == 1 ? "0" : "p1"); }

} // namespace detail

// Columns: t, Jt, P_<site>_<level> with level tags m1/0/p1, sites 1-based.
inline void write_populations_csv(const ObservableSeries& s, const std::string& path) {
    auto out = detail::open_csv(path);
    out << "t,Jt";
    for (int n = 0; n < s.sites; ++n)
        for (int e = 0; e < 3; ++e) out << ",P_" << n + 1 << '_' << detail::level_tag(e);
    out << '\n';
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << detail::fmt12(s.times[i]) << ',' << detail::fmt12(s.hopping * s.times[i]);
        for (Eigen::Index c = 0; c < s.populations.cols(); ++c)
            out << ',' << detail::fmt12(s.populations(Eigen::Index(i), c));
        out << '\n';
    }
}

inline void write_site_matrix_csv(const ObservableSeries& s, const Eigen::MatrixXd& m, const std::string& prefix,
                                  const std::string& path) {
    auto out = detail::open_csv(path);
    out << "t,Jt";
    for (int n = 0; n < s.sites; ++n) out << ',' << prefix << '_' << n + 1;
    out << '\n';
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << detail::fmt12(s.times[i]) << ',' << detail::fmt12(s.hopping * s.times[i]);
        for (int n = 0; n < s.sites; ++n) out << ',' << detail::fmt12(m(Eigen::Index(i), n));
        out << '\n';
    }
}

inline void write_entropy_csv(const ObservableSeries& s, const std::string& path) {
    write_site_matrix_csv(s, s.onsite_entropy, "S", path);
}

// Per-site energies followed by their sum.
inline void write_energies_csv(const ObservableSeries& s, const std::string& path) {
    auto out = detail::open_csv(path);
    out << "t,Jt";
    for (int n = 0; n < s.sites; ++n) out << ",H_" << n + 1;
    out << ",H_onsite_total,H_expectation\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto r = Eigen::Index(i);
        out << detail::fmt12(s.times[i]) << ',' << detail::fmt12(s.hopping * s.times[i]);
        for (int n = 0; n < s.sites; ++n) out << ',' << detail::fmt12(s.onsite_energy(r, n));
        out << ',' << detail::fmt12(s.total_onsite_energy[r]) << ',' << detail::fmt12(s.energy[r]) << '\n';
    }
}

inline void write_correlation_csv(const ObservableSeries& s, const std::string& path) {
    auto out = detail::open_csv(path);
    out << "t,Jt,C_T,C_T_per_site,S_full\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double c = s.total_correlation[Eigen::Index(i)];
        out << detail::fmt12(s.times[i]) << ',' << detail::fmt12(s.hopping * s.times[i]) << ','
            << detail::fmt12(c) << ',' << detail::fmt12(c / s.sites) << ','
            << detail::fmt12(s.full_state_entropy) << '\n';
    }
}

} // namespace magrelax
