#pragma once

// Exact propagation through the full eigendecomposition of a sector:
//   psi(t) = V exp(-i E t) V^T psi0       (hbar = 1)
// Propagation has no time-step error, so arbitrary grids cost the same.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "magrelax/basis.hpp"
#include "magrelax/error.hpp"
#include "magrelax/hamiltonian.hpp"

namespace magrelax {

inline constexpr std::size_t kDenseDimensionLimit = 8192;

using StateVector = Eigen::VectorXcd;

// Unit vector on the product configuration obtained by raising the listed
// (0-based) sites from |-1>; a site listed twice ends in |+1>.
inline StateVector initial_state(const MagnonBasis& basis, std::span<const int> excited_sites) {
    if (int(excited_sites.size()) != basis.magnons())
        throw InvalidArgument("initial state lists " + std::to_string(excited_sites.size()) +
                              " excitations but the sector has m=" + std::to_string(basis.magnons()));
    std::vector<std::uint8_t> e(std::size_t(basis.sites()), 0);
    for (int s : excited_sites) {
        if (s < 0 || s >= basis.sites())
            throw InvalidArgument("excited site " + std::to_string(s) + " outside the chain");
        if (++e[std::size_t(s)] > 2)
            throw InvalidArgument("site " + std::to_string(s) + " raised three times; (S^+)^3 = 0");
    }
    StateVector psi = StateVector::Zero(Eigen::Index(basis.size()));
    psi[Eigen::Index(basis.rank(e))] = 1.0;
    return psi;
}

class SpectralDecomposition {
public:
    SpectralDecomposition(Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors)
        : eigenvalues_(std::move(eigenvalues)), eigenvectors_(std::move(eigenvectors)) {}

    std::size_t dim() const noexcept { return std::size_t(eigenvalues_.size()); }
    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
    const Eigen::MatrixXd& eigenvectors() const noexcept { return eigenvectors_; }

    bool has_overlaps() const noexcept { return overlaps_.has_value(); }
    const Eigen::VectorXcd& overlaps() const {
        if (!overlaps_) throw InvalidArgument("no initial state bound to the spectral decomposition");
        return *overlaps_;
    }
    const StateVector& initial_state() const {
        if (!psi0_) throw InvalidArgument("no initial state bound to the spectral decomposition");
        return *psi0_;
    }

    // Copy with c_k = <E_k|psi0> attached.
    SpectralDecomposition bind(const StateVector& psi0) const {
        if (psi0.size() != eigenvalues_.size())
            throw InvalidArgument("initial state dimension does not match the sector");
        if (std::abs(psi0.norm() - 1.0) > 1e-8)
            throw InvalidArgument("initial state is not normalized (norm " + std::to_string(psi0.norm()) + ")");
        SpectralDecomposition out = *this;
        out.overlaps_ = eigenvectors_.transpose() * psi0;
        out.psi0_ = psi0;
        return out;
    }

    double spectral_radius() const {
        if (eigenvalues_.size() == 0) return 0.0;
        return std::max(std::abs(eigenvalues_[0]), std::abs(eigenvalues_[eigenvalues_.size() - 1]));
    }

private:
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
    std::optional<Eigen::VectorXcd> overlaps_;
    std::optional<StateVector> psi0_;
};

// Dense symmetric eigensolve (LAPACK dsyevd); eigenvalues ascending.
inline SpectralDecomposition diagonalize(const SectorMatrix& h, std::size_t limit = kDenseDimensionLimit) {
    if (h.dim > limit)
        throw CapacityError("sector dimension " + std::to_string(h.dim) + " exceeds the dense limit " +
                                std::to_string(limit),
                            h.dim, limit);
    Eigen::MatrixXd a = h.to_dense();
    Eigen::VectorXd w(Eigen::Index(h.dim));
    if (h.dim == 0) return {w, a};
    const auto n = lapack_int(h.dim);
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
    if (info != 0) throw Error("dsyevd failed with info=" + std::to_string(info));

    // Some OpenBLAS builds select a faulty kernel on recent CPUs and return
    // garbage without an error code; setting OPENBLAS_CORETYPE=Haswell avoids it.
    const double scale = std::max({1.0, std::abs(w[0]), std::abs(w[n - 1])});
    const auto sparse = h.to_sparse();
    double worst = 0.0;
    for (Eigen::Index first = 0; first < n; first += 256) {
        const auto width = std::min<Eigen::Index>(256, n - first);
        const Eigen::MatrixXd r = sparse * a.middleCols(first, width) -
                                  a.middleCols(first, width) * w.segment(first, width).asDiagonal();
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    if (!(worst <= 1e-8 * scale))
        throw Error("eigendecomposition failed its residual check (max |HV - VE| = " + std::to_string(worst) +
                    "); the LAPACK/BLAS backend is returning wrong results. With OpenBLAS, try "
                    "OPENBLAS_CORETYPE=Haswell");
    return {std::move(w), std::move(a)};
}

struct StateTrajectory {
    std::vector<double> times;
    std::vector<StateVector> amplitudes;
};

namespace detail {

inline void check_grid(std::span<const double> times) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i])) throw InvalidArgument("time grid contains a non-finite value");
        if (i > 0 && times[i] < times[i - 1]) throw InvalidArgument("time grid must be ascending");
    }
}

} // namespace detail

// Streams psi(t) over the grid in column blocks; `sink(first, block)` gets the
// index of the first time in the block and a dim x width complex matrix.
inline void propagate_blocked(const SpectralDecomposition& spec, std::span<const double> times,
                              const std::function<void(std::size_t, const Eigen::MatrixXcd&)>& sink,
                              std::size_t block = 64) {
    detail::check_grid(times);
    const auto& c = spec.overlaps();
    const auto& energies = spec.eigenvalues();
    const auto& v = spec.eigenvectors();
    const auto dim = Eigen::Index(spec.dim());
    block = std::max<std::size_t>(block, 1);

    Eigen::MatrixXd phase_re, phase_im;
    Eigen::MatrixXcd psi;
    for (std::size_t first = 0; first < times.size(); first += block) {
        const auto width = Eigen::Index(std::min(block, times.size() - first));
        phase_re.resize(dim, width);
        phase_im.resize(dim, width);
        for (Eigen::Index j = 0; j < width; ++j) {
            const double t = times[first + std::size_t(j)];
            for (Eigen::Index k = 0; k < dim; ++k) {
                const auto z = c[k] * std::polar(1.0, -energies[k] * t);
                phase_re(k, j) = z.real();
                phase_im(k, j) = z.imag();
            }
        }
        psi.resize(dim, width);
        psi.real() = v * phase_re;
        psi.imag() = v * phase_im;
        sink(first, psi);
    }
}

inline StateTrajectory propagate(const SpectralDecomposition& spec, std::span<const double> times) {
    StateTrajectory traj;
    traj.times.assign(times.begin(), times.end());
    traj.amplitudes.resize(times.size());
    propagate_blocked(spec, times, [&](std::size_t first, const Eigen::MatrixXcd& block) {
        for (Eigen::Index j = 0; j < block.cols(); ++j) traj.amplitudes[first + std::size_t(j)] = block.col(j);
    });
    // The t = 0 column reproduces psi0 only up to roundoff in V V^T.
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] == 0.0) traj.amplitudes[i] = spec.initial_state();
    }
    return traj;
}

inline StateTrajectory propagate(const SpectralDecomposition& spec, const StateVector& psi0,
                                 std::span<const double> times) {
    return propagate(spec.bind(psi0), times);
}

// Uniform grid t_i = i * t_max / steps, i = 0..steps.
inline std::vector<double> uniform_grid(double t_max, std::size_t steps) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InvalidArgument("t_max must be positive and finite");
    if (steps < 2) throw InvalidArgument("grid needs at least 2 steps");
    std::vector<double> t(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) t[i] = t_max * double(i) / double(steps);
    return t;
}

} // namespace magrelax
