#pragma once

// Sector-restricted Hamiltonian of the spin-1 ring
//
//   H = sum_n [Omega (S^z_n)^2 + omega S^z_n]
//     + sum_n J   (S^+_n S^-_{n+1} + h.c.)
//     + sum_d sum_n J_d (S^+_n S^-_{n+d} + h.c.)     (optional long range)
//
// In the product basis every hopping element S^+_p S^-_q equals 2, since
// S^+|-1> = sqrt(2)|0> and S^+|0> = sqrt(2)|+1>.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "magrelax/basis.hpp"
#include "magrelax/error.hpp"

namespace magrelax {

struct LongRangeCoupling {
    int distance = 2;
    double coupling = 0.0;
};

struct ModelParams {
    int sites = 0;
    double hopping = 0.0;       // J
    double quadratic_zeeman = 0.0;  // Omega
    double linear_zeeman = 0.0;     // omega
    std::vector<LongRangeCoupling> long_range;

    void validate() const {
        if (sites < kMinSites)
            throw InvalidArgument("model: N must be >= 3, got " + std::to_string(sites));
        if (!std::isfinite(hopping) || !std::isfinite(quadratic_zeeman) || !std::isfinite(linear_zeeman))
            throw InvalidArgument("model: couplings must be finite");
        std::vector<int> seen;
        for (const auto& lr : long_range) {
            if (lr.distance < 2 || lr.distance > sites / 2)
                throw InvalidArgument("model: long-range distance " + std::to_string(lr.distance) +
                                      " outside [2, floor(N/2)]");
            if (!std::isfinite(lr.coupling))
                throw InvalidArgument("model: long-range coupling must be finite");
            if (std::find(seen.begin(), seen.end(), lr.distance) != seen.end())
                throw InvalidArgument("model: long-range distance " + std::to_string(lr.distance) +
                                      " listed twice");
            seen.push_back(lr.distance);
        }
    }
};

// epsilon_a = Omega a^2 + omega a.
constexpr double onsite_energy(int level, const ModelParams& p) noexcept {
    return p.quadratic_zeeman * level * level + p.linear_zeeman * level;
}

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

// Real symmetric sector matrix: diagonal plus both mirror copies of every hop.
struct SectorMatrix {
    std::size_t dim = 0;
    std::vector<double> diagonal;
    std::vector<Triplet> offdiag;  // sorted by (row, col)

    Eigen::MatrixXd to_dense() const {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(Eigen::Index(dim), Eigen::Index(dim));
        for (std::size_t i = 0; i < dim; ++i) h(Eigen::Index(i), Eigen::Index(i)) = diagonal[i];
        for (const auto& t : offdiag) h(Eigen::Index(t.row), Eigen::Index(t.col)) += t.value;
        return h;
    }

    Eigen::SparseMatrix<double> to_sparse() const {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(offdiag.size() + dim);
        for (std::size_t i = 0; i < dim; ++i) trips.emplace_back(Eigen::Index(i), Eigen::Index(i), diagonal[i]);
        for (const auto& t : offdiag) trips.emplace_back(Eigen::Index(t.row), Eigen::Index(t.col), t.value);
        Eigen::SparseMatrix<double> h{Eigen::Index(dim), Eigen::Index(dim)};
        h.setFromTriplets(trips.begin(), trips.end());
        return h;
    }

    double trace() const {
        double s = 0.0;
        for (double d : diagonal) s += d;
        return s;
    }
};

namespace detail {

// Unordered site pairs {n, n+d mod N} with their coupling. A distance of
// exactly N/2 would list every pair twice when summing over n, so each
// physical pair appears once.
inline std::vector<std::pair<std::pair<int, int>, double>> bonds(const ModelParams& p) {
    std::vector<std::pair<std::pair<int, int>, double>> out;
    auto add_distance = [&](int d, double coupling) {
        if (coupling == 0.0) return;
        const int count = (2 * d == p.sites) ? p.sites / 2 : p.sites;
        for (int n = 0; n < count; ++n) out.push_back({{n, (n + d) % p.sites}, coupling});
    };
    add_distance(1, p.hopping);
    for (const auto& lr : p.long_range) add_distance(lr.distance, lr.coupling);
    return out;
}

} // namespace detail

inline SectorMatrix build_hamiltonian(const ModelParams& params, const MagnonBasis& basis) {
    params.validate();
    if (params.sites != basis.sites())
        throw InvalidArgument("model has N=" + std::to_string(params.sites) + " but basis has N=" +
                              std::to_string(basis.sites()));

    const double eps[3] = {onsite_energy(-1, params), onsite_energy(0, params), onsite_energy(1, params)};
    const auto bond_list = detail::bonds(params);

    SectorMatrix h;
    h.dim = basis.size();
    h.diagonal.resize(h.dim);
    std::vector<std::uint8_t> scratch(std::size_t(basis.sites()));

    for (std::size_t i = 0; i < h.dim; ++i) {
        const auto e = basis.excitations(i);
        double diag = 0.0;
        for (auto x : e) diag += eps[x];
        h.diagonal[i] = diag;

        // S^+_p S^-_q moves one magnon from q to p; both orientations of each bond.
        for (const auto& [sites, coupling] : bond_list) {
            const auto [a, b] = sites;
            for (const auto& [p, q] : {std::pair{a, b}, std::pair{b, a}}) {
                if (e[p] >= 2 || e[q] == 0) continue;
                std::copy(e.begin(), e.end(), scratch.begin());
                ++scratch[p];
                --scratch[q];
                h.offdiag.push_back({basis.rank(scratch), i, 2.0 * coupling});
            }
        }
    }
    std::sort(h.offdiag.begin(), h.offdiag.end(),
              [](const Triplet& x, const Triplet& y) { return std::tie(x.row, x.col) < std::tie(y.row, y.col); });
    return h;
}

// Diagonal of the projector |a><a|_n in the basis (site is 0-based).
inline Eigen::VectorXd number_operator_diagonal(const MagnonBasis& basis, int site, int level) {
    if (site < 0 || site >= basis.sites())
        throw InvalidArgument("site index " + std::to_string(site) + " out of range");
    if (level < -1 || level > 1)
        throw InvalidArgument("level must be -1, 0 or +1");
    Eigen::VectorXd v(Eigen::Index(basis.size()));
    const auto target = excitation_of(level);
    for (std::size_t i = 0; i < basis.size(); ++i) v[Eigen::Index(i)] = basis.excitations(i)[site] == target ? 1.0 : 0.0;
    return v;
}

// Coordinate dump: "row,col,value" per line, 0-based, diagonal included.
inline void write_coordinate_file(const SectorMatrix& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "row,col,value\n";
    char buf[64];
    auto emit = [&](std::size_t r, std::size_t c, double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        out << r << ',' << c << ',' << buf << '\n';
    };
    std::size_t k = 0;
    for (std::size_t r = 0; r < h.dim; ++r) {
        bool diag_done = false;
        for (; k < h.offdiag.size() && h.offdiag[k].row == r; ++k) {
            if (!diag_done && h.offdiag[k].col > r) {
                emit(r, r, h.diagonal[r]);
                diag_done = true;
            }
            emit(r, h.offdiag[k].col, h.offdiag[k].value);
        }
        if (!diag_done) emit(r, r, h.diagonal[r]);
    }
}

} // namespace magrelax
