#pragma once

// Fixed-magnon basis of a periodic spin-1 chain.
//
// Every basis state is a product of onsite S^z eigenstates, stored as an
// excitation sequence e_n = a_n + 1 in {0, 1, 2} counted from the fully
// polarized reference |-1, -1, ..., -1>. A sector with m magnons holds all
// sequences with sum(e) == m; its total magnetization is m - N.

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "magrelax/error.hpp"

namespace magrelax {

inline constexpr int kMinSites = 3;
inline constexpr std::size_t kDefaultSoftDimensionCap = 200000;

// Onsite level a in {-1, 0, +1} <-> excitation e = a + 1 in {0, 1, 2}.
constexpr int level_of(std::uint8_t excitation) noexcept { return int(excitation) - 1; }
constexpr std::uint8_t excitation_of(int level) noexcept { return std::uint8_t(level + 1); }

namespace detail {

inline void check_sector(int sites, int magnons) {
    if (sites < kMinSites)
        throw InvalidArgument("chain needs at least 3 sites, got N=" + std::to_string(sites));
    if (magnons < 0 || magnons > 2 * sites)
        throw InvalidArgument("magnon number must lie in [0, 2N], got m=" + std::to_string(magnons) +
                              " for N=" + std::to_string(sites));
}

// ways[k][r]: number of length-k sequences over {0,1,2} summing to r.
// Saturates at UINT64_MAX; callers that need exact counts check for it.
inline std::vector<std::vector<std::uint64_t>> completion_counts(int sites, int magnons) {
    constexpr auto kSat = ~std::uint64_t{0};
    std::vector<std::vector<std::uint64_t>> ways(sites + 1, std::vector<std::uint64_t>(magnons + 1, 0));
    ways[0][0] = 1;
    for (int k = 1; k <= sites; ++k) {
        for (int r = 0; r <= magnons; ++r) {
            std::uint64_t acc = 0;
            for (int e = 0; e <= 2 && e <= r; ++e) {
                if (__builtin_add_overflow(acc, ways[k - 1][r - e], &acc)) {
                    acc = kSat;
                    break;
                }
            }
            ways[k][r] = acc;
        }
    }
    return ways;
}

} // namespace detail

// Number of configurations in the (N, m) sector.
inline std::uint64_t dimension(int sites, int magnons) {
    detail::check_sector(sites, magnons);
    const auto count = detail::completion_counts(sites, magnons)[sites][magnons];
    if (count == ~std::uint64_t{0})
        throw CapacityError("sector dimension overflows 64 bits", std::size_t(-1), std::size_t(-1));
    return count;
}

class SpinConfig {
public:
    explicit SpinConfig(std::vector<std::uint8_t> excitations) : excitations_(std::move(excitations)) {
        for (auto e : excitations_) {
            if (e > 2)
                throw InvalidArgument("excitation values must lie in {0,1,2}");
        }
        magnons_ = std::accumulate(excitations_.begin(), excitations_.end(), 0);
    }

    int sites() const noexcept { return int(excitations_.size()); }
    int magnons() const noexcept { return magnons_; }
    int magnetization() const noexcept { return magnons_ - sites(); }
    std::span<const std::uint8_t> excitations() const noexcept { return excitations_; }
    std::uint8_t operator[](std::size_t n) const { return excitations_[n]; }

    // "0210..." style label, one digit per site.
    std::string to_string() const {
        std::string s;
        s.reserve(excitations_.size());
        for (auto e : excitations_) s.push_back(char('0' + e));
        return s;
    }

    friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

private:
    std::vector<std::uint8_t> excitations_;
    int magnons_ = 0;
};

// Immutable, lexicographically ordered enumeration of one magnon sector.
class MagnonBasis {
public:
    MagnonBasis(int sites, int magnons) : sites_(sites), magnons_(magnons) {
        detail::check_sector(sites, magnons);
        ways_ = detail::completion_counts(sites, magnons);
        const auto dim = ways_[sites][magnons];
        if (dim == ~std::uint64_t{0} || dim > std::uint64_t(1) << 40)
            throw CapacityError("sector too large to enumerate", std::size_t(dim), std::size_t(1) << 40);
        size_ = std::size_t(dim);
        flat_.reserve(size_ * std::size_t(sites));
        std::vector<std::uint8_t> prefix(sites, 0);
        fill(prefix, 0, magnons);
    }

    int sites() const noexcept { return sites_; }
    int magnons() const noexcept { return magnons_; }
    int magnetization() const noexcept { return magnons_ - sites_; }
    std::size_t size() const noexcept { return size_; }

    std::span<const std::uint8_t> excitations(std::size_t index) const {
        return {flat_.data() + index * std::size_t(sites_), std::size_t(sites_)};
    }

    SpinConfig unrank(std::size_t index) const {
        if (index >= size_)
            throw InvalidArgument("basis index " + std::to_string(index) + " out of range");
        auto e = excitations(index);
        return SpinConfig({e.begin(), e.end()});
    }

    // Position of an excitation sequence in the ordering; O(N) via completion counts.
    std::size_t rank(std::span<const std::uint8_t> e) const {
        if (int(e.size()) != sites_)
            throw InvalidArgument("configuration has " + std::to_string(e.size()) + " sites, basis has " +
                                  std::to_string(sites_));
        int remaining = magnons_;
        std::size_t index = 0;
        for (int n = 0; n < sites_; ++n) {
            if (e[n] > 2)
                throw InvalidArgument("excitation values must lie in {0,1,2}");
            const int tail = sites_ - n - 1;
            for (int d = 0; d < e[n]; ++d) {
                if (remaining - d >= 0) index += std::size_t(ways_[tail][remaining - d]);
            }
            remaining -= e[n];
            if (remaining < 0) break;
        }
        if (remaining != 0)
            throw InvalidArgument("configuration carries a magnon count different from m=" +
                                  std::to_string(magnons_));
        return index;
    }

    std::size_t rank(const SpinConfig& config) const { return rank(config.excitations()); }

private:
    void fill(std::vector<std::uint8_t>& prefix, int n, int remaining) {
        if (n == sites_) {
            if (remaining == 0) flat_.insert(flat_.end(), prefix.begin(), prefix.end());
            return;
        }
        const int tail = sites_ - n - 1;
        for (int e = 0; e <= 2 && e <= remaining; ++e) {
            if (remaining - e > 2 * tail) continue;
            prefix[n] = std::uint8_t(e);
            fill(prefix, n + 1, remaining - e);
        }
        prefix[n] = 0;
    }

    int sites_;
    int magnons_;
    std::size_t size_ = 0;
    std::vector<std::uint8_t> flat_;
    std::vector<std::vector<std::uint64_t>> ways_;
};

inline MagnonBasis enumerate_basis(int sites, int magnons) { return MagnonBasis(sites, magnons); }

} // namespace magrelax
