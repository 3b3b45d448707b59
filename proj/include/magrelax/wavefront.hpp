#pragma once

// Entropy-front tracking. The arrival time at a site is the moment its onsite
// entropy grows fastest; a straight line through (t*_n, d_n) gives the front
// speed v_g, and a ring of N sites refocuses after tau_rec = N / v_g.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "magrelax/error.hpp"
#include "magrelax/observables.hpp"

namespace magrelax {

// Ring distance from each site to the nearest source site (0-based sites).
inline std::vector<int> ring_distances(int sites, std::span<const int> sources) {
    if (sources.empty()) throw InvalidArgument("ring distance needs at least one source site");
    std::vector<int> d(std::size_t(sites), sites);
    for (int n = 0; n < sites; ++n) {
        for (int s : sources) {
            const int gap = std::abs(n - s);
            d[std::size_t(n)] = std::min({d[std::size_t(n)], gap, sites - gap});
        }
    }
    return d;
}

// Centered moving average; the window shrinks symmetrically at the ends.
inline std::vector<double> moving_average(std::span<const double> x, int width) {
    const int half = std::max(width, 1) / 2;
    const auto n = std::ptrdiff_t(x.size());
    std::vector<double> out(x.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto reach = std::min<std::ptrdiff_t>({half, i, n - 1 - i});
        double acc = 0.0;
        for (auto j = i - reach; j <= i + reach; ++j) acc += x[std::size_t(j)];
        out[std::size_t(i)] = acc / double(2 * reach + 1);
    }
    return out;
}

// Centered finite differences, one-sided at the ends.
inline std::vector<double> finite_derivative(std::span<const double> t, std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    d[0] = (x[1] - x[0]) / (t[1] - t[0]);
    d[n - 1] = (x[n - 1] - x[n - 2]) / (t[n - 1] - t[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (x[i + 1] - x[i - 1]) / (t[i + 1] - t[i - 1]);
    return d;
}

struct ArrivalOptions {
    int smoothing = 5;  // moving-average width applied before differentiation
};

// t*_n = argmax of dS_n/dt over grid points inside [t_lo, t_hi], earliest on ties.
// `entropy` is T x N (rows are times).
inline std::vector<double> arrival_times(const Eigen::MatrixXd& entropy, std::span<const double> times, double t_lo,
                                         double t_hi, ArrivalOptions opt = {}) {
    if (entropy.rows() != Eigen::Index(times.size()))
        throw InvalidArgument("entropy series and time grid differ in length");
    std::size_t first = times.size(), last = 0, count = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_lo || times[i] > t_hi) continue;
        first = std::min(first, i);
        last = i;
        ++count;
    }
    if (count < 5)
        throw InvalidArgument("arrival window [" + std::to_string(t_lo) + ", " + std::to_string(t_hi) +
                              "] holds fewer than 5 grid points");

    std::vector<double> out(std::size_t(entropy.cols()));
    std::vector<double> column(times.size());
    for (Eigen::Index n = 0; n < entropy.cols(); ++n) {
        for (std::size_t i = 0; i < times.size(); ++i) column[i] = entropy(Eigen::Index(i), n);
        const auto smooth = moving_average(column, opt.smoothing);
        const auto slope = finite_derivative(times, smooth);
        // Slopes equal up to roundoff count as ties and go to the earliest time.
        double top = slope[first];
        for (std::size_t i = first; i <= last; ++i) top = std::max(top, slope[i]);
        const double tie = 1e-9 * std::abs(top);
        std::size_t best = first;
        while (slope[best] < top - tie) ++best;
        out[std::size_t(n)] = times[best];
    }
    return out;
}

struct LineFit {
    double slope = 0.0;      // sites per unit time
    double intercept = 0.0;  // sites
    double residual = 0.0;   // RMS of d - (slope t + intercept)
};

// Least-squares d = v t + d0 over the selected (0-based) sites.
inline LineFit fit_group_velocity(std::span<const double> arrivals, std::span<const int> distances,
                                  std::span<const int> selected) {
    if (arrivals.size() != distances.size())
        throw InvalidArgument("arrival and distance arrays differ in length");
    if (selected.size() < 3)
        throw InvalidArgument("front fit needs at least 3 sites, got " + std::to_string(selected.size()));
    for (int n : selected)
        if (n < 0 || std::size_t(n) >= arrivals.size()) throw InvalidArgument("selected site out of range");
    const double count = double(selected.size());
    double mt = 0.0, md = 0.0;
    for (int n : selected) {
        mt += arrivals[std::size_t(n)];
        md += distances[std::size_t(n)];
    }
    mt /= count;
    md /= count;
    double stt = 0.0, stdist = 0.0;
    for (int n : selected) {
        const double dt = arrivals[std::size_t(n)] - mt;
        stt += dt * dt;
        stdist += dt * (distances[std::size_t(n)] - md);
    }
    if (stt <= 0.0) throw InvalidArgument("front fit is degenerate: all arrival times coincide");
    LineFit f;
    f.slope = stdist / stt;
    f.intercept = md - f.slope * mt;
    double ss = 0.0;
    for (int n : selected) {
        const double r = distances[std::size_t(n)] - (f.slope * arrivals[std::size_t(n)] + f.intercept);
        ss += r * r;
    }
    f.residual = std::sqrt(ss / count);
    return f;
}

inline LineFit fit_group_velocity(std::span<const double> arrivals, std::span<const int> distances) {
    std::vector<int> all(arrivals.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = int(i);
    return fit_group_velocity(arrivals, distances, all);
}

inline double recurrence_time(double group_velocity, int sites) {
    if (!(group_velocity > 0.0)) throw InvalidArgument("group velocity must be positive");
    return double(sites) / group_velocity;
}

// First-passage window [0, t_hi]: t_hi is the first local maximum of the
// farthest site's smoothed entropy after it has climbed to half its global
// maximum. Past that point the two counter-propagating fronts have crossed
// and later maxima belong to recurrences.
inline double first_passage_end(const ObservableSeries& s, std::span<const int> sources, int smoothing = 5) {
    if (s.size() < 5) throw InvalidArgument("series too short for front analysis");
    const auto d = ring_distances(s.sites, sources);
    const int far = int(std::max_element(d.begin(), d.end()) - d.begin());
    std::vector<double> column(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) column[i] = s.onsite_entropy(Eigen::Index(i), far);
    const auto x = moving_average(column, smoothing);
    const double top = *std::max_element(x.begin(), x.end());
    std::size_t i = 0;
    while (i < x.size() && x[i] < 0.5 * top) ++i;
    while (i + 1 < x.size() && x[i + 1] >= x[i]) ++i;
    return s.times[std::min(i, x.size() - 1)];
}

struct FrontOptions {
    ArrivalOptions arrival;
    std::optional<std::pair<double, double>> window;  // default: [t0, first_passage_end]
    int min_distance = 2;                            // sites next to the source block are skipped
    std::vector<int> sites;                          // explicit fit sites (0-based); overrides min_distance
};

struct FrontFit {
    std::vector<double> arrival_times;
    std::vector<int> distances;
    std::vector<int> fit_sites;
    double t_lo = 0.0;
    double t_hi = 0.0;
    double group_velocity = 0.0;
    double intercept = 0.0;
    double fit_residual = 0.0;
    double recurrence_time = 0.0;
};

inline FrontFit analyze_front(const ObservableSeries& s, std::span<const int> sources, const FrontOptions& opt = {}) {
    FrontFit f;
    f.distances = ring_distances(s.sites, sources);
    if (opt.window) {
        std::tie(f.t_lo, f.t_hi) = *opt.window;
    } else {
        f.t_lo = s.times.front();
        f.t_hi = first_passage_end(s, sources, opt.arrival.smoothing);
    }
    f.arrival_times = arrival_times(s.onsite_entropy, s.times, f.t_lo, f.t_hi, opt.arrival);
    if (!opt.sites.empty()) {
        f.fit_sites = opt.sites;
    } else {
        for (int n = 0; n < s.sites; ++n)
            if (f.distances[std::size_t(n)] >= opt.min_distance) f.fit_sites.push_back(n);
    }
    const auto line = fit_group_velocity(f.arrival_times, f.distances, f.fit_sites);
    f.group_velocity = line.slope;
    f.intercept = line.intercept;
    f.fit_residual = line.residual;
    f.recurrence_time = recurrence_time(line.slope, s.sites);
    return f;
}

} // namespace magrelax
