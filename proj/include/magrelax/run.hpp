#pragma once

// End-to-end driver: config -> sector -> spectrum -> dynamics and analyses
// -> CSV / JSON / SVG artifacts in one output directory.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "magrelax/basis.hpp"
#include "magrelax/config.hpp"
#include "magrelax/ensemble.hpp"
#include "magrelax/error.hpp"
#include "magrelax/evolve.hpp"
#include "magrelax/gobbs.hpp"
#include "magrelax/hamiltonian.hpp"
#include "magrelax/observables.hpp"
#include "magrelax/svg.hpp"
#include "magrelax/wavefront.hpp"

namespace magrelax {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kOutputDirEnv = "MAGRELAX_OUTPUT_DIR";

using ojson = nlohmann::ordered_json;

// 12 significant digits, so reruns produce byte-identical JSON.
inline double round12(double v) {
    if (!std::isfinite(v)) return v;
    return std::strtod(detail::fmt12(v).c_str(), nullptr);
}

inline ojson table_json(const PopulationTable& p) {
    ojson rows = ojson::array();
    for (int n = 0; n < p.rows(); ++n)
        rows.push_back({{"site", n + 1}, {"p_m1", round12(p(n, 0))}, {"p_0", round12(p(n, 1))},
                        {"p_p1", round12(p(n, 2))}});
    return rows;
}

// Onsite energy of the initial product configuration, and its S_z.
inline double initial_onsite_energy(const RunConfig& c) {
    std::vector<int> e(std::size_t(c.model.sites), 0);
    for (int s : c.initial_sites) ++e[std::size_t(s)];
    double total = 0.0;
    for (int x : e) total += onsite_energy(x - 1, c.model);
    return total;
}

inline double initial_magnetization(const RunConfig& c) { return double(c.magnons - c.model.sites); }

struct RunOptions {
    bool dry_run = false;
    std::optional<std::string> output_directory;  // beats config and environment
    std::ostream* log = nullptr;
};

struct RunResult {
    std::string output_directory;
    std::size_t dimension = 0;
    std::size_t nonzeros = 0;
    std::vector<std::string> artifacts;
    std::optional<SteadyReport> steady;
    std::optional<GobbsSolution> gobbs;
    std::optional<std::string> gobbs_error;
    std::optional<FrontFit> front;
    std::optional<std::string> front_error;
    std::optional<ObservableSeries> series;
};

inline std::string resolve_output_directory(const RunConfig& c, const RunOptions& opt) {
    if (opt.output_directory) return *opt.output_directory;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return c.output.directory;
}

inline ojson gobbs_json(const RunConfig& c, const GobbsSolution& g) {
    ojson j;
    j["S_z"] = round12(initial_magnetization(c));
    j["E0"] = round12(initial_onsite_energy(c));
    j["p_tilde"] = table_json(g.populations);
    j["beta_E"] = g.beta_energy ? ojson(round12(*g.beta_energy)) : ojson(nullptr);
    j["beta_S"] = g.beta_spin ? ojson(round12(*g.beta_spin)) : ojson(nullptr);
    j["C_max"] = round12(g.correlation_max);
    j["C_max_per_site"] = round12(g.correlation_max_per_site());
    j["boundary"] = g.boundary;
    j["residuals"] = {{"magnetization", round12(g.magnetization_residual)},
                      {"energy", round12(g.energy_residual)}};
    return j;
}

// Solves the constrained maximization for the config's model and initial state.
inline GobbsSolution solve_gobbs(const RunConfig& c) {
    return solve_homogeneous(c.model, c.model.sites, initial_magnetization(c), initial_onsite_energy(c));
}

inline RunResult run(const RunConfig& c, const RunOptions& opt = {}) {
    using clock = std::chrono::steady_clock;
    auto say = [&](const std::string& msg) {
        if (opt.log) *opt.log << msg << '\n' << std::flush;
    };
    auto since = [](clock::time_point t0) {
        return detail::fmt12(std::round(std::chrono::duration<double>(clock::now() - t0).count() * 100) / 100) + " s";
    };

    c.validate();
    RunResult r;
    r.output_directory = resolve_output_directory(c, opt);
    r.dimension = dimension(c.model.sites, c.magnons);
    if (r.dimension > kDefaultSoftDimensionCap)
        say("warning: sector dimension " + std::to_string(r.dimension) + " exceeds the soft cap " +
            std::to_string(kDefaultSoftDimensionCap));

    const bool need_spectrum = c.analyses.evolve || c.analyses.steady || c.analyses.wavefront;
    const bool need_series = c.analyses.evolve || c.analyses.wavefront;
    say("sector N=" + std::to_string(c.model.sites) + " m=" + std::to_string(c.magnons) +
        ": dimension " + std::to_string(r.dimension));
    if (need_spectrum && r.dimension > kDenseDimensionLimit)
        throw CapacityError("sector dimension " + std::to_string(r.dimension) + " exceeds the dense limit " +
                                std::to_string(kDenseDimensionLimit),
                            r.dimension, kDenseDimensionLimit);

    if (opt.dry_run) {
        say("dry run: grid of " + std::to_string(c.grid.steps + 1) + " points up to t=" + detail::fmt12(c.t_end()) +
            "; output directory " + r.output_directory);
        return r;
    }

    const MagnonBasis basis(c.model.sites, c.magnons);
    const auto h = build_hamiltonian(c.model, basis);
    r.nonzeros = h.offdiag.size();
    say("hamiltonian: " + std::to_string(r.nonzeros) + " off-diagonal entries");

    namespace fs = std::filesystem;
    const fs::path dir(r.output_directory);
    fs::create_directories(dir);
    auto artifact = [&](const std::string& name) {
        r.artifacts.push_back(name);
        return (dir / name).string();
    };
    auto write_json = [&](const std::string& name, const std::string& kind, ojson body) {
        ojson j;
        j["artifact"] = kind;
        j["version"] = kVersion;
        j["config"] = to_json(c);
        for (auto& [k, v] : body.items()) j[k] = v;
        std::ofstream out(artifact(name), std::ios::binary);
        if (!out) throw Error("cannot open " + (dir / name).string() + " for writing");
        out << j.dump(2) << '\n';
    };

    if (c.output.matrix) write_coordinate_file(h, artifact("hamiltonian.csv"));

    std::optional<SpectralDecomposition> spec;
    if (need_spectrum) {
        const auto t0 = clock::now();
        spec = diagonalize(h).bind(initial_state(basis, c.initial_sites));
        say("diagonalized in " + since(t0));
    }

    if (c.analyses.steady) {
        r.steady = steady_report(*spec, basis, c.model);
        say("steady state: C_T/N = " + detail::fmt12(r.steady->total_correlation / c.model.sites));
    }

    if (need_series) {
        const auto t0 = clock::now();
        const auto times = uniform_grid(c.t_end(), c.grid.steps);
        r.series = evolve_observables(*spec, basis, c.model, h, times);
        say("evolved " + std::to_string(times.size()) + " time points in " + since(t0));
    }

    if (c.analyses.wavefront) {
        try {
            r.front = analyze_front(*r.series, c.initial_sites);
            say("wavefront: v_g = " + detail::fmt12(r.front->group_velocity) +
                ", tau_rec = " + detail::fmt12(r.front->recurrence_time));
        } catch (const InvalidArgument& e) {
            r.front_error = e.what();
            say(std::string("wavefront analysis skipped: ") + e.what());
        }
    }

    if (c.analyses.gobbs) {
        try {
            r.gobbs = solve_gobbs(c);
            say("GOBBS: C_T/N = " + detail::fmt12(r.gobbs->correlation_max_per_site()));
        } catch (const InfeasibleError& e) {
            r.gobbs_error = e.what();
            say(std::string("GOBBS skipped: ") + e.what());
        }
    }

    const auto& s = r.series;
    if (s && c.analyses.evolve && c.output.csv) {
        write_populations_csv(*s, artifact("populations.csv"));
        write_entropy_csv(*s, artifact("entropy.csv"));
        write_energies_csv(*s, artifact("energies.csv"));
        write_correlation_csv(*s, artifact("correlation.csv"));
    }

    if (c.output.json) {
        ojson summary;
        summary["dimension"] = r.dimension;
        summary["offdiagonal_nonzeros"] = r.nonzeros;
        summary["t_end"] = round12(c.t_end());
        summary["time_points"] = c.grid.steps + 1;
        if (s) {
            double drift = 0.0, energy_drift = 0.0;
            for (Eigen::Index i = 0; i < s->norm.size(); ++i) {
                drift = std::max(drift, std::abs(s->norm[i] - 1.0));
                energy_drift = std::max(energy_drift, std::abs(s->energy[i] - s->energy[0]));
            }
            summary["max_norm_drift"] = round12(drift);
            summary["max_energy_drift"] = round12(energy_drift);
        }
        if (r.steady) {
            const auto& st = *r.steady;
            write_json("steady.json", "steady",
                       {{"p_infinity", table_json(st.populations)},
                        {"C_T_infinity", round12(st.total_correlation)},
                        {"C_T_infinity_per_site", round12(st.total_correlation / c.model.sites)},
                        {"onsite_energy_infinity", round12(st.total_onsite_energy)},
                        {"onsite_energy_initial", round12(st.initial_onsite_energy)},
                        {"degeneracy_groups", st.degeneracy_groups}});
        }
        if (r.gobbs) {
            write_json("gobbs.json", "gobbs", gobbs_json(c, *r.gobbs));
        } else if (r.gobbs_error) {
            write_json("gobbs.json", "gobbs", {{"error", *r.gobbs_error}});
        }
        if (r.front) {
            const auto& f = *r.front;
            ojson arrivals = ojson::array();
            for (int n = 0; n < c.model.sites; ++n)
                arrivals.push_back({{"site", n + 1},
                                    {"distance", f.distances[std::size_t(n)]},
                                    {"t_star", round12(f.arrival_times[std::size_t(n)])}});
            ojson fit_sites = ojson::array();
            for (int n : f.fit_sites) fit_sites.push_back(n + 1);
            const double jabs = std::abs(c.model.hopping);
            write_json("wavefront.json", "wavefront",
                       {{"window", {round12(f.t_lo), round12(f.t_hi)}},
                        {"arrivals", arrivals},
                        {"fit_sites", fit_sites},
                        {"v_g", round12(f.group_velocity)},
                        {"v_g_over_J", round12(f.group_velocity / jabs)},
                        {"intercept", round12(f.intercept)},
                        {"residual", round12(f.fit_residual)},
                        {"tau_rec", round12(f.recurrence_time)},
                        {"J_tau_rec", round12(jabs * f.recurrence_time)}});
        } else if (r.front_error) {
            write_json("wavefront.json", "wavefront", {{"error", *r.front_error}});
        }
        write_json("run.json", "run", summary);
    }

    if (s && c.analyses.evolve && c.output.svg) {
        Eigen::MatrixXd middle(s->size(), c.model.sites);
        for (int n = 0; n < c.model.sites; ++n) middle.col(n) = s->populations.col(3 * n + 1);
        svg::write(artifact("populations.svg"), svg::heatmap("P(n, a=0) versus time", s->times, middle, "t", "P"));
        svg::write(artifact("entropy.svg"),
                   svg::heatmap("onsite entropy S_n(t)", s->times, s->onsite_entropy, "t", "S_n"));

        std::vector<double> per_site(s->size());
        for (std::size_t i = 0; i < s->size(); ++i) per_site[i] = s->total_correlation[Eigen::Index(i)] / c.model.sites;
        std::vector<svg::Reference> refs;
        if (r.gobbs) refs.push_back({"GOBBS maximum", r.gobbs->correlation_max_per_site(), "#d62728"});
        if (r.steady) refs.push_back({"infinite-time", r.steady->total_correlation / c.model.sites, "#2ca02c"});
        svg::write(artifact("correlation.svg"),
                   svg::line_plot("total correlation per site", {{"C_T / N", s->times, per_site}}, refs, "t",
                                  "C_T / N"));

        static constexpr const char* kColor[3] = {"#1f77b4", "#ff7f0e", "#2ca02c"};
        static constexpr const char* kName[3] = {"a=-1", "a=0", "a=+1"};
        std::vector<svg::Line> lines;
        std::vector<svg::Reference> site_refs;
        for (int e = 0; e < 3; ++e) {
            std::vector<double> y(s->size());
            for (std::size_t i = 0; i < s->size(); ++i) y[i] = s->population(i, 0, e - 1);
            lines.push_back({std::string("P(1, ") + kName[e] + ")", s->times, y, kColor[e]});
            if (r.steady) site_refs.push_back({std::string("p_inf ") + kName[e], r.steady->populations(0, e), kColor[e]});
        }
        svg::write(artifact("site1.svg"), svg::line_plot("populations of site 1", lines, site_refs, "t", "P"));
    }

    say("wrote " + std::to_string(r.artifacts.size()) + " artifacts to " + r.output_directory);
    return r;
}

} // namespace magrelax
