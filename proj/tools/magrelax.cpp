#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "magrelax/blas_env.hpp"
#include "magrelax/magrelax.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kInvalid = 2, kCapacity = 3, kInfeasible = 4 };

int report(const std::exception& e) {
    if (const auto* cap = dynamic_cast<const magrelax::CapacityError*>(&e)) {
        std::cerr << "error: " << cap->what() << " (dimension " << cap->dimension() << ", limit " << cap->limit()
                  << ")\n";
        return kCapacity;
    }
    std::cerr << "error: " << e.what() << '\n';
    if (dynamic_cast<const magrelax::InvalidArgument*>(&e)) return kInvalid;
    if (dynamic_cast<const magrelax::InfeasibleError*>(&e)) return kInfeasible;
    return kFailure;
}

} // namespace

int main(int argc, char** argv) {
    magrelax::pin_blas_coretype(argv);

    CLI::App app{"Relaxation dynamics of a periodic spin-1 chain in a fixed-magnon sector"};
    app.require_subcommand(1);

    std::string config_path, output_dir;
    bool dry_run = false, quiet = false;
    auto* run = app.add_subcommand("run", "evolve a configured quench and write its artifacts");
    run->add_option("config", config_path, "JSON run configuration")->required();
    run->add_flag("--dry-run", dry_run, "validate and size the run without computing anything");
    run->add_option("-o,--output", output_dir, "output directory (overrides config and MAGRELAX_OUTPUT_DIR)");
    run->add_flag("-q,--quiet", quiet, "no progress messages");

    std::string gobbs_config;
    auto* gobbs = app.add_subcommand("gobbs", "print the constrained correlation maximum for a configuration");
    gobbs->add_option("config", gobbs_config, "JSON run configuration")->required();

    int sites = 0, magnons = 0;
    auto* dims = app.add_subcommand("dims", "print the dimension of the N-site, m-magnon sector");
    dims->add_option("N", sites)->required();
    dims->add_option("m", magnons)->required();

    int bsites = 0, bmagnons = 0;
    auto* basis = app.add_subcommand("basis", "dump the sector basis as CSV (index, excitations)");
    basis->add_option("N", bsites)->required();
    basis->add_option("m", bmagnons)->required();

    auto* version = app.add_subcommand("version", "print the version");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto cfg = magrelax::load_config(config_path);
            magrelax::RunOptions opt;
            opt.dry_run = dry_run;
            if (!output_dir.empty()) opt.output_directory = output_dir;
            if (!quiet) opt.log = &std::cerr;
            const auto result = magrelax::run(cfg, opt);
            if (dry_run) {
                magrelax::ojson j;
                j["config"] = magrelax::to_json(cfg);
                j["config"]["output"]["directory"] = result.output_directory;
                j["dimension"] = result.dimension;
                std::cout << j.dump(2) << '\n';
            } else {
                for (const auto& a : result.artifacts) std::cout << result.output_directory << '/' << a << '\n';
            }
        } else if (*gobbs) {
            const auto cfg = magrelax::load_config(gobbs_config);
            const auto sol = magrelax::solve_gobbs(cfg);
            auto j = magrelax::gobbs_json(cfg, sol);
            std::cout << j.dump(2) << '\n';
        } else if (*dims) {
            std::cout << magrelax::dimension(sites, magnons) << '\n';
        } else if (*basis) {
            const magrelax::MagnonBasis b(bsites, bmagnons);
            std::cout << "index,excitations\n";
            for (std::size_t i = 0; i < b.size(); ++i) std::cout << i << ',' << b.unrank(i).to_string() << '\n';
        } else if (*version) {
            std::cout << "magrelax " << magrelax::kVersion << '\n';
        }
    } catch (const std::exception& e) {
        return report(e);
    }
    return kOk;
}
