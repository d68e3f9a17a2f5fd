#include "condense/config.hpp"
#include "condense/errors.hpp"
#include "condense/pipeline.hpp"
#include "condense/study.hpp"

#include "CLI11.hpp"

#include <omp.h>

#include <iostream>
#include <optional>

namespace {

using namespace condense;

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    std::optional<std::size_t> workers;
};

RunConfig load(const Globals& g) {
    RunConfig c = g.config_path.empty() ? default_run_config() : load_run_config(g.config_path);
    if (g.seed) c.chain.seed = *g.seed;
    if (g.workers) {
        if (*g.workers == 0) throw ConfigError("--workers must be positive");
        c.study.workers = *g.workers;
        omp_set_num_threads(static_cast<int>(*g.workers));
    }
    return c;
}

void add_globals(CLI::App* app, Globals& g) {
    app->add_option("--config", g.config_path, "INI configuration file");
    app->add_option("--seed", g.seed, "64-bit seed (overrides [chain] seed)");
    app->add_option("--out", g.out, "output directory");
    app->add_option("--workers", g.workers, "parallel workers");
}

int check_failures(const StudyResult& r, const RunConfig& c, const std::string& label) {
    std::cerr << label << ": " << r.failures << " of " << r.rows.size() << " rows failed\n";
    for (const auto& row : r.rows) {
        if (!row.ok) std::cerr << "  n=" << row.n << " replicate=" << row.replicate << ": " << row.error << "\n";
    }
    if (r.failure_fraction() > c.study.max_failure_fraction) return 5;
    if (r.n_values.size() < 3) {
        std::cerr << label << ": fewer than 3 sample sizes have successful rows\n";
        return 5;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Empirical Bayes conditional density estimation with predictor-dependent DP mixtures"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    Globals g;

    auto* fit = app.add_subcommand("fit", "fit the model to a data CSV");
    FitCommand fit_cmd;
    fit->add_option("data", fit_cmd.data_csv, "data CSV (x1..,y1..)")->required();
    fit->add_flag("--resume", fit_cmd.resume, "continue from the checkpoint in OUT/manifest.json");
    fit->add_option("--checkpoint-every", fit_cmd.checkpoint_every, "sweeps between checkpoints (0 = end only)");
    add_globals(fit, g);

    auto* sim = app.add_subcommand("simulate", "draw a dataset from the [truth] section");
    std::size_t sim_n = 500;
    sim->add_option("--n", sim_n, "sample size");
    add_globals(sim, g);

    auto* eb = app.add_subcommand("eb-estimate", "print the empirical Bayes report as JSON");
    std::string eb_data;
    eb->add_option("data", eb_data, "data CSV")->required();
    add_globals(eb, g);

    auto* met = app.add_subcommand("metrics", "compare two density tables");
    std::string table_a, table_b;
    double tolerance = 1e-3;
    met->add_option("reference", table_a, "density CSV playing f0")->required();
    met->add_option("other", table_b, "density CSV on the same grid")->required();
    met->add_option("--tolerance", tolerance, "quadrature tolerance");
    add_globals(met, g);

    auto* rate = app.add_subcommand("rate-study", "error versus n for the [truth] section");
    add_globals(rate, g);
    auto* dimred = app.add_subcommand("dimred-study", "paired base / embedded rate studies");
    add_globals(dimred, g);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const RunConfig config = load(g);
        if (fit->parsed()) {
            fit_cmd.out_dir = g.out;
            run_fit_command(fit_cmd, config);
        } else if (sim->parsed()) {
            run_simulate_command(config, sim_n, g.out);
        } else if (eb->parsed()) {
            std::cout << run_eb_command(eb_data, config).dump(2) << "\n";
        } else if (met->parsed()) {
            std::cout << run_metrics_command(table_a, table_b, tolerance).dump(2) << "\n";
        } else if (rate->parsed()) {
            RunConfig c = config;
            c.d_x = c.truth.d_x;
            c.d_y = c.truth.d_y;
            const StudyResult r = rate_study(c.truth, c);
            write_study_outputs(g.out, r, c);
            return check_failures(r, c, "rate-study");
        } else if (dimred->parsed()) {
            const DimredResult r = dimred_study(config);
            write_dimred_outputs(g.out, r, config);
            const int a = check_failures(r.base, config, "base");
            const int b = check_failures(r.embedded, config, "embedded");
            return std::max(a, b);
        }
        return 0;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const TruncatedSupportError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 4;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 4;
    } catch (const StudyFailureError& e) {
        std::cerr << "study failed: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
