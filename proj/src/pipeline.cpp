#include "condense/pipeline.hpp"

#include "condense/dataset.hpp"
#include "condense/draws_io.hpp"
#include "condense/errors.hpp"
#include "condense/kernels.hpp"
#include "condense/rng.hpp"
#include "condense/simulation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace condense {

namespace fs = std::filesystem;

namespace {

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Dataset load_data(const std::string& path, const RunConfig& config) {
    Dataset data = read_dataset_csv(path);
    if (data.d_x != config.d_x || data.d_y != config.d_y) {
        throw ConfigError("data has d_x = " + std::to_string(data.d_x) + ", d_y = " + std::to_string(data.d_y) +
                          " but the config declares d_x = " + std::to_string(config.d_x) +
                          ", d_y = " + std::to_string(config.d_y));
    }
    return data;
}

std::string draws_text(const PosteriorDraws& draws) {
    std::ostringstream os;
    write_draws_jsonl(os, draws);
    return os.str();
}

nlohmann::json fit_manifest(const RunConfig& config, const FitCommand& cmd, const Dataset& data,
                            const FitResult& fit) {
    nlohmann::json m = provenance_json(config);
    m["config"] = config.to_json();
    m["data"] = {{"path", cmd.data_csv}, {"n", data.size()}, {"d_x", data.d_x}, {"d_y", data.d_y}};
    m["eb"] = to_json(fit.eb);
    m["gamma_used"] = to_json(fit.prior.gamma);
    m["prior"] = {{"alpha_shape", fit.prior.alpha_shape},
                  {"c0", fit.prior.c0},
                  {"truncation", fit.prior.truncation}};
    return m;
}

} // namespace

nlohmann::json provenance_json(const RunConfig& config) {
    return {{"version", kVersion}, {"config_hash", config.hash()}, {"seed", config.chain.seed}};
}

void write_text_file(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << text;
        if (!out) throw ConfigError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

EBReport select_hyperparams(const Dataset& data, const RunConfig& config) {
    if (config.prior.fixed_gamma) {
        HyperParams g = *config.prior.fixed_gamma;
        if (g.lambda.size() == 1 && config.d_y > 1) g.lambda.assign(config.d_y, g.lambda[0]);
        if (g.lambda.size() != config.d_y) throw ConfigError("[prior] lambda needs d_y components");
        EBReport r;
        r.raw_gamma = g;
        r.clamped_gamma = g;
        r.kn = default_kn_box(std::max<std::size_t>(data.size(), 2), config.d_y, config.prior.box);
        r.lambda_clamped.assign(config.d_y, false);
        return r;
    }
    const HyperParams raw = estimate_hyperparams(data, config.prior.alpha_shape);
    return clamp_to_kn(raw, default_kn_box(data.size(), config.d_y, config.prior.box));
}

FitResult fit_dataset(const Dataset& data, const RunConfig& config) {
    FitResult out;
    out.eb = select_hyperparams(data, config);
    out.prior = make_prior(config, out.eb.clamped_gamma);
    out.draws = run_chain(data, out.prior, config.chain);
    return out;
}

std::vector<double> fitted_y_axis(const Dataset& data, const PosteriorDraws& draws, const GridSettings& grid) {
    if (data.empty()) throw DataError("no data");
    double lo = data.y[0], hi = data.y[0];
    for (double v : data.y) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double smax = 0.0;
    for (const auto& s : draws.draws) smax = std::max(smax, s.sigma);
    const double margin = grid.y_margin_sigmas * smax;
    return linspace(lo - margin, hi + margin, grid.y_points);
}

std::size_t fitted_x_points(const GridSettings& grid, std::size_t d_x) {
    if (grid.x_points != 0) return grid.x_points;
    return d_x == 1 ? 21 : d_x == 2 ? 11 : 5;
}

void run_fit_command(const FitCommand& cmd, const RunConfig& config) {
    const Dataset data = load_data(cmd.data_csv, config);
    fs::create_directories(cmd.out_dir);
    const fs::path manifest_path = cmd.out_dir / "manifest.json";
    const fs::path draws_path = cmd.out_dir / "draws.jsonl";

    FitResult fit;
    fit.eb = select_hyperparams(data, config);
    fit.prior = make_prior(config, fit.eb.clamped_gamma);
    config.chain.validate();

    std::unique_ptr<ChainRunner> runner;
    if (cmd.resume && fs::exists(manifest_path)) {
        nlohmann::json prev;
        try {
            prev = nlohmann::json::parse(read_text_file(manifest_path));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("manifest.json: ") + e.what());
        }
        if (prev.value("config_hash", std::string()) != config.hash()) {
            throw ConfigError("cannot resume: manifest was written with a different config or seed");
        }
        if (prev.at("data").at("n").get<std::size_t>() != data.size()) {
            throw ConfigError("cannot resume: data size differs from the manifest");
        }
        if (prev.value("status", std::string()) == "complete") return;
        std::ifstream din(draws_path);
        PosteriorDraws so_far = din ? read_draws_jsonl(din) : PosteriorDraws{};
        so_far.mode = config.chain.mode;
        so_far.gamma_used = fit.prior.gamma;
        const ChainCheckpoint cp = checkpoint_from_json(prev.at("checkpoint"));
        runner = std::make_unique<ChainRunner>(data, fit.prior, config.chain, cp, std::move(so_far));
    } else {
        runner = std::make_unique<ChainRunner>(data, fit.prior, config.chain);
    }

    const std::size_t total = config.chain.iterations;
    const std::size_t every = cmd.checkpoint_every == 0 ? total : cmd.checkpoint_every;
    while (runner->completed() < total) {
        runner->run_until(std::min(total, runner->completed() + every));
        if (runner->completed() < total) {
            nlohmann::json m = fit_manifest(config, cmd, data, fit);
            m["status"] = "running";
            m["checkpoint"] = to_json(runner->checkpoint());
            write_text_file(draws_path, draws_text(runner->retained()));
            write_text_file(manifest_path, m.dump(2) + "\n");
        }
    }
    fit.draws = runner->finish();

    const auto y_axis = fitted_y_axis(data, fit.draws, config.grid);
    const auto x_nodes = unit_grid(data.d_x, fitted_x_points(config.grid, data.d_x));
    const DensityTable table = posterior_mean_density(fit.draws, x_nodes, y_axis);

    std::ostringstream dens;
    write_density_csv(dens, table);
    write_text_file(cmd.out_dir / "density.csv", dens.str());
    write_text_file(draws_path, draws_text(fit.draws));

    nlohmann::json m = fit_manifest(config, cmd, data, fit);
    m["status"] = "complete";
    m["diagnostics"] = diagnostics_json(fit.draws);
    m["grid"] = {{"x_points", fitted_x_points(config.grid, data.d_x)},
                 {"y_lo", y_axis.front()},
                 {"y_hi", y_axis.back()},
                 {"y_points", y_axis.size()}};
    write_text_file(manifest_path, m.dump(2) + "\n");
}

void run_simulate_command(const RunConfig& config, std::size_t n, const fs::path& out_dir) {
    if (n == 0) throw ConfigError("simulate needs n >= 1");
    RngStream rng(config.chain.seed, 0);
    const Dataset data = generate_dataset(config.truth, n, rng);
    fs::create_directories(out_dir);
    std::ostringstream csv;
    write_dataset_csv(csv, data);
    write_text_file(out_dir / "data.csv", csv.str());
    nlohmann::json m = provenance_json(config);
    m["truth"] = to_json(config.truth);
    m["n"] = n;
    write_text_file(out_dir / "truth.json", m.dump(2) + "\n");
}

nlohmann::json run_eb_command(const std::string& data_csv, const RunConfig& config) {
    const Dataset data = load_data(data_csv, config);
    return to_json(select_hyperparams(data, config));
}

nlohmann::json run_metrics_command(const std::string& table_a, const std::string& table_b, double tolerance) {
    const DensityTable a = read_density_csv(table_a);
    const DensityTable b = read_density_csv(table_b);
    if (a.d_x != b.d_x || a.d_y != b.d_y || a.x_nodes != b.x_nodes || a.y_axis != b.y_axis) {
        throw DataError("density tables are not on a common grid");
    }
    nlohmann::json out = to_json(compare_tables(a, b, tolerance));
    out["x_nodes"] = a.x_count();
    out["y_nodes"] = a.y_count();
    return out;
}

} // namespace condense
