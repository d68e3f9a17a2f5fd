#pragma once

#include "condense/config.hpp"
#include "condense/density_table.hpp"
#include "condense/empirical_bayes.hpp"
#include "condense/inference.hpp"
#include "condense/metrics.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace condense {

inline constexpr const char* kVersion = CONDENSE_VERSION;

// EB estimation followed by clamping, or the user-fixed hyper-parameters
// (reported with raw == clamped and no flags).
EBReport select_hyperparams(const Dataset& data, const RunConfig& config);

struct FitResult {
    EBReport eb;
    PriorConfig prior;
    PosteriorDraws draws;
};

// In-memory fit; config.chain.seed drives the chain.
FitResult fit_dataset(const Dataset& data, const RunConfig& config);

// Data range in each response coordinate widened by margin * max posterior sigma.
std::vector<double> fitted_y_axis(const Dataset& data, const PosteriorDraws& draws, const GridSettings& grid);
// Per-dimension x points used for density.csv (grid.x_points, reduced for d_x > 1 when left at 0).
std::size_t fitted_x_points(const GridSettings& grid, std::size_t d_x);

struct FitCommand {
    std::string data_csv;
    std::filesystem::path out_dir;
    bool resume = false;
    // Sweeps between checkpoints written to manifest.json; 0 writes only at the end.
    std::size_t checkpoint_every = 2000;
};

// Writes density.csv, draws.jsonl and manifest.json into out_dir.
void run_fit_command(const FitCommand& cmd, const RunConfig& config);

// Writes data.csv and truth.json.
void run_simulate_command(const RunConfig& config, std::size_t n, const std::filesystem::path& out_dir);

nlohmann::json run_eb_command(const std::string& data_csv, const RunConfig& config);

nlohmann::json run_metrics_command(const std::string& table_a, const std::string& table_b, double tolerance);

// Common provenance block: version, config hash, seed.
nlohmann::json provenance_json(const RunConfig& config);

// Writes text atomically (temporary file, then rename).
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace condense
