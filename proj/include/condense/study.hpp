#pragma once

#include "condense/config.hpp"
#include "condense/metrics.hpp"
#include "condense/simulation.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace condense {

struct StudyRow {
    std::size_t n = 0;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    std::string mode;
    bool ok = false;
    std::string error;  // failure message when !ok
    double l1_error = 0.0;
    double hellinger = 0.0;
    bool clamped = false;  // any EB clamp flag fired
    double wall_time = 0.0;
};

struct StudyResult {
    TruthSpec truth;
    std::vector<StudyRow> rows;
    std::vector<std::size_t> n_values;      // distinct n with at least one successful row
    std::vector<double> median_l1;          // per entry of n_values
    std::vector<double> median_hellinger;
    double slope = 0.0;                     // OLS of log median l1 on log n
    double slope_ci_lo = 0.0;
    double slope_ci_hi = 0.0;
    double theoretical_exponent = 0.0;      // -beta / (2 beta + d_used)
    std::size_t d_used = 0;                 // relevant_dims + d_y
    std::size_t failures = 0;

    double failure_fraction() const;
    double median_at(std::size_t n) const;  // NaN when n has no successful row
};

// Per-row seed, shared by every arm of a study so arms see the same streams.
std::uint64_t row_seed(std::uint64_t base_seed, std::size_t n, std::size_t replicate);

// Bounded y range holding all but a negligible part of the truth's mass.
std::vector<double> truth_y_axis(const TruthSpec& truth, std::size_t points);

// x quadrature used against the truth: midpoint grid for d_x = 1, fixed
// Monte Carlo design draws otherwise.
QuadratureSpec truth_quadrature(const TruthSpec& truth, const StudySettings& study, std::uint64_t base_seed);

// Simulate, fit and score one (n, replicate) cell. Never throws: failures are
// reported in the row.
StudyRow run_study_row(const TruthSpec& truth, const RunConfig& config, const QuadratureSpec& quad,
                       std::size_t n, std::size_t replicate);

// Throws ConfigError when the n grid has fewer than 3 distinct values.
StudyResult rate_study(const TruthSpec& truth, const RunConfig& config);

// Fills medians, slope, CI and exponent from the rows.
void summarize_study(StudyResult& result, double beta_assumed);

struct DimredResult {
    StudyResult base;
    StudyResult embedded;
    std::vector<std::size_t> n_values;
    std::vector<double> error_ratio;  // median embedded / median base
};

DimredResult dimred_study(const RunConfig& config);

// Truth named in [study] base_truth / embedded_truth: the [truth] section when
// the family matches it, the built-in preset otherwise.
TruthSpec study_truth(const std::string& name, const RunConfig& config);

// L1 distance between the fitted conditional densities at two covariate values.
double slice_gap(const PosteriorDraws& draws, std::span<const double> x_a, std::span<const double> x_b,
                 std::span<const double> y_axis);

nlohmann::json to_json(const StudyResult& r);
nlohmann::json to_json(const DimredResult& r);

// result.csv, result.json and timing.csv (wall times kept apart so the
// primary outputs are reproducible byte for byte).
void write_study_outputs(const std::filesystem::path& out_dir, const StudyResult& r, const RunConfig& config);
void write_dimred_outputs(const std::filesystem::path& out_dir, const DimredResult& r, const RunConfig& config);

} // namespace condense
