#include "condense/study.hpp"

#include "condense/dataset.hpp"
#include "condense/errors.hpp"
#include "condense/kernels.hpp"
#include "condense/pipeline.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace condense {

namespace fs = std::filesystem;

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

std::string rows_csv(const std::vector<StudyRow>& rows, const std::string& arm) {
    std::ostringstream os;
    if (!arm.empty()) os << "arm,";
    os << "n,replicate,seed,mode,status,l1_error,hellinger,clamped\n";
    for (const auto& r : rows) {
        if (!arm.empty()) os << arm << ',';
        os << r.n << ',' << r.replicate << ',' << r.seed << ',' << r.mode << ',' << (r.ok ? "ok" : "failed") << ','
           << (r.ok ? format_double(r.l1_error) : "nan") << ',' << (r.ok ? format_double(r.hellinger) : "nan")
           << ',' << (r.clamped ? 1 : 0) << '\n';
    }
    return os.str();
}

std::string timing_csv(const std::vector<StudyRow>& rows, const std::string& arm) {
    std::ostringstream os;
    if (!arm.empty()) os << "arm,";
    os << "n,replicate,wall_time\n";
    for (const auto& r : rows) {
        if (!arm.empty()) os << arm << ',';
        os << r.n << ',' << r.replicate << ',' << r.wall_time << '\n';
    }
    return os.str();
}

} // namespace

double StudyResult::failure_fraction() const {
    return rows.empty() ? 0.0 : static_cast<double>(failures) / static_cast<double>(rows.size());
}

double StudyResult::median_at(std::size_t n) const {
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        if (n_values[i] == n) return median_l1[i];
    }
    return std::numeric_limits<double>::quiet_NaN();
}

std::uint64_t row_seed(std::uint64_t base_seed, std::size_t n, std::size_t replicate) {
    return mix_seed(mix_seed(base_seed, n), replicate);
}

std::vector<double> truth_y_axis(const TruthSpec& truth, std::size_t points) {
    double lo = 0.0, hi = 0.0;
    switch (truth.family) {
    case TruthFamily::T1_sine_gaussian:
    case TruthFamily::T3_irrelevant:
        lo = -1.0 - 8.0 * 0.3;
        hi = 1.0 + 8.0 * 0.3;
        break;
    case TruthFamily::T2_xmix:
        lo = -1.0 - 8.0 * 0.25;
        hi = 1.0 + 8.0 * 0.5;
        break;
    case TruthFamily::custom: {
        const double a = truth.relevant_dims == 0 ? 0.0 : std::abs(truth.custom.amplitude);
        lo = truth.custom.offset - a - 8.0 * truth.custom.noise_sd;
        hi = truth.custom.offset + a + 8.0 * truth.custom.noise_sd;
        break;
    }
    }
    return linspace(lo, hi, points);
}

QuadratureSpec truth_quadrature(const TruthSpec& truth, const StudySettings& study, std::uint64_t base_seed) {
    auto y_axis = truth_y_axis(truth, study.eval_y_points);
    if (truth.d_x == 1) {
        return QuadratureSpec::tensor_grid(
            1, truth.d_y, study.eval_x_points, [&](std::span<const double> x) { return design_density(truth, x); },
            std::move(y_axis));
    }
    RngStream rng(base_seed, 0x5eed);
    std::vector<double> nodes(study.eval_mc_points * truth.d_x);
    for (double& v : nodes) v = rng.uniform();
    return QuadratureSpec::uniform_weights(truth.d_x, truth.d_y, std::move(nodes), std::move(y_axis));
}

StudyRow run_study_row(const TruthSpec& truth, const RunConfig& config, const QuadratureSpec& quad,
                       std::size_t n, std::size_t replicate) {
    StudyRow row;
    row.n = n;
    row.replicate = replicate;
    row.seed = row_seed(config.chain.seed, n, replicate);
    row.mode = to_string(config.chain.mode);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        RunConfig cfg = config;
        cfg.d_x = truth.d_x;
        cfg.d_y = truth.d_y;
        cfg.chain.seed = row.seed;
        RngStream data_rng(row.seed, 0);
        const Dataset data = generate_dataset(truth, n, data_rng);
        const FitResult fit = fit_dataset(data, cfg);
        row.clamped = fit.eb.any_clamped();

        const DensityTable fitted = posterior_mean_density(fit.draws, quad.x_nodes, quad.y_axis);
        const DensityTable exact = tabulate(
            [&](std::span<const double> x, std::span<const double> y) { return truth_density(truth, x, y); },
            truth.d_x, truth.d_y, quad.x_nodes, quad.y_axis);
        const MetricSet m = compare_tables(exact, fitted, quad.x_weights, quad.tolerance);
        row.l1_error = m.l1;
        row.hellinger = m.hellinger;
        row.ok = std::isfinite(m.l1) && std::isfinite(m.hellinger);
        if (!row.ok) row.error = "non-finite error";
    } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
    }
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

void summarize_study(StudyResult& r, double beta_assumed) {
    std::map<std::size_t, std::vector<double>> l1, hel;
    r.failures = 0;
    for (const auto& row : r.rows) {
        if (!row.ok) {
            ++r.failures;
            continue;
        }
        l1[row.n].push_back(row.l1_error);
        hel[row.n].push_back(row.hellinger);
    }
    r.n_values.clear();
    r.median_l1.clear();
    r.median_hellinger.clear();
    for (const auto& [n, v] : l1) {
        r.n_values.push_back(n);
        r.median_l1.push_back(median(v));
        r.median_hellinger.push_back(median(hel[n]));
    }
    r.d_used = r.truth.relevant_dims + r.truth.d_y;
    r.theoretical_exponent = -beta_assumed / (2.0 * beta_assumed + static_cast<double>(r.d_used));

    const std::size_t k = r.n_values.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.slope = r.slope_ci_lo = r.slope_ci_hi = nan;
    if (k < 2) return;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        mx += std::log(static_cast<double>(r.n_values[i]));
        my += std::log(r.median_l1[i]);
    }
    mx /= static_cast<double>(k);
    my /= static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double dx = std::log(static_cast<double>(r.n_values[i])) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(r.median_l1[i]) - my);
    }
    r.slope = sxy / sxx;
    if (k < 3) return;
    double sse = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double fit = my + r.slope * (std::log(static_cast<double>(r.n_values[i])) - mx);
        const double e = std::log(r.median_l1[i]) - fit;
        sse += e * e;
    }
    const double df = static_cast<double>(k - 2);
    const double se = std::sqrt(sse / df / sxx);
    const double t = boost::math::quantile(boost::math::students_t(df), 0.975);
    r.slope_ci_lo = r.slope - t * se;
    r.slope_ci_hi = r.slope + t * se;
}

StudyResult rate_study(const TruthSpec& truth, const RunConfig& config) {
    truth.validate();
    const std::set<std::size_t> distinct(config.study.n_grid.begin(), config.study.n_grid.end());
    if (distinct.size() < 3) throw ConfigError("[study] n_grid needs at least 3 distinct sample sizes");
    if (config.study.replicates == 0) throw ConfigError("[study] replicates must be positive");
    config.chain.validate();

    const QuadratureSpec quad = truth_quadrature(truth, config.study, config.chain.seed);
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t n : config.study.n_grid) {
        for (std::size_t rep = 0; rep < config.study.replicates; ++rep) cells.emplace_back(n, rep);
    }

    StudyResult result;
    result.truth = truth;
    result.rows.resize(cells.size());
    const int workers = static_cast<int>(std::max<std::size_t>(1, config.study.workers));
    const long count = static_cast<long>(cells.size());
    if (workers > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
        for (long i = 0; i < count; ++i) {
            result.rows[i] = run_study_row(truth, config, quad, cells[i].first, cells[i].second);
        }
    } else {
        for (long i = 0; i < count; ++i) {
            result.rows[i] = run_study_row(truth, config, quad, cells[i].first, cells[i].second);
        }
    }
    summarize_study(result, config.study.beta_assumed);
    return result;
}

TruthSpec study_truth(const std::string& name, const RunConfig& config) {
    const TruthFamily f = truth_family_from_string(name);
    if (f == config.truth.family) return config.truth;
    return make_truth(f);
}

DimredResult dimred_study(const RunConfig& config) {
    const TruthSpec base = study_truth(config.study.base_truth, config);
    const TruthSpec embedded = study_truth(config.study.embedded_truth, config);
    if (base.d_y != embedded.d_y) throw ConfigError("[study] paired truths must share d_y");
    if (base.relevant_dims != embedded.relevant_dims) {
        throw ConfigError("[study] paired truths must have the same number of relevant covariates");
    }
    DimredResult out;
    out.base = rate_study(base, config);
    out.embedded = rate_study(embedded, config);
    for (std::size_t n : out.base.n_values) {
        const double e = out.embedded.median_at(n);
        if (std::isnan(e)) continue;
        out.n_values.push_back(n);
        out.error_ratio.push_back(e / out.base.median_at(n));
    }
    return out;
}

double slice_gap(const PosteriorDraws& draws, std::span<const double> x_a, std::span<const double> x_b,
                 std::span<const double> y_axis) {
    if (x_a.size() != x_b.size()) throw DomainError("covariate points differ in dimension");
    std::vector<double> nodes(x_a.begin(), x_a.end());
    nodes.insert(nodes.end(), x_b.begin(), x_b.end());
    const DensityTable t = posterior_mean_density(draws, nodes, y_axis);
    const auto a = t.slice(0);
    const auto b = t.slice(1);
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
    return s * t.cell_volume();
}

nlohmann::json to_json(const StudyResult& r) {
    auto num = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return nullptr;
    };
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        nlohmann::json j = {{"n", row.n},
                            {"replicate", row.replicate},
                            {"seed", row.seed},
                            {"mode", row.mode},
                            {"status", row.ok ? "ok" : "failed"},
                            {"clamped", row.clamped}};
        if (row.ok) {
            j["l1_error"] = row.l1_error;
            j["hellinger"] = row.hellinger;
        } else {
            j["error"] = row.error;
        }
        rows.push_back(std::move(j));
    }
    nlohmann::json medians = nlohmann::json::array();
    for (std::size_t i = 0; i < r.n_values.size(); ++i) {
        medians.push_back({{"n", r.n_values[i]}, {"l1_error", r.median_l1[i]}, {"hellinger", r.median_hellinger[i]}});
    }
    return {{"truth", to_json(r.truth)},
            {"rows", rows},
            {"medians", medians},
            {"slope", num(r.slope)},
            {"slope_ci", {num(r.slope_ci_lo), num(r.slope_ci_hi)}},
            {"theoretical_exponent", r.theoretical_exponent},
            {"d_used", r.d_used},
            {"failures", r.failures},
            {"failure_fraction", r.failure_fraction()}};
}

nlohmann::json to_json(const DimredResult& r) {
    nlohmann::json ratios = nlohmann::json::array();
    for (std::size_t i = 0; i < r.n_values.size(); ++i) {
        ratios.push_back({{"n", r.n_values[i]}, {"error_ratio", r.error_ratio[i]}});
    }
    return {{"base", to_json(r.base)}, {"embedded", to_json(r.embedded)}, {"ratios", ratios}};
}

void write_study_outputs(const fs::path& out_dir, const StudyResult& r, const RunConfig& config) {
    fs::create_directories(out_dir);
    nlohmann::json j = provenance_json(config);
    j["config"] = config.to_json();
    j["study"] = to_json(r);
    write_text_file(out_dir / "result.json", j.dump(2) + "\n");
    write_text_file(out_dir / "result.csv", rows_csv(r.rows, ""));
    write_text_file(out_dir / "timing.csv", timing_csv(r.rows, ""));
}

void write_dimred_outputs(const fs::path& out_dir, const DimredResult& r, const RunConfig& config) {
    fs::create_directories(out_dir);
    nlohmann::json j = provenance_json(config);
    j["config"] = config.to_json();
    j["study"] = to_json(r);
    write_text_file(out_dir / "result.json", j.dump(2) + "\n");
    std::string csv = rows_csv(r.base.rows, "base");
    const std::string emb = rows_csv(r.embedded.rows, "embedded");
    csv += emb.substr(emb.find('\n') + 1);
    write_text_file(out_dir / "result.csv", csv);
    std::string timing = timing_csv(r.base.rows, "base");
    const std::string temb = timing_csv(r.embedded.rows, "embedded");
    timing += temb.substr(temb.find('\n') + 1);
    write_text_file(out_dir / "timing.csv", timing);
}

} // namespace condense
