#include "condense/config.hpp"

#include "condense/draws_io.hpp"
#include "condense/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

namespace condense {

namespace {

namespace pt = boost::property_tree;

template <class T>
T parse_value(const std::string& section, const std::string& key, const std::string& raw) {
    T v{};
    const char* b = raw.data();
    const char* e = raw.data() + raw.size();
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) throw ConfigError("[" + section + "] " + key + ": cannot parse '" + raw + "'");
    return v;
}

bool parse_bool(const std::string& section, const std::string& key, const std::string& raw) {
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    throw ConfigError("[" + section + "] " + key + ": expected true/false, found '" + raw + "'");
}

std::vector<double> parse_list(const std::string& section, const std::string& key, const std::string& raw) {
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(' ');
        const auto e = item.find_last_not_of(' ');
        if (b == std::string::npos) throw ConfigError("[" + section + "] " + key + ": empty list item");
        out.push_back(parse_value<double>(section, key, item.substr(b, e - b + 1)));
    }
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& setters() {
    static const std::map<std::string, std::map<std::string, Setter>> table = [] {
        std::map<std::string, std::map<std::string, Setter>> t;
        t["data"]["d_x"] = [](RunConfig& c, const std::string& v) { c.d_x = parse_value<std::size_t>("data", "d_x", v); };
        t["data"]["d_y"] = [](RunConfig& c, const std::string& v) { c.d_y = parse_value<std::size_t>("data", "d_y", v); };

        t["truth"]["family"] = [](RunConfig& c, const std::string& v) {
            const auto f = truth_family_from_string(v);
            const auto keep = c.truth;
            c.truth = make_truth(f);
            if (f == TruthFamily::custom) c.truth.custom = keep.custom;
        };
        t["truth"]["d_x"] = [](RunConfig& c, const std::string& v) { c.truth.d_x = parse_value<std::size_t>("truth", "d_x", v); };
        t["truth"]["relevant_dims"] = [](RunConfig& c, const std::string& v) {
            c.truth.relevant_dims = parse_value<std::size_t>("truth", "relevant_dims", v);
        };
        t["truth"]["offset"] = [](RunConfig& c, const std::string& v) { c.truth.custom.offset = parse_value<double>("truth", "offset", v); };
        t["truth"]["amplitude"] = [](RunConfig& c, const std::string& v) {
            c.truth.custom.amplitude = parse_value<double>("truth", "amplitude", v);
        };
        t["truth"]["noise_sd"] = [](RunConfig& c, const std::string& v) {
            c.truth.custom.noise_sd = parse_value<double>("truth", "noise_sd", v);
        };

        t["prior"]["alpha_shape"] = [](RunConfig& c, const std::string& v) { c.prior.alpha_shape = parse_value<double>("prior", "alpha_shape", v); };
        t["prior"]["c0"] = [](RunConfig& c, const std::string& v) { c.prior.c0 = parse_value<double>("prior", "c0", v); };
        t["prior"]["truncation"] = [](RunConfig& c, const std::string& v) { c.prior.truncation = parse_value<std::size_t>("prior", "truncation", v); };
        t["prior"]["c_l"] = [](RunConfig& c, const std::string& v) { c.prior.box.c_l = parse_value<double>("prior", "c_l", v); };
        t["prior"]["b_exponent"] = [](RunConfig& c, const std::string& v) { c.prior.box.b_exponent = parse_value<double>("prior", "b_exponent", v); };
        t["prior"]["t2_lo_exponent"] = [](RunConfig& c, const std::string& v) { c.prior.box.t2_lo_exponent = parse_value<double>("prior", "t2_lo_exponent", v); };
        t["prior"]["t2_hi_exponent"] = [](RunConfig& c, const std::string& v) { c.prior.box.t2_hi_exponent = parse_value<double>("prior", "t2_hi_exponent", v); };
        auto fixed = [](RunConfig& c) -> HyperParams& {
            if (!c.prior.fixed_gamma) c.prior.fixed_gamma = HyperParams{1.0, {}, 1.0};
            return *c.prior.fixed_gamma;
        };
        t["prior"]["beta"] = [fixed](RunConfig& c, const std::string& v) { fixed(c).beta_scale = parse_value<double>("prior", "beta", v); };
        t["prior"]["lambda"] = [fixed](RunConfig& c, const std::string& v) { fixed(c).lambda = parse_list("prior", "lambda", v); };
        t["prior"]["tau2"] = [fixed](RunConfig& c, const std::string& v) { fixed(c).tau2 = parse_value<double>("prior", "tau2", v); };

        t["chain"]["iterations"] = [](RunConfig& c, const std::string& v) { c.chain.iterations = parse_value<std::size_t>("chain", "iterations", v); };
        t["chain"]["burn_in"] = [](RunConfig& c, const std::string& v) { c.chain.burn_in = parse_value<std::size_t>("chain", "burn_in", v); };
        t["chain"]["thin"] = [](RunConfig& c, const std::string& v) { c.chain.thin = parse_value<std::size_t>("chain", "thin", v); };
        t["chain"]["mode"] = [](RunConfig& c, const std::string& v) { c.chain.mode = likelihood_mode_from_string(v); };
        t["chain"]["log_sigma_step"] = [](RunConfig& c, const std::string& v) { c.chain.proposal_scales.log_sigma_step = parse_value<double>("chain", "log_sigma_step", v); };
        t["chain"]["mu_x_step"] = [](RunConfig& c, const std::string& v) { c.chain.proposal_scales.mu_x_step = parse_value<double>("chain", "mu_x_step", v); };
        t["chain"]["stick_logit_step"] = [](RunConfig& c, const std::string& v) { c.chain.proposal_scales.stick_logit_step = parse_value<double>("chain", "stick_logit_step", v); };
        t["chain"]["adapt_burnin"] = [](RunConfig& c, const std::string& v) { c.chain.adapt_burnin = parse_bool("chain", "adapt_burnin", v); };
        t["chain"]["seed"] = [](RunConfig& c, const std::string& v) { c.chain.seed = parse_value<std::uint64_t>("chain", "seed", v); };
        t["chain"]["timeout_seconds"] = [](RunConfig& c, const std::string& v) { c.chain.timeout_seconds = parse_value<double>("chain", "timeout_seconds", v); };
        t["chain"]["min_retained"] = [](RunConfig& c, const std::string& v) { c.chain.min_retained = parse_value<std::size_t>("chain", "min_retained", v); };

        t["grid"]["x_points"] = [](RunConfig& c, const std::string& v) { c.grid.x_points = parse_value<std::size_t>("grid", "x_points", v); };
        t["grid"]["y_points"] = [](RunConfig& c, const std::string& v) { c.grid.y_points = parse_value<std::size_t>("grid", "y_points", v); };
        t["grid"]["y_margin_sigmas"] = [](RunConfig& c, const std::string& v) { c.grid.y_margin_sigmas = parse_value<double>("grid", "y_margin_sigmas", v); };

        t["study"]["n_grid"] = [](RunConfig& c, const std::string& v) {
            c.study.n_grid.clear();
            for (double n : parse_list("study", "n_grid", v)) {
                if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("[study] n_grid: sizes must be positive integers");
                c.study.n_grid.push_back(static_cast<std::size_t>(n));
            }
        };
        t["study"]["replicates"] = [](RunConfig& c, const std::string& v) { c.study.replicates = parse_value<std::size_t>("study", "replicates", v); };
        t["study"]["beta_assumed"] = [](RunConfig& c, const std::string& v) { c.study.beta_assumed = parse_value<double>("study", "beta_assumed", v); };
        t["study"]["workers"] = [](RunConfig& c, const std::string& v) { c.study.workers = parse_value<std::size_t>("study", "workers", v); };
        t["study"]["max_failure_fraction"] = [](RunConfig& c, const std::string& v) { c.study.max_failure_fraction = parse_value<double>("study", "max_failure_fraction", v); };
        t["study"]["eval_x_points"] = [](RunConfig& c, const std::string& v) { c.study.eval_x_points = parse_value<std::size_t>("study", "eval_x_points", v); };
        t["study"]["eval_mc_points"] = [](RunConfig& c, const std::string& v) { c.study.eval_mc_points = parse_value<std::size_t>("study", "eval_mc_points", v); };
        t["study"]["eval_y_points"] = [](RunConfig& c, const std::string& v) { c.study.eval_y_points = parse_value<std::size_t>("study", "eval_y_points", v); };
        t["study"]["base_truth"] = [](RunConfig& c, const std::string& v) { c.study.base_truth = v; };
        t["study"]["embedded_truth"] = [](RunConfig& c, const std::string& v) { c.study.embedded_truth = v; };
        return t;
    }();
    return table;
}

void validate(const RunConfig& c) {
    if (c.d_x == 0 || c.d_y == 0) throw ConfigError("[data] d_x and d_y must be positive");
    if (!(c.prior.alpha_shape > 1.0)) throw ConfigError("[prior] alpha_shape must exceed 1");
    if (!(c.prior.c0 > 0.0)) throw ConfigError("[prior] c0 must be positive");
    if (c.prior.truncation == 1) throw ConfigError("[prior] truncation must be 0 (auto) or >= 2");
    if (c.prior.fixed_gamma) {
        try {
            c.prior.fixed_gamma->validate();
        } catch (const DomainError& e) {
            throw ConfigError(std::string("[prior] fixed hyper-parameters: ") + e.what());
        }
    }
    if (c.grid.x_points == 1 || c.grid.y_points < 2) throw ConfigError("[grid] needs x_points = 0 (auto) or >= 2, and y_points >= 2");
    if (c.study.replicates == 0) throw ConfigError("[study] replicates must be positive");
    if (c.study.eval_x_points == 0 || c.study.eval_mc_points == 0 || c.study.eval_y_points < 2) throw ConfigError("[study] evaluation grid too small");
    if (!(c.study.beta_assumed > 0.0)) throw ConfigError("[study] beta_assumed must be positive");
    try {
        c.truth.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("[truth] ") + e.what());
    }
}

} // namespace

RunConfig default_run_config() {
    RunConfig c;
    c.truth = make_truth(TruthFamily::T1_sine_gaussian);
    return c;
}

RunConfig parse_run_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    RunConfig c = default_run_config();
    const auto& table = setters();
    // family first so that later truth keys refine the family defaults
    for (const auto& [section, body] : tree) {
        if (section == "truth" && body.count("family")) table.at("truth").at("family")(c, body.get<std::string>("family"));
    }
    for (const auto& [section, body] : tree) {
        const auto sec = table.find(section);
        if (sec == table.end()) throw ConfigError("unknown config section [" + section + "]");
        if (!body.data().empty() && body.empty()) throw ConfigError("key '" + section + "' outside any section");
        for (const auto& [key, value] : body) {
            if (section == "truth" && key == "family") continue;
            const auto it = sec->second.find(key);
            if (it == sec->second.end()) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
            it->second(c, value.get_value<std::string>());
        }
    }
    validate(c);
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json prior_j = {{"alpha_shape", prior.alpha_shape},
                              {"c0", prior.c0},
                              {"truncation", prior.truncation},
                              {"c_l", prior.box.c_l},
                              {"b_exponent", prior.box.b_exponent},
                              {"t2_lo_exponent", prior.box.t2_lo_exponent},
                              {"t2_hi_exponent", prior.box.t2_hi_exponent}};
    if (prior.fixed_gamma) prior_j["fixed_gamma"] = condense::to_json(*prior.fixed_gamma);
    return {{"data", {{"d_x", d_x}, {"d_y", d_y}}},
            {"truth", condense::to_json(truth)},
            {"prior", prior_j},
            {"chain", condense::to_json(chain)},
            {"grid", {{"x_points", grid.x_points}, {"y_points", grid.y_points}, {"y_margin_sigmas", grid.y_margin_sigmas}}},
            {"study",
             {{"n_grid", study.n_grid},
              {"replicates", study.replicates},
              {"beta_assumed", study.beta_assumed},
              {"max_failure_fraction", study.max_failure_fraction},
              {"eval_x_points", study.eval_x_points},
              {"eval_mc_points", study.eval_mc_points},
              {"eval_y_points", study.eval_y_points},
              {"base_truth", study.base_truth},
              {"embedded_truth", study.embedded_truth}}}};
}

std::string RunConfig::hash() const {
    // FNV-1a over the canonical rendering
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_json().dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

PriorConfig make_prior(const RunConfig& config, const HyperParams& gamma) {
    PriorConfig p;
    p.alpha_shape = config.prior.alpha_shape;
    p.c0 = config.prior.c0;
    p.d_x = config.d_x;
    p.d_y = config.d_y;
    p.truncation = config.prior.truncation == 0 ? PriorConfig::default_truncation(config.prior.c0)
                                                : config.prior.truncation;
    p.gamma = gamma;
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("prior: ") + e.what());
    }
    return p;
}

} // namespace condense
