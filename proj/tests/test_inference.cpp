#include "condense/distributions.hpp"
#include "condense/errors.hpp"
#include "condense/inference.hpp"
#include "condense/kernels.hpp"
#include "condense/metrics.hpp"
#include "condense/simulation.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace condense;

namespace {

Dataset dataset_1d(const std::vector<std::pair<double, double>>& xy) {
    Dataset d;
    for (const auto& [x, y] : xy) d.push_back(std::vector<double>{x}, std::vector<double>{y});
    return d;
}

PriorConfig prior_1d(std::size_t n_atoms, HyperParams g = HyperParams{0.5, {0.0}, 1.0}) {
    PriorConfig p;
    p.truncation = n_atoms;
    p.gamma = std::move(g);
    return p;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

} // namespace

TEST_CASE("allocation with one component") {
    const auto s = make_state({1.0}, {0.5}, {0.0}, 1.0, 1, 1);
    const auto d = dataset_1d({{0.1, 3.0}, {0.9, -2.0}, {0.5, 0.0}});
    RngStream r(1, 0);
    const auto a = sample_allocations(s, d, r);
    CHECK(a == std::vector<std::size_t>{0, 0, 0});
}

TEST_CASE("allocation follows the categorical full conditional") {
    // two components, mu_y = -10 / +10, sigma 0.5: data near +10
    const auto s = make_state({0.5, 1.0}, {0.5, 0.5}, {-10.0, 10.0}, 0.5, 1, 1);
    const auto d = dataset_1d({{0.4, 9.8}, {0.6, 10.3}, {0.5, 10.0}});
    RngStream r(2, 0);
    std::size_t plus = 0, total = 0;
    for (int t = 0; t < 2000; ++t) {
        for (auto a : sample_allocations(s, d, r)) {
            plus += a == 1;
            ++total;
        }
    }
    CHECK(static_cast<double>(plus) / total >= 0.999);

    // symmetric state and datum
    const auto sym = make_state({0.5, 1.0}, {0.5, 0.5}, {-1.0, 1.0}, 1.0, 1, 1);
    const auto d0 = dataset_1d({{0.5, 0.0}});
    std::size_t ones = 0;
    const int m = 10000;
    for (int t = 0; t < m; ++t) ones += sample_allocations(sym, d0, r)[0];
    CHECK(std::abs(static_cast<double>(ones) / m - 0.5) < 3.0 * std::sqrt(0.25 / m));
}

TEST_CASE("allocation probabilities match the closed form") {
    // p = (0.3, 0.7), x atoms 0.2 / 0.8, y atoms 0 / 1, sigma 0.4, datum (0.5, 0.6)
    const auto s = make_state({0.3, 1.0}, {0.2, 0.8}, {0.0, 1.0}, 0.4, 1, 1);
    const auto d = dataset_1d({{0.5, 0.6}});
    auto k = [](double z) { return std::exp(-z * z / (2 * 0.16)); };
    const double w0 = 0.3 * k(0.3) * k(0.6), w1 = 0.7 * k(0.3) * k(0.4);
    const double p1 = w1 / (w0 + w1);
    RngStream r(3, 0);
    const int m = 100000;
    std::size_t ones = 0;
    for (int t = 0; t < m; ++t) ones += sample_allocations(s, d, r)[0];
    CHECK(std::abs(static_cast<double>(ones) / m - p1) < 3.0 * std::sqrt(p1 * (1 - p1) / m));
}

TEST_CASE("conjugate response atom update") {
    RngStream r(4, 0);
    // empty component: prior draw N(lambda, tau2)
    {
        const auto s = make_state({0.5, 1.0}, {0.5, 0.5}, {0.0, 0.0}, 1.0, 1, 1);
        const auto d = dataset_1d({{0.5, 3.0}});
        const std::vector<std::size_t> alloc{0};
        const HyperParams g{1.0, {2.0}, 9.0};
        std::vector<double> v(100000);
        for (auto& x : v) x = update_mu_y(s, alloc, d, g, r)[1];
        std::sort(v.begin(), v.end());
        CHECK(ks_passes(ks_statistic(v, [](double y) { return normal_cdf(y, 2.0, 3.0); }), v.size()));
    }
    // lambda 0, tau2 1, sigma 1, one datum y = 2 -> N(1, 1/2)
    {
        const auto s = make_state({1.0}, {0.5}, {0.0}, 1.0, 1, 1);
        const auto d = dataset_1d({{0.5, 2.0}});
        const std::vector<std::size_t> alloc{0};
        const HyperParams g{1.0, {0.0}, 1.0};
        std::vector<double> v(100000);
        for (auto& x : v) x = update_mu_y(s, alloc, d, g, r)[0];
        std::sort(v.begin(), v.end());
        CHECK(ks_passes(ks_statistic(v, [](double y) { return normal_cdf(y, 1.0, std::sqrt(0.5)); }), v.size()));
    }
    // diffuse base measure: conditional mean tends to the component average
    {
        const auto s = make_state({1.0}, {0.5}, {0.0}, 0.1, 1, 1);
        const auto d = dataset_1d({{0.1, 1.0}, {0.2, 2.0}, {0.3, 4.5}, {0.4, -0.5}});
        const std::vector<std::size_t> alloc{0, 0, 0, 0};
        const HyperParams g{1.0, {0.0}, 1e8};
        std::vector<double> v(100000);
        for (auto& x : v) x = update_mu_y(s, alloc, d, g, r)[0];
        CHECK(std::abs(mean_of(v) - 1.75) < 1e-3);
    }
}

TEST_CASE("conjugate stick update") {
    RngStream r(5, 0);
    const std::vector<std::size_t> counts{3, 1};
    std::vector<double> v(100000);
    for (auto& x : v) {
        const auto st = sample_sticks_conjugate(counts, 1.0, r);
        REQUIRE(st.back() == 1.0);
        x = st[0];
    }
    std::sort(v.begin(), v.end());
    // Beta(4, 2) cdf
    CHECK(ks_passes(ks_statistic(v, [](double x) { return 5 * std::pow(x, 4) - 4 * std::pow(x, 5); }), v.size()));
}

TEST_CASE("allocation counts") {
    const std::vector<std::size_t> a{0, 2, 2, 1, 2};
    CHECK(allocation_counts(a, 4) == std::vector<std::size_t>{1, 1, 3, 0});
}

TEST_CASE("chain config validation") {
    ChainConfig c;
    c.iterations = 1000;
    c.burn_in = 500;
    c.thin = 10;
    CHECK_THROWS_AS(c.validate(), ConfigError);  // 50 retained
    c.min_retained = 50;
    CHECK_NOTHROW(c.validate());
    c.burn_in = 1000;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.burn_in = 0;
    c.thin = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(likelihood_mode_from_string("joint_fit") == LikelihoodMode::joint_fit);
    CHECK_THROWS_AS(likelihood_mode_from_string("exact"), ConfigError);
}

TEST_CASE("prior reproduction with no data") {
    for (auto mode : {LikelihoodMode::conditional_likelihood, LikelihoodMode::joint_fit}) {
        PriorConfig p = prior_1d(5, HyperParams{2.0, {1.0}, 4.0});
        p.c0 = 1.5;
        ChainConfig c;
        c.mode = mode;
        c.burn_in = 2000;
        c.thin = 25;
        c.iterations = c.burn_in + 2000 * c.thin;
        c.seed = 17;
        const auto draws = run_chain(Dataset{}, p, c);
        REQUIRE(draws.draws.size() == 2000);
        std::vector<double> sig, v1, mu1;
        for (const auto& s : draws.draws) {
            sig.push_back(s.sigma);
            v1.push_back(s.sticks[0]);
            mu1.push_back(s.mu_y[0]);
        }
        std::sort(sig.begin(), sig.end());
        std::sort(v1.begin(), v1.end());
        std::sort(mu1.begin(), mu1.end());
        CAPTURE(to_string(mode));
        CHECK(ks_passes(ks_statistic(sig, [](double s) { return inverse_gamma_cdf(s, 3.0, 2.0); }), sig.size()));
        CHECK(ks_passes(ks_statistic(v1, [](double v) { return 1.0 - std::pow(1.0 - v, 1.5); }), v1.size()));
        CHECK(ks_passes(ks_statistic(mu1, [](double y) { return normal_cdf(y, 1.0, 2.0); }), mu1.size()));
    }
}

TEST_CASE("chains are deterministic and retained states are valid") {
    RngStream r(6, 0);
    const TruthSpec t = make_truth(TruthFamily::T2_xmix);
    const Dataset d = generate_dataset(t, 150, r);
    const PriorConfig p = prior_1d(8);
    for (auto mode : {LikelihoodMode::conditional_likelihood, LikelihoodMode::joint_fit}) {
        ChainConfig c;
        c.mode = mode;
        c.iterations = 1500;
        c.burn_in = 500;
        c.thin = 10;
        c.seed = 99;
        const auto a = run_chain(d, p, c);
        const auto b = run_chain(d, p, c);
        CHECK(a.draws == b.draws);
        CHECK(a.log_posterior == b.log_posterior);
        CHECK(a.draws.size() == 100);
        for (std::size_t i = 0; i < a.draws.size(); ++i) {
            CHECK_NOTHROW(a.draws[i].validate());
            CHECK(std::isfinite(a.log_posterior[i]));
        }
        if (mode == LikelihoodMode::conditional_likelihood) {
            for (double rate : {a.acceptance_rates.sigma, a.acceptance_rates.mu_x, a.acceptance_rates.sticks}) {
                CHECK(rate > 0.0);
                CHECK(rate < 1.0);
            }
        } else {
            CHECK(a.acceptance_rates.sigma > 0.0);
            CHECK(a.acceptance_rates.sigma < 1.0);
        }
        c.seed = 100;
        CHECK_FALSE(run_chain(d, p, c).draws == a.draws);
    }
}

TEST_CASE("checkpoint and resume reproduce an uninterrupted chain") {
    RngStream r(7, 0);
    const Dataset d = generate_dataset(make_truth(TruthFamily::T1_sine_gaussian), 80, r);
    const PriorConfig p = prior_1d(6);
    ChainConfig c;
    c.iterations = 1400;
    c.burn_in = 400;
    c.thin = 10;
    c.seed = 5;
    const auto full = run_chain(d, p, c);
    for (std::size_t cut : {100, 400, 777}) {
        ChainRunner first(d, p, c);
        first.run_until(cut);
        const ChainCheckpoint cp = first.checkpoint();
        ChainRunner second(d, p, c, cp, first.retained());
        second.run_until(c.iterations);
        const auto resumed = second.finish();
        CAPTURE(cut);
        CHECK(resumed.draws == full.draws);
        CHECK(resumed.ess_sigma == full.ess_sigma);
        CHECK(resumed.acceptance_rates.sigma == full.acceptance_rates.sigma);
    }
}

TEST_CASE("timeout aborts a chain") {
    RngStream r(8, 0);
    const Dataset d = generate_dataset(make_truth(TruthFamily::T1_sine_gaussian), 2000, r);
    ChainConfig c;
    c.iterations = 1000000;
    c.burn_in = 10;
    c.timeout_seconds = 0.2;
    CHECK_THROWS_AS(run_chain(d, prior_1d(15), c), TimeoutError);
}

TEST_CASE("posterior mean of sigma under a well-specified two-atom model") {
    // data from the model itself: p = (0.4, 0.6), mu_x = (0.25, 0.75), mu_y = (-1, 1), sigma = 0.2
    const auto truth = make_state({0.4, 1.0}, {0.25, 0.75}, {-1.0, 1.0}, 0.2, 1, 1);
    int within = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RngStream r(seed, 3);
        Dataset d;
        while (d.size() < 500) {
            const std::size_t j = r.uniform() < 0.4 ? 0 : 1;
            const double x = truth.mu_x[j] + 0.2 * r.normal();
            if (x < 0.0 || x > 1.0) continue;  // the covariate space is the unit cube
            d.push_back(std::vector<double>{x}, std::vector<double>{truth.mu_y[j] + 0.2 * r.normal()});
        }
        ChainConfig c;
        c.iterations = 4000;
        c.burn_in = 1000;
        c.thin = 10;
        c.seed = seed;
        PriorConfig p = prior_1d(10, HyperParams{0.4, {0.0}, 1.0});
        const auto draws = run_chain(d, p, c);
        double m = 0.0;
        for (const auto& s : draws.draws) m += s.sigma;
        m /= draws.draws.size();
        CAPTURE(m);
        within += std::abs(m - 0.2) <= 0.1;
    }
    CHECK(within == 5);
}

TEST_CASE("effective sample size") {
    std::vector<double> iid(4000);
    RngStream r(9, 0);
    for (auto& v : iid) v = r.normal();
    const double e = effective_sample_size(iid);
    CHECK(e > 3000);
    CHECK(e <= 4000);
    // AR(1) with phi = 0.9: ESS about n (1 - phi) / (1 + phi)
    std::vector<double> ar(20000);
    double z = 0.0;
    for (auto& v : ar) v = z = 0.9 * z + r.normal();
    const double ea = effective_sample_size(ar);
    CHECK(ea > 20000 * 0.05 * 0.6);
    CHECK(ea < 20000 * 0.05 * 1.6);
}
