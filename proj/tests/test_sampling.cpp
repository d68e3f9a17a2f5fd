#include "condense/distributions.hpp"
#include "condense/errors.hpp"
#include "condense/rng.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace condense;

namespace {

// Independent oracle: for integer shape a, P(1/sigma > b/s) with 1/sigma ~ Gamma(a, rate b),
// i.e. F_IG(s) = exp(-b/s) sum_{k<a} (b/s)^k / k!.
double ig_cdf_integer(double s, unsigned a, double b) {
    const double z = b / s;
    double term = 1.0, sum = 0.0;
    for (unsigned k = 0; k < a; ++k) {
        if (k > 0) term *= z / k;
        sum += term;
    }
    return std::exp(-z) * sum;
}

double gamma_cdf_integer(double x, unsigned a, double rate) {
    return 1.0 - ig_cdf_integer(1.0 / (rate * x), a, 1.0);
}

template <class F>
std::vector<double> draw_sorted(std::size_t m, F&& f) {
    std::vector<double> v(m);
    for (auto& x : v) x = f();
    std::sort(v.begin(), v.end());
    return v;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

} // namespace

TEST_CASE("rng streams are reproducible and distinct") {
    RngStream a(7, 0), b(7, 0), c(7, 1);
    std::vector<std::uint64_t> va, vb, vc;
    for (int i = 0; i < 100; ++i) {
        va.push_back(a.next_u64());
        vb.push_back(b.next_u64());
        vc.push_back(c.next_u64());
    }
    CHECK(va == vb);
    // no shared prefix and no shifted overlap
    CHECK(va[0] != vc[0]);
    for (std::size_t s = 0; s < 10; ++s) CHECK(std::find(va.begin(), va.end(), vc[s]) == va.end());
}

TEST_CASE("rng uniforms lie in the open unit interval and serialize exactly") {
    RngStream r(3, 9);
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
    r.normal();  // leaves a cached spare
    const RngStream copy = RngStream::deserialize(r.serialize());
    CHECK(copy == r);
    RngStream x = copy;
    for (int i = 0; i < 10; ++i) CHECK(x.normal() == r.normal());
}

TEST_CASE("independent streams are uncorrelated") {
    RngStream a(5, 0), b(5, 1);
    const int m = 100000;
    double sab = 0.0;
    for (int i = 0; i < m; ++i) sab += (a.uniform() - 0.5) * (b.uniform() - 0.5);
    const double corr = sab / m * 12.0;
    CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(m)) * 1.5);
}

TEST_CASE("normal_pdf closed forms") {
    const std::vector<double> z0{0.0}, z1{1.0};
    CHECK(normal_pdf(z0, z0, 1.0) == doctest::Approx(0.3989423).epsilon(1e-7));
    CHECK(normal_pdf(z1, z0, 1.0) == doctest::Approx(0.2419707).epsilon(1e-7));
    const std::vector<double> m3{0.3, -1.0, 2.0};
    const double s = 0.7;
    CHECK(normal_pdf(m3, m3, s) == doctest::Approx(std::pow(2.0 * M_PI * s * s, -1.5)).epsilon(1e-14));
    CHECK_THROWS_AS(normal_pdf(z0, z0, 0.0), DomainError);
    CHECK_THROWS_AS(normal_pdf(z0, z0, -1.0), DomainError);
    CHECK_THROWS_AS(normal_pdf(z0, m3, 1.0), DomainError);
    CHECK(log_normal_pdf_1d(1.0, 0.0, 1.0) == doctest::Approx(std::log(0.2419707)).epsilon(1e-7));
}

TEST_CASE("inverse gamma sampler") {
    RngStream r(11, 0);
    const auto draws = draw_sorted(1000000, [&] { return sample_inverse_gamma(3.0, 2.0, r); });
    CHECK(std::abs(mean_of(draws) - 1.0) < 0.01);

    // reciprocals against Gamma(3, rate 2)
    std::vector<double> recip(100000);
    RngStream r2(12, 0);
    for (auto& v : recip) v = 1.0 / sample_inverse_gamma(3.0, 2.0, r2);
    std::sort(recip.begin(), recip.end());
    const double d = ks_statistic(recip, [](double x) { return gamma_cdf_integer(x, 3, 2.0); });
    CHECK(ks_passes(d, recip.size()));

    // scale family: c * IG(2, b) ~ IG(2, c b)
    RngStream r3(13, 0);
    const double b = 0.7, c = 3.5;
    const auto scaled = draw_sorted(100000, [&] { return c * sample_inverse_gamma(2.0, b, r3); });
    CHECK(ks_passes(ks_statistic(scaled, [&](double s) { return ig_cdf_integer(s, 2, c * b); }), scaled.size()));
    RngStream r4(14, 0);
    const auto direct = draw_sorted(100000, [&] { return sample_inverse_gamma(2.0, c * b, r4); });
    CHECK(ks_two_sample_passes(ks_two_sample(scaled, direct), scaled.size(), direct.size()));

    CHECK_THROWS_AS(sample_inverse_gamma(0.0, 1.0, r), DomainError);
    CHECK_THROWS_AS(sample_inverse_gamma(1.0, -1.0, r), DomainError);
}

TEST_CASE("IG from a sum of unit exponentials") {
    RngStream r(21, 0);
    const auto d1 = draw_sorted(100000, [&] { return ig_from_exponentials(1, 1.0, r); });
    CHECK(ks_passes(ks_statistic(d1, [](double s) { return ig_cdf_integer(s, 1, 1.0); }), d1.size()));

    RngStream r2(22, 0);
    double total = 0.0;
    for (int i = 0; i < 1000000; ++i) total += ig_from_exponentials(3, 2.0, r2);
    CHECK(std::abs(total / 1e6 - 1.0) < 0.01);

    for (unsigned a : {1u, 2u, 5u}) {
        RngStream ra(30 + a, 0), rb(40 + a, 0);
        const double beta = a == 5 ? 3.0 : 1.5;
        const auto x = draw_sorted(100000, [&] { return ig_from_exponentials(a, beta, ra); });
        const auto y = draw_sorted(100000, [&] { return sample_inverse_gamma(a, beta, rb); });
        CAPTURE(a);
        CHECK(ks_two_sample_passes(ks_two_sample(x, y), x.size(), y.size()));
    }
    CHECK_THROWS_AS(ig_from_exponentials(0, 1.0, r), DomainError);
}

TEST_CASE("gamma sampler for shapes below and above one") {
    for (double shape : {0.3, 1.0, 2.5, 7.0}) {
        RngStream r(50, static_cast<std::uint64_t>(shape * 10));
        const auto x = draw_sorted(100000, [&] { return sample_gamma(shape, 2.0, r); });
        CAPTURE(shape);
        CHECK(ks_passes(ks_statistic(x, [&](double v) { return gamma_cdf(v, shape, 2.0); }), x.size()));
    }
    RngStream r(1, 1);
    CHECK_THROWS_AS(sample_gamma(0.0, 1.0, r), DomainError);
}

TEST_CASE("beta sampler") {
    RngStream r(60, 0);
    const double c0 = 1.7;
    const int m = 100000;
    std::vector<double> v(m);
    for (auto& x : v) x = sample_beta(1.0, c0, r);
    const double mean = mean_of(v);
    const double var = c0 / ((1.0 + c0) * (1.0 + c0) * (2.0 + c0));
    CHECK(std::abs(mean - 1.0 / (1.0 + c0)) < 3.0 * std::sqrt(var / m));
    std::sort(v.begin(), v.end());
    // closed-form Beta(1, b) cdf 1 - (1 - x)^b
    CHECK(ks_passes(ks_statistic(v, [&](double x) { return 1.0 - std::pow(1.0 - x, c0); }), v.size()));

    RngStream r2(61, 0);
    const auto w = draw_sorted(100000, [&] { return sample_beta(4.0, 2.0, r2); });
    // Beta(4, 2) cdf 5x^4 - 4x^5
    CHECK(ks_passes(ks_statistic(w, [](double x) { return 5 * std::pow(x, 4) - 4 * std::pow(x, 5); }), w.size()));
}

TEST_CASE("truncated normal sampler") {
    RngStream r(70, 0);
    const double lo = 0.0, hi = 1.0, mu = 1.4, sd = 0.3;
    const auto x = draw_sorted(100000, [&] { return sample_truncated_normal(mu, sd, lo, hi, r); });
    CHECK(x.front() >= lo);
    CHECK(x.back() <= hi);
    const double za = std::erfc(-(lo - mu) / sd / std::sqrt(2.0)) / 2;
    const double zb = std::erfc(-(hi - mu) / sd / std::sqrt(2.0)) / 2;
    auto cdf = [&](double v) { return (std::erfc(-(v - mu) / sd / std::sqrt(2.0)) / 2 - za) / (zb - za); };
    CHECK(ks_passes(ks_statistic(x, cdf), x.size()));
    // far tail: mean 5 sd away from the window
    const double t = sample_truncated_normal(-1.5, 0.3, 0.0, 1.0, r);
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
}

TEST_CASE("ks statistic edge cases") {
    auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
    const std::vector<double> one{0.5};
    CHECK(ks_statistic(one, cdf) == doctest::Approx(0.5));
    const std::vector<double> below{-3.0, -2.0, -1.0};
    CHECK(ks_statistic(below, cdf) == doctest::Approx(1.0));
    CHECK_THROWS_AS(ks_statistic(std::vector<double>{}, cdf), DomainError);
    CHECK(kolmogorov_critical(0.01) == doctest::Approx(1.6276).epsilon(1e-4));
    CHECK(kolmogorov_critical(0.05) == doctest::Approx(1.3581).epsilon(1e-4));

    RngStream r(80, 0);
    const auto u = draw_sorted(100000, [&] { return r.uniform(); });
    CHECK(ks_statistic(u, cdf) < 1.63 / std::sqrt(1e5));
}

TEST_CASE("log_sum_exp is stable") {
    const std::vector<double> big{1000.0, 1000.0};
    CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)));
    const std::vector<double> neg{-1e308, -std::numeric_limits<double>::infinity()};
    CHECK(log_sum_exp(neg) == -1e308);
    const std::vector<double> none{-std::numeric_limits<double>::infinity()};
    CHECK(std::isinf(log_sum_exp(none)));
}
