#include "condense/distributions.hpp"

#include "condense/errors.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace condense {

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(what) + " must be positive and finite");
    }
}

void require_same_dim(std::span<const double> z, std::span<const double> mean) {
    if (z.size() != mean.size()) throw DomainError("dimension mismatch between point and mean");
}

} // namespace

double log_normal_pdf(std::span<const double> z, std::span<const double> mean, double sigma) {
    require_positive(sigma, "sigma");
    require_same_dim(z, mean);
    double ss = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double d = z[k] - mean[k];
        ss += d * d;
    }
    const double k = static_cast<double>(z.size());
    return -0.5 * k * std::log(2.0 * std::numbers::pi * sigma * sigma) - ss / (2.0 * sigma * sigma);
}

double normal_pdf(std::span<const double> z, std::span<const double> mean, double sigma) {
    return std::exp(log_normal_pdf(z, mean, sigma));
}

double sample_exponential(RngStream& rng) { return -std::log(rng.uniform()); }

double sample_gamma(double shape, double rate, RngStream& rng) {
    require_positive(shape, "gamma shape");
    require_positive(rate, "gamma rate");
    if (shape < 1.0) {
        // G(a) = G(a + 1) * U^{1/a}
        const double g = sample_gamma(shape + 1.0, 1.0, rng);
        const double u = rng.uniform();
        return g * std::exp(std::log(u) / shape) / rate;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
}

double sample_beta(double a, double b, RngStream& rng) {
    require_positive(a, "beta a");
    require_positive(b, "beta b");
    if (a == 1.0) {
        // 1 - U^{1/b}, exact for the stick-breaking prior
        return -std::expm1(std::log(rng.uniform()) / b);
    }
    const double x = sample_gamma(a, 1.0, rng);
    const double y = sample_gamma(b, 1.0, rng);
    return x / (x + y);
}

double sample_inverse_gamma(double alpha, double beta, RngStream& rng) {
    require_positive(alpha, "inverse-gamma shape");
    require_positive(beta, "inverse-gamma scale");
    return beta / sample_gamma(alpha, 1.0, rng);
}

double ig_from_exponentials(unsigned alpha, double beta, RngStream& rng) {
    if (alpha == 0) throw DomainError("inverse-gamma shape must be a positive integer");
    require_positive(beta, "inverse-gamma scale");
    double sum = 0.0;
    for (unsigned r = 0; r < alpha; ++r) sum += sample_exponential(rng);
    return beta / sum;
}

double sample_truncated_normal(double mean, double sd, double lo, double hi, RngStream& rng) {
    require_positive(sd, "truncated normal sd");
    if (!(lo < hi)) throw DomainError("truncated normal needs lo < hi");
    const double a = (lo - mean) / sd;
    const double b = (hi - mean) / sd;
    const boost::math::normal_distribution<> std_normal;
    const double u = rng.uniform();
    double z;
    if (a > 0.0) {
        // upper tail: work with survival functions to keep precision
        const double qa = boost::math::cdf(boost::math::complement(std_normal, a));
        const double qb = boost::math::cdf(boost::math::complement(std_normal, b));
        const double q = qb + u * (qa - qb);
        z = q > 0.0 ? boost::math::quantile(boost::math::complement(std_normal, q)) : a;
    } else {
        const double pa = boost::math::cdf(std_normal, a);
        const double pb = boost::math::cdf(std_normal, b);
        const double p = pa + u * (pb - pa);
        z = p > 0.0 ? boost::math::quantile(std_normal, p) : b;
    }
    return std::clamp(mean + sd * z, lo, hi);
}

double normal_cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

double gamma_cdf(double x, double shape, double rate) {
    if (x <= 0.0) return 0.0;
    return boost::math::gamma_p(shape, x * rate);
}

double inverse_gamma_cdf(double x, double alpha, double beta) {
    if (x <= 0.0) return 0.0;
    return boost::math::gamma_q(alpha, beta / x);
}

double beta_cdf(double x, double a, double b) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return boost::math::ibeta(a, b, x);
}

double ks_statistic(std::span<const double> sorted_samples,
                    const std::function<double(double)>& cdf) {
    if (sorted_samples.empty()) throw DomainError("ks_statistic needs at least one sample");
    const double m = static_cast<double>(sorted_samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted_samples.size(); ++i) {
        const double f = cdf(sorted_samples[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / m - f, f - static_cast<double>(i) / m});
    }
    return std::clamp(d, 0.0, 1.0);
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_two_sample needs non-empty samples");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double kolmogorov_critical(double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1)");
    // P(K > c) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 c^2), solved by bisection
    auto tail = [](double c) {
        double s = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double term = std::exp(-2.0 * k * k * c * c);
            s += (k % 2 == 1 ? term : -term);
            if (term < 1e-18) break;
        }
        return 2.0 * s;
    };
    double lo = 0.2, hi = 5.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (tail(mid) > level) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

bool ks_passes(double statistic, std::size_t m, double level) {
    return statistic < kolmogorov_critical(level) / std::sqrt(static_cast<double>(m));
}

bool ks_two_sample_passes(double statistic, std::size_t m, std::size_t n, double level) {
    const double mm = static_cast<double>(m), nn = static_cast<double>(n);
    return statistic < kolmogorov_critical(level) * std::sqrt((mm + nn) / (mm * nn));
}

double log_sum_exp(std::span<const double> values) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : values) mx = std::max(mx, v);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double v : values) s += std::exp(v - mx);
    return mx + std::log(s);
}

} // namespace condense
